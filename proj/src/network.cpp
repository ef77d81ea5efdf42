#include "ahi/network.hpp"

#include "ahi/error.hpp"
#include "ahi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ahi {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix xavier(Rng& rng, int rows, int cols) {
    const double s = std::sqrt(6.0 / (rows + cols));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-s, s);
    return m;
}

void check_classifier_config(const ClassifierConfig& c) {
    if (c.input_width < 1) throw ConfigError("classifier: input_width must be >= 1");
    if (c.timesteps < 1) throw ConfigError("classifier: timesteps must be >= 1");
    if (c.lstm_hidden.empty()) throw ConfigError("classifier: need at least one LSTM layer");
    for (int h : c.lstm_hidden)
        if (h < 1) throw ConfigError("classifier: hidden sizes must be >= 1");
    if (c.dense_relu_width && *c.dense_relu_width < 1)
        throw ConfigError("classifier: dense width must be >= 1");
    if (c.n_classes != 5) throw ConfigError("classifier: n_classes is fixed at 5 (H1..H5)");
}

} // namespace

SequenceClassifier init_params(const ClassifierConfig& config, std::uint64_t seed) {
    check_classifier_config(config);
    Rng rng(seed);
    SequenceClassifier model;
    model.config = config;
    model.config.seed = seed;

    int in = config.input_width;
    for (int h : config.lstm_hidden) {
        LstmLayerParams layer;
        layer.w_input = xavier(rng, h, in);
        layer.w_forget = xavier(rng, h, in);
        layer.w_output = xavier(rng, h, in);
        layer.w_candidate = xavier(rng, h, in);
        layer.u_input = xavier(rng, h, h);
        layer.u_forget = xavier(rng, h, h);
        layer.u_output = xavier(rng, h, h);
        layer.u_candidate = xavier(rng, h, h);
        layer.b_input.assign(static_cast<std::size_t>(h), 0.0);
        layer.b_forget.assign(static_cast<std::size_t>(h), 1.0);  // open forget gates at init
        layer.b_output.assign(static_cast<std::size_t>(h), 0.0);
        layer.b_candidate.assign(static_cast<std::size_t>(h), 0.0);
        model.layers.push_back(std::move(layer));
        in = h;
    }
    if (config.dense_relu_width) {
        DenseLayer dense;
        dense.w = xavier(rng, *config.dense_relu_width, in);
        dense.b.assign(static_cast<std::size_t>(*config.dense_relu_width), 0.0);
        model.dense = std::move(dense);
        in = *config.dense_relu_width;
    }
    model.output.w = xavier(rng, config.n_classes, in);
    model.output.b.assign(static_cast<std::size_t>(config.n_classes), 0.0);
    return model;
}

FnnBaseline init_fnn(const FnnConfig& config, std::uint64_t seed) {
    if (config.input_width < 1) throw ConfigError("fnn: input_width must be >= 1");
    if (config.n_classes != 5) throw ConfigError("fnn: n_classes is fixed at 5 (H1..H5)");
    for (int h : config.hidden_widths)
        if (h < 1) throw ConfigError("fnn: hidden widths must be >= 1");

    Rng rng(seed);
    FnnBaseline model;
    model.config = config;
    model.config.seed = seed;
    int in = config.input_width;
    for (int h : config.hidden_widths) {
        DenseLayer layer;
        layer.w = xavier(rng, h, in);
        layer.b.assign(static_cast<std::size_t>(h), 0.0);
        model.hidden.push_back(std::move(layer));
        in = h;
    }
    model.output.w = xavier(rng, config.n_classes, in);
    model.output.b.assign(static_cast<std::size_t>(config.n_classes), 0.0);
    return model;
}

std::vector<double> softmax(const std::vector<double>& z) {
    if (z.empty()) throw std::invalid_argument("softmax: empty input");
    const double m = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - m);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

double cross_entropy(const std::vector<double>& probabilities, int label) {
    if (label < 0 || label >= static_cast<int>(probabilities.size()))
        throw std::invalid_argument("cross_entropy: label out of range");
    return -std::log(std::max(probabilities[static_cast<std::size_t>(label)], kProbFloor));
}

int argmax_lowest(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("argmax_lowest: empty input");
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
    return best;
}

std::vector<double> forward(const SequenceClassifier& model, const double* sequence,
                            ForwardCache* cache) {
    const int t_len = model.config.timesteps;
    const int d = model.config.input_width;
    const int n_layers = static_cast<int>(model.layers.size());

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc = ForwardCache{};
    cc.input.assign(sequence, sequence + static_cast<std::size_t>(t_len) * d);
    cc.layers.resize(static_cast<std::size_t>(n_layers));
    for (int l = 0; l < n_layers; ++l) {
        auto& lc = cc.layers[static_cast<std::size_t>(l)];
        const std::size_t tt = static_cast<std::size_t>(t_len);
        lc.gate_i.resize(tt);
        lc.gate_f.resize(tt);
        lc.gate_o.resize(tt);
        lc.gate_g.resize(tt);
        lc.cell.resize(tt);
        lc.cell_tanh.resize(tt);
        lc.hidden.resize(tt);
    }

    for (int t = 0; t < t_len; ++t) {
        const double* x = cc.input.data() + static_cast<std::size_t>(t) * d;
        int x_len = d;
        for (int l = 0; l < n_layers; ++l) {
            const LstmLayerParams& p = model.layers[static_cast<std::size_t>(l)];
            auto& lc = cc.layers[static_cast<std::size_t>(l)];
            const int h = p.hidden_size();
            if (p.input_size() != x_len)
                throw std::invalid_argument("forward: layer input width mismatch");

            const std::vector<double>* h_prev =
                t > 0 ? &lc.hidden[static_cast<std::size_t>(t - 1)] : nullptr;
            const std::vector<double>* c_prev =
                t > 0 ? &lc.cell[static_cast<std::size_t>(t - 1)] : nullptr;

            auto& gi = lc.gate_i[static_cast<std::size_t>(t)];
            auto& gf = lc.gate_f[static_cast<std::size_t>(t)];
            auto& go = lc.gate_o[static_cast<std::size_t>(t)];
            auto& gg = lc.gate_g[static_cast<std::size_t>(t)];
            auto& ct = lc.cell[static_cast<std::size_t>(t)];
            auto& cth = lc.cell_tanh[static_cast<std::size_t>(t)];
            auto& ht = lc.hidden[static_cast<std::size_t>(t)];
            gi.resize(static_cast<std::size_t>(h));
            gf.resize(static_cast<std::size_t>(h));
            go.resize(static_cast<std::size_t>(h));
            gg.resize(static_cast<std::size_t>(h));
            ct.resize(static_cast<std::size_t>(h));
            cth.resize(static_cast<std::size_t>(h));
            ht.resize(static_cast<std::size_t>(h));

            for (int k = 0; k < h; ++k) {
                double zi = p.b_input[static_cast<std::size_t>(k)];
                double zf = p.b_forget[static_cast<std::size_t>(k)];
                double zo = p.b_output[static_cast<std::size_t>(k)];
                double zg = p.b_candidate[static_cast<std::size_t>(k)];
                for (int j = 0; j < x_len; ++j) {
                    const double xj = x[j];
                    zi += p.w_input(k, j) * xj;
                    zf += p.w_forget(k, j) * xj;
                    zo += p.w_output(k, j) * xj;
                    zg += p.w_candidate(k, j) * xj;
                }
                if (h_prev) {
                    for (int j = 0; j < h; ++j) {
                        const double hj = (*h_prev)[static_cast<std::size_t>(j)];
                        zi += p.u_input(k, j) * hj;
                        zf += p.u_forget(k, j) * hj;
                        zo += p.u_output(k, j) * hj;
                        zg += p.u_candidate(k, j) * hj;
                    }
                }
                const double i_k = sigmoid(zi);
                const double f_k = sigmoid(zf);
                const double o_k = sigmoid(zo);
                const double g_k = std::tanh(zg);
                const double c_k =
                    (c_prev ? f_k * (*c_prev)[static_cast<std::size_t>(k)] : 0.0) + i_k * g_k;
                gi[static_cast<std::size_t>(k)] = i_k;
                gf[static_cast<std::size_t>(k)] = f_k;
                go[static_cast<std::size_t>(k)] = o_k;
                gg[static_cast<std::size_t>(k)] = g_k;
                ct[static_cast<std::size_t>(k)] = c_k;
                cth[static_cast<std::size_t>(k)] = std::tanh(c_k);
                ht[static_cast<std::size_t>(k)] = o_k * cth[static_cast<std::size_t>(k)];
            }
            x = ht.data();
            x_len = h;
        }
    }

    const std::vector<double>& h_last =
        cc.layers.back().hidden[static_cast<std::size_t>(t_len - 1)];
    const std::vector<double>* head_in = &h_last;
    if (model.dense) {
        cc.dense_pre = matvec(model.dense->w, h_last);
        for (std::size_t k = 0; k < cc.dense_pre.size(); ++k) cc.dense_pre[k] += model.dense->b[k];
        cc.dense_out = cc.dense_pre;
        for (double& v : cc.dense_out) v = std::max(0.0, v);
        head_in = &cc.dense_out;
    }
    cc.logits = matvec(model.output.w, *head_in);
    for (std::size_t k = 0; k < cc.logits.size(); ++k) cc.logits[k] += model.output.b[k];
    cc.probs = softmax(cc.logits);
    return cc.probs;
}

Gradients zero_gradients(const SequenceClassifier& model) {
    Gradients g;
    for (const auto& p : model.layers) {
        LstmLayerParams z;
        const int h = p.hidden_size();
        const int d = p.input_size();
        z.w_input = Matrix(h, d);
        z.w_forget = Matrix(h, d);
        z.w_output = Matrix(h, d);
        z.w_candidate = Matrix(h, d);
        z.u_input = Matrix(h, h);
        z.u_forget = Matrix(h, h);
        z.u_output = Matrix(h, h);
        z.u_candidate = Matrix(h, h);
        z.b_input.assign(static_cast<std::size_t>(h), 0.0);
        z.b_forget.assign(static_cast<std::size_t>(h), 0.0);
        z.b_output.assign(static_cast<std::size_t>(h), 0.0);
        z.b_candidate.assign(static_cast<std::size_t>(h), 0.0);
        g.layers.push_back(std::move(z));
    }
    if (model.dense) {
        DenseLayer z;
        z.w = Matrix(model.dense->w.rows(), model.dense->w.cols());
        z.b.assign(model.dense->b.size(), 0.0);
        g.dense = std::move(z);
    }
    g.output.w = Matrix(model.output.w.rows(), model.output.w.cols());
    g.output.b.assign(model.output.b.size(), 0.0);
    return g;
}

FnnGradients zero_gradients(const FnnBaseline& model) {
    FnnGradients g;
    for (const auto& layer : model.hidden) {
        DenseLayer z;
        z.w = Matrix(layer.w.rows(), layer.w.cols());
        z.b.assign(layer.b.size(), 0.0);
        g.hidden.push_back(std::move(z));
    }
    g.output.w = Matrix(model.output.w.rows(), model.output.w.cols());
    g.output.b.assign(model.output.b.size(), 0.0);
    return g;
}

Gradients backward(const SequenceClassifier& model, const ForwardCache& cache, int label) {
    const int t_len = model.config.timesteps;
    const int d = model.config.input_width;
    const int n_layers = static_cast<int>(model.layers.size());
    if (cache.layers.size() != static_cast<std::size_t>(n_layers) ||
        cache.probs.size() != static_cast<std::size_t>(model.config.n_classes))
        throw std::invalid_argument("backward: cache does not match model");
    if (label < 0 || label >= model.config.n_classes)
        throw std::invalid_argument("backward: label out of range");

    Gradients grads = zero_gradients(model);
    grads.loss = cross_entropy(cache.probs, label);

    // dL/dlogits = p - onehot; flat where the loss is floored
    std::vector<double> dlogits(cache.probs);
    if (cache.probs[static_cast<std::size_t>(label)] <= kProbFloor) {
        std::fill(dlogits.begin(), dlogits.end(), 0.0);
    } else {
        dlogits[static_cast<std::size_t>(label)] -= 1.0;
    }

    const std::vector<double>& h_last =
        cache.layers.back().hidden[static_cast<std::size_t>(t_len - 1)];
    const std::vector<double>& head_in = model.dense ? cache.dense_out : h_last;

    for (int r = 0; r < model.output.w.rows(); ++r) {
        grads.output.b[static_cast<std::size_t>(r)] += dlogits[static_cast<std::size_t>(r)];
        for (int c = 0; c < model.output.w.cols(); ++c)
            grads.output.w(r, c) += dlogits[static_cast<std::size_t>(r)] * head_in[static_cast<std::size_t>(c)];
    }
    std::vector<double> d_head = matvec_transposed(model.output.w, dlogits);

    std::vector<double> dh_last;
    if (model.dense) {
        std::vector<double> d_pre(d_head.size());
        for (std::size_t k = 0; k < d_head.size(); ++k)
            d_pre[k] = cache.dense_pre[k] > 0.0 ? d_head[k] : 0.0;
        for (int r = 0; r < model.dense->w.rows(); ++r) {
            grads.dense->b[static_cast<std::size_t>(r)] += d_pre[static_cast<std::size_t>(r)];
            for (int c = 0; c < model.dense->w.cols(); ++c)
                grads.dense->w(r, c) += d_pre[static_cast<std::size_t>(r)] * h_last[static_cast<std::size_t>(c)];
        }
        dh_last = matvec_transposed(model.dense->w, d_pre);
    } else {
        dh_last = std::move(d_head);
    }

    // dh_above[t]: gradient flowing into layer l's hidden state at step t
    // from the layer above (or the head, for the top layer).
    std::vector<std::vector<double>> dh_above(static_cast<std::size_t>(t_len));
    {
        const int h_top = model.layers.back().hidden_size();
        for (int t = 0; t < t_len; ++t)
            dh_above[static_cast<std::size_t>(t)].assign(static_cast<std::size_t>(h_top), 0.0);
        dh_above[static_cast<std::size_t>(t_len - 1)] = dh_last;
    }

    for (int l = n_layers - 1; l >= 0; --l) {
        const LstmLayerParams& p = model.layers[static_cast<std::size_t>(l)];
        const LstmLayerCache& lc = cache.layers[static_cast<std::size_t>(l)];
        LstmLayerParams& gl = grads.layers[static_cast<std::size_t>(l)];
        const int h = p.hidden_size();
        const int in_w = p.input_size();

        std::vector<std::vector<double>> dx(static_cast<std::size_t>(t_len));
        for (auto& v : dx) v.assign(static_cast<std::size_t>(in_w), 0.0);

        std::vector<double> dh_next(static_cast<std::size_t>(h), 0.0);
        std::vector<double> dc_next(static_cast<std::size_t>(h), 0.0);

        for (int t = t_len - 1; t >= 0; --t) {
            const auto& gi = lc.gate_i[static_cast<std::size_t>(t)];
            const auto& gf = lc.gate_f[static_cast<std::size_t>(t)];
            const auto& go = lc.gate_o[static_cast<std::size_t>(t)];
            const auto& gg = lc.gate_g[static_cast<std::size_t>(t)];
            const auto& cth = lc.cell_tanh[static_cast<std::size_t>(t)];
            const std::vector<double>* c_prev =
                t > 0 ? &lc.cell[static_cast<std::size_t>(t - 1)] : nullptr;
            const std::vector<double>* h_prev =
                t > 0 ? &lc.hidden[static_cast<std::size_t>(t - 1)] : nullptr;
            const double* x = l == 0 ? cache.input.data() + static_cast<std::size_t>(t) * d
                                     : cache.layers[static_cast<std::size_t>(l - 1)]
                                           .hidden[static_cast<std::size_t>(t)]
                                           .data();

            std::vector<double> di_pre(static_cast<std::size_t>(h));
            std::vector<double> df_pre(static_cast<std::size_t>(h));
            std::vector<double> do_pre(static_cast<std::size_t>(h));
            std::vector<double> dg_pre(static_cast<std::size_t>(h));

            for (int k = 0; k < h; ++k) {
                const std::size_t ks = static_cast<std::size_t>(k);
                const double dh = dh_above[static_cast<std::size_t>(t)][ks] + dh_next[ks];
                const double dc = dh * go[ks] * (1.0 - cth[ks] * cth[ks]) + dc_next[ks];
                do_pre[ks] = dh * cth[ks] * go[ks] * (1.0 - go[ks]);
                di_pre[ks] = dc * gg[ks] * gi[ks] * (1.0 - gi[ks]);
                dg_pre[ks] = dc * gi[ks] * (1.0 - gg[ks] * gg[ks]);
                df_pre[ks] = c_prev ? dc * (*c_prev)[ks] * gf[ks] * (1.0 - gf[ks]) : 0.0;
                dc_next[ks] = dc * gf[ks];
            }

            std::fill(dh_next.begin(), dh_next.end(), 0.0);
            for (int k = 0; k < h; ++k) {
                const std::size_t ks = static_cast<std::size_t>(k);
                gl.b_input[ks] += di_pre[ks];
                gl.b_forget[ks] += df_pre[ks];
                gl.b_output[ks] += do_pre[ks];
                gl.b_candidate[ks] += dg_pre[ks];
                for (int j = 0; j < in_w; ++j) {
                    gl.w_input(k, j) += di_pre[ks] * x[j];
                    gl.w_forget(k, j) += df_pre[ks] * x[j];
                    gl.w_output(k, j) += do_pre[ks] * x[j];
                    gl.w_candidate(k, j) += dg_pre[ks] * x[j];
                    dx[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] +=
                        p.w_input(k, j) * di_pre[ks] + p.w_forget(k, j) * df_pre[ks] +
                        p.w_output(k, j) * do_pre[ks] + p.w_candidate(k, j) * dg_pre[ks];
                }
                if (h_prev) {
                    for (int j = 0; j < h; ++j) {
                        const std::size_t js = static_cast<std::size_t>(j);
                        gl.u_input(k, j) += di_pre[ks] * (*h_prev)[js];
                        gl.u_forget(k, j) += df_pre[ks] * (*h_prev)[js];
                        gl.u_output(k, j) += do_pre[ks] * (*h_prev)[js];
                        gl.u_candidate(k, j) += dg_pre[ks] * (*h_prev)[js];
                        dh_next[js] += p.u_input(k, j) * di_pre[ks] +
                                       p.u_forget(k, j) * df_pre[ks] +
                                       p.u_output(k, j) * do_pre[ks] +
                                       p.u_candidate(k, j) * dg_pre[ks];
                    }
                }
            }
        }
        if (l > 0) dh_above = std::move(dx);
    }
    return grads;
}

std::vector<double> forward_fnn(const FnnBaseline& model, const double* features, FnnCache* cache) {
    FnnCache local;
    FnnCache& cc = cache ? *cache : local;
    cc = FnnCache{};
    cc.input.assign(features, features + model.config.input_width);

    std::vector<double> x = cc.input;
    for (const auto& layer : model.hidden) {
        std::vector<double> pre = matvec(layer.w, x);
        for (std::size_t k = 0; k < pre.size(); ++k) pre[k] += layer.b[k];
        std::vector<double> post = pre;
        for (double& v : post) v = std::max(0.0, v);
        cc.pre.push_back(std::move(pre));
        cc.post.push_back(post);
        x = std::move(post);
    }
    cc.logits = matvec(model.output.w, x);
    for (std::size_t k = 0; k < cc.logits.size(); ++k) cc.logits[k] += model.output.b[k];
    cc.probs = softmax(cc.logits);
    return cc.probs;
}

FnnGradients backward_fnn(const FnnBaseline& model, const FnnCache& cache, int label) {
    if (cache.probs.size() != static_cast<std::size_t>(model.config.n_classes))
        throw std::invalid_argument("backward_fnn: cache does not match model");
    if (label < 0 || label >= model.config.n_classes)
        throw std::invalid_argument("backward_fnn: label out of range");

    FnnGradients grads = zero_gradients(model);
    grads.loss = cross_entropy(cache.probs, label);

    std::vector<double> dlogits(cache.probs);
    if (cache.probs[static_cast<std::size_t>(label)] <= kProbFloor) {
        std::fill(dlogits.begin(), dlogits.end(), 0.0);
    } else {
        dlogits[static_cast<std::size_t>(label)] -= 1.0;
    }

    const std::vector<double>& top =
        model.hidden.empty() ? cache.input : cache.post.back();
    for (int r = 0; r < model.output.w.rows(); ++r) {
        grads.output.b[static_cast<std::size_t>(r)] += dlogits[static_cast<std::size_t>(r)];
        for (int c = 0; c < model.output.w.cols(); ++c)
            grads.output.w(r, c) += dlogits[static_cast<std::size_t>(r)] * top[static_cast<std::size_t>(c)];
    }
    std::vector<double> d_out = matvec_transposed(model.output.w, dlogits);

    for (int l = static_cast<int>(model.hidden.size()) - 1; l >= 0; --l) {
        const auto& layer = model.hidden[static_cast<std::size_t>(l)];
        const auto& pre = cache.pre[static_cast<std::size_t>(l)];
        const std::vector<double>& below =
            l == 0 ? cache.input : cache.post[static_cast<std::size_t>(l - 1)];
        std::vector<double> d_pre(d_out.size());
        for (std::size_t k = 0; k < d_out.size(); ++k)
            d_pre[k] = pre[k] > 0.0 ? d_out[k] : 0.0;
        auto& gl = grads.hidden[static_cast<std::size_t>(l)];
        for (int r = 0; r < layer.w.rows(); ++r) {
            gl.b[static_cast<std::size_t>(r)] += d_pre[static_cast<std::size_t>(r)];
            for (int c = 0; c < layer.w.cols(); ++c)
                gl.w(r, c) += d_pre[static_cast<std::size_t>(r)] * below[static_cast<std::size_t>(c)];
        }
        d_out = matvec_transposed(layer.w, d_pre);
    }
    return grads;
}

namespace {

void push_matrix(std::vector<std::pair<double*, std::size_t>>& blocks, Matrix& m) {
    blocks.emplace_back(m.data().data(), m.data().size());
}
void push_vector(std::vector<std::pair<double*, std::size_t>>& blocks, std::vector<double>& v) {
    blocks.emplace_back(v.data(), v.size());
}

template <typename LayersT, typename DenseOptT>
std::vector<std::pair<double*, std::size_t>> lstm_blocks(LayersT& layers, DenseOptT& dense,
                                                         DenseLayer& output) {
    std::vector<std::pair<double*, std::size_t>> blocks;
    for (auto& l : layers) {
        push_matrix(blocks, l.w_input);
        push_matrix(blocks, l.w_forget);
        push_matrix(blocks, l.w_output);
        push_matrix(blocks, l.w_candidate);
        push_matrix(blocks, l.u_input);
        push_matrix(blocks, l.u_forget);
        push_matrix(blocks, l.u_output);
        push_matrix(blocks, l.u_candidate);
        push_vector(blocks, l.b_input);
        push_vector(blocks, l.b_forget);
        push_vector(blocks, l.b_output);
        push_vector(blocks, l.b_candidate);
    }
    if (dense) {
        push_matrix(blocks, dense->w);
        push_vector(blocks, dense->b);
    }
    push_matrix(blocks, output.w);
    push_vector(blocks, output.b);
    return blocks;
}

template <typename HiddenT>
std::vector<std::pair<double*, std::size_t>> fnn_blocks(HiddenT& hidden, DenseLayer& output) {
    std::vector<std::pair<double*, std::size_t>> blocks;
    for (auto& l : hidden) {
        push_matrix(blocks, l.w);
        push_vector(blocks, l.b);
    }
    push_matrix(blocks, output.w);
    push_vector(blocks, output.b);
    return blocks;
}

} // namespace

std::vector<std::pair<double*, std::size_t>> parameter_blocks(SequenceClassifier& model) {
    return lstm_blocks(model.layers, model.dense, model.output);
}
std::vector<std::pair<double*, std::size_t>> parameter_blocks(Gradients& grads) {
    return lstm_blocks(grads.layers, grads.dense, grads.output);
}
std::vector<std::pair<double*, std::size_t>> parameter_blocks(FnnBaseline& model) {
    return fnn_blocks(model.hidden, model.output);
}
std::vector<std::pair<double*, std::size_t>> parameter_blocks(FnnGradients& grads) {
    return fnn_blocks(grads.hidden, grads.output);
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(j.at(0).size());
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    return m;
}

nlohmann::json dense_to_json(const DenseLayer& d) {
    return nlohmann::json{{"w", matrix_to_json(d.w)}, {"b", d.b}};
}

DenseLayer dense_from_json(const nlohmann::json& j) {
    DenseLayer d;
    d.w = matrix_from_json(j.at("w"));
    d.b = j.at("b").get<std::vector<double>>();
    return d;
}

} // namespace

nlohmann::json SequenceClassifier::to_json() const {
    nlohmann::json layers_json = nlohmann::json::array();
    for (const auto& l : layers) {
        layers_json.push_back(nlohmann::json{{"w_input", matrix_to_json(l.w_input)},
                                             {"w_forget", matrix_to_json(l.w_forget)},
                                             {"w_output", matrix_to_json(l.w_output)},
                                             {"w_candidate", matrix_to_json(l.w_candidate)},
                                             {"u_input", matrix_to_json(l.u_input)},
                                             {"u_forget", matrix_to_json(l.u_forget)},
                                             {"u_output", matrix_to_json(l.u_output)},
                                             {"u_candidate", matrix_to_json(l.u_candidate)},
                                             {"b_input", l.b_input},
                                             {"b_forget", l.b_forget},
                                             {"b_output", l.b_output},
                                             {"b_candidate", l.b_candidate}});
    }
    nlohmann::json cfg{{"input_width", config.input_width},
                       {"timesteps", config.timesteps},
                       {"lstm_hidden", config.lstm_hidden},
                       {"n_classes", config.n_classes},
                       {"seed", config.seed}};
    cfg["dense_relu_width"] =
        config.dense_relu_width ? nlohmann::json(*config.dense_relu_width) : nlohmann::json(nullptr);
    return nlohmann::json{{"family", "lstm"},
                          {"config", std::move(cfg)},
                          {"lstm_layers", std::move(layers_json)},
                          {"dense", dense ? dense_to_json(*dense) : nlohmann::json(nullptr)},
                          {"output", dense_to_json(output)},
                          {"pipeline_hash", pipeline_hash}};
}

SequenceClassifier SequenceClassifier::from_json(const nlohmann::json& j) {
    SequenceClassifier model;
    const auto& cfg = j.at("config");
    model.config.input_width = cfg.at("input_width").get<int>();
    model.config.timesteps = cfg.at("timesteps").get<int>();
    model.config.lstm_hidden = cfg.at("lstm_hidden").get<std::vector<int>>();
    model.config.n_classes = cfg.at("n_classes").get<int>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    if (!cfg.at("dense_relu_width").is_null())
        model.config.dense_relu_width = cfg.at("dense_relu_width").get<int>();
    for (const auto& lj : j.at("lstm_layers")) {
        LstmLayerParams l;
        l.w_input = matrix_from_json(lj.at("w_input"));
        l.w_forget = matrix_from_json(lj.at("w_forget"));
        l.w_output = matrix_from_json(lj.at("w_output"));
        l.w_candidate = matrix_from_json(lj.at("w_candidate"));
        l.u_input = matrix_from_json(lj.at("u_input"));
        l.u_forget = matrix_from_json(lj.at("u_forget"));
        l.u_output = matrix_from_json(lj.at("u_output"));
        l.u_candidate = matrix_from_json(lj.at("u_candidate"));
        l.b_input = lj.at("b_input").get<std::vector<double>>();
        l.b_forget = lj.at("b_forget").get<std::vector<double>>();
        l.b_output = lj.at("b_output").get<std::vector<double>>();
        l.b_candidate = lj.at("b_candidate").get<std::vector<double>>();
        model.layers.push_back(std::move(l));
    }
    if (!j.at("dense").is_null()) model.dense = dense_from_json(j.at("dense"));
    model.output = dense_from_json(j.at("output"));
    model.pipeline_hash = j.at("pipeline_hash").get<std::string>();
    return model;
}

nlohmann::json FnnBaseline::to_json() const {
    nlohmann::json hidden_json = nlohmann::json::array();
    for (const auto& l : hidden) hidden_json.push_back(dense_to_json(l));
    return nlohmann::json{{"family", "fnn"},
                          {"config",
                           nlohmann::json{{"input_width", config.input_width},
                                          {"hidden_widths", config.hidden_widths},
                                          {"n_classes", config.n_classes},
                                          {"seed", config.seed}}},
                          {"hidden", std::move(hidden_json)},
                          {"output", dense_to_json(output)},
                          {"pipeline_hash", pipeline_hash}};
}

FnnBaseline FnnBaseline::from_json(const nlohmann::json& j) {
    FnnBaseline model;
    const auto& cfg = j.at("config");
    model.config.input_width = cfg.at("input_width").get<int>();
    model.config.hidden_widths = cfg.at("hidden_widths").get<std::vector<int>>();
    model.config.n_classes = cfg.at("n_classes").get<int>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    for (const auto& lj : j.at("hidden")) model.hidden.push_back(dense_from_json(lj));
    model.output = dense_from_json(j.at("output"));
    model.pipeline_hash = j.at("pipeline_hash").get<std::string>();
    return model;
}

void save_model(const std::string& path, const AnyModel& model) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    const nlohmann::json j = std::visit([](const auto& m) { return m.to_json(); }, model);
    out << j.dump(2) << "\n";
}

AnyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file " + path + ": " + e.what());
    }
    const std::string family = j.at("family").get<std::string>();
    if (family == "lstm") return SequenceClassifier::from_json(j);
    if (family == "fnn") return FnnBaseline::from_json(j);
    throw DataError("model file " + path + ": unknown family \"" + family + "\"");
}

} // namespace ahi
