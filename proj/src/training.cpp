#include "ahi/training.hpp"

#include "ahi/error.hpp"
#include "ahi/metrics.hpp"
#include "ahi/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

namespace ahi {

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "sgd") return Optimizer::sgd;
    if (name == "adam") return Optimizer::adam;
    throw ConfigError("unknown optimizer \"" + name + "\" (expected sgd or adam)");
}

std::string optimizer_name(Optimizer opt) {
    return opt == Optimizer::sgd ? "sgd" : "adam";
}

nlohmann::json TrainedModel::history_json() const {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : history) {
        nlohmann::json j{{"epoch", e.epoch}, {"train_loss", e.train_loss}};
        j["val_loss"] = e.val_loss ? nlohmann::json(*e.val_loss) : nlohmann::json(nullptr);
        j["val_mp"] = e.val_mp ? nlohmann::json(*e.val_mp) : nlohmann::json(nullptr);
        epochs.push_back(std::move(j));
    }
    return nlohmann::json{{"epochs", std::move(epochs)}, {"chosen_epoch", chosen_epoch}};
}

namespace {

void check_train_config(const TrainConfig& cfg) {
    if (cfg.learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.validation_fraction < 0 || cfg.validation_fraction >= 0.5)
        throw ConfigError("validation_fraction must be in [0, 0.5)");
    if (cfg.early_stop_patience < 0) throw ConfigError("early_stop_patience must be >= 0");
}

} // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_carve(
    const std::vector<int>& labels, double fraction, std::uint64_t split_seed) {
    std::vector<std::size_t> train_idx, val_idx;
    if (fraction <= 0.0) {
        train_idx.resize(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) train_idx[i] = i;
        return {train_idx, val_idx};
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    Rng rng(split_seed);
    std::vector<bool> in_val(labels.size(), false);
    for (auto& [level, idx] : by_class) {
        const auto want = static_cast<std::size_t>(
            std::llround(static_cast<double>(idx.size()) * fraction));
        const auto take = std::min(want, idx.size() > 0 ? idx.size() - 1 : std::size_t{0});
        std::vector<std::size_t> pool = idx;
        rng.shuffle(pool);
        for (std::size_t k = 0; k < take; ++k) in_val[pool[k]] = true;
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        (in_val[i] ? val_idx : train_idx).push_back(i);
    if (train_idx.empty()) throw DataError("validation carve-out left no training samples");
    return {train_idx, val_idx};
}

namespace {

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

template <typename Blocks>
double global_norm(const Blocks& blocks) {
    double acc = 0.0;
    for (const auto& [ptr, n] : blocks)
        for (std::size_t i = 0; i < n; ++i) acc += ptr[i] * ptr[i];
    return std::sqrt(acc);
}

// Shared trainer for both model families. Model must provide forward/backward
// through the accessor functors below.
template <typename Model, typename Grad, typename ForwardFn, typename BackwardFn, typename InitFn>
TrainedModel fit(const SequenceTensor& tensor, const std::vector<int>& labels,
                 const TrainConfig& cfg, InitFn init, ForwardFn fwd, BackwardFn bwd) {
    check_train_config(cfg);
    if (tensor.n_assets == 0) throw DataError("train: empty tensor");
    if (labels.size() != static_cast<std::size_t>(tensor.n_assets))
        throw DataError("train: tensor and labels are misaligned");
    for (int level : labels)
        if (level < 1 || level > 5) throw DataError("train: health level out of range [1,5]");

    auto [train_idx, val_idx] = stratified_carve(labels, cfg.validation_fraction, cfg.split_seed);

    Model model = init();
    auto params = parameter_blocks(model);
    std::size_t n_params = 0;
    for (const auto& [ptr, n] : params) n_params += n;

    AdamState adam;
    if (cfg.optimizer == Optimizer::adam) {
        adam.m.assign(n_params, 0.0);
        adam.v.assign(n_params, 0.0);
    }

    const auto mean_loss = [&](const std::vector<std::size_t>& idx) {
        double acc = 0.0;
        for (std::size_t i : idx) acc += cross_entropy(fwd(model, static_cast<int>(i)), labels[i] - 1);
        return idx.empty() ? 0.0 : acc / static_cast<double>(idx.size());
    };
    const auto val_macro_precision = [&]() {
        ConfusionMatrix cm(5);
        for (std::size_t i : val_idx) {
            const int predicted = argmax_lowest(fwd(model, static_cast<int>(i))) + 1;
            cm.add(labels[i], predicted);
        }
        return macro(cm).mp;
    };

    Rng shuffle_rng(cfg.seed);
    TrainedModel result;
    Model best = model;
    double best_mp = -1.0;
    int best_epoch = 0;
    int since_best = 0;

    std::vector<std::size_t> order = train_idx;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            Grad batch = zero_gradients(model);
            auto batch_blocks = parameter_blocks(batch);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = order[k];
                Grad g = bwd(model, static_cast<int>(i), labels[i] - 1);
                batch_loss += g.loss;
                auto g_blocks = parameter_blocks(g);
                for (std::size_t b = 0; b < batch_blocks.size(); ++b)
                    for (std::size_t e = 0; e < batch_blocks[b].second; ++e)
                        batch_blocks[b].first[e] += g_blocks[b].first[e];
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            if (!std::isfinite(batch_loss))
                throw NumericError("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch) + ", batch starting at sample " +
                                   std::to_string(start));
            for (auto& [ptr, n] : batch_blocks)
                for (std::size_t e = 0; e < n; ++e) ptr[e] *= scale;

            if (cfg.grad_clip_norm > 0) {
                const double norm = global_norm(batch_blocks);
                if (norm > cfg.grad_clip_norm) {
                    const double shrink = cfg.grad_clip_norm / norm;
                    for (auto& [ptr, n] : batch_blocks)
                        for (std::size_t e = 0; e < n; ++e) ptr[e] *= shrink;
                }
            }

            if (cfg.optimizer == Optimizer::sgd) {
                std::size_t offset = 0;
                for (std::size_t b = 0; b < params.size(); ++b) {
                    for (std::size_t e = 0; e < params[b].second; ++e)
                        params[b].first[e] -= cfg.learning_rate * batch_blocks[b].first[e];
                    offset += params[b].second;
                }
            } else {
                adam.t++;
                const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
                const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.t));
                const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.t));
                std::size_t offset = 0;
                for (std::size_t b = 0; b < params.size(); ++b) {
                    for (std::size_t e = 0; e < params[b].second; ++e) {
                        const double g = batch_blocks[b].first[e];
                        double& m = adam.m[offset + e];
                        double& v = adam.v[offset + e];
                        m = beta1 * m + (1.0 - beta1) * g;
                        v = beta2 * v + (1.0 - beta2) * g * g;
                        params[b].first[e] -=
                            cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + eps);
                    }
                    offset += params[b].second;
                }
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = mean_loss(train_idx);
        if (!std::isfinite(stats.train_loss))
            throw NumericError("training diverged: non-finite training loss after epoch " +
                               std::to_string(epoch));
        if (!val_idx.empty()) {
            stats.val_loss = mean_loss(val_idx);
            stats.val_mp = val_macro_precision();
            if (*stats.val_mp > best_mp) {  // strict: ties keep the earlier epoch
                best_mp = *stats.val_mp;
                best = model;
                best_epoch = epoch;
                since_best = 0;
            } else {
                since_best++;
            }
        }
        result.history.push_back(stats);
        if (!val_idx.empty() && cfg.early_stop_patience > 0 &&
            since_best >= cfg.early_stop_patience)
            break;
    }

    if (!val_idx.empty() && best_epoch > 0) {
        result.model = std::move(best);
        result.chosen_epoch = best_epoch;
    } else {
        result.model = std::move(model);
        result.chosen_epoch = static_cast<int>(result.history.size());
    }
    return result;
}

} // namespace

TrainedModel train(const ClassifierConfig& model_config, const SequenceTensor& tensor,
                   const std::vector<int>& labels, const TrainConfig& cfg) {
    ClassifierConfig mc = model_config;
    mc.input_width = tensor.width;
    mc.timesteps = tensor.timesteps;
    return fit<SequenceClassifier, Gradients>(
        tensor, labels, cfg, [&] { return init_params(mc, cfg.seed); },
        [&](const SequenceClassifier& m, int i) { return forward(m, tensor.sequence(i)); },
        [&](const SequenceClassifier& m, int i, int label) {
            ForwardCache cache;
            forward(m, tensor.sequence(i), &cache);
            return backward(m, cache, label);
        });
}

TrainedModel train_baseline(const std::vector<int>& hidden_widths, const SequenceTensor& tensor,
                            const std::vector<int>& labels, const TrainConfig& cfg) {
    FnnConfig fc;
    fc.input_width = tensor.width;
    fc.hidden_widths = hidden_widths;
    const auto last_step = [&](int i) {
        return tensor.sequence(i) + static_cast<std::size_t>(tensor.timesteps - 1) * tensor.width;
    };
    return fit<FnnBaseline, FnnGradients>(
        tensor, labels, cfg, [&] { return init_fnn(fc, cfg.seed); },
        [&](const FnnBaseline& m, int i) { return forward_fnn(m, last_step(i)); },
        [&](const FnnBaseline& m, int i, int label) {
            FnnCache cache;
            forward_fnn(m, last_step(i), &cache);
            return backward_fnn(m, cache, label);
        });
}

nlohmann::json GridOutcome::leaderboard_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : leaderboard) {
        rows.push_back(nlohmann::json{{"index", r.index},
                                      {"learning_rate", r.learning_rate},
                                      {"hidden", r.hidden},
                                      {"epochs", r.epochs},
                                      {"batch_size", r.batch_size},
                                      {"val_mp", r.val_mp},
                                      {"chosen_epoch", r.chosen_epoch}});
    }
    return rows;
}

GridOutcome grid_search(const GridSpec& grid, const ClassifierConfig& base_model,
                        const SequenceTensor& tensor, const std::vector<int>& labels,
                        const TrainConfig& cfg_base) {
    if (grid.learning_rates.empty() || grid.hidden_sizes.empty() || grid.epochs.empty() ||
        grid.batch_sizes.empty())
        throw ConfigError("grid search: every candidate list must be non-empty");
    if (cfg_base.validation_fraction <= 0)
        throw ConfigError("grid search: needs validation_fraction > 0 to score combinations");

    const std::size_t total = grid.learning_rates.size() * grid.hidden_sizes.size() *
                              grid.epochs.size() * grid.batch_sizes.size();
    if (total > static_cast<std::size_t>(grid.max_combinations))
        throw ConfigError("grid search: " + std::to_string(total) +
                          " combinations exceed the cap of " +
                          std::to_string(grid.max_combinations));

    // combinations in lexicographic order: lr, hidden, epochs, batch
    struct Combo {
        double lr;
        std::vector<int> hidden;
        int epochs;
        int batch;
    };
    std::vector<Combo> combos;
    combos.reserve(total);
    for (double lr : grid.learning_rates)
        for (const auto& hidden : grid.hidden_sizes)
            for (int ep : grid.epochs)
                for (int bs : grid.batch_sizes) combos.push_back({lr, hidden, ep, bs});

    std::vector<GridResult> results(total);
    const auto run_one = [&](std::size_t index) {
        const Combo& c = combos[index];
        TrainConfig cfg = cfg_base;
        cfg.learning_rate = c.lr;
        cfg.epochs = c.epochs;
        cfg.batch_size = c.batch;
        cfg.seed = cfg_base.seed ^ static_cast<std::uint64_t>(index);
        ClassifierConfig mc = base_model;
        mc.lstm_hidden = c.hidden;
        const TrainedModel tm = train(mc, tensor, labels, cfg);
        double mp = 0.0;
        for (const auto& e : tm.history)
            if (e.epoch == tm.chosen_epoch && e.val_mp) mp = *e.val_mp;
        results[index] =
            GridResult{index, c.lr, c.hidden, c.epochs, c.batch, mp, tm.chosen_epoch};
    };

    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ASSET_HEALTH_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) workers = static_cast<std::size_t>(cap);
    }
    workers = std::min(workers, total);

    if (workers <= 1) {
        for (std::size_t i = 0; i < total; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) run_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    GridOutcome outcome;
    outcome.leaderboard = results;
    std::stable_sort(outcome.leaderboard.begin(), outcome.leaderboard.end(),
                     [](const GridResult& a, const GridResult& b) {
                         if (a.val_mp != b.val_mp) return a.val_mp > b.val_mp;
                         return a.index < b.index;
                     });
    outcome.best = outcome.leaderboard.front();
    return outcome;
}

} // namespace ahi
