#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ahi/linalg.hpp"
#include "json.hpp"

namespace ahi {

// One LSTM layer: input, forget, output gates and the candidate write, each
// with input weights (h x d), recurrent weights (h x h) and a bias.
struct LstmLayerParams {
    Matrix w_input, w_forget, w_output, w_candidate;
    Matrix u_input, u_forget, u_output, u_candidate;
    std::vector<double> b_input, b_forget, b_output, b_candidate;

    int hidden_size() const { return w_input.rows(); }
    int input_size() const { return w_input.cols(); }
};

struct DenseLayer {
    Matrix w;  // out x in
    std::vector<double> b;
};

struct ClassifierConfig {
    int input_width = 0;
    int timesteps = 0;                    // unrolled LSTM steps, one per inspection
    std::vector<int> lstm_hidden;         // hidden size per stacked layer
    std::optional<int> dense_relu_width;  // optional ReLU block before the head
    int n_classes = 5;
    std::uint64_t seed = 0;
};

// Stacked LSTM over the inspection sequence, final hidden state through an
// optional dense ReLU block into a 5-way softmax head.
struct SequenceClassifier {
    ClassifierConfig config;
    std::vector<LstmLayerParams> layers;
    std::optional<DenseLayer> dense;
    DenseLayer output;
    std::string pipeline_hash;  // feature pipeline this model was trained with

    nlohmann::json to_json() const;
    static SequenceClassifier from_json(const nlohmann::json& j);
};

struct FnnConfig {
    int input_width = 0;
    std::vector<int> hidden_widths;
    int n_classes = 5;
    std::uint64_t seed = 0;
};

// Snapshot baseline: dense ReLU stack over the latest inspection's features,
// same softmax head as the sequence model.
struct FnnBaseline {
    FnnConfig config;
    std::vector<DenseLayer> hidden;
    DenseLayer output;
    std::string pipeline_hash;

    nlohmann::json to_json() const;
    static FnnBaseline from_json(const nlohmann::json& j);
};

// Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out)) per matrix), forget
// biases 1, all other biases 0. Deterministic in the seed.
SequenceClassifier init_params(const ClassifierConfig& config, std::uint64_t seed);
FnnBaseline init_fnn(const FnnConfig& config, std::uint64_t seed);

// Max-shifted softmax; sums to 1 within 1e-12 and never overflows.
std::vector<double> softmax(const std::vector<double>& z);

// -ln(p[label]), floored at 1e-12 inside the log. label is 0-based.
double cross_entropy(const std::vector<double>& probabilities, int label);

constexpr double kProbFloor = 1e-12;

struct LstmLayerCache {
    // [t][h] activations
    std::vector<std::vector<double>> gate_i, gate_f, gate_o, gate_g;
    std::vector<std::vector<double>> cell, cell_tanh, hidden;
};

struct ForwardCache {
    std::vector<double> input;  // T x d copy of the sequence
    std::vector<LstmLayerCache> layers;
    std::vector<double> dense_pre, dense_out;  // if the ReLU block is present
    std::vector<double> logits, probs;
};

// sequence points at timesteps x input_width doubles, row-major.
std::vector<double> forward(const SequenceClassifier& model, const double* sequence,
                            ForwardCache* cache = nullptr);

// Gradients mirror the parameter shapes; loss is the sample's cross-entropy.
struct Gradients {
    std::vector<LstmLayerParams> layers;
    std::optional<DenseLayer> dense;
    DenseLayer output;
    double loss = 0.0;
};

// Exact gradient of cross_entropy(softmax(logits), label) for every
// parameter, by backpropagation through time over the cached activations.
Gradients backward(const SequenceClassifier& model, const ForwardCache& cache, int label);

struct FnnCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre, post;  // per hidden layer
    std::vector<double> logits, probs;
};

std::vector<double> forward_fnn(const FnnBaseline& model, const double* features,
                                FnnCache* cache = nullptr);

struct FnnGradients {
    std::vector<DenseLayer> hidden;
    DenseLayer output;
    double loss = 0.0;
};

FnnGradients backward_fnn(const FnnBaseline& model, const FnnCache& cache, int label);

// Argmax with ties resolved toward the lowest index: the most severe health
// level wins, the conservative call for maintenance.
int argmax_lowest(const std::vector<double>& values);

// Flat views over parameters/gradients so optimizers can treat both model
// families uniformly. Block order is deterministic.
std::vector<std::pair<double*, std::size_t>> parameter_blocks(SequenceClassifier& model);
std::vector<std::pair<double*, std::size_t>> parameter_blocks(FnnBaseline& model);
std::vector<std::pair<double*, std::size_t>> parameter_blocks(Gradients& grads);
std::vector<std::pair<double*, std::size_t>> parameter_blocks(FnnGradients& grads);

Gradients zero_gradients(const SequenceClassifier& model);
FnnGradients zero_gradients(const FnnBaseline& model);

using AnyModel = std::variant<SequenceClassifier, FnnBaseline>;

void save_model(const std::string& path, const AnyModel& model);
AnyModel load_model(const std::string& path);

} // namespace ahi
