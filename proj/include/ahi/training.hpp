#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ahi/features.hpp"
#include "ahi/network.hpp"
#include "json.hpp"

namespace ahi {

enum class Optimizer { sgd, adam };

Optimizer optimizer_from_string(const std::string& name);
std::string optimizer_name(Optimizer opt);

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 100;
    int batch_size = 32;
    Optimizer optimizer = Optimizer::adam;  // beta1 0.9, beta2 0.999, eps 1e-8
    double validation_fraction = 0.2;       // stratified carve-out for early stopping
    int early_stop_patience = 0;            // epochs without improvement; 0 disables
    double grad_clip_norm = 5.0;            // global-norm clip; 0 disables
    std::uint64_t seed = 0;                 // weight init + shuffle order
    std::uint64_t split_seed = 0;           // validation carve-out only
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    std::optional<double> val_loss;
    std::optional<double> val_mp;
};

struct TrainedModel {
    AnyModel model;
    FeaturePipeline pipeline;  // attached by the caller once known
    std::vector<EpochStats> history;
    int chosen_epoch = 0;  // epoch whose parameters were kept

    nlohmann::json history_json() const;
};

// Stratified validation carve-out: round(fraction * class_count) indices per
// class, capped so every class keeps a training member. Depends only on
// labels, fraction and split_seed, never on the training seed.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_carve(
    const std::vector<int>& labels, double fraction, std::uint64_t split_seed);

// Mini-batch gradient descent on mean cross-entropy. Shuffles per epoch from
// a generator seeded by cfg.seed, keeps the parameters of the epoch with the
// best validation macro-precision (ties go to the earlier epoch), and aborts
// with diagnostics on non-finite loss. labels are health levels 1..5.
TrainedModel train(const ClassifierConfig& model_config, const SequenceTensor& tensor,
                   const std::vector<int>& labels, const TrainConfig& cfg);

// Same procedure for the snapshot baseline; consumes tensor[:, T-1, :].
TrainedModel train_baseline(const std::vector<int>& hidden_widths, const SequenceTensor& tensor,
                            const std::vector<int>& labels, const TrainConfig& cfg);

struct GridSpec {
    std::vector<double> learning_rates;
    std::vector<std::vector<int>> hidden_sizes;
    std::vector<int> epochs;
    std::vector<int> batch_sizes;
    int max_combinations = 64;
};

struct GridResult {
    std::size_t index = 0;  // lexicographic combination index
    double learning_rate = 0.0;
    std::vector<int> hidden;
    int epochs = 0;
    int batch_size = 0;
    double val_mp = 0.0;
    int chosen_epoch = 0;
};

struct GridOutcome {
    GridResult best;
    std::vector<GridResult> leaderboard;  // val_mp descending, index ascending

    nlohmann::json leaderboard_json() const;
};

// Exhaustive product over the candidate lists, each combination trained with
// seed = base seed XOR combination index and scored by validation MP. May
// run combinations on a worker pool; results merge by index, so the outcome
// does not depend on scheduling. ASSET_HEALTH_THREADS caps the pool.
GridOutcome grid_search(const GridSpec& grid, const ClassifierConfig& base_model,
                        const SequenceTensor& tensor, const std::vector<int>& labels,
                        const TrainConfig& cfg_base);

} // namespace ahi
