#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ahi/dataset.hpp"
#include "json.hpp"

namespace ahi {

// The generator's latent fiction: each asset carries a hidden deterioration
// level d in [0,1] (0 = pristine) that grows linearly at a per-asset rate.
// Observed attributes are noisy views of d; the label is a quantized blend
// of the final d and the (normalized) rate. None of this claims to model
// real utility data; it exists so the pipeline has learnable input whose
// label provably depends on the inspection trend when rate_weight > 0.

struct NumericalTemplate {
    std::string name;
    double intercept = 0.0;
    double slope = 1.0;  // value = intercept + slope * d + noise
    double noise_sd = 0.0;
};

// Levels are declared worst-first (rank 1 = worst), matching the schema
// declaration. thresholds are ascending cut points in d; a latent below the
// first threshold reads as the best level.
struct OrderedTemplate {
    std::string name;
    std::vector<std::string> levels;
    std::vector<double> thresholds;  // size = levels.size() - 1
    double noise_sd = 0.0;
};

struct UnorderedTemplate {
    std::string name;
    std::vector<std::string> categories;
    std::vector<double> rate_multipliers;  // deterioration-rate factor per category
    std::vector<double> weights;           // draw weights
};

struct AttrTemplate {
    AttrType type = AttrType::numerical;
    NumericalTemplate numerical;
    OrderedTemplate ordered;
    UnorderedTemplate unordered;

    static AttrTemplate make(NumericalTemplate t);
    static AttrTemplate make(OrderedTemplate t);
    static AttrTemplate make(UnorderedTemplate t);
};

struct SynthConfig {
    int n_assets = 100;
    int timesteps = 2;
    double interval_years = 10.0;
    double horizon_gap_years = 10.0;
    int first_inspection_year = 1998;
    std::vector<AttrTemplate> attributes;
    double base_rate_min = 0.002;  // latent deterioration per year, before multipliers
    double base_rate_max = 0.02;
    double d0_min = 0.0;
    double d0_max = 0.5;
    double age_min = 0.0;  // service age at first inspection
    double age_max = 25.0;
    double rate_weight = 0.0;             // label weight on the normalized rate
    double noise_scale = 1.0;             // multiplies every template noise_sd
    std::array<double, 5> class_mix = {0.2, 0.2, 0.2, 0.2, 0.2};  // H1..H5 target shares
    int max_resample_factor = 200;        // attempts cap = factor * n_assets

    ConditionSchema schema() const;
    double min_rate() const;  // over all category combinations
    double max_rate() const;

    nlohmann::json to_json() const;
    static SynthConfig from_json(const nlohmann::json& j);
};

// Severity -> health level quantization: [0,0.2) -> H5 ... [0.8,1] -> H1.
int label_from_severity(double severity);

// Latent deterioration k inspections after the first.
double latent_at(double d0, double rate, double interval_years, int k);

LabeledDataset synthesize(const SynthConfig& config, std::uint64_t seed);

// Profiles shaped after the two asset classes the estimation task targets:
// wood poles (2 inspections, 10-year interval) and underground cable
// segments (3 inspections, 5-year interval).
SynthConfig pole_like_profile();
SynthConfig cable_like_profile();

} // namespace ahi
