#include "ahi/synth.hpp"

#include "ahi/error.hpp"
#include "ahi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ahi {

AttrTemplate AttrTemplate::make(NumericalTemplate t) {
    AttrTemplate a;
    a.type = AttrType::numerical;
    a.numerical = std::move(t);
    return a;
}

AttrTemplate AttrTemplate::make(OrderedTemplate t) {
    AttrTemplate a;
    a.type = AttrType::ordered;
    a.ordered = std::move(t);
    return a;
}

AttrTemplate AttrTemplate::make(UnorderedTemplate t) {
    AttrTemplate a;
    a.type = AttrType::unordered;
    a.unordered = std::move(t);
    return a;
}

ConditionSchema SynthConfig::schema() const {
    ConditionSchema s;
    for (const auto& attr : attributes) {
        switch (attr.type) {
            case AttrType::numerical:
                s.attributes.push_back({attr.numerical.name, ConditionKind::numerical()});
                break;
            case AttrType::ordered:
                s.attributes.push_back({attr.ordered.name, ConditionKind::ordered(attr.ordered.levels)});
                break;
            case AttrType::unordered:
                s.attributes.push_back(
                    {attr.unordered.name, ConditionKind::unordered(attr.unordered.categories)});
                break;
        }
    }
    return s;
}

double SynthConfig::min_rate() const {
    double m = base_rate_min;
    for (const auto& attr : attributes)
        if (attr.type == AttrType::unordered)
            m *= *std::min_element(attr.unordered.rate_multipliers.begin(),
                                   attr.unordered.rate_multipliers.end());
    return m;
}

double SynthConfig::max_rate() const {
    double m = base_rate_max;
    for (const auto& attr : attributes)
        if (attr.type == AttrType::unordered)
            m *= *std::max_element(attr.unordered.rate_multipliers.begin(),
                                   attr.unordered.rate_multipliers.end());
    return m;
}

int label_from_severity(double severity) {
    const double s = std::clamp(severity, 0.0, 1.0);
    const int level = 5 - static_cast<int>(std::floor(s * 5.0));
    return std::clamp(level, 1, 5);
}

double latent_at(double d0, double rate, double interval_years, int k) {
    return std::clamp(d0 + rate * interval_years * k, 0.0, 1.0);
}

namespace {

void check_config(const SynthConfig& c) {
    if (c.n_assets < 1) throw ConfigError("n_assets must be >= 1");
    if (c.timesteps < 1) throw ConfigError("timesteps must be >= 1");
    if (c.interval_years <= 0) throw ConfigError("interval_years must be > 0");
    if (c.horizon_gap_years <= 0) throw ConfigError("horizon_gap_years must be > 0");
    if (!(c.rate_weight >= 0.0 && c.rate_weight <= 1.0))
        throw ConfigError("rate_weight must be in [0,1]");
    if (c.noise_scale < 0) throw ConfigError("noise_scale must be >= 0");
    if (c.base_rate_min < 0 || c.base_rate_max < c.base_rate_min)
        throw ConfigError("base rate range invalid");
    if (c.attributes.empty()) throw ConfigError("no attribute templates");
    double mix_total = 0.0;
    for (double m : c.class_mix) {
        if (m < 0) throw ConfigError("class_mix entries must be >= 0");
        mix_total += m;
    }
    if (mix_total <= 0) throw ConfigError("class_mix must have positive total");
    for (const auto& attr : c.attributes) {
        if (attr.type == AttrType::ordered &&
            attr.ordered.thresholds.size() + 1 != attr.ordered.levels.size())
            throw ConfigError("attribute " + attr.ordered.name +
                              ": thresholds must number levels-1");
        if (attr.type == AttrType::unordered &&
            (attr.unordered.rate_multipliers.size() != attr.unordered.categories.size() ||
             attr.unordered.weights.size() != attr.unordered.categories.size()))
            throw ConfigError("attribute " + attr.unordered.name +
                              ": multipliers/weights must match categories");
    }
}

// Largest-remainder apportionment of n into 5 bins.
std::array<int, 5> target_counts(const std::array<double, 5>& mix, int n) {
    double total = 0.0;
    for (double m : mix) total += m;
    std::array<int, 5> counts{};
    std::array<double, 5> remainders{};
    int assigned = 0;
    for (int i = 0; i < 5; ++i) {
        const double exact = mix[i] / total * n;
        counts[i] = static_cast<int>(std::floor(exact));
        remainders[i] = exact - counts[i];
        assigned += counts[i];
    }
    std::array<int, 5> order{0, 1, 2, 3, 4};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (int k = 0; assigned < n; ++k, ++assigned) counts[order[k % 5]]++;
    return counts;
}

// Ordered rating from latent d: count of thresholds below the (noisy) latent
// gives the deterioration bucket; the best level sits below every threshold.
// Levels are declared worst-first, so bucket 0 maps to the last level.
int ordered_schema_index(const OrderedTemplate& t, double d_noisy) {
    int bucket = 0;
    for (double thr : t.thresholds)
        if (d_noisy > thr) ++bucket;
    return static_cast<int>(t.levels.size()) - 1 - bucket;
}

} // namespace

LabeledDataset synthesize(const SynthConfig& config, std::uint64_t seed) {
    check_config(config);
    const ConditionSchema schema = config.schema();
    check_schema(schema);

    const std::array<int, 5> want = target_counts(config.class_mix, config.n_assets);
    std::array<int, 5> have{};

    const double r_lo = config.min_rate();
    const double r_hi = config.max_rate();
    const double r_span = r_hi - r_lo;

    LabeledDataset ds;
    ds.schema = schema;
    ds.sequence_length = config.timesteps;
    const int last_year = config.first_inspection_year +
                          static_cast<int>(config.interval_years) * (config.timesteps - 1);
    ds.label_horizon_year = last_year + static_cast<int>(config.horizon_gap_years);

    Rng rng(seed);
    const long max_attempts =
        std::max(1000L, static_cast<long>(config.max_resample_factor) * config.n_assets);
    long attempts = 0;
    int produced = 0;

    while (produced < config.n_assets) {
        if (++attempts > max_attempts)
            throw ConfigError("class mix unreachable: could not fill all health-index bins after " +
                              std::to_string(max_attempts) + " attempts");

        const double d0 = rng.uniform(config.d0_min, config.d0_max);
        double rate = rng.uniform(config.base_rate_min, config.base_rate_max);
        std::vector<int> category_pick(config.attributes.size(), -1);
        for (std::size_t a = 0; a < config.attributes.size(); ++a) {
            const auto& attr = config.attributes[a];
            if (attr.type != AttrType::unordered) continue;
            const std::size_t pick = rng.weighted_index(attr.unordered.weights);
            category_pick[a] = static_cast<int>(pick);
            rate *= attr.unordered.rate_multipliers[pick];
        }
        const double age0 = rng.uniform(config.age_min, config.age_max);

        const double d_last = latent_at(d0, rate, config.interval_years, config.timesteps - 1);
        const double rate_norm = r_span > 0 ? std::clamp((rate - r_lo) / r_span, 0.0, 1.0) : 0.0;
        const double severity =
            (1.0 - config.rate_weight) * d_last + config.rate_weight * rate_norm;
        const int level = label_from_severity(severity);

        AssetHistory history;
        for (int k = 0; k < config.timesteps; ++k) {
            const double d = latent_at(d0, rate, config.interval_years, k);
            InspectionRecord rec;
            rec.inspection_time =
                config.first_inspection_year + static_cast<int>(config.interval_years) * k;
            rec.service_age = age0 + config.interval_years * k;
            for (std::size_t a = 0; a < config.attributes.size(); ++a) {
                const auto& attr = config.attributes[a];
                switch (attr.type) {
                    case AttrType::numerical: {
                        const double noise =
                            rng.normal(0.0, attr.numerical.noise_sd * config.noise_scale);
                        rec.values.emplace_back(attr.numerical.intercept +
                                                attr.numerical.slope * d + noise);
                        break;
                    }
                    case AttrType::ordered: {
                        const double noise =
                            rng.normal(0.0, attr.ordered.noise_sd * config.noise_scale);
                        const int idx = ordered_schema_index(attr.ordered, d + noise);
                        rec.values.emplace_back(attr.ordered.levels[static_cast<std::size_t>(idx)]);
                        break;
                    }
                    case AttrType::unordered: {
                        rec.values.emplace_back(attr.unordered.categories[static_cast<std::size_t>(
                            category_pick[a])]);
                        break;
                    }
                }
            }
            history.records.push_back(std::move(rec));
        }

        if (have[level - 1] >= want[level - 1]) continue;  // bin full, resample
        ++have[level - 1];
        ++produced;

        char id[16];
        std::snprintf(id, sizeof(id), "%05d", produced);
        history.asset_id = id;
        for (auto& rec : history.records) rec.asset_id = history.asset_id;
        ds.entries.push_back(LabeledEntry{std::move(history), HealthIndex{level}});
    }
    return ds;
}

namespace {

nlohmann::json template_to_json(const AttrTemplate& attr) {
    nlohmann::json j;
    switch (attr.type) {
        case AttrType::numerical:
            j["kind"] = "numerical";
            j["name"] = attr.numerical.name;
            j["intercept"] = attr.numerical.intercept;
            j["slope"] = attr.numerical.slope;
            j["noise_sd"] = attr.numerical.noise_sd;
            break;
        case AttrType::ordered:
            j["kind"] = "ordered";
            j["name"] = attr.ordered.name;
            j["levels"] = attr.ordered.levels;
            j["thresholds"] = attr.ordered.thresholds;
            j["noise_sd"] = attr.ordered.noise_sd;
            break;
        case AttrType::unordered:
            j["kind"] = "unordered";
            j["name"] = attr.unordered.name;
            j["categories"] = attr.unordered.categories;
            j["rate_multipliers"] = attr.unordered.rate_multipliers;
            j["weights"] = attr.unordered.weights;
            break;
    }
    return j;
}

AttrTemplate template_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "numerical") {
        NumericalTemplate t;
        t.name = j.at("name").get<std::string>();
        t.intercept = j.at("intercept").get<double>();
        t.slope = j.at("slope").get<double>();
        t.noise_sd = j.at("noise_sd").get<double>();
        return AttrTemplate::make(std::move(t));
    }
    if (kind == "ordered") {
        OrderedTemplate t;
        t.name = j.at("name").get<std::string>();
        t.levels = j.at("levels").get<std::vector<std::string>>();
        t.thresholds = j.at("thresholds").get<std::vector<double>>();
        t.noise_sd = j.at("noise_sd").get<double>();
        return AttrTemplate::make(std::move(t));
    }
    if (kind == "unordered") {
        UnorderedTemplate t;
        t.name = j.at("name").get<std::string>();
        t.categories = j.at("categories").get<std::vector<std::string>>();
        t.rate_multipliers = j.at("rate_multipliers").get<std::vector<double>>();
        t.weights = j.at("weights").get<std::vector<double>>();
        return AttrTemplate::make(std::move(t));
    }
    throw ConfigError("synth config: unknown template kind \"" + kind + "\"");
}

} // namespace

nlohmann::json SynthConfig::to_json() const {
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& a : attributes) attrs.push_back(template_to_json(a));
    return nlohmann::json{{"n_assets", n_assets},
                          {"timesteps", timesteps},
                          {"interval_years", interval_years},
                          {"horizon_gap_years", horizon_gap_years},
                          {"first_inspection_year", first_inspection_year},
                          {"attributes", std::move(attrs)},
                          {"base_rate_min", base_rate_min},
                          {"base_rate_max", base_rate_max},
                          {"d0_min", d0_min},
                          {"d0_max", d0_max},
                          {"age_min", age_min},
                          {"age_max", age_max},
                          {"rate_weight", rate_weight},
                          {"noise_scale", noise_scale},
                          {"class_mix", class_mix},
                          {"max_resample_factor", max_resample_factor}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
    SynthConfig c;
    c.n_assets = j.at("n_assets").get<int>();
    c.timesteps = j.at("timesteps").get<int>();
    c.interval_years = j.at("interval_years").get<double>();
    c.horizon_gap_years = j.at("horizon_gap_years").get<double>();
    c.first_inspection_year = j.at("first_inspection_year").get<int>();
    for (const auto& a : j.at("attributes")) c.attributes.push_back(template_from_json(a));
    c.base_rate_min = j.at("base_rate_min").get<double>();
    c.base_rate_max = j.at("base_rate_max").get<double>();
    c.d0_min = j.at("d0_min").get<double>();
    c.d0_max = j.at("d0_max").get<double>();
    c.age_min = j.at("age_min").get<double>();
    c.age_max = j.at("age_max").get<double>();
    c.rate_weight = j.at("rate_weight").get<double>();
    c.noise_scale = j.at("noise_scale").get<double>();
    c.class_mix = j.at("class_mix").get<std::array<double, 5>>();
    c.max_resample_factor = j.at("max_resample_factor").get<int>();
    return c;
}

SynthConfig pole_like_profile() {
    SynthConfig c;
    c.n_assets = 3000;
    c.timesteps = 2;
    c.interval_years = 10.0;
    c.horizon_gap_years = 10.0;
    c.first_inspection_year = 1998;
    c.base_rate_min = 0.002;
    c.base_rate_max = 0.02;
    c.d0_min = 0.0;
    c.d0_max = 0.5;
    c.age_min = 0.0;
    c.age_max = 25.0;
    c.attributes = {
        AttrTemplate::make(NumericalTemplate{"shell_thickness_a", 55.0, -40.0, 2.5}),
        AttrTemplate::make(NumericalTemplate{"shell_thickness_b", 52.0, -38.0, 2.5}),
        AttrTemplate::make(NumericalTemplate{"shell_thickness_c", 58.0, -42.0, 2.5}),
        AttrTemplate::make(NumericalTemplate{"circumference", 130.0, -30.0, 3.0}),
        AttrTemplate::make(OrderedTemplate{"surface", {"poor", "medium", "good"}, {0.35, 0.7}, 0.06}),
        AttrTemplate::make(UnorderedTemplate{
            "woodpecker", {"none", "present"}, {1.0, 1.4}, {0.65, 0.35}}),
        AttrTemplate::make(UnorderedTemplate{"transformer",
                                             {"none", "single-phase", "three-phase"},
                                             {0.85, 1.1, 1.35},
                                             {0.5, 0.3, 0.2}}),
    };
    return c;
}

SynthConfig cable_like_profile() {
    SynthConfig c;
    c.n_assets = 2500;
    c.timesteps = 3;
    c.interval_years = 5.0;
    c.horizon_gap_years = 5.0;
    c.first_inspection_year = 2003;
    c.base_rate_min = 0.004;
    c.base_rate_max = 0.04;
    c.d0_min = 0.0;
    c.d0_max = 0.5;
    c.age_min = 0.0;
    c.age_max = 20.0;
    c.attributes = {
        AttrTemplate::make(NumericalTemplate{"partial_discharge", 20.0, 450.0, 18.0}),
        AttrTemplate::make(NumericalTemplate{"neutral_corrosion", 2.0, 65.0, 3.0}),
        AttrTemplate::make(NumericalTemplate{"avg_loading", 90.0, 60.0, 8.0}),
        AttrTemplate::make(OrderedTemplate{"visual", {"poor", "medium", "good"}, {0.35, 0.7}, 0.06}),
    };
    return c;
}

} // namespace ahi
