#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace ahi {

enum class AttrType { numerical, ordered, unordered };

// Attribute kind: plain number, ranked rating (level list in rank order as
// declared), or unranked category set.
struct ConditionKind {
    AttrType type = AttrType::numerical;
    std::vector<std::string> levels;      // ordered only, >= 2, unique
    std::vector<std::string> categories;  // unordered only, >= 2, unique

    static ConditionKind numerical();
    static ConditionKind ordered(std::vector<std::string> levels);
    static ConditionKind unordered(std::vector<std::string> categories);
};

struct ConditionAttribute {
    std::string name;
    ConditionKind kind;
};

// Declares the condition attributes of one asset class, in the column order
// used by feature engineering. Service age is always present as the last
// CSV column and is not listed in `attributes`.
struct ConditionSchema {
    std::vector<ConditionAttribute> attributes;
    bool includes_service_age = true;

    int attribute_index(const std::string& name) const;

    nlohmann::json to_json() const;
    static ConditionSchema from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static ConditionSchema load(const std::string& path);
};

// Throws DataError if the schema breaks its own invariants (duplicate
// names, too few levels/categories).
void check_schema(const ConditionSchema& schema);

// Value of one attribute: a real for numerical kinds, a level or category
// name otherwise.
using AttrValue = std::variant<double, std::string>;

struct InspectionRecord {
    std::string asset_id;
    int inspection_time = 0;         // calendar year
    std::vector<AttrValue> values;   // aligned with schema.attributes
    double service_age = 0.0;        // years
};

// One asset's records, ascending by inspection year.
struct AssetHistory {
    std::string asset_id;
    std::vector<InspectionRecord> records;
};

// Ordinal condition rating, 5 = "as new" down to 1 = end of life.
struct HealthIndex {
    int level = 5;

    static const char* definition(int level);
    static const char* action(int level);
};

struct LabeledEntry {
    AssetHistory history;
    HealthIndex label;
};

struct LabeledDataset {
    ConditionSchema schema;
    int sequence_length = 0;  // records per asset
    std::vector<LabeledEntry> entries;
    int label_horizon_year = 0;  // year the labels were assigned

    std::vector<int> labels() const;  // levels 1..5, entry order
};

struct ParseOptions {
    // Records per asset. Unset: the most common history length in the file.
    std::optional<int> sequence_length;
    // Pad short histories by repeating the earliest record instead of
    // dropping the asset.
    bool pad_forward = false;
};

// Reads a records CSV (header: asset_id,inspection_time,<attrs...>,service_age)
// and a labels CSV (header: asset_id,health_index,assigned_year), groups rows
// by asset, sorts by year and joins with labels. Assets with more records
// than the target length keep their most recent ones; assets with fewer are
// dropped unless opts.pad_forward is set. Unlabeled assets are an error.
LabeledDataset parse_csv(const std::string& records_path, const ConditionSchema& schema,
                         const std::string& labels_path, const ParseOptions& opts = {});

// Records only, no labels; used by prediction.
std::vector<AssetHistory> parse_records_csv(const std::string& records_path,
                                            const ConditionSchema& schema);

void write_records_csv(const std::string& path, const ConditionSchema& schema,
                       const std::vector<AssetHistory>& histories);
void write_labels_csv(const std::string& path, const LabeledDataset& dataset);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

// Checks every type invariant; one message per violation, empty when clean.
// Violations are data, not errors.
std::vector<std::string> validate(const LabeledDataset& dataset);

// Stratified split: per class, round(class_count * test_fraction) entries go
// to the test side, adjusted so neither side is empty. Deterministic in seed;
// entry order is preserved within both halves.
std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& dataset,
                                                           double test_fraction,
                                                           std::uint64_t seed);

} // namespace ahi
