#include "ahi/dataset.hpp"

#include "ahi/error.hpp"
#include "ahi/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ahi {

namespace {

void check_unique(const std::vector<std::string>& names, const std::string& what) {
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) throw DataError("duplicate " + what + " name: " + n);
    }
}

} // namespace

ConditionKind ConditionKind::numerical() {
    ConditionKind k;
    k.type = AttrType::numerical;
    return k;
}

ConditionKind ConditionKind::ordered(std::vector<std::string> levels) {
    if (levels.size() < 2) throw DataError("ordered attribute needs at least 2 levels");
    check_unique(levels, "level");
    ConditionKind k;
    k.type = AttrType::ordered;
    k.levels = std::move(levels);
    return k;
}

ConditionKind ConditionKind::unordered(std::vector<std::string> categories) {
    if (categories.size() < 2) throw DataError("unordered attribute needs at least 2 categories");
    check_unique(categories, "category");
    ConditionKind k;
    k.type = AttrType::unordered;
    k.categories = std::move(categories);
    return k;
}

void check_schema(const ConditionSchema& schema) {
    std::vector<std::string> names;
    for (const auto& attr : schema.attributes) names.push_back(attr.name);
    check_unique(names, "attribute");
    for (const auto& attr : schema.attributes) {
        switch (attr.kind.type) {
            case AttrType::numerical:
                break;
            case AttrType::ordered:
                if (attr.kind.levels.size() < 2)
                    throw DataError("attribute " + attr.name + ": ordered kind needs >= 2 levels");
                check_unique(attr.kind.levels, "level");
                break;
            case AttrType::unordered:
                if (attr.kind.categories.size() < 2)
                    throw DataError("attribute " + attr.name + ": unordered kind needs >= 2 categories");
                check_unique(attr.kind.categories, "category");
                break;
        }
    }
}

int ConditionSchema::attribute_index(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].name == name) return static_cast<int>(i);
    return -1;
}

nlohmann::json ConditionSchema::to_json() const {
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& attr : attributes) {
        nlohmann::json a;
        a["name"] = attr.name;
        switch (attr.kind.type) {
            case AttrType::numerical:
                a["kind"] = "numerical";
                break;
            case AttrType::ordered:
                a["kind"] = "ordered";
                a["levels"] = attr.kind.levels;
                break;
            case AttrType::unordered:
                a["kind"] = "unordered";
                a["categories"] = attr.kind.categories;
                break;
        }
        attrs.push_back(std::move(a));
    }
    return nlohmann::json{{"attributes", std::move(attrs)}};
}

ConditionSchema ConditionSchema::from_json(const nlohmann::json& j) {
    if (!j.contains("attributes") || !j["attributes"].is_array())
        throw DataError("schema JSON: missing \"attributes\" array");
    ConditionSchema schema;
    for (const auto& a : j["attributes"]) {
        ConditionAttribute attr;
        attr.name = a.at("name").get<std::string>();
        const std::string kind = a.at("kind").get<std::string>();
        if (kind == "numerical") {
            attr.kind = ConditionKind::numerical();
        } else if (kind == "ordered") {
            attr.kind = ConditionKind::ordered(a.at("levels").get<std::vector<std::string>>());
        } else if (kind == "unordered") {
            attr.kind = ConditionKind::unordered(a.at("categories").get<std::vector<std::string>>());
        } else {
            throw DataError("schema JSON: unknown kind \"" + kind + "\" for attribute " + attr.name);
        }
        schema.attributes.push_back(std::move(attr));
    }
    check_schema(schema);
    return schema;
}

void ConditionSchema::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write schema file: " + path);
    out << to_json().dump(2) << "\n";
}

ConditionSchema ConditionSchema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("schema file " + path + ": " + e.what());
    }
    return from_json(j);
}

const char* HealthIndex::definition(int level) {
    switch (level) {
        case 5: return "In \"as new\" condition";
        case 4: return "Has some minor problems or evidence of aging";
        case 3: return "Has many minor problems or a major problem. Without intervention, "
                       "problem(s) would accelerate aging rate";
        case 2: return "Has many serious problems. Without intervention, problems may cause "
                       "asset failure";
        case 1: return "Asset has deteriorated to the stage where failure is imminent";
        default: return "";
    }
}

const char* HealthIndex::action(int level) {
    switch (level) {
        case 5: return "Minor Maintenance";
        case 4: return "Normal Maintenance";
        case 3: return "Increase asset inspection and maintenance frequency";
        case 2: return "Start planning process for asset replacement or rehabilitation";
        case 1: return "Asset has reached its end-of-life and should be replaced immediately";
        default: return "";
    }
}

std::vector<int> LabeledDataset::labels() const {
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.label.level);
    return out;
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(cell);
    for (auto& s : cells) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return cells;
}

double parse_number(const std::string& cell, int row, const std::string& column) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        throw DataError("row " + std::to_string(row) + ", column " + column +
                        ": not a number: \"" + cell + "\"");
    return value;
}

int parse_int(const std::string& cell, int row, const std::string& column) {
    int value = 0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw DataError("row " + std::to_string(row) + ", column " + column +
                        ": not an integer: \"" + cell + "\"");
    return value;
}

int find_name(const std::vector<std::string>& names, const std::string& cell) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == cell) return static_cast<int>(i);
    return -1;
}

std::vector<AssetHistory> read_records(const std::string& records_path,
                                       const ConditionSchema& schema) {
    check_schema(schema);
    std::ifstream in(records_path);
    if (!in) throw DataError("cannot read records file: " + records_path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(records_path + ": no records");
    const std::vector<std::string> header = split_line(line);
    std::vector<std::string> expected{"asset_id", "inspection_time"};
    for (const auto& attr : schema.attributes) expected.push_back(attr.name);
    expected.push_back("service_age");
    if (header != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        throw DataError(records_path + ": header mismatch, expected: " + want);
    }

    std::vector<AssetHistory> histories;
    std::unordered_map<std::string, std::size_t> by_id;
    std::set<std::pair<std::string, int>> seen_times;
    int row = 1;
    int data_rows = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != expected.size())
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(expected.size()) + " cells, got " +
                            std::to_string(cells.size()));
        InspectionRecord rec;
        rec.asset_id = cells[0];
        if (rec.asset_id.empty()) throw DataError("row " + std::to_string(row) + ": empty asset_id");
        rec.inspection_time = parse_int(cells[1], row, "inspection_time");
        for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
            const auto& attr = schema.attributes[a];
            const std::string& cell = cells[2 + a];
            switch (attr.kind.type) {
                case AttrType::numerical:
                    rec.values.emplace_back(parse_number(cell, row, attr.name));
                    break;
                case AttrType::ordered:
                    if (find_name(attr.kind.levels, cell) < 0)
                        throw DataError("row " + std::to_string(row) + ", attribute " + attr.name +
                                        ": unknown level \"" + cell + "\"");
                    rec.values.emplace_back(cell);
                    break;
                case AttrType::unordered:
                    if (find_name(attr.kind.categories, cell) < 0)
                        throw DataError("row " + std::to_string(row) + ", attribute " + attr.name +
                                        ": unknown category \"" + cell + "\"");
                    rec.values.emplace_back(cell);
                    break;
            }
        }
        rec.service_age = parse_number(cells.back(), row, "service_age");
        if (rec.service_age < 0)
            throw DataError("row " + std::to_string(row) + ": negative service_age");
        if (!seen_times.insert({rec.asset_id, rec.inspection_time}).second)
            throw DataError("row " + std::to_string(row) + ": duplicate record for asset " +
                            rec.asset_id + " at " + std::to_string(rec.inspection_time));

        auto it = by_id.find(rec.asset_id);
        if (it == by_id.end()) {
            by_id.emplace(rec.asset_id, histories.size());
            histories.push_back(AssetHistory{rec.asset_id, {std::move(rec)}});
        } else {
            histories[it->second].records.push_back(std::move(rec));
        }
        ++data_rows;
    }
    if (data_rows == 0) throw DataError(records_path + ": no records");

    for (auto& h : histories) {
        std::sort(h.records.begin(), h.records.end(),
                  [](const InspectionRecord& a, const InspectionRecord& b) {
                      return a.inspection_time < b.inspection_time;
                  });
    }
    return histories;
}

} // namespace

std::vector<AssetHistory> parse_records_csv(const std::string& records_path,
                                            const ConditionSchema& schema) {
    return read_records(records_path, schema);
}

LabeledDataset parse_csv(const std::string& records_path, const ConditionSchema& schema,
                         const std::string& labels_path, const ParseOptions& opts) {
    std::vector<AssetHistory> histories = read_records(records_path, schema);

    std::ifstream in(labels_path);
    if (!in) throw DataError("cannot read labels file: " + labels_path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(labels_path + ": empty labels file");
    if (split_line(line) != std::vector<std::string>{"asset_id", "health_index", "assigned_year"})
        throw DataError(labels_path + ": header mismatch, expected: asset_id,health_index,assigned_year");

    std::unordered_map<std::string, int> label_by_id;
    int horizon = 0;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != 3)
            throw DataError(labels_path + " row " + std::to_string(row) + ": expected 3 cells");
        const int level = parse_int(cells[1], row, "health_index");
        if (level < 1 || level > 5)
            throw DataError(labels_path + " row " + std::to_string(row) +
                            ": health_index out of range [1,5]: " + cells[1]);
        if (!label_by_id.emplace(cells[0], level).second)
            throw DataError(labels_path + " row " + std::to_string(row) + ": duplicate label for asset " +
                            cells[0]);
        horizon = std::max(horizon, parse_int(cells[2], row, "assigned_year"));
    }
    if (label_by_id.empty()) throw DataError(labels_path + ": no labels");

    // Target sequence length: explicit, or the most common history length.
    int t = 0;
    if (opts.sequence_length) {
        t = *opts.sequence_length;
        if (t < 1) throw ConfigError("sequence_length must be >= 1");
    } else {
        std::map<int, int> length_counts;
        for (const auto& h : histories) length_counts[static_cast<int>(h.records.size())]++;
        int best_count = 0;
        for (const auto& [len, count] : length_counts) {
            if (count >= best_count) {  // ties -> larger length
                best_count = count;
                t = len;
            }
        }
    }

    LabeledDataset ds;
    ds.schema = schema;
    ds.sequence_length = t;
    ds.label_horizon_year = horizon;
    for (auto& h : histories) {
        auto it = label_by_id.find(h.asset_id);
        if (it == label_by_id.end())
            throw DataError("asset " + h.asset_id + " has records but no label");
        const int len = static_cast<int>(h.records.size());
        if (len < t) {
            if (!opts.pad_forward) continue;  // short histories are excluded by default
            std::vector<InspectionRecord> padded(static_cast<std::size_t>(t - len), h.records.front());
            padded.insert(padded.end(), h.records.begin(), h.records.end());
            h.records = std::move(padded);
        } else if (len > t) {
            // keep the most recent T inspections
            h.records.erase(h.records.begin(), h.records.end() - t);
        }
        ds.entries.push_back(LabeledEntry{std::move(h), HealthIndex{it->second}});
    }
    if (ds.entries.empty())
        throw DataError("no asset has " + std::to_string(t) +
                        " inspections; use pad_forward or a smaller sequence length");
    return ds;
}

void write_records_csv(const std::string& path, const ConditionSchema& schema,
                       const std::vector<AssetHistory>& histories) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write records file: " + path);
    out << "asset_id,inspection_time";
    for (const auto& attr : schema.attributes) out << "," << attr.name;
    out << ",service_age\n";
    for (const auto& h : histories) {
        for (const auto& rec : h.records) {
            out << h.asset_id << "," << rec.inspection_time;
            for (const auto& v : rec.values) {
                out << ",";
                if (std::holds_alternative<double>(v))
                    out << format_double(std::get<double>(v));
                else
                    out << std::get<std::string>(v);
            }
            out << "," << format_double(rec.service_age) << "\n";
        }
    }
}

void write_labels_csv(const std::string& path, const LabeledDataset& dataset) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write labels file: " + path);
    out << "asset_id,health_index,assigned_year\n";
    for (const auto& e : dataset.entries) {
        out << e.history.asset_id << "," << e.label.level << "," << dataset.label_horizon_year << "\n";
    }
}

std::vector<std::string> validate(const LabeledDataset& dataset) {
    std::vector<std::string> violations;
    auto add = [&](const std::string& asset, const std::string& reason) {
        violations.push_back(asset + ": " + reason);
    };

    try {
        check_schema(dataset.schema);
    } catch (const DataError& e) {
        add("<schema>", e.what());
    }
    if (dataset.sequence_length < 1) add("<dataset>", "sequence length must be >= 1");

    std::unordered_set<std::string> ids;
    int max_year = 0;
    for (const auto& entry : dataset.entries) {
        const auto& h = entry.history;
        if (!ids.insert(h.asset_id).second) add(h.asset_id, "duplicate asset in dataset");
        if (entry.label.level < 1 || entry.label.level > 5)
            add(h.asset_id, "health index out of range [1,5]");
        if (h.records.empty()) {
            add(h.asset_id, "history has no records");
            continue;
        }
        if (static_cast<int>(h.records.size()) != dataset.sequence_length)
            add(h.asset_id, "sequence length mismatch: has " + std::to_string(h.records.size()) +
                                " records, dataset expects " + std::to_string(dataset.sequence_length));
        for (std::size_t i = 0; i < h.records.size(); ++i) {
            const auto& rec = h.records[i];
            max_year = std::max(max_year, rec.inspection_time);
            if (rec.asset_id != h.asset_id) add(h.asset_id, "record carries a different asset_id");
            if (rec.service_age < 0) add(h.asset_id, "negative service age");
            if (i > 0) {
                if (rec.inspection_time <= h.records[i - 1].inspection_time)
                    add(h.asset_id, "non-increasing time");
                if (rec.service_age < h.records[i - 1].service_age)
                    add(h.asset_id, "decreasing service age");
            }
            if (rec.values.size() != dataset.schema.attributes.size()) {
                add(h.asset_id, "record has " + std::to_string(rec.values.size()) +
                                    " values, schema has " +
                                    std::to_string(dataset.schema.attributes.size()) + " attributes");
                continue;
            }
            for (std::size_t a = 0; a < rec.values.size(); ++a) {
                const auto& attr = dataset.schema.attributes[a];
                const auto& v = rec.values[a];
                switch (attr.kind.type) {
                    case AttrType::numerical:
                        if (!std::holds_alternative<double>(v))
                            add(h.asset_id, "attribute " + attr.name + ": expected a number");
                        else if (!std::isfinite(std::get<double>(v)))
                            add(h.asset_id, "attribute " + attr.name + ": non-finite value");
                        break;
                    case AttrType::ordered:
                        if (!std::holds_alternative<std::string>(v) ||
                            find_name(attr.kind.levels, std::get<std::string>(v)) < 0)
                            add(h.asset_id, "attribute " + attr.name + ": unknown level");
                        break;
                    case AttrType::unordered:
                        if (!std::holds_alternative<std::string>(v) ||
                            find_name(attr.kind.categories, std::get<std::string>(v)) < 0)
                            add(h.asset_id, "attribute " + attr.name + ": unknown category");
                        break;
                }
            }
        }
    }
    if (!dataset.entries.empty() && dataset.label_horizon_year <= max_year)
        add("<dataset>", "label horizon year " + std::to_string(dataset.label_horizon_year) +
                             " is not after the last inspection year " + std::to_string(max_year));
    return violations;
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& dataset,
                                                           double test_fraction,
                                                           std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must be in (0, 1)");
    if (dataset.entries.size() < 2) throw DataError("need at least 2 entries to split");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.entries.size(); ++i)
        by_class[dataset.entries[i].label.level].push_back(i);

    std::map<int, std::size_t> test_counts;
    std::size_t total_test = 0;
    for (const auto& [level, idx] : by_class) {
        const auto want = static_cast<std::size_t>(
            std::llround(static_cast<double>(idx.size()) * test_fraction));
        if (idx.size() == 1 && want == 1)
            throw DataError("class H" + std::to_string(level) +
                            " has a single member and the requested fraction would leave it out of "
                            "the training set; merge classes or choose a different test fraction");
        test_counts[level] = want;
        total_test += want;
    }

    // keep both splits non-empty
    auto largest = [&]() {
        int best_level = 0;
        std::size_t best_size = 0;
        for (const auto& [level, idx] : by_class) {
            if (idx.size() > best_size) {
                best_size = idx.size();
                best_level = level;
            }
        }
        return best_level;
    };
    if (total_test == 0) test_counts[largest()] = 1;
    if (total_test == dataset.entries.size()) test_counts[largest()] -= 1;

    Rng rng(seed);
    std::vector<bool> in_test(dataset.entries.size(), false);
    for (const auto& [level, idx] : by_class) {
        std::vector<std::size_t> pool = idx;
        rng.shuffle(pool);
        for (std::size_t k = 0; k < test_counts[level]; ++k) in_test[pool[k]] = true;
    }

    LabeledDataset train, test;
    train.schema = test.schema = dataset.schema;
    train.sequence_length = test.sequence_length = dataset.sequence_length;
    train.label_horizon_year = test.label_horizon_year = dataset.label_horizon_year;
    for (std::size_t i = 0; i < dataset.entries.size(); ++i)
        (in_test[i] ? test : train).entries.push_back(dataset.entries[i]);
    return {std::move(train), std::move(test)};
}

} // namespace ahi
