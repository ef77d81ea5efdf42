#include "ahi/features.hpp"

#include "ahi/error.hpp"
#include "ahi/hash.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ahi {

double encode_ordered(int level_index, int n_levels) {
    if (n_levels < 1) throw std::invalid_argument("encode_ordered: n_levels must be >= 1");
    if (level_index < 1 || level_index > n_levels)
        throw std::invalid_argument("encode_ordered: level index " + std::to_string(level_index) +
                                    " out of range [1," + std::to_string(n_levels) + "]");
    return (level_index - 0.5) / n_levels;
}

std::vector<double> encode_unordered(int category_index, int n_categories) {
    if (n_categories < 1) throw std::invalid_argument("encode_unordered: n_categories must be >= 1");
    if (category_index < 1 || category_index > n_categories)
        throw std::invalid_argument("encode_unordered: category index " +
                                    std::to_string(category_index) + " out of range [1," +
                                    std::to_string(n_categories) + "]");
    std::vector<double> v(static_cast<std::size_t>(n_categories), 0.0);
    v[static_cast<std::size_t>(category_index - 1)] = 1.0;
    return v;
}

std::pair<double, double> fit_minmax(const std::vector<double>& column) {
    if (column.empty()) throw DataError("fit_minmax: empty column");
    double lo = column.front();
    double hi = column.front();
    for (double v : column) {
        if (!std::isfinite(v)) throw DataError("fit_minmax: non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

double apply_minmax(double x_raw, double min_value, double max_value) {
    if (max_value < min_value) throw std::invalid_argument("apply_minmax: max < min");
    if (max_value == min_value) return 0.5;  // degenerate training range
    const double x = (x_raw - min_value) / (max_value - min_value);
    return std::clamp(x, 0.0, 1.0);  // test-time values beyond the training range
}

std::pair<Matrix, std::vector<double>> fit_pca(const Matrix& x) {
    if (x.rows() < 2) throw DataError("fit_pca: need at least 2 rows");
    const Matrix centered = center_columns(x);
    const SymEigen eig = sym_eig(gram(centered));
    return {eig.eigenvectors, eig.eigenvalues};
}

double pve(const std::vector<double>& eigenvalues, int t) {
    const int n = static_cast<int>(eigenvalues.size());
    if (t < 1 || t > n) throw std::invalid_argument("pve: t out of range [1,n]");
    double total = 0.0;
    for (double l : eigenvalues) total += l;
    if (total <= 0.0) throw NumericError("pve: zero total variance");
    double kept = 0.0;
    for (int j = 0; j < t; ++j) kept += eigenvalues[static_cast<std::size_t>(j)];
    return kept / total;
}

int select_components(const std::vector<double>& eigenvalues, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw ConfigError("select_components: threshold must be in (0,1]");
    const int n = static_cast<int>(eigenvalues.size());
    double total = 0.0;
    for (double l : eigenvalues) total += l;
    if (total <= 0.0) return n;  // degenerate; caller checks the achieved PVE
    double kept = 0.0;
    for (int j = 1; j <= n; ++j) {
        kept += eigenvalues[static_cast<std::size_t>(j - 1)];
        if (kept / total >= threshold) return j;
    }
    return n;
}

ColumnLayout ColumnLayout::from_schema(const ConditionSchema& schema) {
    ColumnLayout layout;
    int minmax_slots = 0;
    auto push = [&](Kind kind, int attribute, int sub, std::string name) {
        const int idx = static_cast<int>(layout.columns.size());
        layout.columns.push_back({kind, attribute, sub, std::move(name)});
        if (kind == Kind::dummy) {
            layout.dummy.push_back(idx);
            layout.minmax_slot.push_back(-1);
        } else {
            layout.non_dummy.push_back(idx);
            layout.minmax_slot.push_back(kind == Kind::numeric ? minmax_slots++ : -1);
        }
    };
    for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
        const auto& attr = schema.attributes[a];
        switch (attr.kind.type) {
            case AttrType::numerical:
                push(Kind::numeric, static_cast<int>(a), 0, attr.name);
                break;
            case AttrType::ordered:
                push(Kind::ordered, static_cast<int>(a), 0, attr.name);
                break;
            case AttrType::unordered:
                for (std::size_t c = 0; c < attr.kind.categories.size(); ++c)
                    push(Kind::dummy, static_cast<int>(a), static_cast<int>(c),
                         attr.name + "=" + attr.kind.categories[c]);
                break;
        }
    }
    if (schema.includes_service_age) push(Kind::numeric, -1, 0, "service_age");
    return layout;
}

std::vector<double> encode_record_raw(const FeaturePipeline& pipeline,
                                      const InspectionRecord& record) {
    const ColumnLayout layout = pipeline.layout();
    if (record.values.size() != pipeline.schema.attributes.size())
        throw DataError("record for asset " + record.asset_id + " has " +
                        std::to_string(record.values.size()) + " values, schema expects " +
                        std::to_string(pipeline.schema.attributes.size()));
    std::vector<double> row(static_cast<std::size_t>(layout.raw_width()), 0.0);
    for (std::size_t c = 0; c < layout.columns.size(); ++c) {
        const auto& col = layout.columns[c];
        if (col.attribute < 0) {
            const auto& mm = pipeline.minmax_bounds[static_cast<std::size_t>(layout.minmax_slot[c])];
            row[c] = apply_minmax(record.service_age, mm.min, mm.max);
            continue;
        }
        const auto& attr = pipeline.schema.attributes[static_cast<std::size_t>(col.attribute)];
        const AttrValue& value = record.values[static_cast<std::size_t>(col.attribute)];
        switch (col.kind) {
            case ColumnLayout::Kind::numeric: {
                if (!std::holds_alternative<double>(value))
                    throw DataError("asset " + record.asset_id + ", attribute " + attr.name +
                                    ": expected a number");
                const auto& mm =
                    pipeline.minmax_bounds[static_cast<std::size_t>(layout.minmax_slot[c])];
                row[c] = apply_minmax(std::get<double>(value), mm.min, mm.max);
                break;
            }
            case ColumnLayout::Kind::ordered: {
                const auto& name = std::get<std::string>(value);
                const auto it =
                    std::find(attr.kind.levels.begin(), attr.kind.levels.end(), name);
                if (it == attr.kind.levels.end())
                    throw DataError("asset " + record.asset_id + ", attribute " + attr.name +
                                    ": unknown level \"" + name + "\"");
                const int i = static_cast<int>(it - attr.kind.levels.begin()) + 1;
                row[c] = encode_ordered(i, static_cast<int>(attr.kind.levels.size()));
                break;
            }
            case ColumnLayout::Kind::dummy: {
                const auto& name = std::get<std::string>(value);
                const auto it =
                    std::find(attr.kind.categories.begin(), attr.kind.categories.end(), name);
                if (it == attr.kind.categories.end())
                    throw DataError("asset " + record.asset_id + ", attribute " + attr.name +
                                    ": unknown category \"" + name + "\"");
                row[c] = (static_cast<int>(it - attr.kind.categories.begin()) == col.sub) ? 1.0 : 0.0;
                break;
            }
        }
    }
    return row;
}

namespace {

// All records of all entries, in entry order then time order.
std::vector<const InspectionRecord*> pooled_records(const LabeledDataset& ds) {
    std::vector<const InspectionRecord*> out;
    for (const auto& e : ds.entries)
        for (const auto& rec : e.history.records) out.push_back(&rec);
    return out;
}

} // namespace

FeaturePipeline fit_pipeline(const LabeledDataset& train, std::optional<double> pca_threshold) {
    check_schema(train.schema);
    if (train.entries.empty()) throw DataError("fit_pipeline: empty training set");

    FeaturePipeline pipeline;
    pipeline.schema = train.schema;
    const ColumnLayout layout = ColumnLayout::from_schema(train.schema);
    pipeline.raw_width = layout.raw_width();

    const std::vector<const InspectionRecord*> records = pooled_records(train);

    // min-max bounds per numeric column, training data only
    int n_slots = 0;
    for (int slot : layout.minmax_slot) n_slots = std::max(n_slots, slot + 1);
    pipeline.minmax_bounds.resize(static_cast<std::size_t>(n_slots));
    for (std::size_t c = 0; c < layout.columns.size(); ++c) {
        const int slot = layout.minmax_slot[c];
        if (slot < 0) continue;
        const auto& col = layout.columns[c];
        std::vector<double> values;
        values.reserve(records.size());
        for (const auto* rec : records) {
            if (col.attribute < 0) {
                values.push_back(rec->service_age);
            } else {
                const AttrValue& v = rec->values.at(static_cast<std::size_t>(col.attribute));
                if (!std::holds_alternative<double>(v))
                    throw DataError("attribute " + col.name + ": expected a number");
                values.push_back(std::get<double>(v));
            }
        }
        const auto [lo, hi] = fit_minmax(values);
        pipeline.minmax_bounds[static_cast<std::size_t>(slot)] = {lo, hi};
    }
    pipeline.out_width = pipeline.raw_width;

    if (pca_threshold) {
        // PCA over the normalized non-dummy columns, all timesteps pooled
        const int nd = static_cast<int>(layout.non_dummy.size());
        if (nd == 0) throw DataError("fit_pipeline: no non-dummy columns for PCA");
        if (records.size() < 2) throw DataError("fit_pipeline: need at least 2 rows for PCA");
        Matrix x(static_cast<int>(records.size()), nd);
        for (std::size_t r = 0; r < records.size(); ++r) {
            const std::vector<double> raw = encode_record_raw(pipeline, *records[r]);
            for (int j = 0; j < nd; ++j)
                x(static_cast<int>(r), j) = raw[static_cast<std::size_t>(layout.non_dummy[j])];
        }
        auto [p_full, lambda] = fit_pca(x);
        double total = 0.0;
        for (double l : lambda) total += l;
        if (total <= 0.0)
            throw NumericError("fit_pipeline: training features have zero variance, PCA impossible");

        const int j = select_components(lambda, *pca_threshold);
        PcaModel pca;
        pca.kept_components = j;
        pca.threshold = *pca_threshold;
        pca.pve_achieved = pve(lambda, j);
        pca.column_means = column_means(x);
        pca.projection = Matrix(nd, j);
        for (int r = 0; r < nd; ++r)
            for (int c = 0; c < j; ++c) pca.projection(r, c) = p_full(r, c);
        pipeline.pca = std::move(pca);
        pipeline.out_width = j + static_cast<int>(layout.dummy.size());
    }
    return pipeline;
}

namespace {

std::vector<double> transform_record(const FeaturePipeline& pipeline, const ColumnLayout& layout,
                                     const InspectionRecord& record) {
    std::vector<double> raw = encode_record_raw(pipeline, record);
    if (!pipeline.pca) return raw;

    const PcaModel& pca = *pipeline.pca;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(pipeline.out_width));
    for (int c = 0; c < pca.kept_components; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < layout.non_dummy.size(); ++j) {
            const double centered =
                raw[static_cast<std::size_t>(layout.non_dummy[j])] - pca.column_means[j];
            acc += centered * pca.projection(static_cast<int>(j), c);
        }
        out.push_back(acc);
    }
    for (int idx : layout.dummy) out.push_back(raw[static_cast<std::size_t>(idx)]);
    return out;
}

SequenceTensor transform_impl(const FeaturePipeline& pipeline,
                              const std::vector<const AssetHistory*>& histories,
                              int sequence_length) {
    const ColumnLayout layout = pipeline.layout();
    SequenceTensor tensor;
    tensor.n_assets = static_cast<int>(histories.size());
    tensor.timesteps = sequence_length;
    tensor.width = pipeline.out_width;
    tensor.values.reserve(static_cast<std::size_t>(tensor.n_assets) * sequence_length *
                          pipeline.out_width);
    for (const auto* h : histories) {
        if (static_cast<int>(h->records.size()) != sequence_length)
            throw DataError("asset " + h->asset_id + " has " + std::to_string(h->records.size()) +
                            " inspections, expected " + std::to_string(sequence_length));
        tensor.asset_ids.push_back(h->asset_id);
        for (const auto& rec : h->records) {
            const std::vector<double> row = transform_record(pipeline, layout, rec);
            tensor.values.insert(tensor.values.end(), row.begin(), row.end());
        }
    }
    return tensor;
}

} // namespace

SequenceTensor transform(const FeaturePipeline& pipeline, const LabeledDataset& dataset) {
    std::vector<const AssetHistory*> hs;
    hs.reserve(dataset.entries.size());
    for (const auto& e : dataset.entries) hs.push_back(&e.history);
    return transform_impl(pipeline, hs, dataset.sequence_length);
}

SequenceTensor transform_histories(const FeaturePipeline& pipeline,
                                   const std::vector<AssetHistory>& histories,
                                   int sequence_length) {
    std::vector<const AssetHistory*> hs;
    hs.reserve(histories.size());
    for (const auto& h : histories) hs.push_back(&h);
    return transform_impl(pipeline, hs, sequence_length);
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
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j.at(r).size()) != cols) throw DataError("matrix JSON: ragged rows");
        for (int c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

} // namespace

nlohmann::json FeaturePipeline::to_json() const {
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto& mm : minmax_bounds) bounds.push_back({mm.min, mm.max});
    nlohmann::json j{{"schema", schema.to_json()},
                     {"minmax_bounds", std::move(bounds)},
                     {"raw_width", raw_width},
                     {"out_width", out_width}};
    if (pca) {
        j["pca"] = nlohmann::json{{"projection", matrix_to_json(pca->projection)},
                                  {"column_means", pca->column_means},
                                  {"kept_components", pca->kept_components},
                                  {"pve_achieved", pca->pve_achieved},
                                  {"threshold", pca->threshold}};
    } else {
        j["pca"] = nullptr;
    }
    return j;
}

FeaturePipeline FeaturePipeline::from_json(const nlohmann::json& j) {
    FeaturePipeline p;
    p.schema = ConditionSchema::from_json(j.at("schema"));
    for (const auto& b : j.at("minmax_bounds"))
        p.minmax_bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    p.raw_width = j.at("raw_width").get<int>();
    p.out_width = j.at("out_width").get<int>();
    if (!j.at("pca").is_null()) {
        PcaModel pca;
        const auto& pj = j.at("pca");
        pca.projection = matrix_from_json(pj.at("projection"));
        pca.column_means = pj.at("column_means").get<std::vector<double>>();
        pca.kept_components = pj.at("kept_components").get<int>();
        pca.pve_achieved = pj.at("pve_achieved").get<double>();
        pca.threshold = pj.at("threshold").get<double>();
        p.pca = std::move(pca);
    }
    return p;
}

void FeaturePipeline::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write pipeline file: " + path);
    out << to_json().dump(2) << "\n";
}

FeaturePipeline FeaturePipeline::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read pipeline file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("pipeline file " + path + ": " + e.what());
    }
    return from_json(j);
}

std::string FeaturePipeline::hash() const {
    return hex64(fnv1a64(to_json().dump()));
}

} // namespace ahi
