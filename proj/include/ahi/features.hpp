#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ahi/dataset.hpp"
#include "ahi/linalg.hpp"
#include "json.hpp"

namespace ahi {

// Rank encoding for an ordered rating: x = (i - 1/2) / N for rank i of N.
// Outputs are equally spaced with gap 1/N, symmetric about 0.5.
double encode_ordered(int level_index, int n_levels);

// One-hot dummy expansion of category index (1-based) among n_categories.
std::vector<double> encode_unordered(int category_index, int n_categories);

// Observed extrema of a training column.
std::pair<double, double> fit_minmax(const std::vector<double>& column);

// (x - min) / (max - min), clamped to [0,1]; a degenerate range maps to 0.5.
double apply_minmax(double x_raw, double min_value, double max_value);

// Centers the columns of X, eigendecomposes the covariance, returns the
// eigenvector matrix (columns ordered by descending eigenvalue) and the
// eigenvalues.
std::pair<Matrix, std::vector<double>> fit_pca(const Matrix& x);

// Proportion of variance explained by the leading t eigenvalues.
double pve(const std::vector<double>& eigenvalues, int t);

// Smallest component count whose PVE reaches the threshold.
int select_components(const std::vector<double>& eigenvalues, double threshold);

struct MinMax {
    double min = 0.0;
    double max = 0.0;
};

struct PcaModel {
    Matrix projection;                 // (non-dummy width) x kept_components
    std::vector<double> column_means;  // non-dummy columns, training means
    int kept_components = 0;
    double pve_achieved = 0.0;
    double threshold = 0.0;
};

// Raw feature column layout derived from a schema: one column per numerical
// attribute, one per ordered attribute, N dummies per unordered attribute,
// then service age. Dummy columns bypass PCA.
struct ColumnLayout {
    enum class Kind { numeric, ordered, dummy };
    struct Column {
        Kind kind;
        int attribute;  // -1 for service age
        int sub;        // dummy position within its attribute, else 0
        std::string name;
    };
    std::vector<Column> columns;
    std::vector<int> non_dummy;      // raw indices entering PCA
    std::vector<int> dummy;          // raw indices bypassing PCA
    std::vector<int> minmax_slot;    // per raw column: index into bounds, -1 if none

    static ColumnLayout from_schema(const ConditionSchema& schema);
    int raw_width() const { return static_cast<int>(columns.size()); }
};

// Fitted feature transform. Fit once on training data, then apply to any
// dataset with the same schema; transform never mutates the pipeline.
struct FeaturePipeline {
    ConditionSchema schema;
    std::vector<MinMax> minmax_bounds;  // one per numeric raw column
    std::optional<PcaModel> pca;
    int raw_width = 0;
    int out_width = 0;

    ColumnLayout layout() const { return ColumnLayout::from_schema(schema); }

    nlohmann::json to_json() const;
    static FeaturePipeline from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static FeaturePipeline load(const std::string& path);

    // Fingerprint of the serialized pipeline; models refuse to run against
    // a pipeline whose hash differs from the one they were trained with.
    std::string hash() const;
};

struct SequenceTensor {
    int n_assets = 0;
    int timesteps = 0;
    int width = 0;
    std::vector<double> values;  // [asset][timestep][column], row-major
    std::vector<std::string> asset_ids;

    double at(int asset, int t, int col) const {
        return values[(static_cast<std::size_t>(asset) * timesteps + t) * width + col];
    }
    const double* sequence(int asset) const {
        return values.data() + static_cast<std::size_t>(asset) * timesteps * width;
    }
};

// Fits encoders, min-max bounds and (optionally) PCA on the training set
// only. PCA pools all timesteps as rows so every step shares one projection.
FeaturePipeline fit_pipeline(const LabeledDataset& train,
                             std::optional<double> pca_threshold = std::nullopt);

SequenceTensor transform(const FeaturePipeline& pipeline, const LabeledDataset& dataset);
SequenceTensor transform_histories(const FeaturePipeline& pipeline,
                                   const std::vector<AssetHistory>& histories,
                                   int sequence_length);

// Raw (pre-PCA) encoding of a single record; exposed for tests.
std::vector<double> encode_record_raw(const FeaturePipeline& pipeline,
                                      const InspectionRecord& record);

} // namespace ahi
