#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ahi/dataset.hpp"
#include "ahi/features.hpp"
#include "ahi/network.hpp"
#include "json.hpp"

namespace ahi {

// Row = true class, column = predicted class. Classes are 1-based health
// levels at this interface. n_classes is 5 for the health problem; smaller
// matrices exist for unit arithmetic.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int n_classes = 5);

    int n_classes() const { return n_; }
    std::int64_t at(int true_class, int predicted_class) const;
    void add(int true_class, int predicted_class);

    std::int64_t row_sum(int true_class) const;
    std::int64_t col_sum(int predicted_class) const;
    std::int64_t total() const;
    std::int64_t trace() const;

private:
    int n_;
    std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion(const std::vector<int>& true_labels,
                          const std::vector<int>& predicted_labels, int n_classes = 5);

// TP/(TP+FP) and TP/(TP+FN); 0/0 is reported as nullopt, not 0.
struct PrecisionRecall {
    std::optional<double> precision;
    std::optional<double> recall;
    std::int64_t support = 0;  // TP + FN
};

PrecisionRecall precision_recall(const ConfusionMatrix& cm, int class_level);

// Unweighted averages over all n_classes classes; undefined entries
// contribute 0 while the divisor stays n_classes.
struct MacroScores {
    double mp = 0.0;
    double mr = 0.0;
    int undefined_precision = 0;
    int undefined_recall = 0;
};

MacroScores macro(const ConfusionMatrix& cm);

struct EvaluationReport {
    ConfusionMatrix confusion{5};
    std::vector<PrecisionRecall> per_class;  // index 0 = H1
    double mp = 0.0;
    double mr = 0.0;
    int undefined_classes = 0;  // classes with undefined precision or recall
    std::int64_t n_samples = 0;

    nlohmann::json to_json() const;
    // Fixed-width table in the layout of the health-index evaluation tables.
    std::string to_text() const;
};

EvaluationReport build_report(const ConfusionMatrix& cm);

// Transform, forward, argmax (ties to the most severe level), count.
EvaluationReport report(const AnyModel& model, const FeaturePipeline& pipeline,
                        const LabeledDataset& test);

// Predicted health levels (1..5) for every asset in the tensor.
std::vector<int> predict_levels(const AnyModel& model, const SequenceTensor& tensor);
std::vector<std::vector<double>> predict_probabilities(const AnyModel& model,
                                                       const SequenceTensor& tensor);

} // namespace ahi
