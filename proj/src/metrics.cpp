#include "ahi/metrics.hpp"

#include "ahi/error.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ahi {

ConfusionMatrix::ConfusionMatrix(int n_classes) : n_(n_classes) {
    if (n_classes < 1) throw std::invalid_argument("ConfusionMatrix: n_classes must be >= 1");
    counts_.assign(static_cast<std::size_t>(n_) * n_, 0);
}

std::int64_t ConfusionMatrix::at(int true_class, int predicted_class) const {
    if (true_class < 1 || true_class > n_ || predicted_class < 1 || predicted_class > n_)
        throw std::invalid_argument("ConfusionMatrix: class out of range");
    return counts_[static_cast<std::size_t>(true_class - 1) * n_ + (predicted_class - 1)];
}

void ConfusionMatrix::add(int true_class, int predicted_class) {
    if (true_class < 1 || true_class > n_ || predicted_class < 1 || predicted_class > n_)
        throw DataError("confusion: label out of range [1," + std::to_string(n_) + "]");
    counts_[static_cast<std::size_t>(true_class - 1) * n_ + (predicted_class - 1)]++;
}

std::int64_t ConfusionMatrix::row_sum(int true_class) const {
    std::int64_t s = 0;
    for (int p = 1; p <= n_; ++p) s += at(true_class, p);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int predicted_class) const {
    std::int64_t s = 0;
    for (int t = 1; t <= n_; ++t) s += at(t, predicted_class);
    return s;
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t s = 0;
    for (std::int64_t c : counts_) s += c;
    return s;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t s = 0;
    for (int i = 1; i <= n_; ++i) s += at(i, i);
    return s;
}

ConfusionMatrix confusion(const std::vector<int>& true_labels,
                          const std::vector<int>& predicted_labels, int n_classes) {
    if (true_labels.size() != predicted_labels.size())
        throw DataError("confusion: label vectors differ in length");
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < true_labels.size(); ++i)
        cm.add(true_labels[i], predicted_labels[i]);
    return cm;
}

PrecisionRecall precision_recall(const ConfusionMatrix& cm, int class_level) {
    const std::int64_t tp = cm.at(class_level, class_level);
    const std::int64_t fp = cm.col_sum(class_level) - tp;
    const std::int64_t fn = cm.row_sum(class_level) - tp;
    PrecisionRecall pr;
    pr.support = tp + fn;
    if (tp + fp > 0) pr.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) pr.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return pr;
}

MacroScores macro(const ConfusionMatrix& cm) {
    MacroScores scores;
    double p_sum = 0.0;
    double r_sum = 0.0;
    for (int c = 1; c <= cm.n_classes(); ++c) {
        const PrecisionRecall pr = precision_recall(cm, c);
        if (pr.precision)
            p_sum += *pr.precision;
        else
            scores.undefined_precision++;
        if (pr.recall)
            r_sum += *pr.recall;
        else
            scores.undefined_recall++;
    }
    // undefined classes contribute 0; the divisor stays at the class count
    scores.mp = p_sum / cm.n_classes();
    scores.mr = r_sum / cm.n_classes();
    return scores;
}

EvaluationReport build_report(const ConfusionMatrix& cm) {
    EvaluationReport rep;
    rep.confusion = cm;
    for (int c = 1; c <= cm.n_classes(); ++c) {
        rep.per_class.push_back(precision_recall(cm, c));
        const auto& pr = rep.per_class.back();
        if (!pr.precision || !pr.recall) rep.undefined_classes++;
    }
    const MacroScores scores = macro(cm);
    rep.mp = scores.mp;
    rep.mr = scores.mr;
    rep.n_samples = cm.total();
    return rep;
}

std::vector<std::vector<double>> predict_probabilities(const AnyModel& model,
                                                       const SequenceTensor& tensor) {
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(tensor.n_assets));
    if (std::holds_alternative<SequenceClassifier>(model)) {
        const auto& m = std::get<SequenceClassifier>(model);
        if (m.config.input_width != tensor.width)
            throw DataError("model expects input width " + std::to_string(m.config.input_width) +
                            ", tensor has " + std::to_string(tensor.width));
        if (m.config.timesteps != tensor.timesteps)
            throw DataError("model expects " + std::to_string(m.config.timesteps) +
                            " timesteps, tensor has " + std::to_string(tensor.timesteps));
        for (int i = 0; i < tensor.n_assets; ++i) out.push_back(forward(m, tensor.sequence(i)));
    } else {
        const auto& m = std::get<FnnBaseline>(model);
        if (m.config.input_width != tensor.width)
            throw DataError("model expects input width " + std::to_string(m.config.input_width) +
                            ", tensor has " + std::to_string(tensor.width));
        // the snapshot model consumes only the latest inspection
        for (int i = 0; i < tensor.n_assets; ++i) {
            const double* last =
                tensor.sequence(i) + static_cast<std::size_t>(tensor.timesteps - 1) * tensor.width;
            out.push_back(forward_fnn(m, last));
        }
    }
    return out;
}

std::vector<int> predict_levels(const AnyModel& model, const SequenceTensor& tensor) {
    std::vector<int> levels;
    for (const auto& probs : predict_probabilities(model, tensor))
        levels.push_back(argmax_lowest(probs) + 1);
    return levels;
}

EvaluationReport report(const AnyModel& model, const FeaturePipeline& pipeline,
                        const LabeledDataset& test) {
    const SequenceTensor tensor = transform(pipeline, test);
    const std::vector<int> predicted = predict_levels(model, tensor);
    return build_report(confusion(test.labels(), predicted, 5));
}

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (int t = 1; t <= confusion.n_classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 1; p <= confusion.n_classes(); ++p) row.push_back(confusion.at(t, p));
        rows.push_back(std::move(row));
    }
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const auto& pr = per_class[c];
        per.push_back(nlohmann::json{
            {"class", static_cast<int>(c) + 1},
            {"precision", pr.precision ? nlohmann::json(*pr.precision) : nlohmann::json(nullptr)},
            {"recall", pr.recall ? nlohmann::json(*pr.recall) : nlohmann::json(nullptr)},
            {"support", pr.support}});
    }
    return nlohmann::json{{"confusion", std::move(rows)}, {"per_class", std::move(per)},
                          {"mp", mp},                     {"mr", mr},
                          {"n", n_samples},               {"undefined_classes", undefined_classes}};
}

namespace {

std::string cell_value(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

std::string pad_left(const std::string& s, int width) {
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))),
                       ' ') +
           s;
}

} // namespace

std::string EvaluationReport::to_text() const {
    const int label_width = 14;
    const int col_width = 9;
    std::string out;

    auto row = [&](const std::string& label, const std::vector<std::string>& cells) {
        std::string line = label + std::string(static_cast<std::size_t>(std::max(
                                                   0, label_width - static_cast<int>(label.size()))),
                                               ' ');
        for (const auto& c : cells) line += pad_left(c, col_width);
        out += line + "\n";
    };

    std::vector<std::string> header;
    for (int c = 1; c <= confusion.n_classes(); ++c) header.push_back("H" + std::to_string(c));
    header.push_back("Overall");
    row("Health Index", header);

    std::vector<std::string> p_cells, r_cells, s_cells;
    char buf[16];
    for (const auto& pr : per_class) {
        p_cells.push_back(cell_value(pr.precision));
        r_cells.push_back(cell_value(pr.recall));
        s_cells.push_back(std::to_string(pr.support));
    }
    std::snprintf(buf, sizeof(buf), "%.4f", mp);
    p_cells.push_back(buf);
    std::snprintf(buf, sizeof(buf), "%.4f", mr);
    r_cells.push_back(buf);
    s_cells.push_back(std::to_string(n_samples));
    row("Precision/MP", p_cells);
    row("Recall/MR", r_cells);
    row("Support", s_cells);
    return out;
}

} // namespace ahi
