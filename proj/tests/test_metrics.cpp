#include "doctest.h"

#include "ahi/error.hpp"
#include "ahi/metrics.hpp"
#include "ahi/rng.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

using namespace ahi;

TEST_SUITE("metrics") {

TEST_CASE("confusion counting") {
    SUBCASE("perfect predictions sit on the diagonal") {
        const std::vector<int> labels{1, 2, 3, 4, 5, 3, 2};
        const ConfusionMatrix cm = confusion(labels, labels);
        CHECK(cm.trace() == 7);
        CHECK(cm.total() == 7);
    }
    SUBCASE("hand-counted example") {
        const ConfusionMatrix cm = confusion({1, 1, 2}, {1, 2, 2});
        CHECK(cm.at(1, 1) == 1);
        CHECK(cm.at(1, 2) == 1);
        CHECK(cm.at(2, 2) == 1);
        CHECK(cm.total() == 3);
    }
    SUBCASE("empty input gives the zero matrix") {
        const ConfusionMatrix cm = confusion({}, {});
        CHECK(cm.total() == 0);
    }
    SUBCASE("length mismatch and range errors") {
        CHECK_THROWS_AS(confusion({1, 2}, {1}), DataError);
        CHECK_THROWS_AS(confusion({1, 6}, {1, 1}), DataError);
        CHECK_THROWS_AS(confusion({1, 0}, {1, 1}), DataError);
    }
}

TEST_CASE("precision_recall hand arithmetic") {
    // class 1: TP=2, FP=0, FN=1
    ConfusionMatrix cm(5);
    cm.add(1, 1);
    cm.add(1, 1);
    cm.add(1, 2);
    const PrecisionRecall pr = precision_recall(cm, 1);
    REQUIRE(pr.precision.has_value());
    REQUIRE(pr.recall.has_value());
    CHECK(*pr.precision == 1.0);
    CHECK(*pr.recall == doctest::Approx(0.6667).epsilon(1e-4));
    CHECK(pr.support == 3);

    SUBCASE("class never predicted and never present is undefined/undefined") {
        const PrecisionRecall empty = precision_recall(cm, 5);
        CHECK(!empty.precision.has_value());
        CHECK(!empty.recall.has_value());
        CHECK(empty.support == 0);
    }
    SUBCASE("perfect diagonal") {
        const ConfusionMatrix diag = confusion({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5});
        for (int c = 1; c <= 5; ++c) {
            const PrecisionRecall p = precision_recall(diag, c);
            CHECK(*p.precision == 1.0);
            CHECK(*p.recall == 1.0);
        }
    }
}

TEST_CASE("macro averages match the worked two-class example") {
    // [[2,1],[0,3]]: P = (1.0, 0.75), R = (2/3, 1.0)
    ConfusionMatrix cm(2);
    cm.add(1, 1);
    cm.add(1, 1);
    cm.add(1, 2);
    cm.add(2, 2);
    cm.add(2, 2);
    cm.add(2, 2);
    const MacroScores scores = macro(cm);
    CHECK(std::abs(scores.mp - 0.875) < 1e-12);
    CHECK(std::abs(scores.mr - (2.0 / 3.0 + 1.0) / 2.0) < 1e-12);
    CHECK(scores.undefined_precision == 0);
    CHECK(scores.undefined_recall == 0);
}

TEST_CASE("macro over five classes with perfect predictions") {
    const ConfusionMatrix cm = confusion({1, 2, 3, 4, 5, 1, 5}, {1, 2, 3, 4, 5, 1, 5});
    const MacroScores scores = macro(cm);
    CHECK(scores.mp == 1.0);
    CHECK(scores.mr == 1.0);
}

TEST_CASE("undefined classes contribute zero while the divisor stays five") {
    // only H3 ever appears, predicted perfectly: MP = MR = 1/5
    const ConfusionMatrix cm = confusion({3, 3, 3}, {3, 3, 3});
    const MacroScores scores = macro(cm);
    CHECK(std::abs(scores.mp - 0.2) < 1e-12);
    CHECK(std::abs(scores.mr - 0.2) < 1e-12);
    CHECK(scores.undefined_precision == 4);
    CHECK(scores.undefined_recall == 4);
}

TEST_CASE("constant predictor on a balanced set") {
    // 5 classes x 20 samples, model always answers H3
    std::vector<int> truth, predicted;
    for (int level = 1; level <= 5; ++level)
        for (int k = 0; k < 20; ++k) {
            truth.push_back(level);
            predicted.push_back(3);
        }
    const EvaluationReport rep = build_report(confusion(truth, predicted));
    CHECK(*rep.per_class[2].recall == 1.0);
    CHECK(*rep.per_class[2].precision == doctest::Approx(0.2).epsilon(1e-12));
    for (int c : {0, 1, 3, 4}) {
        CHECK(!rep.per_class[static_cast<std::size_t>(c)].precision.has_value());
        CHECK(*rep.per_class[static_cast<std::size_t>(c)].recall == 0.0);
    }
    CHECK(rep.undefined_classes == 4);
    CHECK(rep.n_samples == 100);
}

TEST_CASE("per-class counts agree with a brute-force per-sample oracle") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.index(60);
        std::vector<int> truth(n), predicted(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = 1 + static_cast<int>(rng.index(5));
            predicted[i] = 1 + static_cast<int>(rng.index(5));
        }
        const ConfusionMatrix cm = confusion(truth, predicted);
        for (int c = 1; c <= 5; ++c) {
            long tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (truth[i] == c && predicted[i] == c) tp++;
                if (truth[i] != c && predicted[i] == c) fp++;
                if (truth[i] == c && predicted[i] != c) fn++;
            }
            CHECK(cm.at(c, c) == tp);
            CHECK(cm.col_sum(c) - cm.at(c, c) == fp);
            CHECK(cm.row_sum(c) - cm.at(c, c) == fn);
            const PrecisionRecall pr = precision_recall(cm, c);
            if (tp + fp > 0) CHECK(*pr.precision == static_cast<double>(tp) / (tp + fp));
            if (tp + fn > 0) CHECK(*pr.recall == static_cast<double>(tp) / (tp + fn));
        }
    }
}

TEST_CASE("micro consistency") {
    Rng rng(77);
    std::vector<int> truth(333), predicted(333);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = 1 + static_cast<int>(rng.index(5));
        predicted[i] = 1 + static_cast<int>(rng.index(5));
    }
    const ConfusionMatrix cm = confusion(truth, predicted);
    std::int64_t tp_sum = 0, support_sum = 0;
    for (int c = 1; c <= 5; ++c) {
        tp_sum += cm.at(c, c);
        support_sum += cm.row_sum(c);
    }
    CHECK(tp_sum == cm.trace());
    CHECK(support_sum == 333);
}

TEST_CASE("relabeling permutes per-class scores and preserves the macros") {
    Rng rng(31);
    std::vector<int> truth(200), predicted(200);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = 1 + static_cast<int>(rng.index(5));
        predicted[i] = 1 + static_cast<int>(rng.index(5));
    }
    const std::array<int, 6> pi{0, 3, 5, 1, 2, 4};  // pi[level], 1-based levels
    std::vector<int> truth_p(truth), predicted_p(predicted);
    for (auto& v : truth_p) v = pi[static_cast<std::size_t>(v)];
    for (auto& v : predicted_p) v = pi[static_cast<std::size_t>(v)];

    const ConfusionMatrix cm = confusion(truth, predicted);
    const ConfusionMatrix cm_p = confusion(truth_p, predicted_p);
    for (int c = 1; c <= 5; ++c) {
        const PrecisionRecall a = precision_recall(cm, c);
        const PrecisionRecall b = precision_recall(cm_p, pi[static_cast<std::size_t>(c)]);
        CHECK(a.precision.has_value() == b.precision.has_value());
        if (a.precision) CHECK(*a.precision == *b.precision);
        CHECK(a.recall.has_value() == b.recall.has_value());
        if (a.recall) CHECK(*a.recall == *b.recall);
    }
    const MacroScores sa = macro(cm);
    const MacroScores sb = macro(cm_p);
    CHECK(std::abs(sa.mp - sb.mp) < 1e-12);
    CHECK(std::abs(sa.mr - sb.mr) < 1e-12);
}

TEST_CASE("report JSON is deterministic and carries the documented fields") {
    const ConfusionMatrix cm = confusion({1, 2, 3, 3, 4}, {1, 2, 3, 4, 4});
    const EvaluationReport rep = build_report(cm);
    const std::string once = rep.to_json().dump(2);
    const std::string twice = build_report(cm).to_json().dump(2);
    CHECK(once == twice);
    const auto j = rep.to_json();
    CHECK(j.contains("confusion"));
    CHECK(j.contains("per_class"));
    CHECK(j.contains("mp"));
    CHECK(j.contains("mr"));
    CHECK(j.contains("n"));
    CHECK(j.contains("undefined_classes"));
    CHECK(j["per_class"][4]["precision"].is_null());  // H5 never predicted or present
}

TEST_CASE("fixed-width table matches the golden layout") {
    std::vector<int> truth, predicted;
    auto emit = [&](int t, int p, int count) {
        for (int k = 0; k < count; ++k) {
            truth.push_back(t);
            predicted.push_back(p);
        }
    };
    // a fixed confusion scenario, including one class with no support
    emit(1, 1, 6);
    emit(1, 2, 2);
    emit(2, 2, 8);
    emit(2, 3, 1);
    emit(3, 3, 9);
    emit(4, 4, 7);
    emit(4, 3, 3);
    const EvaluationReport rep = build_report(confusion(truth, predicted));
    const std::string text = rep.to_text();

    std::ifstream golden(std::string(AHI_GOLDEN_DIR) + "/report_table.txt");
    REQUIRE_MESSAGE(golden.good(), "golden file missing under " AHI_GOLDEN_DIR);
    std::ostringstream buf;
    buf << golden.rdbuf();
    CHECK(text == buf.str());
}

} // TEST_SUITE
