#include "doctest.h"

#include "ahi/error.hpp"
#include "ahi/features.hpp"
#include "ahi/rng.hpp"
#include "ahi/synth.hpp"

#include <cmath>

using namespace ahi;

namespace {

// small labeled dataset with one numerical column, direct construction
LabeledDataset tiny_dataset(const std::vector<std::vector<double>>& x_per_asset) {
    LabeledDataset ds;
    ds.schema.attributes = {{"x", ConditionKind::numerical()}};
    ds.sequence_length = static_cast<int>(x_per_asset.front().size());
    ds.label_horizon_year = 2020;
    int counter = 0;
    for (const auto& xs : x_per_asset) {
        AssetHistory h;
        h.asset_id = "a" + std::to_string(counter++);
        int year = 2000;
        for (double v : xs) {
            InspectionRecord rec;
            rec.asset_id = h.asset_id;
            rec.inspection_time = year++;
            rec.values = {AttrValue{v}};
            rec.service_age = 1.0 + year - 2000;
            h.records.push_back(rec);
        }
        ds.entries.push_back({h, HealthIndex{1 + counter % 5}});
    }
    return ds;
}

} // namespace

TEST_SUITE("features") {

TEST_CASE("encode_ordered follows the rank formula") {
    // (i - 1/2) / N; low of three reads 0.17 after display rounding
    CHECK(encode_ordered(1, 3) == 0.5 / 3.0);
    CHECK(std::round(encode_ordered(1, 3) * 100.0) / 100.0 == 0.17);
    CHECK(encode_ordered(2, 3) == 0.5);
    CHECK(encode_ordered(3, 3) == 2.5 / 3.0);
    CHECK(std::round(encode_ordered(3, 3) * 100.0) / 100.0 == 0.83);
    CHECK(encode_ordered(1, 1) == 0.5);

    SUBCASE("equally spaced, symmetric about one half") {
        for (int n = 1; n <= 10; ++n) {
            for (int i = 1; i <= n; ++i) {
                const double x = encode_ordered(i, n);
                CHECK(x > 0.0);
                CHECK(x < 1.0);
                if (i > 1) CHECK(std::abs(x - encode_ordered(i - 1, n) - 1.0 / n) < 1e-12);
                CHECK(std::abs(x + encode_ordered(n + 1 - i, n) - 1.0) < 1e-12);
            }
        }
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(encode_ordered(0, 3), std::invalid_argument);
        CHECK_THROWS_AS(encode_ordered(4, 3), std::invalid_argument);
        CHECK_THROWS_AS(encode_ordered(1, 0), std::invalid_argument);
    }
}

TEST_CASE("encode_unordered builds one-hot dummies") {
    CHECK(encode_unordered(3, 5) == std::vector<double>{0, 0, 1, 0, 0});
    CHECK(encode_unordered(5, 5) == std::vector<double>{0, 0, 0, 0, 1});
    CHECK(encode_unordered(1, 2) == std::vector<double>{1, 0});
    SUBCASE("component sum is exactly one for every input") {
        for (int n = 1; n <= 10; ++n)
            for (int i = 1; i <= n; ++i) {
                double sum = 0.0;
                for (double v : encode_unordered(i, n)) sum += v;
                CHECK(sum == 1.0);
            }
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(encode_unordered(0, 2), std::invalid_argument);
        CHECK_THROWS_AS(encode_unordered(3, 2), std::invalid_argument);
    }
}

TEST_CASE("fit_minmax observes training extrema") {
    // the C1n column of the historical table example
    CHECK(fit_minmax({26, 20, 5, 37, 32, 22}) == std::pair<double, double>{5, 37});
    CHECK(fit_minmax({4, 4}) == std::pair<double, double>{4, 4});
    CHECK(fit_minmax({7}) == std::pair<double, double>{7, 7});
    CHECK_THROWS_AS(fit_minmax({}), DataError);
}

TEST_CASE("apply_minmax normalizes, clamps, and handles degenerate ranges") {
    CHECK(apply_minmax(26, 5, 37) == 0.65625);  // 21/32 exactly
    CHECK(apply_minmax(5, 5, 37) == 0.0);
    CHECK(apply_minmax(9, 4, 4) == 0.5);
    CHECK(apply_minmax(100, 5, 37) == 1.0);
    CHECK(apply_minmax(-10, 5, 37) == 0.0);
}

TEST_CASE("fit_pca on perfectly correlated points") {
    const auto [p, lambda] = fit_pca(Matrix{{1, 1}, {2, 2}, {3, 3}});
    CHECK(lambda[0] > 0.0);
    CHECK(std::abs(lambda[1]) < 1e-12);
    CHECK(pve(lambda, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_pca on symmetric cross") {
    const auto [p, lambda] = fit_pca(Matrix{{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
    CHECK(lambda[0] == doctest::Approx(lambda[1]).epsilon(1e-12));
    CHECK(pve(lambda, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fit_pca random matrix satisfies the reconstruction oracle") {
    Rng rng(21);
    Matrix x(50, 4);
    for (double& v : x.data()) v = rng.uniform(-3, 3);
    const auto [p, lambda] = fit_pca(x);

    const Matrix ptp = matmul(transpose(p), p);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::abs(ptp(i, j) - (i == j ? 1 : 0)) < 1e-8);

    const Matrix cov = gram(center_columns(x));
    double trace = 0.0, sum = 0.0;
    for (int i = 0; i < 4; ++i) trace += cov(i, i);
    for (double l : lambda) sum += l;
    CHECK(std::abs(sum - trace) < 1e-8);

    Matrix d(4, 4);
    for (int i = 0; i < 4; ++i) d(i, i) = lambda[static_cast<std::size_t>(i)];
    const Matrix back = matmul(matmul(p, d), transpose(p));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::abs(back(i, j) - cov(i, j)) <= 1e-8 * max_abs(cov));
}

TEST_CASE("pve arithmetic") {
    CHECK(pve({3, 1}, 1) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(pve({3, 1}, 2) == 1.0);
    CHECK(pve({5, 0, 0}, 1) == 1.0);
    SUBCASE("monotone and exactly one at n") {
        const std::vector<double> lambda{4.0, 2.5, 1.0, 0.25, 0.0};
        double prev = 0.0;
        for (int t = 1; t <= 5; ++t) {
            const double v = pve(lambda, t);
            CHECK(v >= prev);
            prev = v;
        }
        CHECK(pve(lambda, 5) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(pve({1, 1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(pve({1, 1}, 3), std::invalid_argument);
    CHECK_THROWS_AS(pve({0, 0}, 1), NumericError);
}

TEST_CASE("select_components picks the smallest sufficient count") {
    CHECK(select_components({3, 1}, 0.9) == 2);   // pve(1) = 0.75 < 0.9
    CHECK(select_components({3, 1}, 0.7) == 1);   // pve(1) = 0.75 >= 0.7
    CHECK(select_components({3, 1}, 1.0) == 2);
    CHECK(select_components({4, 2, 1, 1}, 1.0) == 4);
    CHECK_THROWS_AS(select_components({3, 1}, 0.0), ConfigError);
    CHECK_THROWS_AS(select_components({3, 1}, 1.5), ConfigError);
}

TEST_CASE("fit_pipeline column arithmetic for the pole-like schema") {
    SynthConfig config = pole_like_profile();
    config.n_assets = 40;
    const LabeledDataset ds = synthesize(config, 3);

    SUBCASE("raw width: 3 shell + circumference + surface + 2 + 3 dummies + age") {
        const FeaturePipeline pipeline = fit_pipeline(ds);
        CHECK(pipeline.raw_width == 11);
        CHECK(pipeline.out_width == 11);
        CHECK(!pipeline.pca.has_value());
        CHECK(pipeline.minmax_bounds.size() == 5);  // 4 numericals + service age
    }
    SUBCASE("PCA projects the 6 non-dummy columns, dummies bypass") {
        const FeaturePipeline pipeline = fit_pipeline(ds, 0.9);
        REQUIRE(pipeline.pca.has_value());
        const int j = pipeline.pca->kept_components;
        CHECK(j >= 1);
        CHECK(j <= 6);
        CHECK(pipeline.out_width == j + 5);
        CHECK(pipeline.pca->pve_achieved >= 0.9);
        CHECK(pipeline.pca->projection.rows() == 6);
        CHECK(pipeline.pca->projection.cols() == j);
    }
}

TEST_CASE("fit_pipeline column arithmetic for the cable-like schema") {
    SynthConfig config = cable_like_profile();
    config.n_assets = 30;
    const LabeledDataset ds = synthesize(config, 4);
    const FeaturePipeline pipeline = fit_pipeline(ds);
    CHECK(pipeline.raw_width == 5);  // 3 numericals + 1 ordered + age
    CHECK(pipeline.out_width == 5);
}

TEST_CASE("transform is deterministic and respects the layout") {
    SynthConfig config = pole_like_profile();
    config.n_assets = 25;
    const LabeledDataset ds = synthesize(config, 9);
    const FeaturePipeline pipeline = fit_pipeline(ds);
    const SequenceTensor a = transform(pipeline, ds);
    const SequenceTensor b = transform(pipeline, ds);
    CHECK(a.values == b.values);
    CHECK(a.n_assets == 25);
    CHECK(a.timesteps == 2);
    CHECK(a.width == pipeline.out_width);
    for (double v : a.values) CHECK(std::isfinite(v));
    // normalized training features stay in [0,1] without PCA
    for (double v : a.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("zero-variance numerical column maps to a constant 0.5 feature") {
    const LabeledDataset ds = tiny_dataset({{7, 7}, {7, 7}, {7, 7}});
    FeaturePipeline pipeline = fit_pipeline(ds);
    // neutralize the varying service-age column bounds for the check below
    const SequenceTensor tensor = transform(pipeline, ds);
    for (int i = 0; i < tensor.n_assets; ++i)
        for (int t = 0; t < tensor.timesteps; ++t) CHECK(tensor.at(i, t, 0) == 0.5);
}

TEST_CASE("unseen category at transform time is a schema violation") {
    SynthConfig config = pole_like_profile();
    config.n_assets = 10;
    const LabeledDataset ds = synthesize(config, 2);
    const FeaturePipeline pipeline = fit_pipeline(ds);
    LabeledDataset corrupted = ds;
    corrupted.entries[0].history.records[0].values[5] = std::string("Type 9");
    CHECK_THROWS_WITH_AS(transform(pipeline, corrupted), doctest::Contains("unknown category"),
                         DataError);
}

TEST_CASE("full-rank PCA round-trips the normalized features") {
    SynthConfig config = cable_like_profile();
    config.n_assets = 30;
    const LabeledDataset ds = synthesize(config, 6);
    const FeaturePipeline with_pca = fit_pipeline(ds, 1.0);  // keep all components
    const FeaturePipeline without = fit_pipeline(ds);
    REQUIRE(with_pca.pca.has_value());
    const int n = with_pca.pca->projection.rows();
    REQUIRE(with_pca.pca->kept_components == n);

    const SequenceTensor projected = transform(with_pca, ds);
    const SequenceTensor raw = transform(without, ds);
    const auto layout = without.layout();
    for (int i = 0; i < projected.n_assets; ++i) {
        for (int t = 0; t < projected.timesteps; ++t) {
            for (int col = 0; col < n; ++col) {
                // un-project: x = P t + mean, with P orthonormal
                double acc = with_pca.pca->column_means[static_cast<std::size_t>(col)];
                for (int c = 0; c < n; ++c)
                    acc += with_pca.pca->projection(col, c) * projected.at(i, t, c);
                const double expected = raw.at(i, t, layout.non_dummy[static_cast<std::size_t>(col)]);
                CHECK(std::abs(acc - expected) < 1e-8);
            }
        }
    }
}

TEST_CASE("pipeline serialization is stable across transform and round-trips") {
    SynthConfig config = pole_like_profile();
    config.n_assets = 30;
    const LabeledDataset ds = synthesize(config, 8);
    const auto [train, test] = split_train_test(ds, 0.2, 4);

    const FeaturePipeline pipeline = fit_pipeline(train, 0.9);
    const std::string before = pipeline.to_json().dump();
    const std::string hash_before = pipeline.hash();
    transform(pipeline, test);  // no leakage, no mutation
    CHECK(pipeline.to_json().dump() == before);
    CHECK(pipeline.hash() == hash_before);

    const FeaturePipeline loaded = FeaturePipeline::from_json(pipeline.to_json());
    CHECK(loaded.to_json().dump() == before);
    CHECK(loaded.hash() == hash_before);
    // loaded pipeline transforms identically
    CHECK(transform(loaded, test).values == transform(pipeline, test).values);
}

TEST_CASE("bounds come from training data only") {
    const LabeledDataset train = tiny_dataset({{0, 10}, {5, 10}, {10, 0}, {2, 8}, {9, 1}});
    const FeaturePipeline pipeline = fit_pipeline(train);
    LabeledDataset test = tiny_dataset({{-5, 20}});
    const SequenceTensor tensor = transform(pipeline, test);
    CHECK(tensor.at(0, 0, 0) == 0.0);  // clamped below
    CHECK(tensor.at(0, 1, 0) == 1.0);  // clamped above
}

TEST_CASE("constant training matrix makes PCA impossible") {
    const LabeledDataset ds = tiny_dataset({{3, 3}, {3, 3}});
    // service age varies within an asset, so zero the age contribution too
    LabeledDataset frozen = ds;
    for (auto& e : frozen.entries)
        for (auto& rec : e.history.records) rec.service_age = 5.0;
    CHECK_THROWS_AS(fit_pipeline(frozen, 0.9), NumericError);
}

} // TEST_SUITE
