#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cafd/errors.hpp"
#include "cafd/linalg.hpp"
#include "cafd/normality.hpp"
#include "cafd/random.hpp"
#include "test_support.hpp"

using namespace cafd;
using cafd::testing::data_path;
using cafd::testing::rel_diff;

namespace {

std::vector<double> column(const std::string& name) {
    const Eigen::MatrixXd m = read_matrix(data_path(name));
    return std::vector<double>(m.data(), m.data() + m.rows());
}

// Frozen values from tests/oracles/normality_reference.py (numpy, scipy and
// statsmodels' normal_ad on the same fixtures).
struct AdFixture {
    const char* file;
    double a_squared;
    double p_value;
};

constexpr AdFixture kAdFixtures[] = {
    {"ad_normal.csv", 0.30135110704674312, 0.57873661846415492},
    {"ad_bimodal.csv", 48.273047727462803, 0.0},
    {"ad_small.csv", 0.240967429475994, 0.77369598023599906},
    {"ad_skewed.csv", 1.7316189403588464, 0.00019620699614587053},
};

}  // namespace

TEST_CASE("ad_test against the reference implementation") {
    for (const auto& f : kAdFixtures) {
        CAPTURE(f.file);
        const auto r = ad_test(column(f.file));
        CHECK(rel_diff(r.a_squared, f.a_squared) <= 1e-10);
        if (f.p_value == 0.0) {
            CHECK(r.p_value == 0.0);
        } else {
            CHECK(rel_diff(r.p_value, f.p_value) <= 1e-9);
        }
    }
    CHECK(ad_test(column("ad_normal.csv")).p_value > 0.05);
    CHECK(ad_test(column("ad_bimodal.csv")).p_value < 1e-6);
}

TEST_CASE("ad_p_value branches") {
    CHECK(ad_p_value(0.1) == doctest::Approx(1.0 - std::exp(-13.436 + 10.114 - 2.2373)));
    CHECK(ad_p_value(0.3) == doctest::Approx(1.0 - std::exp(-8.318 + 42.796 * 0.3 - 59.938 * 0.09)));
    CHECK(ad_p_value(0.5) == doctest::Approx(std::exp(0.9177 - 4.279 * 0.5 - 1.38 * 0.25)));
    CHECK(ad_p_value(2.0) == doctest::Approx(std::exp(1.2937 - 5.709 * 2.0 + 0.0186 * 4.0)));
    CHECK(ad_p_value(13.5) == 0.0);
    CHECK(ad_p_value(0.0) >= 0.0);
    for (double a = 0.0; a < 20.0; a += 0.01) {
        const double p = ad_p_value(a);
        CHECK((p >= 0.0 && p <= 1.0));
    }
}

TEST_CASE("ad_test preconditions") {
    CHECK_THROWS_AS(ad_test(std::vector<double>(20, 3.5)), ValidationError);
    CHECK_THROWS_AS(ad_test(std::vector<double>{1, 2, 3, 4, 5, 6, 7}), ValidationError);
    CHECK_NOTHROW(ad_test(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 9}));
}

TEST_CASE("ad_test is location-scale invariant") {
    const auto x = column("ad_skewed.csv");
    const auto base = ad_test(x);
    for (const auto& [a, b] : std::vector<std::pair<double, double>>{{2.0, 0.0}, {0.01, 5.0}, {1000.0, -3.0}}) {
        std::vector<double> y;
        for (double v : x) y.push_back(a * v + b);
        const auto r = ad_test(y);
        CHECK(std::abs(r.p_value - base.p_value) <= 1e-12);
        CHECK(rel_diff(r.a_squared, base.a_squared) <= 1e-10);
    }
}

TEST_CASE("ad_test_pca") {
    Rng rng(3);
    const FeatureMatrix single(cafd::testing::random_matrix(rng, 5000, 32));
    // Four clusters on a regular simplex (pairwise distance 8) in the first
    // three coordinates: three of the ten tested axes carry the mixture.
    const double h = 8.0 / (2.0 * std::sqrt(2.0));
    const double corners[4][3] = {{h, h, h}, {h, -h, -h}, {-h, h, -h}, {-h, -h, h}};
    Eigen::MatrixXd mixed = cafd::testing::random_matrix(rng, 5000, 32);
    for (Eigen::Index j = 0; j < 5000; ++j) {
        for (Eigen::Index c = 0; c < 3; ++c) mixed(j, c) += corners[j % 4][c];
    }
    const auto a = ad_test_pca(single, 10);
    const auto b = ad_test_pca(FeatureMatrix(mixed), 10);
    CHECK(a.components.size() == 10);
    CHECK(a.mean_p_value > b.mean_p_value + 0.1);
    for (std::size_t c = 0; c < 3; ++c) CHECK(b.components[c].p_value < 1e-6);

    SUBCASE("few dimensions") {
        const FeatureMatrix small(cafd::testing::random_matrix(rng, 100, 4));
        CHECK(ad_test_pca(small, 4).components.size() == 4);
        CHECK_THROWS_AS(ad_test_pca(small, 10), ValidationError);
    }
    SUBCASE("deterministic") {
        const auto again = ad_test_pca(single, 10);
        CHECK(again.mean_p_value == a.mean_p_value);
        for (std::size_t i = 0; i < 10; ++i) CHECK(again.components[i].a_squared == a.components[i].a_squared);
    }
    SUBCASE("separation lowers the median p-value") {
        std::vector<double> medians;
        for (double sep : {0.0, 2.5, 5.0}) {
            std::vector<double> ps;
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                Rng r(1000 + seed);
                // Two clusters along one axis; the leading component carries the separation.
                Eigen::MatrixXd x = cafd::testing::random_matrix(r, 400, 2);
                for (Eigen::Index j = 0; j < 400; ++j) x(j, 0) += (j % 2 == 0 ? 0.5 : -0.5) * sep;
                ps.push_back(ad_test_pca(FeatureMatrix(x), 1).mean_p_value);
            }
            std::nth_element(ps.begin(), ps.begin() + 10, ps.end());
            medians.push_back(ps[10]);
        }
        CHECK(medians[0] > medians[1]);
        CHECK(medians[1] > medians[2]);
    }
}

TEST_CASE("mardia against the reference implementation") {
    SUBCASE("standard normal, direct input") {
        const auto r = mardia_statistics(read_matrix(data_path("mardia_normal.csv")));
        CHECK(rel_diff(r.b1, 0.03877428552532327) <= 1e-9);
        CHECK(rel_diff(r.b2, 34.610410213965565) <= 1e-10);
        CHECK(rel_diff(r.skewness_p, 0.59855007363738055) <= 1e-8);
        CHECK(rel_diff(r.kurtosis_p, 0.09969844411682606) <= 1e-8);
        CHECK(r.skewness_df == 35.0);
        CHECK(r.skewness_p > 0.01);
        CHECK(r.kurtosis_p > 0.01);
        CHECK(r.headline_p() == std::min(r.skewness_p, r.kurtosis_p));
    }
    SUBCASE("standard normal through the 5-component projection") {
        const auto direct = mardia_statistics(read_matrix(data_path("mardia_normal.csv")));
        const auto projected = mardia_test(read_feature_matrix(data_path("mardia_normal.csv")), 5);
        CHECK(rel_diff(projected.b1, direct.b1) <= 1e-8);
        CHECK(rel_diff(projected.b2, direct.b2) <= 1e-10);
    }
    SUBCASE("ten-cluster mixture") {
        const auto r = mardia_test(read_feature_matrix(data_path("mardia_mixture.csv")), 5);
        CHECK(rel_diff(r.b1, 12.983533755915461) <= 1e-8);
        CHECK(rel_diff(r.b2, 28.705328250520118) <= 1e-9);
        CHECK(r.skewness_p < 1e-10);
        CHECK(r.skewness_p == 0.0);
        CHECK(rel_diff(r.kurtosis_p, 6.8164865655844974e-156) <= 1e-6);
    }
}

TEST_CASE("mardia options and preconditions") {
    Rng rng(21);
    const Eigen::MatrixXd y = cafd::testing::random_matrix(rng, 50, 3);
    const auto plain = mardia_statistics(y);
    MardiaOptions opts;
    opts.small_sample_correction = true;
    const auto corrected = mardia_statistics(y, opts);
    CHECK(corrected.b1 == plain.b1);
    CHECK(corrected.skewness_stat > plain.skewness_stat);

    CHECK_THROWS_AS(mardia_test(FeatureMatrix(cafd::testing::random_matrix(rng, 6, 8)), 5), ValidationError);
    CHECK_NOTHROW(mardia_test(FeatureMatrix(cafd::testing::random_matrix(rng, 7, 8)), 5));
    Eigen::MatrixXd singular = cafd::testing::random_matrix(rng, 40, 3);
    singular.col(2) = singular.col(0) - singular.col(1);
    CHECK_THROWS_AS(mardia_statistics(singular), NumericalError);
}

TEST_CASE("mardia statistics are affine invariant") {
    Rng rng(22);
    const Eigen::MatrixXd y = cafd::testing::random_matrix(rng, 300, 4).array().exp().matrix();
    const auto base = mardia_statistics(y);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd a = cafd::testing::random_matrix(rng, 4, 4) + 3.0 * Eigen::MatrixXd::Identity(4, 4);
        const Eigen::RowVectorXd b = cafd::testing::random_matrix(rng, 1, 4);
        const auto r = mardia_statistics((y * a).rowwise() + b);
        CHECK(rel_diff(r.b1, base.b1) <= 1e-8);
        CHECK(rel_diff(r.b2, base.b2) <= 1e-8);
    }
}

TEST_CASE("split_indices and split_random") {
    SUBCASE("singletons") {
        const auto parts = split_indices(10, 10, 1);
        std::set<std::size_t> seen;
        for (const auto& p : parts) {
            CHECK(p.size() == 1);
            seen.insert(p[0]);
        }
        CHECK(seen.size() == 10);
    }
    SUBCASE("101 into 10") {
        const auto parts = split_indices(101, 10, 5);
        CHECK(parts[0].size() == 11);
        for (std::size_t s = 1; s < 10; ++s) CHECK(parts[s].size() == 10);
        std::set<std::size_t> seen;
        for (const auto& p : parts) {
            CHECK(std::is_sorted(p.begin(), p.end()));
            seen.insert(p.begin(), p.end());
        }
        CHECK(seen.size() == 101);
        CHECK(*seen.rbegin() == 100);
    }
    SUBCASE("seeded") {
        CHECK(split_indices(50, 4, 9) == split_indices(50, 4, 9));
        CHECK(split_indices(50, 4, 9) != split_indices(50, 4, 10));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(split_indices(3, 4, 0), ValidationError);
        CHECK_THROWS_AS(split_indices(3, 0, 0), ValidationError);
    }
    SUBCASE("split_random selects the indexed rows") {
        Rng rng(23);
        const FeatureMatrix x(cafd::testing::random_matrix(rng, 23, 2));
        const auto subsets = split_random(x, 3, 77);
        const auto parts = split_indices(23, 3, 77);
        REQUIRE(subsets.size() == 3);
        for (std::size_t s = 0; s < 3; ++s) CHECK(subsets[s] == x.select_rows(parts[s]));
    }
}

TEST_CASE("json") {
    const auto j = to_json(ad_test_pca(read_feature_matrix(data_path("mardia_normal.csv")), 3));
    CHECK(j["components"].size() == 3);
    CHECK(j.contains("mean_p_value"));
    const auto m = to_json(mardia_statistics(read_matrix(data_path("mardia_normal.csv"))));
    CHECK(m["headline_p"] == m["kurtosis_p"]);
}
