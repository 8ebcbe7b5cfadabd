#pragma once

// Normality diagnostics for encoded features: univariate Anderson-Darling on
// leading principal components and Mardia's multivariate skewness/kurtosis
// test, plus the seeded random partitioning used to build comparable sets.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cafd/tensor_io.hpp"

namespace cafd {

struct AdTestResult {
    double a_squared = 0.0;  // small-sample corrected A*^2
    double p_value = 1.0;
};

struct AdPcaResult {
    double mean_p_value = 1.0;
    std::vector<AdTestResult> components;
};

struct MardiaOptions {
    bool small_sample_correction = false;
};

struct MardiaResult {
    std::size_t n = 0;
    std::size_t p = 0;
    double b1 = 0.0;  // multivariate skewness
    double b2 = 0.0;  // multivariate kurtosis
    double skewness_stat = 0.0;
    double skewness_df = 0.0;
    double skewness_p = 1.0;
    double kurtosis_z = 0.0;
    double kurtosis_p = 1.0;

    /// min(skewness_p, kurtosis_p).
    double headline_p() const;
};

/// Anderson-Darling test of composite normality (mean and variance estimated
/// from the sample). Requires n >= 8 and positive sample variance.
AdTestResult ad_test(std::span<const double> samples);

/// Maps a corrected statistic A*^2 to its p-value.
double ad_p_value(double a_squared_corrected);

/// Fits PCA on `x`, runs ad_test on each of the first `n_components` axes
/// and averages the p-values.
AdPcaResult ad_test_pca(const FeatureMatrix& x, std::size_t n_components = 10);

/// Mardia's test on the first `n_components` principal components of `x`.
MardiaResult mardia_test(const FeatureMatrix& x, std::size_t n_components = 5,
                         const MardiaOptions& options = {});

/// Mardia's statistics on `y` as given (rows are samples), no projection.
MardiaResult mardia_statistics(const Eigen::MatrixXd& y, const MardiaOptions& options = {});

/// Disjoint near-equal partition of [0, n) into k index sets (sizes differ
/// by at most one; the first n % k sets are the larger ones), deterministic
/// under `seed`. Indices inside each set are ascending.
std::vector<std::vector<std::size_t>> split_indices(std::size_t n, std::size_t k, std::uint64_t seed);

std::vector<FeatureMatrix> split_random(const FeatureMatrix& x, std::size_t k, std::uint64_t seed);

nlohmann::ordered_json to_json(const AdTestResult& r);
nlohmann::ordered_json to_json(const AdPcaResult& r);
nlohmann::ordered_json to_json(const MardiaResult& r);

}  // namespace cafd
