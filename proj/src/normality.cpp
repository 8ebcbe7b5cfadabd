#include "cafd/normality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "cafd/errors.hpp"
#include "cafd/linalg.hpp"
#include "cafd/parallel.hpp"
#include "cafd/random.hpp"

namespace cafd {

namespace {

// log of the standard normal CDF, accurate far into the lower tail.
double log_normal_cdf(double z) {
    if (z > -20.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    // Asymptotic series for Phi(z), z -> -inf.
    const double z2 = z * z;
    const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

double chi_squared_sf(double stat, double df) {
    if (stat <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

}  // namespace

double MardiaResult::headline_p() const { return std::min(skewness_p, kurtosis_p); }

double ad_p_value(double a) {
    double p = 0.0;
    if (a < 0.2) {
        p = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
    } else if (a < 0.34) {
        p = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
    } else if (a < 0.6) {
        p = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
    } else if (a <= 13.0) {
        p = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
    } else {
        // Below 5e-31 the exponential fit is no longer meaningful.
        p = 0.0;
    }
    return std::clamp(p, 0.0, 1.0);
}

AdTestResult ad_test(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 8) {
        throw ValidationError("ad_test needs at least 8 samples, got " + std::to_string(n));
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::abs(mean))) {
        throw ValidationError("ad_test: sample variance is zero");
    }

    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = (sorted[i] - mean) / sd;
        const double hi = (sorted[n - 1 - i] - mean) / sd;
        const double coeff = (2.0 * static_cast<double>(i + 1) - 1.0) / static_cast<double>(n);
        s += coeff * (log_normal_cdf(lo) + log_normal_cdf(-hi));
    }
    const double a2 = -static_cast<double>(n) - s;
    const double nd = static_cast<double>(n);
    AdTestResult out;
    out.a_squared = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
    out.p_value = ad_p_value(out.a_squared);
    return out;
}

AdPcaResult ad_test_pca(const FeatureMatrix& x, std::size_t n_components) {
    const auto fit = pca(x, n_components);
    AdPcaResult out;
    out.components.resize(n_components);
    parallel_for(n_components, [&](std::size_t c) {
        const Eigen::VectorXd column = fit.projected.col(static_cast<Eigen::Index>(c));
        out.components[c] = ad_test(std::span<const double>(column.data(), column.size()));
    });
    double sum = 0.0;
    for (const auto& r : out.components) sum += r.p_value;
    out.mean_p_value = sum / static_cast<double>(n_components);
    return out;
}

MardiaResult mardia_statistics(const Eigen::MatrixXd& y, const MardiaOptions& options) {
    const auto n = static_cast<std::size_t>(y.rows());
    const auto p = static_cast<std::size_t>(y.cols());
    if (p == 0) throw ValidationError("mardia: need at least one dimension");
    if (n <= p + 1) {
        throw ValidationError("mardia: need more than " + std::to_string(p + 1) +
                              " samples for " + std::to_string(p) + " dimensions, got " +
                              std::to_string(n));
    }
    const double nd = static_cast<double>(n);
    const double pd = static_cast<double>(p);
    const Eigen::RowVectorXd mu = y.colwise().mean();
    const Eigen::MatrixXd centered = y.rowwise() - mu;
    const Eigen::MatrixXd s = (centered.transpose() * centered) / nd;

    // Whiten with the Cholesky factor so that z_i . z_j = (y_i-mu)^T S^-1 (y_j-mu).
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> spectrum(s, Eigen::EigenvaluesOnly);
    const double largest = spectrum.eigenvalues().cwiseAbs().maxCoeff();
    if (!(spectrum.eigenvalues().minCoeff() > 1e-12 * largest)) {
        throw NumericalError("mardia: projected covariance is singular");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) throw NumericalError("mardia: projected covariance is singular");
    const Eigen::MatrixXd z =
        llt.matrixL().solve(centered.transpose()).transpose();  // n x p

    // sum_ij (z_i . z_j)^3 = ||sum_i z_i (x) z_i (x) z_i||_F^2.
    std::vector<double> third(p * p * p, 0.0);
    double b2_sum = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (std::size_t a = 0; a < p; ++a) {
            const double za = z(i, static_cast<Eigen::Index>(a));
            for (std::size_t b = 0; b < p; ++b) {
                const double zab = za * z(i, static_cast<Eigen::Index>(b));
                for (std::size_t c = 0; c < p; ++c) {
                    third[(a * p + b) * p + c] += zab * z(i, static_cast<Eigen::Index>(c));
                }
            }
        }
        const double d2 = z.row(i).squaredNorm();
        b2_sum += d2 * d2;
    }
    double frob = 0.0;
    for (double t : third) frob += t * t;

    MardiaResult r;
    r.n = n;
    r.p = p;
    r.b1 = frob / (nd * nd);
    r.b2 = b2_sum / nd;
    double k = 1.0;
    if (options.small_sample_correction) {
        k = ((pd + 1.0) * (nd + 1.0) * (nd + 3.0)) / (nd * ((nd + 1.0) * (pd + 1.0) - 6.0));
    }
    r.skewness_stat = nd * k * r.b1 / 6.0;
    r.skewness_df = pd * (pd + 1.0) * (pd + 2.0) / 6.0;
    r.skewness_p = chi_squared_sf(r.skewness_stat, r.skewness_df);
    r.kurtosis_z = (r.b2 - pd * (pd + 2.0)) / std::sqrt(8.0 * pd * (pd + 2.0) / nd);
    r.kurtosis_p = normal_two_sided_p(r.kurtosis_z);
    return r;
}

MardiaResult mardia_test(const FeatureMatrix& x, std::size_t n_components,
                         const MardiaOptions& options) {
    if (x.rows() <= n_components + 1) {
        throw ValidationError("mardia: need more than " + std::to_string(n_components + 1) +
                              " samples for " + std::to_string(n_components) +
                              " components, got " + std::to_string(x.rows()));
    }
    return mardia_statistics(pca(x, n_components).projected, options);
}

std::vector<std::vector<std::size_t>> split_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k > n) {
        throw ValidationError("cannot split " + std::to_string(n) + " samples into " +
                              std::to_string(k) + " non-empty sets");
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> parts(k);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < k; ++s) {
        const std::size_t size = n / k + (s < n % k ? 1 : 0);
        parts[s].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(parts[s].begin(), parts[s].end());
        pos += size;
    }
    return parts;
}

std::vector<FeatureMatrix> split_random(const FeatureMatrix& x, std::size_t k, std::uint64_t seed) {
    std::vector<FeatureMatrix> out;
    for (const auto& idx : split_indices(x.rows(), k, seed)) out.push_back(x.select_rows(idx));
    return out;
}

nlohmann::ordered_json to_json(const AdTestResult& r) {
    return {{"a_squared", r.a_squared}, {"p_value", r.p_value}};
}

nlohmann::ordered_json to_json(const AdPcaResult& r) {
    auto comps = nlohmann::ordered_json::array();
    for (const auto& c : r.components) comps.push_back(to_json(c));
    return {{"mean_p_value", r.mean_p_value}, {"components", std::move(comps)}};
}

nlohmann::ordered_json to_json(const MardiaResult& r) {
    return {{"n", r.n},
            {"p", r.p},
            {"b1", r.b1},
            {"b2", r.b2},
            {"skewness_stat", r.skewness_stat},
            {"skewness_df", r.skewness_df},
            {"skewness_p", r.skewness_p},
            {"kurtosis_z", r.kurtosis_z},
            {"kurtosis_p", r.kurtosis_p},
            {"headline_p", r.headline_p()}};
}

}  // namespace cafd
