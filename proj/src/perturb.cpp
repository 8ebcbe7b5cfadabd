#include "cafd/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cafd/errors.hpp"

namespace cafd {

PcaModel hack_basis(const FeatureMatrix& x) { return pca(x, std::min(x.rows(), x.cols())).model; }

FeatureMatrix axis_permutation_hack(const FeatureMatrix& x, const HackRecipe& recipe,
                                    const std::optional<PcaModel>& basis) {
    if (recipe.first == recipe.second) {
        throw ValidationError("hack recipe must name two distinct components, got " +
                              std::to_string(recipe.first) + " twice");
    }
    const PcaModel model = basis ? *basis : hack_basis(x);
    if (model.dim() != x.cols()) {
        throw DimensionError("hack basis has dimension " + std::to_string(model.dim()) +
                             ", features have " + std::to_string(x.cols()));
    }
    const std::size_t k = model.n_components();
    if (recipe.first >= k || recipe.second >= k) {
        throw ValidationError("hack components (" + std::to_string(recipe.first) + ", " +
                              std::to_string(recipe.second) + ") out of range for " +
                              std::to_string(k) + " principal axes");
    }
    const auto a = static_cast<Eigen::Index>(recipe.first);
    const auto b = static_cast<Eigen::Index>(recipe.second);
    const double var_a = model.explained_variance(a);
    const double var_b = model.explained_variance(b);
    const double scale = model.explained_variance.maxCoeff();
    const double tiny = std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
    if (!(var_a > tiny) || !(var_b > tiny)) {
        throw ValidationError("hack component has zero variance (" + std::to_string(var_a) + ", " +
                              std::to_string(var_b) + ")");
    }
    const double sd_a = std::sqrt(var_a);
    const double sd_b = std::sqrt(var_b);

    // Coordinates along the two axes; projected data are already centered.
    const Eigen::MatrixXd centered = x.values().rowwise() - model.mean.transpose();
    const Eigen::VectorXd coord_a = centered * model.components.row(a).transpose();
    const Eigen::VectorXd coord_b = centered * model.components.row(b).transpose();
    const Eigen::VectorXd swapped_a = coord_b * (sd_a / sd_b);
    const Eigen::VectorXd swapped_b = coord_a * (sd_b / sd_a);

    // Only the two-axis part of each sample changes; everything orthogonal to
    // it is reconstructed unchanged.
    Eigen::MatrixXd out = x.values();
    out += (swapped_a - coord_a) * model.components.row(a);
    out += (swapped_b - coord_b) * model.components.row(b);
    return FeatureMatrix(std::move(out));
}

PreservationReport mean_cov_preservation_check(const FeatureMatrix& original,
                                               const FeatureMatrix& modified) {
    if (original.rows() != modified.rows() || original.cols() != modified.cols()) {
        throw DimensionError("preservation check needs equal shapes: " +
                             shape_string(original.rows(), original.cols()) + " vs " +
                             shape_string(modified.rows(), modified.cols()));
    }
    PreservationReport r;
    r.mean_max_abs_dev = (mean_vector(original) - mean_vector(modified)).cwiseAbs().maxCoeff();
    const auto c0 = covariance(original);
    const auto c1 = covariance(modified);
    r.cov_max_abs_dev = (c0.values() - c1.values()).cwiseAbs().maxCoeff();
    const double ref = c0.values().cwiseAbs().maxCoeff();
    r.cov_relative_dev = ref > 0.0 ? r.cov_max_abs_dev / ref
                                   : (r.cov_max_abs_dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return r;
}

nlohmann::ordered_json to_json(const PreservationReport& r) {
    return {{"mean_max_abs_dev", r.mean_max_abs_dev},
            {"cov_max_abs_dev", r.cov_max_abs_dev},
            {"cov_relative_dev", r.cov_relative_dev}};
}

nlohmann::ordered_json to_json(const PcaModel& m) {
    nlohmann::ordered_json j;
    j["mean"] = std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size());
    auto comps = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.components.rows(); ++i) {
        const Eigen::VectorXd row = m.components.row(i).transpose();
        comps.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    j["components"] = std::move(comps);
    j["explained_variance"] = std::vector<double>(
        m.explained_variance.data(), m.explained_variance.data() + m.explained_variance.size());
    return j;
}

PcaModel pca_model_from_json(const nlohmann::json& j) {
    try {
        PcaModel m;
        const auto mean = j.at("mean").get<std::vector<double>>();
        const auto comps = j.at("components").get<std::vector<std::vector<double>>>();
        const auto var = j.at("explained_variance").get<std::vector<double>>();
        if (comps.size() != var.size()) {
            throw FormatError("PCA basis: " + std::to_string(comps.size()) + " components but " +
                              std::to_string(var.size()) + " variances");
        }
        m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
        m.explained_variance =
            Eigen::Map<const Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()));
        m.components.resize(static_cast<Eigen::Index>(comps.size()), static_cast<Eigen::Index>(mean.size()));
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (comps[i].size() != mean.size()) {
                throw FormatError("PCA basis: component " + std::to_string(i) + " has length " +
                                  std::to_string(comps[i].size()) + ", expected " +
                                  std::to_string(mean.size()));
            }
            for (std::size_t c = 0; c < mean.size(); ++c) {
                m.components(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = comps[i][c];
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("PCA basis JSON: ") + e.what());
    }
}

}  // namespace cafd
