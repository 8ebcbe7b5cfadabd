#include "cafd/synth.hpp"

#include <fstream>
#include <string>

#include "cafd/errors.hpp"
#include "cafd/random.hpp"

namespace cafd {

void GmmSpec::validate() const {
    if (k == 0) throw ValidationError("GMM spec: k must be >= 1");
    if (dim == 0) throw ValidationError("GMM spec: dim must be >= 1");
    if (priors.n_classes() != k) {
        throw DimensionError("GMM spec: " + std::to_string(priors.n_classes()) + " priors for k = " +
                             std::to_string(k));
    }
    if (means.size() != k || covariances.size() != k) {
        throw DimensionError("GMM spec: expected " + std::to_string(k) + " means and covariances, got " +
                             std::to_string(means.size()) + " and " + std::to_string(covariances.size()));
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (static_cast<std::size_t>(means[i].size()) != dim || covariances[i].dim() != dim) {
            throw DimensionError("GMM spec: class " + std::to_string(i) + " does not have dimension " +
                                 std::to_string(dim));
        }
        (void)sqrtm_psd(covariances[i]);
    }
}

GmmSpec gmm_spec_from_json(const nlohmann::json& j) {
    try {
        GmmSpec s;
        s.k = j.at("k").get<std::size_t>();
        s.dim = j.at("dim").get<std::size_t>();
        s.seed = j.at("seed").get<std::uint64_t>();
        if (s.k == 0 || s.dim == 0) throw ValidationError("GMM spec: k and dim must be >= 1");
        const auto d = static_cast<Eigen::Index>(s.dim);
        if (j.contains("priors")) {
            const auto pr = j.at("priors").get<std::vector<double>>();
            s.priors = LabelMarginal(
                Eigen::Map<const Eigen::VectorXd>(pr.data(), static_cast<Eigen::Index>(pr.size())));
        } else {
            s.priors = LabelMarginal::uniform(s.k);
        }
        for (const auto& m : j.at("means").get<std::vector<std::vector<double>>>()) {
            s.means.emplace_back(Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size())));
        }
        if (j.contains("covariances")) {
            for (const auto& c : j.at("covariances").get<std::vector<std::vector<std::vector<double>>>>()) {
                Eigen::MatrixXd m(static_cast<Eigen::Index>(c.size()), c.empty() ? 0 : static_cast<Eigen::Index>(c[0].size()));
                for (std::size_t r = 0; r < c.size(); ++r) {
                    if (static_cast<Eigen::Index>(c[r].size()) != m.cols()) {
                        throw DimensionError("GMM spec: ragged covariance row");
                    }
                    for (std::size_t q = 0; q < c[r].size(); ++q) {
                        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) = c[r][q];
                    }
                }
                s.covariances.emplace_back(std::move(m));
            }
        } else {
            s.covariances.assign(s.k, SymmetricMatrix(Eigen::MatrixXd::Identity(d, d)));
        }
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("GMM spec JSON: ") + e.what());
    }
}

nlohmann::ordered_json to_json(const GmmSpec& s) {
    nlohmann::ordered_json j;
    j["k"] = s.k;
    j["dim"] = s.dim;
    j["seed"] = s.seed;
    j["priors"] = std::vector<double>(s.priors.probs().data(), s.priors.probs().data() + s.k);
    auto means = nlohmann::ordered_json::array();
    for (const auto& m : s.means) means.push_back(std::vector<double>(m.data(), m.data() + m.size()));
    j["means"] = std::move(means);
    auto covs = nlohmann::ordered_json::array();
    for (const auto& c : s.covariances) {
        auto rows = nlohmann::ordered_json::array();
        for (Eigen::Index r = 0; r < c.values().rows(); ++r) {
            const Eigen::VectorXd row = c.values().row(r).transpose();
            rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
        }
        covs.push_back(std::move(rows));
    }
    j["covariances"] = std::move(covs);
    return j;
}

GmmSpec read_gmm_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
    return gmm_spec_from_json(j);
}

LabeledSet sample_gmm(const GmmSpec& spec, std::size_t n) {
    if (n == 0) throw ValidationError("sample_gmm: n must be >= 1");
    spec.validate();
    std::vector<Eigen::MatrixXd> factors;
    for (const auto& c : spec.covariances) factors.push_back(sqrtm_psd(c).values());

    Eigen::VectorXd cdf(static_cast<Eigen::Index>(spec.k));
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.k; ++i) cdf(static_cast<Eigen::Index>(i)) = acc += spec.priors[i];

    Rng rng(spec.seed);
    const auto d = static_cast<Eigen::Index>(spec.dim);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
    std::vector<std::size_t> labels(n);
    Eigen::VectorXd z(d);
    for (std::size_t r = 0; r < n; ++r) {
        const double u = rng.uniform() * acc;
        std::size_t cls = 0;
        while (cls + 1 < spec.k && !(u < cdf(static_cast<Eigen::Index>(cls)) && spec.priors[cls] > 0.0)) ++cls;
        // Round-off can carry u past the last positive-prior class.
        while (spec.priors[cls] == 0.0 && cls > 0) --cls;
        labels[r] = cls;
        for (Eigen::Index c = 0; c < d; ++c) z(c) = rng.normal();
        x.row(static_cast<Eigen::Index>(r)) = (spec.means[cls] + factors[cls] * z).transpose();
    }
    LabelVector lv(std::move(labels), spec.k);
    auto p = one_hot(lv, spec.k);
    return {FeatureMatrix(std::move(x)), std::move(lv), std::move(p)};
}

namespace {

void check_set(const LabeledSet& set) {
    if (set.x.rows() != set.labels.size() || set.x.rows() != set.p.rows()) {
        throw DimensionError("labeled set has " + std::to_string(set.x.rows()) + " features, " +
                             std::to_string(set.labels.size()) + " labels and " +
                             std::to_string(set.p.rows()) + " posterior rows");
    }
    if (set.labels.n_classes() != set.p.n_classes()) {
        throw DimensionError("labeled set: labels declare " + std::to_string(set.labels.n_classes()) +
                             " classes, posteriors have " + std::to_string(set.p.n_classes()));
    }
}

}  // namespace

LabeledSet mode_drop(const LabeledSet& set, std::size_t drop_class) {
    check_set(set);
    if (drop_class >= set.labels.n_classes()) {
        throw ValidationError("mode_drop: class " + std::to_string(drop_class) + " out of range for " +
                              std::to_string(set.labels.n_classes()) + " classes");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        if (set.labels[i] != drop_class) keep.push_back(i);
    }
    return {set.x.select_rows(keep), set.labels.select(keep), set.p.select_rows(keep)};
}

LabeledSet mode_collapse(const LabeledSet& set, std::size_t class_a, std::size_t class_b,
                         double blend, std::uint64_t seed) {
    check_set(set);
    const std::size_t k = set.labels.n_classes();
    if (class_a == class_b) throw ValidationError("mode_collapse: classes must be distinct");
    if (class_a >= k || class_b >= k) throw ValidationError("mode_collapse: class out of range");
    if (!(blend >= 0.0 && blend <= 1.0)) throw ValidationError("mode_collapse: blend must lie in [0, 1]");

    std::vector<std::size_t> members_a, members_b;
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        if (set.labels[i] == class_a) members_a.push_back(i);
        if (set.labels[i] == class_b) members_b.push_back(i);
    }
    if (members_a.empty() || members_b.empty()) {
        throw ValidationError("mode_collapse: class " +
                              std::to_string(members_a.empty() ? class_a : class_b) + " has no members");
    }
    Rng rng(seed);
    rng.shuffle(members_a);
    rng.shuffle(members_b);

    Eigen::MatrixXd x = set.x.values();
    const std::size_t pairs = std::min(members_a.size(), members_b.size());
    for (std::size_t t = 0; t < pairs; ++t) {
        const auto ia = static_cast<Eigen::Index>(members_a[t]);
        const auto ib = static_cast<Eigen::Index>(members_b[t]);
        const Eigen::RowVectorXd xa = set.x.values().row(ia);
        const Eigen::RowVectorXd xb = set.x.values().row(ib);
        x.row(ia) = (1.0 - blend) * xa + blend * xb;
        x.row(ib) = (1.0 - blend) * xb + blend * xa;
    }
    Eigen::MatrixXd p = set.p.values();
    for (const auto& members : {members_a, members_b}) {
        for (auto i : members) {
            const auto r = static_cast<Eigen::Index>(i);
            p.row(r).setZero();
            p(r, static_cast<Eigen::Index>(class_a)) = 0.5;
            p(r, static_cast<Eigen::Index>(class_b)) = 0.5;
        }
    }
    return {FeatureMatrix(std::move(x)), set.labels, ProbabilityMatrix(std::move(p))};
}

}  // namespace cafd
