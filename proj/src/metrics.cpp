#include "cafd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cafd/errors.hpp"
#include "cafd/normality.hpp"
#include "cafd/parallel.hpp"

namespace cafd {

namespace {

Eigen::VectorXd smoothed(const Eigen::VectorXd& p) {
    const double k = static_cast<double>(p.size());
    return (p.array() + kKlSmoothing) / (1.0 + k * kKlSmoothing);
}

// KL(p || q) on already-smoothed distributions.
double kl_smoothed(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) sum += p(i) * (std::log(p(i)) - std::log(q(i)));
    return sum;
}

// E_x[KL(p(y|x) || q)] over the rows of `p`, with q already smoothed.
double mean_row_kl(const ProbabilityMatrix& p, const Eigen::VectorXd& q_smoothed) {
    if (p.rows() == 0) throw ValidationError("posterior matrix has no rows");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < p.values().rows(); ++j) {
        sum += kl_smoothed(smoothed(p.values().row(j).transpose()), q_smoothed);
    }
    return sum / static_cast<double>(p.rows());
}

SymmetricMatrix regularized(const SymmetricMatrix& c, double epsilon) {
    if (epsilon == 0.0) return c;
    const auto d = static_cast<Eigen::Index>(c.dim());
    return SymmetricMatrix(c.values() + epsilon * Eigen::MatrixXd::Identity(d, d));
}

MetricReport single_report(const FeatureMatrix& real_x, const ProbabilityMatrix& real_p,
                           const FeatureMatrix& gen_x, const ProbabilityMatrix& gen_p,
                           const std::optional<LabelVector>& real_labels, double epsilon_reg) {
    MetricReport r;
    r.n_classes = real_p.n_classes();
    r.dim = real_x.cols();
    r.n_real = real_x.rows();
    r.n_gen = gen_x.rows();

    r.fid = fid(real_x, gen_x, epsilon_reg);
    auto c = cafd(real_x, real_p, gen_x, gen_p, epsilon_reg);
    r.cafd = c.value;
    r.per_class_frechet = std::move(c.per_class);
    r.skipped_classes = std::move(c.skipped);

    const auto p_star = real_labels ? LabelMarginal::from_labels(*real_labels)
                                    : LabelMarginal::from_probabilities(real_p);
    r.kld = label_kld(p_star, LabelMarginal::from_probabilities(gen_p));
    r.inception_score = inception_score(gen_p);
    r.mode_score = mode_score(gen_p, p_star);
    return r;
}

nlohmann::ordered_json to_json(const MeanStd& m) {
    return nlohmann::ordered_json{{"mean", m.mean}, {"std", m.std}};
}

}  // namespace

double mass_floor(std::size_t n_samples) {
    return std::max(2.0, 1e-3 * static_cast<double>(n_samples));
}

GaussianStats gaussian_stats(const FeatureMatrix& x) {
    if (x.rows() == 0) throw ValidationError("gaussian_stats: empty input");
    auto mu = mean_vector(x);
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(x.rows()),
                                                        1.0 / static_cast<double>(x.rows()));
    auto c = covariance(x, w, mu);
    return {std::move(mu), std::move(c)};
}

GaussianStats gaussian_stats(const FeatureMatrix& x, const Eigen::VectorXd& weights) {
    if (x.rows() == 0) throw ValidationError("gaussian_stats: empty input");
    auto mu = mean_vector(x, weights);
    auto c = covariance(x, weights, mu);
    return {std::move(mu), std::move(c)};
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b, double epsilon_reg) {
    if (a.dim() != b.dim() || a.c.dim() != a.dim() || b.c.dim() != b.dim()) {
        throw DimensionError("frechet_distance: dimension " + std::to_string(a.dim()) + " vs " +
                             std::to_string(b.dim()));
    }
    if (!(epsilon_reg >= 0.0)) throw ValidationError("epsilon_reg must be >= 0");
    const auto ca = regularized(a.c, epsilon_reg);
    const auto cb = regularized(b.c, epsilon_reg);
    const double mean_term = (a.mu - b.mu).squaredNorm();
    const double traces = ca.trace() + cb.trace();
    const double value = mean_term + traces - 2.0 * trace_sqrt_product(ca, cb);
    if (value >= 0.0) return value;
    if (value >= -kFrechetClamp * std::max(1.0, traces)) return 0.0;
    throw NumericalError("frechet_distance: negative result " + std::to_string(value) +
                         " beyond round-off");
}

double fid(const FeatureMatrix& real, const FeatureMatrix& gen, double epsilon_reg) {
    if (real.cols() != gen.cols()) {
        throw DimensionError("fid: real features " + shape_string(real.rows(), real.cols()) +
                             " vs generated " + shape_string(gen.rows(), gen.cols()));
    }
    return frechet_distance(gaussian_stats(real), gaussian_stats(gen), epsilon_reg);
}

ClassWeights class_weights(const ProbabilityMatrix& p) { return class_weights(p, mass_floor(p.rows())); }

ClassWeights class_weights(const ProbabilityMatrix& p, double floor) {
    ClassWeights out;
    const auto k = static_cast<Eigen::Index>(p.n_classes());
    const auto n = static_cast<Eigen::Index>(p.rows());
    out.w = Eigen::MatrixXd::Zero(k, n);
    out.mass = p.values().colwise().sum().transpose();
    for (Eigen::Index i = 0; i < k; ++i) {
        if (out.mass(i) < floor || out.mass(i) <= 0.0) {
            out.skipped.push_back(static_cast<std::size_t>(i));
            continue;
        }
        out.w.row(i) = p.values().col(i).transpose() / out.mass(i);
    }
    return out;
}

MixtureStats class_conditional_stats(const FeatureMatrix& x, const ProbabilityMatrix& p) {
    if (x.rows() != p.rows()) {
        throw DimensionError("class_conditional_stats: features " + shape_string(x.rows(), x.cols()) +
                             " vs posteriors " + shape_string(p.rows(), p.n_classes()));
    }
    if (x.rows() == 0) throw ValidationError("class_conditional_stats: empty input");
    // Zero floor: every class with positive mass gets its exact statistics.
    const auto weights = class_weights(p, 0.0);
    const std::size_t k = p.n_classes();
    MixtureStats m;
    m.effective_mass = weights.mass;
    m.priors = LabelMarginal(weights.mass / static_cast<double>(x.rows()));
    m.components.resize(k);
    parallel_for(k, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (weights.mass(row) <= 0.0) {
            m.components[i] = {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.cols())),
                               SymmetricMatrix::zero(x.cols())};
            return;
        }
        const Eigen::VectorXd w = weights.w.row(row).transpose();
        m.components[i] = gaussian_stats(x, w);
    });
    return m;
}

GaussianStats mixture_moments(const MixtureStats& m) {
    if (m.components.empty()) throw ValidationError("mixture_moments: no components");
    if (m.priors.n_classes() != m.components.size()) {
        throw DimensionError("mixture_moments: " + std::to_string(m.priors.n_classes()) +
                             " priors for " + std::to_string(m.components.size()) + " components");
    }
    const auto d = static_cast<Eigen::Index>(m.components.front().dim());
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < m.components.size(); ++i) mu += m.priors[i] * m.components[i].mu;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < m.components.size(); ++i) {
        const Eigen::VectorXd delta = m.components[i].mu - mu;
        c += m.priors[i] * (m.components[i].c.values() + delta * delta.transpose());
    }
    return {std::move(mu), SymmetricMatrix(0.5 * (c + c.transpose()))};
}

CafdResult cafd(const FeatureMatrix& real_x, const ProbabilityMatrix& real_p,
                const FeatureMatrix& gen_x, const ProbabilityMatrix& gen_p, double epsilon_reg) {
    validate_pair(real_x, gen_x, real_p, gen_p);
    const auto real_stats = class_conditional_stats(real_x, real_p);
    const auto gen_stats = class_conditional_stats(gen_x, gen_p);
    const double real_floor = mass_floor(real_x.rows());
    const double gen_floor = mass_floor(gen_x.rows());
    const std::size_t k = real_p.n_classes();

    CafdResult out;
    out.per_class.assign(k, std::nullopt);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < k; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (real_stats.effective_mass(row) < real_floor || gen_stats.effective_mass(row) < gen_floor) {
            out.skipped.push_back(i);
        } else {
            kept.push_back(i);
        }
    }
    if (kept.empty()) {
        throw DataError("cafd: every class is degenerate (posterior mass below floor) on at least "
                        "one side");
    }
    std::vector<double> distances(kept.size());
    parallel_for(kept.size(), [&](std::size_t t) {
        const auto i = kept[t];
        distances[t] = frechet_distance(real_stats.components[i], gen_stats.components[i], epsilon_reg);
    });
    double sum = 0.0;
    for (std::size_t t = 0; t < kept.size(); ++t) {
        out.per_class[kept[t]] = distances[t];
        sum += distances[t];
    }
    out.value = sum / static_cast<double>(kept.size());
    return out;
}

double inception_score(const ProbabilityMatrix& p) {
    const auto marginal = smoothed(LabelMarginal::from_probabilities(p).probs());
    return std::exp(mean_row_kl(p, marginal));
}

double mode_score(const ProbabilityMatrix& p_gen, const LabelMarginal& p_star) {
    if (p_gen.n_classes() != p_star.n_classes()) {
        throw DimensionError("mode_score: posteriors have " + std::to_string(p_gen.n_classes()) +
                             " classes, reference marginal has " + std::to_string(p_star.n_classes()));
    }
    const auto star = smoothed(p_star.probs());
    const auto gen_marginal = smoothed(LabelMarginal::from_probabilities(p_gen).probs());
    return std::exp(mean_row_kl(p_gen, star) - kl_smoothed(star, gen_marginal));
}

double label_kld(const LabelMarginal& p_star, const LabelMarginal& p_gen) {
    if (p_star.n_classes() != p_gen.n_classes()) {
        throw DimensionError("label_kld: " + std::to_string(p_star.n_classes()) + " vs " +
                             std::to_string(p_gen.n_classes()) + " classes");
    }
    return std::max(0.0, kl_smoothed(smoothed(p_star.probs()), smoothed(p_gen.probs())));
}

std::uint64_t mixture_degrees_of_freedom(std::uint64_t k, std::uint64_t n) {
    return k * ((n * n + n) / 2 + n + 1);
}

std::uint64_t gaussian_degrees_of_freedom(std::uint64_t n) { return (n * n + n) / 2 + n; }

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return out;
}

MetricReport evaluate(const FeatureMatrix& real_x, const ProbabilityMatrix& real_p,
                      const FeatureMatrix& gen_x, const ProbabilityMatrix& gen_p,
                      const EvalConfig& config) {
    validate_pair(real_x, gen_x, real_p, gen_p);
    if (config.splits < 1) throw ValidationError("splits must be >= 1");
    if (!(config.epsilon_reg >= 0.0)) throw ValidationError("epsilon_reg must be >= 0");

    std::optional<LabelVector> labels;
    if (config.real_labels) {
        if (config.real_labels->size() != real_x.rows()) {
            throw DimensionError("real labels have " + std::to_string(config.real_labels->size()) +
                                 " entries for " + std::to_string(real_x.rows()) + " real samples");
        }
        labels = LabelVector(config.real_labels->labels(), real_p.n_classes());
    }

    auto report = single_report(real_x, real_p, gen_x, gen_p, labels, config.epsilon_reg);
    if (config.splits == 1) return report;

    if (!config.seed) throw ValidationError("a seed is required when splits > 1");
    const auto real_parts = split_indices(real_x.rows(), config.splits, *config.seed);
    const auto gen_parts = split_indices(gen_x.rows(), config.splits, *config.seed);

    const std::size_t k = real_p.n_classes();
    std::vector<double> fids, cafds, klds, iss, mss;
    std::vector<std::vector<double>> per_class(k);
    for (std::size_t s = 0; s < config.splits; ++s) {
        std::optional<LabelVector> split_labels;
        if (labels) split_labels = labels->select(real_parts[s]);
        const auto r = single_report(real_x.select_rows(real_parts[s]), real_p.select_rows(real_parts[s]),
                                     gen_x.select_rows(gen_parts[s]), gen_p.select_rows(gen_parts[s]),
                                     split_labels, config.epsilon_reg);
        fids.push_back(r.fid);
        cafds.push_back(r.cafd);
        klds.push_back(r.kld);
        iss.push_back(r.inception_score);
        mss.push_back(r.mode_score);
        for (std::size_t i = 0; i < k; ++i) {
            if (r.per_class_frechet[i]) per_class[i].push_back(*r.per_class_frechet[i]);
        }
    }
    SplitSummary summary;
    summary.splits = config.splits;
    summary.fid = mean_std(fids);
    summary.cafd = mean_std(cafds);
    summary.kld = mean_std(klds);
    summary.inception_score = mean_std(iss);
    summary.mode_score = mean_std(mss);
    for (const auto& values : per_class) {
        summary.per_class_frechet.push_back(values.empty() ? std::nullopt
                                                           : std::optional(mean_std(values)));
    }
    report.split_mean_std = std::move(summary);
    return report;
}

nlohmann::ordered_json to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["fid"] = r.fid;
    j["cafd"] = r.cafd;
    auto per_class = nlohmann::ordered_json::array();
    for (const auto& v : r.per_class_frechet) {
        per_class.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
    }
    j["per_class_frechet"] = std::move(per_class);
    j["kld"] = r.kld;
    j["inception_score"] = r.inception_score;
    j["mode_score"] = r.mode_score;
    j["skipped_classes"] = r.skipped_classes;
    j["metadata"] = {
        {"n_classes", r.n_classes},
        {"dim", r.dim},
        {"n_real", r.n_real},
        {"n_gen", r.n_gen},
        {"mixture_degrees_of_freedom", mixture_degrees_of_freedom(r.n_classes, r.dim)},
        {"gaussian_degrees_of_freedom", gaussian_degrees_of_freedom(r.dim)},
    };
    if (r.split_mean_std) {
        const auto& s = *r.split_mean_std;
        nlohmann::ordered_json sj;
        sj["splits"] = s.splits;
        sj["fid"] = to_json(s.fid);
        sj["cafd"] = to_json(s.cafd);
        sj["kld"] = to_json(s.kld);
        sj["inception_score"] = to_json(s.inception_score);
        sj["mode_score"] = to_json(s.mode_score);
        auto pc = nlohmann::ordered_json::array();
        for (const auto& v : s.per_class_frechet) {
            pc.push_back(v ? to_json(*v) : nlohmann::ordered_json(nullptr));
        }
        sj["per_class_frechet"] = std::move(pc);
        j["split_mean_std"] = std::move(sj);
    }
    return j;
}

}  // namespace cafd
