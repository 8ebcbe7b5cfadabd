#include "cafd/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cafd/errors.hpp"
#include "cafd/metrics.hpp"
#include "cafd/normality.hpp"
#include "cafd/perturb.hpp"
#include "cafd/synth.hpp"
#include "cafd/tensor_io.hpp"

namespace cafd {

namespace {

using Json = nlohmann::ordered_json;

enum class Format { json, table };

struct Common {
    std::string out;
    std::string format = "json";
    double epsilon_reg = 0.0;
};

struct Inputs {
    std::string real, real_probs, real_labels, gen, gen_probs, probs, in, labels;
};

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

std::string fmt_mean_std(const MeanStd& m) { return fmt(m.mean) + " ± " + fmt(m.std); }

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

// Writes the report to --out or the given stream.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    file << text;
    if (!file) throw IoError("write failed for '" + path + "'");
}

std::string render(const Json& j, const std::string& table, Format format) {
    return format == Format::json ? j.dump(2) + "\n" : table;
}

std::string report_table(const MetricReport& r) {
    std::ostringstream os;
    const auto* s = r.split_mean_std ? &*r.split_mean_std : nullptr;
    os << pad("class", 8) << "distance\n";
    for (std::size_t i = 0; i < r.per_class_frechet.size(); ++i) {
        os << pad(std::to_string(i), 8);
        if (!r.per_class_frechet[i]) {
            os << "skipped";
        } else {
            os << fmt(*r.per_class_frechet[i]);
        }
        if (s && s->per_class_frechet[i]) os << "  (splits: " << fmt_mean_std(*s->per_class_frechet[i]) << ")";
        os << "\n";
    }
    os << pad("average", 8) << fmt(r.cafd);
    if (s) os << "  (splits: " << fmt_mean_std(s->cafd) << ")";
    os << "\n\n";
    const auto row = [&](const std::string& name, double v, const MeanStd* m) {
        os << pad(name, 17) << fmt(v);
        if (m) os << "  (splits: " << fmt_mean_std(*m) << ")";
        os << "\n";
    };
    row("fid", r.fid, s ? &s->fid : nullptr);
    row("cafd", r.cafd, s ? &s->cafd : nullptr);
    row("kld", r.kld, s ? &s->kld : nullptr);
    row("inception_score", r.inception_score, s ? &s->inception_score : nullptr);
    row("mode_score", r.mode_score, s ? &s->mode_score : nullptr);
    os << pad("skipped_classes", 17);
    for (std::size_t i = 0; i < r.skipped_classes.size(); ++i) os << (i ? "," : "") << r.skipped_classes[i];
    os << "\n";
    os << pad("metadata", 17) << "n_classes=" << r.n_classes << " dim=" << r.dim << " n_real=" << r.n_real
       << " n_gen=" << r.n_gen << " mixture_dof=" << mixture_degrees_of_freedom(r.n_classes, r.dim)
       << " gaussian_dof=" << gaussian_degrees_of_freedom(r.dim) << "\n";
    if (s) os << pad("splits", 17) << s->splits << "\n";
    return os.str();
}

std::string scalar_table(const Json& j) {
    std::ostringstream os;
    for (const auto& [key, value] : j.items()) {
        os << pad(key, 17) << (value.is_number_float() ? fmt(value.get<double>()) : value.dump()) << "\n";
    }
    return os.str();
}

LabelMarginal reference_marginal(const Inputs& in, std::size_t k) {
    if (!in.real_labels.empty()) return LabelMarginal::from_labels(read_labels(in.real_labels, k));
    if (!in.real_probs.empty()) {
        const auto p = read_probabilities(in.real_probs);
        if (p.n_classes() != k) {
            throw DimensionError("'" + in.real_probs + "' has " + std::to_string(p.n_classes()) +
                                 " classes, generated posteriors have " + std::to_string(k));
        }
        return LabelMarginal::from_probabilities(p);
    }
    throw ValidationError("either --real-labels or --real-probs is required");
}

std::pair<std::size_t, std::size_t> parse_pair(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ValidationError("expected 'a,b', got '" + s + "'");
    try {
        std::size_t used = 0;
        const auto a = std::stoull(s.substr(0, comma), &used);
        if (used != comma) throw std::invalid_argument("a");
        const auto rest = s.substr(comma + 1);
        const auto b = std::stoull(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("b");
        return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
    } catch (const std::logic_error&) {
        throw ValidationError("expected two nonnegative integers 'a,b', got '" + s + "'");
    }
}

Json normality_block(const FeatureMatrix& x, const std::string& test, std::size_t ad_components,
                     std::size_t mardia_components, const MardiaOptions& mopts) {
    Json j;
    j["n"] = x.rows();
    if (test == "ad" || test == "both") j["ad"] = to_json(ad_test_pca(x, ad_components));
    if (test == "mardia" || test == "both") j["mardia"] = to_json(mardia_test(x, mardia_components, mopts));
    return j;
}

void error_json(std::ostream& err, const char* kind, const std::string& message) {
    err << Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Class-aware evaluation of generated feature sets", "cafd-eval"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    Common common;
    Inputs in;
    std::size_t splits = 1;
    std::optional<std::uint64_t> seed;

    const auto add_common = [&](CLI::App* sub, bool with_eps) {
        sub->add_option("--out", common.out, "Write the report here instead of stdout");
        sub->add_option("--format", common.format, "Report format")
            ->check(CLI::IsMember({"json", "table"}));
        if (with_eps) {
            sub->add_option("--epsilon-reg", common.epsilon_reg,
                            "Diagonal regularization added to covariances before the trace term")
                ->check(CLI::NonNegativeNumber);
        }
    };

    auto* fid_cmd = app.add_subcommand("fid", "Frechet distance between two feature sets");
    fid_cmd->add_option("--real", in.real)->required();
    fid_cmd->add_option("--gen", in.gen)->required();
    add_common(fid_cmd, true);

    auto* cafd_cmd = app.add_subcommand("cafd", "Class-aware Frechet distance");
    cafd_cmd->add_option("--real", in.real)->required();
    cafd_cmd->add_option("--real-probs", in.real_probs)->required();
    cafd_cmd->add_option("--gen", in.gen)->required();
    cafd_cmd->add_option("--gen-probs", in.gen_probs)->required();
    add_common(cafd_cmd, true);

    auto* is_cmd = app.add_subcommand("iscore", "Inception Score of a posterior matrix");
    is_cmd->add_option("--probs", in.probs)->required();
    add_common(is_cmd, false);

    auto* ms_cmd = app.add_subcommand("modescore", "Mode Score of generated posteriors");
    ms_cmd->add_option("--gen-probs", in.gen_probs)->required();
    ms_cmd->add_option("--real-labels", in.real_labels);
    ms_cmd->add_option("--real-probs", in.real_probs);
    add_common(ms_cmd, false);

    auto* kld_cmd = app.add_subcommand("kld", "KL divergence between real and generated label marginals");
    kld_cmd->add_option("--gen-probs", in.gen_probs)->required();
    kld_cmd->add_option("--real-labels", in.real_labels);
    kld_cmd->add_option("--real-probs", in.real_probs);
    add_common(kld_cmd, false);

    auto* eval_cmd = app.add_subcommand("evaluate", "Full report: FID, CAFD, per-class, KLD, IS, MS");
    eval_cmd->add_option("--real", in.real)->required();
    eval_cmd->add_option("--real-probs", in.real_probs)->required();
    eval_cmd->add_option("--gen", in.gen)->required();
    eval_cmd->add_option("--gen-probs", in.gen_probs)->required();
    eval_cmd->add_option("--real-labels", in.real_labels, "Ground-truth labels for p(y*)");
    eval_cmd->add_option("--splits", splits)->check(CLI::PositiveNumber);
    eval_cmd->add_option("--seed", seed);
    add_common(eval_cmd, true);

    std::string test = "ad";
    std::optional<std::size_t> components;
    bool small_sample = false;
    auto* norm_cmd = app.add_subcommand("normality", "Anderson-Darling / Mardia tests on PCA components");
    norm_cmd->add_option("--in", in.in)->required();
    norm_cmd->add_option("--test", test)->check(CLI::IsMember({"ad", "mardia", "both"}));
    norm_cmd->add_option("--components", components, "Leading components (default 10 for ad, 5 for mardia)")
        ->check(CLI::PositiveNumber);
    norm_cmd->add_option("--splits", splits, "Random disjoint sets of the input")->check(CLI::PositiveNumber);
    norm_cmd->add_option("--seed", seed);
    norm_cmd->add_option("--labels", in.labels, "Also test each class separately");
    norm_cmd->add_flag("--small-sample", small_sample, "Small-sample correction for Mardia skewness");
    add_common(norm_cmd, false);

    std::string hack_out, swap = "0,1", basis_in, basis_out, report_out;
    auto* hack_cmd = app.add_subcommand("hack", "Axis-permutation hack preserving mean and covariance");
    hack_cmd->add_option("--in", in.in)->required();
    hack_cmd->add_option("--out", hack_out, "Hacked features")->required();
    hack_cmd->add_option("--swap", swap, "Principal components to exchange, 'a,b'");
    hack_cmd->add_option("--basis", basis_in, "Reuse a PCA basis saved with --save-basis");
    hack_cmd->add_option("--save-basis", basis_out, "Save the fitted PCA basis as JSON");
    hack_cmd->add_option("--report", report_out, "Write the preservation report here instead of stdout");

    std::string spec_path, out_features, out_labels, out_probs, collapse;
    std::size_t n_samples = 0;
    std::optional<std::size_t> drop_class;
    double blend = 0.5;
    auto* synth_cmd = app.add_subcommand("synth", "Sample a Gaussian mixture from a JSON spec");
    synth_cmd->add_option("--spec", spec_path)->required();
    synth_cmd->add_option("--n", n_samples)->required()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--out-features", out_features)->required();
    synth_cmd->add_option("--out-labels", out_labels);
    synth_cmd->add_option("--out-probs", out_probs);
    synth_cmd->add_option("--seed", seed, "Override the spec's seed");
    synth_cmd->add_option("--drop-class", drop_class, "Remove every sample of this class");
    synth_cmd->add_option("--collapse", collapse, "Blend classes 'a,b' into a mixed mode");
    synth_cmd->add_option("--blend", blend, "Blend fraction for --collapse")->check(CLI::Range(0.0, 1.0));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        error_json(err, "usage", e.what());
        return kExitDataError;
    }

    const Format format = common.format == "table" ? Format::table : Format::json;
    try {
        if (fid_cmd->parsed()) {
            const auto real = read_feature_matrix(in.real);
            const auto gen = read_feature_matrix(in.gen);
            const Json j{{"fid", fid(real, gen, common.epsilon_reg)}};
            emit(render(j, scalar_table(j), format), common.out, out);
        } else if (cafd_cmd->parsed()) {
            const auto real = read_feature_matrix(in.real);
            const auto real_p = read_probabilities(in.real_probs);
            const auto gen = read_feature_matrix(in.gen);
            const auto gen_p = read_probabilities(in.gen_probs);
            const auto r = cafd(real, real_p, gen, gen_p, common.epsilon_reg);
            Json j;
            j["cafd"] = r.value;
            auto pc = Json::array();
            for (const auto& v : r.per_class) pc.push_back(v ? Json(*v) : Json(nullptr));
            j["per_class_frechet"] = std::move(pc);
            j["skipped_classes"] = r.skipped;
            std::ostringstream table;
            table << pad("class", 8) << "distance\n";
            for (std::size_t i = 0; i < r.per_class.size(); ++i) {
                table << pad(std::to_string(i), 8) << (r.per_class[i] ? fmt(*r.per_class[i]) : "skipped") << "\n";
            }
            table << pad("average", 8) << fmt(r.value) << "\n";
            emit(render(j, table.str(), format), common.out, out);
        } else if (is_cmd->parsed()) {
            const Json j{{"inception_score", inception_score(read_probabilities(in.probs))}};
            emit(render(j, scalar_table(j), format), common.out, out);
        } else if (ms_cmd->parsed()) {
            const auto gen_p = read_probabilities(in.gen_probs);
            const auto star = reference_marginal(in, gen_p.n_classes());
            const Json j{{"mode_score", mode_score(gen_p, star)}};
            emit(render(j, scalar_table(j), format), common.out, out);
        } else if (kld_cmd->parsed()) {
            const auto gen_p = read_probabilities(in.gen_probs);
            const auto star = reference_marginal(in, gen_p.n_classes());
            const Json j{{"kld", label_kld(star, LabelMarginal::from_probabilities(gen_p))}};
            emit(render(j, scalar_table(j), format), common.out, out);
        } else if (eval_cmd->parsed()) {
            if (splits > 1 && !seed) throw ValidationError("--seed is required when --splits > 1");
            const auto real = read_feature_matrix(in.real);
            const auto real_p = read_probabilities(in.real_probs);
            const auto gen = read_feature_matrix(in.gen);
            const auto gen_p = read_probabilities(in.gen_probs);
            EvalConfig config;
            config.splits = splits;
            config.seed = seed;
            config.epsilon_reg = common.epsilon_reg;
            if (!in.real_labels.empty()) config.real_labels = read_labels(in.real_labels, real_p.n_classes());
            const auto report = evaluate(real, real_p, gen, gen_p, config);
            emit(render(to_json(report), report_table(report), format), common.out, out);
        } else if (norm_cmd->parsed()) {
            if (splits > 1 && !seed) throw ValidationError("--seed is required when --splits > 1");
            const auto x = read_feature_matrix(in.in);
            const std::size_t ad_k = components.value_or(10);
            const std::size_t mardia_k = components.value_or(5);
            const MardiaOptions mopts{small_sample};
            Json j;
            j["test"] = test;
            if (test != "mardia") j["ad_components"] = ad_k;
            if (test != "ad") j["mardia_components"] = mardia_k;
            j["splits"] = splits;
            auto sets = Json::array();
            const auto parts = splits > 1 ? split_random(x, splits, *seed) : std::vector<FeatureMatrix>{x};
            for (const auto& part : parts) sets.push_back(normality_block(part, test, ad_k, mardia_k, mopts));
            j["sets"] = std::move(sets);
            if (!in.labels.empty()) {
                const auto labels = read_labels(in.labels);
                if (labels.size() != x.rows()) {
                    throw DimensionError("'" + in.labels + "' has " + std::to_string(labels.size()) +
                                         " labels for " + std::to_string(x.rows()) + " samples");
                }
                auto per_class = Json::array();
                for (std::size_t c = 0; c < labels.n_classes(); ++c) {
                    std::vector<std::size_t> idx;
                    for (std::size_t i = 0; i < labels.size(); ++i) {
                        if (labels[i] == c) idx.push_back(i);
                    }
                    auto block = idx.empty() ? Json{{"n", 0}}
                                             : normality_block(x.select_rows(idx), test, ad_k, mardia_k, mopts);
                    block["class"] = c;
                    per_class.push_back(std::move(block));
                }
                j["per_class"] = std::move(per_class);
            }
            std::ostringstream table;
            const auto line = [&](const std::string& name, const Json& block) {
                table << pad(name, 10) << pad(std::to_string(block["n"].get<std::size_t>()), 8);
                if (block.contains("ad")) table << "ad_mean_p=" << fmt(block["ad"]["mean_p_value"].get<double>()) << "  ";
                if (block.contains("mardia")) {
                    table << "mardia_skew_p=" << fmt(block["mardia"]["skewness_p"].get<double>())
                          << "  mardia_kurt_p=" << fmt(block["mardia"]["kurtosis_p"].get<double>());
                }
                table << "\n";
            };
            table << pad("set", 10) << pad("n", 8) << "p-values\n";
            for (std::size_t s = 0; s < j["sets"].size(); ++s) line(std::to_string(s), j["sets"][s]);
            if (j.contains("per_class")) {
                for (const auto& block : j["per_class"]) {
                    if (block["n"].get<std::size_t>() == 0) continue;
                    line("class " + std::to_string(block["class"].get<std::size_t>()), block);
                }
            }
            emit(render(j, table.str(), format), common.out, out);
        } else if (hack_cmd->parsed()) {
            const auto [a, b] = parse_pair(swap);
            const auto x = read_feature_matrix(in.in);
            PcaModel basis;
            if (!basis_in.empty()) {
                std::ifstream f(basis_in);
                if (!f) throw IoError("cannot open '" + basis_in + "' for reading");
                nlohmann::json bj;
                try {
                    f >> bj;
                } catch (const nlohmann::json::exception& e) {
                    throw FormatError("'" + basis_in + "': " + e.what());
                }
                basis = pca_model_from_json(bj);
            } else {
                basis = hack_basis(x);
            }
            const auto hacked = axis_permutation_hack(x, HackRecipe{a, b}, basis);
            write_feature_matrix(hacked, hack_out);
            if (!basis_out.empty()) emit(to_json(basis).dump(2) + "\n", basis_out, out);
            // Compare against what was actually written (float32 payload).
            const auto written = read_feature_matrix(hack_out);
            Json j = to_json(mean_cov_preservation_check(x, written));
            j["swap"] = {a, b};
            emit(j.dump(2) + "\n", report_out, out);
        } else if (synth_cmd->parsed()) {
            auto spec = read_gmm_spec(spec_path);
            if (seed) spec.seed = *seed;
            auto set = sample_gmm(spec, n_samples);
            if (drop_class) set = mode_drop(set, *drop_class);
            if (!collapse.empty()) {
                const auto [ca, cb] = parse_pair(collapse);
                set = mode_collapse(set, ca, cb, blend, spec.seed);
            }
            write_feature_matrix(set.x, out_features);
            if (!out_labels.empty()) write_labels(set.labels, out_labels);
            if (!out_probs.empty()) write_probabilities(set.p, out_probs);
            const Json j{{"n", set.x.rows()}, {"dim", set.x.cols()}, {"k", spec.k}, {"seed", spec.seed}};
            out << j.dump(2) << "\n";
        }
    } catch (const NumericalError& e) {
        error_json(err, "numerical", e.what());
        return kExitNumericalError;
    } catch (const Error& e) {
        error_json(err, "data", e.what());
        return kExitDataError;
    }
    return kExitOk;
}

}  // namespace cafd
