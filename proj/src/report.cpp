#include "precisen/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "precisen/error.hpp"
#include "precisen/fairness.hpp"
#include "precisen/kernels.hpp"
#include "precisen/mc_oracle.hpp"
#include "precisen/random.hpp"

namespace precisen {

using nlohmann::ordered_json;

namespace {

constexpr const char* kModule = "cli_reporting";

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, kModule, message);
}

std::string num(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string policy_name(CriticalValuePolicy p) {
    return p == CriticalValuePolicy::normal ? "normal" : "t";
}

std::string kind_name(PredictorKind k) {
    return k == PredictorKind::binary ? "binary" : "continuous";
}

ordered_json matrix_json(const Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

ordered_json vector_json(const Vector& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

ordered_json stats_json(const WidthStats& s) {
    return {{"mean", s.mean}, {"min", s.min}, {"max", s.max}};
}

ordered_json summary_json(const WidthSummary& s) {
    ordered_json j{{"n", s.n}, {"profiles", s.profiles}, {"ci_width", stats_json(s.ci)}};
    if (s.pi) {
        j["pi_width"] = stats_json(*s.pi);
    }
    if (!s.by_level.empty()) {
        ordered_json levels = ordered_json::array();
        for (const auto& l : s.by_level) {
            ordered_json lj{{"variable", l.variable}, {"level", l.level}, {"count", l.count},
                            {"ci_width", stats_json(l.ci)}};
            if (l.pi) {
                lj["pi_width"] = stats_json(*l.pi);
            }
            levels.push_back(lj);
        }
        j["by_level"] = levels;
    }
    return j;
}

ordered_json answer_json(const SampleSizeAnswer& a, bool per_profile) {
    ordered_json j{{"target_width", a.target_width},
                   {"interval_kind", to_string(a.interval_kind)},
                   {"feasible", a.feasible}};
    j["required_n"] = a.required_n ? ordered_json(*a.required_n) : ordered_json(nullptr);
    j["limiting_row"] = a.limiting_row ? ordered_json(*a.limiting_row) : ordered_json(nullptr);
    j["trimmed_rows"] = a.trimmed_rows;
    if (a.min_achievable_width) {
        j["min_achievable_width"] = *a.min_achievable_width;
    }
    if (per_profile) {
        j["per_profile_n"] = a.per_profile_n;
    }
    return j;
}

ordered_json fisher_json(const FisherUnitInformation& info, const Cohort& cohort) {
    ordered_json j;
    j["sigma2"] = info.sigma2();
    j["sigma2_source"] = info.source() == VarianceSource::from_r_squared ? "r_squared" : "given";
    if (info.r_squared()) {
        j["r_squared"] = *info.r_squared();
    }
    if (info.sum_sq_outcome()) {
        j["sum_sq_outcome"] = *info.sum_sq_outcome();
    }
    j["condition_number"] = info.condition_number();
    j["columns"] = cohort.column_names();
    j["matrix"] = matrix_json(info.matrix());
    return j;
}

ordered_json profiles_json(const std::vector<ProfileWidth>& widths) {
    ordered_json rows = ordered_json::array();
    for (const auto& w : widths) {
        ordered_json r{{"row", w.row_index}, {"leverage_form", w.leverage_form}, {"ci_width", w.ci_width}};
        if (w.pi_width) {
            r["pi_width"] = *w.pi_width;
        }
        rows.push_back(r);
    }
    return rows;
}

struct LoadedCohort {
    Cohort cohort;
    ordered_json description;
    std::vector<std::string> warnings;
    std::optional<EvidenceSummary> evidence;
    std::optional<RecoveredJoint> joint;
};

LoadedCohort load_cohort(const RunConfig& config) {
    if (config.data) {
        auto ingested = ingest_csv(*config.data, config.csv);
        ordered_json d{{"source", "csv"},
                       {"path", *config.data},
                       {"outcome", config.csv.outcome},
                       {"rows", ingested.cohort.rows()},
                       {"rejected_rows", ingested.rejected_rows}};
        return {std::move(ingested.cohort), d, std::move(ingested.warnings), std::nullopt, std::nullopt};
    }
    auto summary = ingest_evidence(*config.evidence);
    RecoveredJoint joint = config.independence     ? independence_joint(summary)
                           : summary.correlation ? joint_from_correlation(summary)
                                                 : recover_covariance(summary, config.recovery);
    const auto seed = config.effective_seed();
    Cohort cohort = synthesize_cohort(joint, summary, config.n_sim, seed);
    ordered_json d{{"source", config.independence ? "independence" : "synthetic"},
                   {"path", *config.evidence},
                   {"rows", cohort.rows()},
                   {"n_sim", config.n_sim},
                   {"seed", seed},
                   {"seed_source", config.seed_source},
                   {"recovery_mode", to_string(joint.recovery_mode)},
                   {"source_n", summary.source_n},
                   {"mean_vector", vector_json(joint.mean_vector)},
                   {"covariance", matrix_json(joint.covariance)},
                   {"predictor_outcome_cov", vector_json(joint.predictor_outcome_cov)}};
    return {std::move(cohort), d, {}, std::move(summary), std::move(joint)};
}

FisherUnitInformation build_information(const RunConfig& config, const Cohort& cohort) {
    const auto assumption = config.sigma2 ? VarianceAssumption::residual_variance(*config.sigma2)
                                          : VarianceAssumption::r_squared(*config.r_squared);
    return fisher_unit_information(cohort, assumption);
}

ordered_json config_json(const RunConfig& c) {
    ordered_json j;
    j["mode"] = to_string(c.mode);
    if (c.data) {
        j["data"] = *c.data;
        j["outcome"] = c.csv.outcome;
        j["predictors"] = c.csv.predictors;
        ordered_json bin = ordered_json::array();
        for (const auto& b : c.csv.binary) {
            bin.push_back({{"column", b.column}, {"level_one", b.level_one.value_or("1")}});
        }
        j["binary"] = bin;
        j["allow_incomplete"] = c.csv.allow_incomplete;
    } else {
        j["evidence"] = *c.evidence;
        j["independence"] = c.independence;
        j["recovery"] = to_string(c.recovery);
        j["n_sim"] = c.n_sim;
    }
    j["subgroups"] = c.subgroups;
    if (c.sigma2) {
        j["sigma2"] = *c.sigma2;
    }
    if (c.r_squared) {
        j["r_squared"] = *c.r_squared;
    }
    j["alpha"] = c.assumptions.alpha;
    j["policy"] = policy_name(c.assumptions.policy);
    j["required_n_critical_value"] = "normal";
    j["n"] = c.n;
    j["width"] = c.width ? ordered_json(*c.width) : ordered_json(nullptr);
    j["interval"] = c.interval == IntervalKind::confidence ? "ci" : "pi";
    j["trim"] = c.effective_trim();
    j["seed"] = c.effective_seed();
    j["seed_source"] = c.seed_source;
    j["baseline_n"] = c.baseline_n ? ordered_json(*c.baseline_n) : ordered_json(nullptr);
    if (c.mode == RunMode::validate) {
        j["replicates"] = c.replicates;
        j["tolerance"] = c.tolerance;
        j["strict"] = c.strict;
        j["true_coefficients"] = c.true_coefficients;
    }
    if (!c.grid.empty()) {
        j["grid"] = c.grid;
    }
    j["format"] = c.format == OutputFormat::json ? "json" : "csv";
    return j;
}

std::vector<LevelWidths> level_widths(const FisherUnitInformation& info, const Cohort& cohort, std::int64_t n,
                                      const RunConfig& config, std::vector<std::string>& warnings) {
    std::vector<LevelWidths> out;
    for (const auto& variable : config.subgroups) {
        auto rep = subgroup_widths(info, cohort, n, config.assumptions, variable, true);
        warnings.insert(warnings.end(), rep.warnings.begin(), rep.warnings.end());
        for (const auto& l : rep.levels) {
            out.push_back({variable, l.level, l.count, l.ci, l.pi});
        }
    }
    return out;
}

std::string csv_profiles(const std::vector<std::pair<std::int64_t, std::vector<ProfileWidth>>>& tables) {
    std::ostringstream out;
    out << "row,n,leverage_form,ci_width,pi_width\n";
    for (const auto& [n, widths] : tables) {
        for (const auto& w : widths) {
            out << w.row_index << ',' << n << ',' << num(w.leverage_form) << ',' << num(w.ci_width) << ','
                << (w.pi_width ? num(*w.pi_width) : "") << '\n';
        }
    }
    return out.str();
}

std::string csv_answer(const SampleSizeAnswer& a, const std::vector<double>& leverages) {
    std::ostringstream out;
    if (!a.feasible) {
        out << "feasible,min_achievable_width\nfalse," << num(a.min_achievable_width.value_or(0.0)) << '\n';
        return out.str();
    }
    out << "row,leverage_form,required_n\n";
    for (std::size_t i = 0; i < a.per_profile_n.size(); ++i) {
        out << i << ',' << num(leverages[i]) << ',' << a.per_profile_n[i] << '\n';
    }
    return out.str();
}

Vector ols_coefficients(const Cohort& cohort) {
    const Matrix x = cohort.design();
    Eigen::LLT<Matrix> llt(x.transpose() * x);
    return llt.solve(x.transpose() * cohort.outcome());
}

// ---------------------------------------------------------------------------
// Modes
// ---------------------------------------------------------------------------

void run_check(const RunConfig& config, const LoadedCohort& loaded, const FisherUnitInformation& info,
               RunOutcome& outcome, std::vector<std::string>& warnings) {
    ordered_json summaries = ordered_json::array();
    std::vector<std::pair<std::int64_t, std::vector<ProfileWidth>>> tables;
    const bool with_pi = config.mode == RunMode::check || config.mode == RunMode::pi;
    for (auto n : config.n) {
        auto widths = profile_widths(info, loaded.cohort, n, config.assumptions, with_pi);
        auto summary = summarize(widths, n);
        summary.by_level = level_widths(info, loaded.cohort, n, config, warnings);
        ordered_json sj = summary_json(summary);
        if (config.baseline_n && n == *config.baseline_n) {
            sj["is_baseline"] = true;
        }
        if (config.per_profile && config.format == OutputFormat::json) {
            sj["per_profile"] = profiles_json(widths);
        }
        summaries.push_back(sj);
        tables.emplace_back(n, std::move(widths));
    }
    outcome.report["results"]["widths"] = summaries;
    if (config.mode == RunMode::pi) {
        outcome.report["results"]["min_achievable_pi_width"] =
            2.0 * z_critical(config.assumptions.alpha) * std::sqrt(info.sigma2());
    }
    if (config.format == OutputFormat::csv) {
        outcome.csv = csv_profiles(tables);
    }
}

void run_target(const RunConfig& config, const LoadedCohort& loaded, const FisherUnitInformation& info,
                IntervalKind kind, RunOutcome& outcome) {
    const double trim = config.effective_trim();
    const auto answer = population_answer(info, loaded.cohort, *config.width, kind, config.assumptions, trim);
    ordered_json res = answer_json(answer, config.per_profile);
    if (config.baseline_n) {
        res["baseline_n"] = *config.baseline_n;
        if (answer.required_n) {
            res["required_exceeds_baseline"] = *answer.required_n > *config.baseline_n;
        }
        auto at_base = summarize(profile_widths(info, loaded.cohort, *config.baseline_n, config.assumptions,
                                                kind == IntervalKind::prediction),
                                 *config.baseline_n);
        res["widths_at_baseline"] = summary_json(at_base);
    }
    if (!config.subgroups.empty()) {
        ordered_json groups = ordered_json::array();
        for (const auto& variable : config.subgroups) {
            for (const auto& lr : subgroup_required_n(info, loaded.cohort, *config.width, config.assumptions,
                                                      variable, trim, kind)) {
                groups.push_back({{"variable", variable},
                                  {"level", lr.level},
                                  {"count", lr.count},
                                  {"answer", answer_json(lr.answer, false)}});
            }
        }
        res["subgroups"] = groups;
    }
    outcome.report["results"]["sample_size"] = res;
    if (!answer.feasible) {
        outcome.exit_code = exit_infeasible;
    }
    if (config.format == OutputFormat::csv) {
        outcome.csv = csv_answer(answer, leverage_forms(info, loaded.cohort));
    }
}

void run_subgroups(const RunConfig& config, const LoadedCohort& loaded, const FisherUnitInformation& info,
                   RunOutcome& outcome, std::vector<std::string>& warnings) {
    ordered_json reports = ordered_json::array();
    std::ostringstream csv;
    csv << "variable,n,level,count,ci_mean,ci_min,ci_max,pi_mean,required_n\n";
    const double trim = config.effective_trim();
    for (const auto& variable : config.subgroups) {
        std::vector<LevelRequirement> reqs;
        if (config.width) {
            reqs = subgroup_required_n(info, loaded.cohort, *config.width, config.assumptions, variable, trim);
        }
        auto required_for = [&](const std::string& level) -> std::optional<SampleSizeAnswer> {
            for (const auto& r : reqs) {
                if (r.level == level) {
                    return r.answer;
                }
            }
            return std::nullopt;
        };
        const std::vector<std::int64_t> ns = config.n.empty() ? std::vector<std::int64_t>{} : config.n;
        for (auto n : ns) {
            auto rep = subgroup_widths(info, loaded.cohort, n, config.assumptions, variable, true);
            warnings.insert(warnings.end(), rep.warnings.begin(), rep.warnings.end());
            ordered_json rj{{"variable", variable},
                            {"n", n},
                            {"overall_ci_width", stats_json(rep.overall_ci)},
                            {"disparity", rep.disparity}};
            ordered_json levels = ordered_json::array();
            for (auto& l : rep.levels) {
                l.requirement = required_for(l.level);
                ordered_json lj{{"level", l.level}, {"count", l.count}, {"ci_width", stats_json(l.ci)}};
                if (l.pi) {
                    lj["pi_width"] = stats_json(*l.pi);
                }
                if (l.requirement) {
                    lj["sample_size"] = answer_json(*l.requirement, false);
                }
                levels.push_back(lj);
                csv << variable << ',' << n << ',' << l.level << ',' << l.count << ',' << num(l.ci.mean) << ','
                    << num(l.ci.min) << ',' << num(l.ci.max) << ',' << (l.pi ? num(l.pi->mean) : "") << ','
                    << (l.requirement && l.requirement->required_n ? std::to_string(*l.requirement->required_n)
                                                                   : "")
                    << '\n';
            }
            rj["levels"] = levels;
            reports.push_back(rj);
        }
        if (ns.empty()) {
            ordered_json rj{{"variable", variable}};
            ordered_json levels = ordered_json::array();
            for (const auto& r : reqs) {
                levels.push_back({{"level", r.level}, {"count", r.count}, {"sample_size", answer_json(r.answer, false)}});
                csv << variable << ",," << r.level << ',' << r.count << ",,,,,"
                    << (r.answer.required_n ? std::to_string(*r.answer.required_n) : "") << '\n';
            }
            rj["levels"] = levels;
            reports.push_back(rj);
        }
    }
    if (config.width) {
        outcome.report["results"]["overall_sample_size"] = answer_json(
            population_answer(info, loaded.cohort, *config.width, IntervalKind::confidence, config.assumptions, trim),
            false);
    }
    outcome.report["results"]["subgroups"] = reports;
    if (config.format == OutputFormat::csv) {
        outcome.csv = csv.str();
    }
}

void run_simulate(const RunConfig& config, const LoadedCohort& loaded, RunOutcome& outcome) {
    const Cohort& c = loaded.cohort;
    const Matrix x = c.design().rightCols(static_cast<Eigen::Index>(c.predictor_count()));
    const Vector mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(c.rows() - 1);
    ordered_json res;
    res["empirical_mean"] = vector_json(mean);
    res["empirical_covariance"] = matrix_json(cov);
    res["outcome_mean"] = c.outcome().mean();
    res["outcome_sd"] = std::sqrt(sum_squared_deviation(c.outcome()) / static_cast<double>(c.rows() - 1));
    outcome.report["results"]["simulation"] = res;
    if (config.format == OutputFormat::csv) {
        std::ostringstream out;
        write_cohort_csv(c, "outcome", out);
        outcome.csv = out.str();
    }
}

void run_validate(const RunConfig& config, const LoadedCohort& loaded, const FisherUnitInformation& info,
                  RunOutcome& outcome) {
    OracleSpec spec;
    spec.sigma2 = info.sigma2();
    spec.n = config.n.front();
    spec.replicates = config.replicates;
    spec.seed = config.effective_seed();
    spec.alpha = config.assumptions.alpha;
    spec.strict = config.strict;
    std::string beta_source;
    const auto k = static_cast<Eigen::Index>(loaded.cohort.parameter_count());
    if (!config.true_coefficients.empty()) {
        if (static_cast<Eigen::Index>(config.true_coefficients.size()) != k) {
            fail(ErrorKind::configuration, "--beta needs p + 1 = " + std::to_string(k) + " values");
        }
        spec.true_coefficients = Eigen::Map<const Vector>(config.true_coefficients.data(), k);
        beta_source = "given";
    } else if (loaded.evidence) {
        const Vector bm = loaded.evidence->beta_multi();
        spec.true_coefficients.resize(k);
        spec.true_coefficients(0) = loaded.evidence->outcome.mean - loaded.joint->mean_vector.dot(bm);
        spec.true_coefficients.tail(k - 1) = bm;
        beta_source = "evidence beta_multi, intercept from outcome mean";
    } else {
        spec.true_coefficients = ols_coefficients(loaded.cohort);
        beta_source = "OLS fit to the cohort";
    }

    const auto result = run_oracle(spec, loaded.cohort);
    const auto verdict = empirical_vs_analytic_report(result, config.tolerance);

    ordered_json res;
    res["true_coefficients"] = vector_json(spec.true_coefficients);
    res["true_coefficients_source"] = beta_source;
    res["sigma2"] = spec.sigma2;
    res["n"] = spec.n;
    res["replicates_used"] = result.replicates_used;
    res["replicates_discarded"] = result.replicates_discarded;
    res["mean_empirical_ci_width"] = result.mean_empirical_ci_width;
    res["mean_analytic_ci_width"] = result.mean_analytic_ci_width;
    res["mean_ci_coverage"] = result.mean_ci_coverage;
    res["mean_pi_coverage"] = result.mean_pi_coverage;
    res["empirical_coefficient_variance"] = matrix_json(result.empirical_coefficient_variance);
    res["coefficient_variance_se"] = matrix_json(result.coefficient_variance_se);
    res["analytic_coefficient_variance"] = matrix_json(result.analytic_coefficient_variance);
    res["tolerance"] = verdict.tolerance;
    res["failures"] = verdict.failures;
    res["all_pass"] = verdict.all_pass();
    if (config.per_profile) {
        ordered_json rows = ordered_json::array();
        for (std::size_t i = 0; i < result.profiles.size(); ++i) {
            const auto& p = result.profiles[i];
            rows.push_back({{"row", p.row},
                            {"empirical_ci_width", p.empirical_ci_width},
                            {"analytic_ci_width", p.analytic_ci_width},
                            {"relative_error", p.relative_error},
                            {"pass", verdict.checks[i].pass},
                            {"ci_coverage", p.ci_coverage},
                            {"pi_coverage", p.pi_coverage}});
        }
        res["per_profile"] = rows;
    }
    outcome.report["results"]["oracle"] = res;
    for (const auto& w : result.warnings) {
        outcome.report["warnings"].push_back(w);
    }
    if (!verdict.all_pass()) {
        outcome.exit_code = exit_error;
    }
    if (config.format == OutputFormat::csv) {
        std::ostringstream out;
        out << "row,empirical_ci_width,analytic_ci_width,relative_error,pass,ci_coverage,pi_coverage\n";
        for (std::size_t i = 0; i < result.profiles.size(); ++i) {
            const auto& p = result.profiles[i];
            out << p.row << ',' << num(p.empirical_ci_width) << ',' << num(p.analytic_ci_width) << ','
                << num(p.relative_error) << ',' << (verdict.checks[i].pass ? "true" : "false") << ','
                << num(p.ci_coverage) << ',' << num(p.pi_coverage) << '\n';
        }
        outcome.csv = out.str();
    }
}

void run_sweep(const RunConfig& config, const LoadedCohort& loaded, const FisherUnitInformation& info,
               RunOutcome& outcome) {
    const std::int64_t base = config.baseline_n  ? *config.baseline_n
                              : !config.n.empty() ? config.n.front()
                                                  : static_cast<std::int64_t>(loaded.cohort.rows());
    std::vector<double> grid = config.grid;
    if (grid.empty()) {
        grid = default_width_grid(info, loaded.cohort, base, config.assumptions);
    }
    const auto sweep = width_threshold_sweep(info, loaded.cohort, grid, config.assumptions, config.effective_trim());
    ordered_json table = ordered_json::array();
    std::ostringstream csv;
    csv << "threshold,min_n\n";
    for (const auto& pt : sweep) {
        table.push_back({{"threshold", pt.threshold}, {"min_n", pt.min_n}});
        csv << num(pt.threshold) << ',' << pt.min_n << '\n';
    }
    const auto at_base = summarize(profile_widths(info, loaded.cohort, base, config.assumptions, false), base);
    outcome.report["results"]["sweep"] = table;
    outcome.report["results"]["grid_reference_n"] = base;
    outcome.report["results"]["widths_at_reference_n"] = summary_json(at_base);
    if (config.format == OutputFormat::csv) {
        outcome.csv = csv.str();
    }
}

} // namespace

RunMode parse_mode(const std::string& text) {
    static const std::map<std::string, RunMode> modes{
        {"check", RunMode::check},         {"target", RunMode::target},     {"pi", RunMode::pi},
        {"subgroups", RunMode::subgroups}, {"simulate", RunMode::simulate}, {"validate", RunMode::validate},
        {"sweep", RunMode::sweep}};
    auto it = modes.find(text);
    if (it == modes.end()) {
        fail(ErrorKind::configuration, "unknown mode '" + text + "'");
    }
    return it->second;
}

std::string to_string(RunMode mode) {
    switch (mode) {
    case RunMode::check: return "check";
    case RunMode::target: return "target";
    case RunMode::pi: return "pi";
    case RunMode::subgroups: return "subgroups";
    case RunMode::simulate: return "simulate";
    case RunMode::validate: return "validate";
    case RunMode::sweep: return "sweep";
    }
    return "unknown";
}

void RunConfig::validate() const {
    if (data.has_value() == evidence.has_value()) {
        fail(ErrorKind::configuration, "exactly one of --data or --evidence is required");
    }
    if (data && (csv.outcome.empty() || csv.predictors.empty())) {
        fail(ErrorKind::configuration, "--data needs --outcome and --predictors");
    }
    if (independence && !evidence) {
        fail(ErrorKind::configuration, "--independent applies to --evidence sources only");
    }
    if (mode == RunMode::simulate && !evidence) {
        fail(ErrorKind::configuration, "simulate needs --evidence");
    }
    if (sigma2 && r_squared) {
        fail(ErrorKind::configuration, "give either --sigma2 or --r2, not both");
    }
    if (mode != RunMode::simulate && !sigma2 && !r_squared) {
        fail(ErrorKind::configuration, "a variance assumption (--sigma2 or --r2) is required");
    }
    assumptions.validate();
    for (auto v : n) {
        if (v < 1) {
            fail(ErrorKind::configuration, "--n values must be positive");
        }
    }
    switch (mode) {
    case RunMode::check:
        if (n.empty()) {
            fail(ErrorKind::configuration, "check needs --n");
        }
        break;
    case RunMode::target:
        if (!width) {
            fail(ErrorKind::configuration, "target needs --width");
        }
        break;
    case RunMode::pi:
        if (n.empty() && !width) {
            fail(ErrorKind::configuration, "pi needs --n or --width");
        }
        break;
    case RunMode::subgroups:
        if (subgroups.empty()) {
            fail(ErrorKind::configuration, "subgroups needs --subgroup");
        }
        if (n.empty() && !width) {
            fail(ErrorKind::configuration, "subgroups needs --n or --width");
        }
        break;
    case RunMode::validate:
        if (n.size() != 1) {
            fail(ErrorKind::configuration, "validate needs exactly one --n (replicate sample size)");
        }
        break;
    case RunMode::simulate:
    case RunMode::sweep:
        break;
    }
    if (trim) {
        trimmed_count(*trim, 1);
    }
    if (evidence && n_sim < 1000) {
        fail(ErrorKind::configuration, "--nsim must be at least 1000");
    }
}

double RunConfig::effective_trim() const {
    if (trim) {
        return *trim;
    }
    return evidence ? 1e-5 : 0.0;
}

std::uint64_t RunConfig::effective_seed() const { return seed.value_or(default_seed); }

RunOutcome run(const RunConfig& config) {
    config.validate();

    RunOutcome outcome;
    outcome.report["tool"] = "precisen";
    outcome.report["config"] = config_json(config);
    outcome.report["warnings"] = ordered_json::array();

    LoadedCohort loaded = load_cohort(config);
    std::vector<std::string> warnings = loaded.warnings;
    outcome.report["cohort"] = loaded.description;
    ordered_json preds = ordered_json::array();
    for (const auto& p : loaded.cohort.predictors()) {
        ordered_json pj{{"name", p.name}, {"kind", kind_name(p.kind)}};
        if (p.kind == PredictorKind::binary) {
            pj["level_one"] = p.level_one;
        }
        preds.push_back(pj);
    }
    outcome.report["cohort"]["predictors"] = preds;

    if (config.export_cohort) {
        std::ofstream out(*config.export_cohort);
        if (!out) {
            fail(ErrorKind::ingestion, "cannot write '" + *config.export_cohort + "'");
        }
        write_cohort_csv(loaded.cohort, config.data ? config.csv.outcome : "outcome", out);
    }

    std::optional<FisherUnitInformation> info;
    if (config.sigma2 || config.r_squared) {
        info = build_information(config, loaded.cohort);
        outcome.report["fisher"] = fisher_json(*info, loaded.cohort);
    }

    switch (config.mode) {
    case RunMode::check:
        run_check(config, loaded, *info, outcome, warnings);
        break;
    case RunMode::target:
        run_target(config, loaded, *info, config.interval, outcome);
        break;
    case RunMode::pi:
        if (!config.n.empty()) {
            run_check(config, loaded, *info, outcome, warnings);
        }
        if (config.width) {
            run_target(config, loaded, *info, IntervalKind::prediction, outcome);
        }
        break;
    case RunMode::subgroups:
        run_subgroups(config, loaded, *info, outcome, warnings);
        break;
    case RunMode::simulate:
        run_simulate(config, loaded, outcome);
        break;
    case RunMode::validate:
        run_validate(config, loaded, *info, outcome);
        break;
    case RunMode::sweep:
        run_sweep(config, loaded, *info, outcome);
        break;
    }

    for (const auto& w : warnings) {
        outcome.report["warnings"].push_back(w);
    }
    return outcome;
}

std::string render(const RunOutcome& outcome, const RunConfig& config) {
    if (config.format == OutputFormat::csv) {
        return outcome.csv;
    }
    return outcome.report.dump(2) + "\n";
}

} // namespace precisen
