// precisen: sample size planning for precise linear-regression predictions.
//
//   precisen check  --data fev.csv --outcome fev --predictors age,height,sex \
//                   --binary sex=male --r2 0.77 --n 237,654
//   precisen target --evidence summary.json --r2 0.77 --width 0.3 --seed 7

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "precisen/error.hpp"
#include "precisen/random.hpp"
#include "precisen/report.hpp"

int main(int argc, char** argv) {
    using namespace precisen;

    CLI::App app{"Anticipated prediction precision and required sample size for linear prediction models"};
    app.set_version_flag("--version", "precisen 0.1.0");

    RunConfig config;
    std::string mode;
    std::vector<std::string> binary;
    std::string policy = "normal";
    std::string interval = "ci";
    std::string format = "json";
    std::string recovery = "exact";
    std::optional<std::uint64_t> seed;
    double alpha = 0.05;

    app.add_option("mode", mode, "check | target | pi | subgroups | simulate | validate | sweep")
        ->required()
        ->check(CLI::IsMember({"check", "target", "pi", "subgroups", "simulate", "validate", "sweep"}));

    auto* data = app.add_option("--data", config.data, "CSV file with one row per individual");
    auto* evidence = app.add_option("--evidence", config.evidence, "Evidence summary JSON (synthesizes a cohort)");
    data->excludes(evidence);
    app.add_option("--outcome", config.csv.outcome, "Outcome column (CSV source)");
    app.add_option("--predictors", config.csv.predictors, "Predictor columns, comma separated")->delimiter(',');
    app.add_option("--binary", binary, "Binary predictor, as name or name=label-coded-1")->delimiter(',');
    app.add_option("--subgroup", config.subgroups, "Subgroup column(s) for stratified results")->delimiter(',');
    app.add_flag("--allow-incomplete", config.csv.allow_incomplete, "Drop incomplete CSV rows instead of failing");

    auto* r2 = app.add_option("--r2", config.r_squared, "Anticipated R-squared");
    auto* sigma2 = app.add_option("--sigma2", config.sigma2, "Residual variance (outcome units squared)");
    r2->excludes(sigma2);
    app.add_option("--alpha", alpha, "Significance level")->capture_default_str();
    app.add_option("--policy", policy, "Critical value: normal or t")
        ->check(CLI::IsMember({"normal", "t"}))
        ->capture_default_str();

    app.add_option("--n", config.n, "Candidate sample size(s), comma separated")->delimiter(',');
    app.add_option("--width", config.width, "Target interval width (outcome units)");
    app.add_option("--interval", interval, "Interval for --width targets: ci or pi")
        ->check(CLI::IsMember({"ci", "pi"}))
        ->capture_default_str();
    app.add_option("--trim", config.trim, "Fraction of highest-leverage profiles excluded (default 0, 1e-5 synthetic)");
    app.add_option("--grid", config.grid, "Sweep thresholds, ascending, comma separated")->delimiter(',');

    app.add_option("--nsim", config.n_sim, "Synthetic cohort size")->capture_default_str();
    app.add_option("--seed", seed, "Random seed (falls back to PRECISEN_SEED)");
    app.add_flag("--independent", config.independence, "Simulate predictors as mutually independent");
    app.add_option("--recovery", recovery, "Covariance recovery: exact or least_squares")
        ->check(CLI::IsMember({"exact", "least_squares"}))
        ->capture_default_str();

    app.add_option("--beta", config.true_coefficients, "validate: true coefficients, intercept first")
        ->delimiter(',');
    app.add_option("--replicates", config.replicates, "validate: Monte Carlo replicates")->capture_default_str();
    app.add_option("--tolerance", config.tolerance, "validate: relative width tolerance")->capture_default_str();
    app.add_flag("--strict", config.strict, "validate: analytic side uses t critical values");

    app.add_option("--baseline-n", config.baseline_n, "Externally computed minimum n, shown for context");
    app.add_flag("--per-profile", config.per_profile, "Include per-profile tables in JSON output");
    app.add_option("--export-cohort", config.export_cohort, "Write the cohort used (predictors + outcome) as CSV");
    app.add_option("--out", config.out, "Output file (default stdout)");
    app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        config.mode = parse_mode(mode);
        for (const auto& b : binary) {
            config.csv.binary.push_back(parse_binary_spec(b));
        }
        config.assumptions.alpha = alpha;
        config.assumptions.policy = policy == "t" ? CriticalValuePolicy::student_t : CriticalValuePolicy::normal;
        config.interval = interval == "pi" ? IntervalKind::prediction : IntervalKind::confidence;
        config.format = format == "csv" ? OutputFormat::csv : OutputFormat::json;
        config.recovery = recovery == "least_squares" ? RecoveryMode::least_squares : RecoveryMode::exact_p3;
        if (seed) {
            config.seed = seed;
            config.seed_source = "flag";
        } else if (auto env = seed_from_environment()) {
            config.seed = env;
            config.seed_source = "PRECISEN_SEED";
        }

        const RunOutcome outcome = run(config);
        for (const auto& w : outcome.report["warnings"]) {
            std::cerr << "warning: " << w.get<std::string>() << '\n';
        }
        const std::string text = render(outcome, config);
        if (config.out) {
            std::ofstream out(*config.out);
            if (!out) {
                std::cerr << "error: cannot write '" << *config.out << "'\n";
                return exit_error;
            }
            out << text;
        } else {
            std::cout << text;
        }
        if (outcome.exit_code == exit_infeasible) {
            std::cerr << "target prediction-interval width is infeasible at any sample size\n";
        }
        return outcome.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
}
