#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "precisen/evidence_synthesis.hpp"
#include "precisen/ingest.hpp"
#include "precisen/precision_engine.hpp"

namespace precisen {

enum class RunMode { check, target, pi, subgroups, simulate, validate, sweep };
enum class OutputFormat { json, csv };

RunMode parse_mode(const std::string& text);
std::string to_string(RunMode mode);

/// Everything a run needs. Exactly one of `data` / `evidence` is set.
struct RunConfig {
    RunMode mode = RunMode::check;

    std::optional<std::string> data;
    CsvSpec csv;
    std::optional<std::string> evidence;
    RecoveryMode recovery = RecoveryMode::exact_p3;
    bool independence = false;
    std::vector<std::string> subgroups;

    std::optional<double> sigma2;
    std::optional<double> r_squared;
    PrecisionAssumptions assumptions;

    std::vector<std::int64_t> n;
    std::optional<double> width;
    IntervalKind interval = IntervalKind::confidence;
    std::optional<double> trim;
    std::vector<double> grid;

    std::int64_t n_sim = 1'000'000;
    std::optional<std::uint64_t> seed;
    std::string seed_source = "default";
    std::optional<std::int64_t> baseline_n;

    // validate mode
    std::vector<double> true_coefficients;
    std::int64_t replicates = 2000;
    double tolerance = 0.03;
    bool strict = false;

    bool per_profile = false;
    std::optional<std::string> export_cohort;
    std::optional<std::string> out;
    OutputFormat format = OutputFormat::json;

    /// Throws configuration errors for missing or conflicting fields.
    void validate() const;
    double effective_trim() const;
    std::uint64_t effective_seed() const;
};

struct RunOutcome {
    int exit_code = 0;
    nlohmann::ordered_json report;
    /// Filled when format is csv.
    std::string csv;
};

inline constexpr int exit_success = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_infeasible = 2;

/// Executes one mode end to end. Library errors propagate as precisen::Error.
RunOutcome run(const RunConfig& config);

/// Serialized report text in the configured format.
std::string render(const RunOutcome& outcome, const RunConfig& config);

} // namespace precisen
