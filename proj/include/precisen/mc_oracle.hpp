#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "precisen/model_core.hpp"

namespace precisen {

/// Monte Carlo check of the analytic width formulas: replicate datasets of
/// size n are drawn by resampling cohort rows, outcomes come from a known
/// linear model, and OLS intervals are compared with the anticipated ones.
struct OracleSpec {
    /// Intercept first, length p + 1.
    Vector true_coefficients;
    double sigma2 = 1.0;
    std::int64_t n = 0;
    std::int64_t replicates = 2000;
    std::uint64_t seed = 0;
    /// Cohort rows at which intervals are evaluated; empty means every row.
    std::vector<std::size_t> profile_set;
    double alpha = 0.05;
    /// Analytic side uses the t critical value (n - p - 1 df) instead of z.
    bool strict = false;
};

struct OracleProfile {
    std::size_t row = 0;
    double empirical_ci_width = 0.0;
    double analytic_ci_width = 0.0;
    double relative_error = 0.0;
    double ci_coverage = 0.0;
    double empirical_pi_width = 0.0;
    double analytic_pi_width = 0.0;
    double pi_coverage = 0.0;
};

struct OracleResult {
    std::vector<OracleProfile> profiles;
    std::int64_t replicates_used = 0;
    std::int64_t replicates_discarded = 0;
    /// Mean over replicates of (b - beta)(b - beta)'.
    Matrix empirical_coefficient_variance;
    /// Monte Carlo standard error of each entry above.
    Matrix coefficient_variance_se;
    /// I(beta)^-1 / n.
    Matrix analytic_coefficient_variance;
    double mean_empirical_ci_width = 0.0;
    double mean_analytic_ci_width = 0.0;
    double mean_ci_coverage = 0.0;
    double mean_pi_coverage = 0.0;
    std::vector<std::string> warnings;
};

/// Replicates per accumulation chunk; chunks are reduced in order so the
/// result does not depend on the thread count.
inline constexpr std::int64_t oracle_chunk = 32;

OracleResult run_oracle(const OracleSpec& spec, const Cohort& cohort);

struct OracleCheck {
    std::size_t row = 0;
    double relative_error = 0.0;
    bool pass = false;
};

struct OracleVerdict {
    double tolerance = 0.03;
    std::vector<OracleCheck> checks;
    std::size_t failures = 0;
    bool all_pass() const noexcept { return failures == 0; }
};

/// Flags each profile whose |empirical - analytic| / analytic CI width exceeds `tolerance`.
OracleVerdict empirical_vs_analytic_report(const OracleResult& result, double tolerance = 0.03);

} // namespace precisen
