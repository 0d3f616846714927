#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "precisen/model_core.hpp"

namespace precisen {

enum class IntervalKind { confidence, prediction };

std::string to_string(IntervalKind kind);

struct ProfileWidth {
    std::size_t row_index = 0;
    /// x I(beta)^-1 x'
    double leverage_form = 0.0;
    double ci_width = 0.0;
    std::optional<double> pi_width;
};

struct WidthStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Width statistics for one subgroup level.
struct LevelWidths {
    std::string variable;
    std::string level;
    std::size_t count = 0;
    WidthStats ci;
    std::optional<WidthStats> pi;
};

struct WidthSummary {
    std::int64_t n = 0;
    std::size_t profiles = 0;
    WidthStats ci;
    std::optional<WidthStats> pi;
    std::vector<LevelWidths> by_level;
};

struct SampleSizeAnswer {
    double target_width = 0.0;
    IntervalKind interval_kind = IntervalKind::confidence;
    /// Per cohort row; empty when the target is infeasible.
    std::vector<std::int64_t> per_profile_n;
    /// Maximum over retained rows; absent when infeasible.
    std::optional<std::int64_t> required_n;
    bool feasible = true;
    /// 2 z sigma, reported for prediction intervals.
    std::optional<double> min_achievable_width;
    std::size_t trimmed_rows = 0;
    /// Row that attains required_n.
    std::optional<std::size_t> limiting_row;
};

/// Result of inverting a prediction-interval target for one profile.
struct PredictionRequirement {
    bool feasible = false;
    std::int64_t n = 0;
    double min_achievable_width = 0.0;
};

struct SweepPoint {
    double threshold = 0.0;
    std::int64_t min_n = 0;
};

/// Smallest sample size accepted anywhere: p + 2 leaves one residual degree
/// of freedom after fitting p + 1 coefficients.
std::int64_t minimum_sample_size(const FisherUnitInformation& info);

/// x I(beta)^-1 x' for one profile; `profile` includes the leading 1.
double leverage_form(const FisherUnitInformation& info, const Vector& profile);

/// Leverage form for every cohort row (OpenMP kernel).
std::vector<double> leverage_forms(const FisherUnitInformation& info, const Cohort& cohort);

/// var(y_hat_new) = x I(beta)^-1 x' / n.
double prediction_variance(const FisherUnitInformation& info, const Vector& profile, std::int64_t n);

/// 2 c sqrt(var(y_hat_new)) with c the policy's critical value.
double ci_width(const FisherUnitInformation& info, const Vector& profile, std::int64_t n,
                const PrecisionAssumptions& assumptions);

/// 2 c sqrt(var(y_hat_new) + sigma^2).
double pi_width(const FisherUnitInformation& info, const Vector& profile, std::int64_t n,
                const PrecisionAssumptions& assumptions);

/// Smallest n with normal-policy ci_width <= target, floored at p + 2.
std::int64_t required_n_ci(const FisherUnitInformation& info, const Vector& profile, double target_width,
                           const PrecisionAssumptions& assumptions);

/// Inverts the prediction-interval width. Infeasible when
/// (target / 2z)^2 <= sigma^2: no sample size gets below 2 z sigma.
PredictionRequirement required_n_pi(const FisherUnitInformation& info, const Vector& profile,
                                    double target_width, const PrecisionAssumptions& assumptions);

/// Leverage-level versions of the two inversions, used by the population paths.
std::int64_t required_n_ci_from_leverage(double leverage, double target_width, double z, std::int64_t floor_n);
PredictionRequirement required_n_pi_from_leverage(double leverage, double sigma2, double target_width, double z,
                                                  std::int64_t floor_n);

std::vector<ProfileWidth> profile_widths(const FisherUnitInformation& info, const Cohort& cohort, std::int64_t n,
                                         const PrecisionAssumptions& assumptions, bool with_prediction_intervals);

WidthStats width_stats(std::span<const double> widths);

WidthSummary summarize(std::span<const ProfileWidth> widths, std::int64_t n);

/// Number of rows dropped for a trim fraction: ceil(trim * rows).
std::size_t trimmed_count(double trim_fraction, std::size_t rows);

/// Required n over a set of profiles given their leverage forms; the
/// ceil(trim * N) highest-leverage profiles are excluded from the maximum.
/// `row_ids` maps positions in `leverages` back to cohort rows.
SampleSizeAnswer population_answer_from_leverage(const FisherUnitInformation& info, std::span<const double> leverages,
                                                 std::span<const std::size_t> row_ids, double target_width,
                                                 IntervalKind kind, const PrecisionAssumptions& assumptions,
                                                 double trim_fraction);

SampleSizeAnswer population_answer(const FisherUnitInformation& info, const Cohort& cohort, double target_width,
                                   IntervalKind kind, const PrecisionAssumptions& assumptions, double trim_fraction);

/// Minimum n such that every retained profile's CI is no wider than each threshold.
std::vector<SweepPoint> width_threshold_sweep(const FisherUnitInformation& info, const Cohort& cohort,
                                              std::span<const double> width_grid,
                                              const PrecisionAssumptions& assumptions, double trim_fraction);

/// `points` evenly spaced thresholds between the cohort's min and max CI width at `baseline_n`.
std::vector<double> default_width_grid(const FisherUnitInformation& info, const Cohort& cohort,
                                       std::int64_t baseline_n, const PrecisionAssumptions& assumptions,
                                       std::size_t points = 100);

} // namespace precisen
