#include "precisen/precision_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "precisen/error.hpp"
#include "precisen/kernels.hpp"

namespace precisen {

namespace {

constexpr const char* kModule = "precision_engine";

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, kModule, message);
}

void check_profile(const FisherUnitInformation& info, const Vector& profile) {
    if (static_cast<std::size_t>(profile.size()) != info.parameter_count()) {
        fail(ErrorKind::shape, "profile has " + std::to_string(profile.size()) + " entries, expected " +
                                   std::to_string(info.parameter_count()));
    }
    if (profile(0) != 1.0) {
        fail(ErrorKind::shape, "profile must start with the intercept value 1");
    }
}

void check_n(const FisherUnitInformation& info, std::int64_t n) {
    if (n < minimum_sample_size(info)) {
        fail(ErrorKind::insufficient_rows, "sample size " + std::to_string(n) + " is below p + 2 = " +
                                               std::to_string(minimum_sample_size(info)));
    }
}

void check_target(double target_width) {
    if (!(target_width > 0.0) || !std::isfinite(target_width)) {
        fail(ErrorKind::configuration, "target width must be positive and finite");
    }
}

inline double ci_from_leverage(double leverage, std::int64_t n, double c) {
    return 2.0 * c * std::sqrt(leverage / static_cast<double>(n));
}

inline double pi_from_leverage(double leverage, double sigma2, std::int64_t n, double c) {
    return 2.0 * c * std::sqrt(leverage / static_cast<double>(n) + sigma2);
}

constexpr double kLargestN = 1e15;

std::int64_t to_sample_size(double raw) {
    if (!(raw <= kLargestN)) {
        fail(ErrorKind::configuration, "required sample size exceeds 1e15; target width is unreachable in practice");
    }
    return static_cast<std::int64_t>(std::ceil(raw));
}

// Moves n onto the smallest integer whose width meets the target, so the
// closed form and the forward width agree despite rounding in the ceiling.
template <typename WidthAt>
std::int64_t settle(std::int64_t n, std::int64_t floor_n, double target, WidthAt width_at) {
    n = std::max(n, floor_n);
    while (width_at(n) > target) {
        ++n;
    }
    while (n - 1 >= floor_n && width_at(n - 1) <= target) {
        --n;
    }
    return n;
}

} // namespace

std::string to_string(IntervalKind kind) {
    return kind == IntervalKind::confidence ? "confidence" : "prediction";
}

std::int64_t minimum_sample_size(const FisherUnitInformation& info) {
    return static_cast<std::int64_t>(info.parameter_count()) + 1;
}

double leverage_form(const FisherUnitInformation& info, const Vector& profile) {
    check_profile(info, profile);
    return profile.dot(info.inverse() * profile);
}

std::vector<double> leverage_forms(const FisherUnitInformation& info, const Cohort& cohort) {
    if (cohort.parameter_count() != info.parameter_count()) {
        fail(ErrorKind::shape, "cohort and information matrix disagree on the number of predictors");
    }
    std::vector<double> out(cohort.rows());
    kernels::parallel::quadratic_forms(cohort.design(), info.inverse(), out);
    return out;
}

double prediction_variance(const FisherUnitInformation& info, const Vector& profile, std::int64_t n) {
    check_n(info, n);
    return leverage_form(info, profile) / static_cast<double>(n);
}

double ci_width(const FisherUnitInformation& info, const Vector& profile, std::int64_t n,
                const PrecisionAssumptions& assumptions) {
    assumptions.validate();
    const double c = critical_value(assumptions, n, info.predictor_count());
    return 2.0 * c * std::sqrt(prediction_variance(info, profile, n));
}

double pi_width(const FisherUnitInformation& info, const Vector& profile, std::int64_t n,
                const PrecisionAssumptions& assumptions) {
    assumptions.validate();
    const double c = critical_value(assumptions, n, info.predictor_count());
    return 2.0 * c * std::sqrt(prediction_variance(info, profile, n) + info.sigma2());
}

std::int64_t required_n_ci_from_leverage(double leverage, double target_width, double z, std::int64_t floor_n) {
    check_target(target_width);
    const double half = target_width / (2.0 * z);
    const std::int64_t guess = to_sample_size(leverage / (half * half));
    return settle(guess, floor_n, target_width, [&](std::int64_t m) { return ci_from_leverage(leverage, m, z); });
}

PredictionRequirement required_n_pi_from_leverage(double leverage, double sigma2, double target_width, double z,
                                                  std::int64_t floor_n) {
    check_target(target_width);
    PredictionRequirement out;
    out.min_achievable_width = 2.0 * z * std::sqrt(sigma2);
    const double half = target_width / (2.0 * z);
    const double denom = half * half - sigma2;
    if (!(denom > 0.0)) {
        out.feasible = false;
        return out;
    }
    out.feasible = true;
    const std::int64_t guess = to_sample_size(leverage / denom);
    out.n = settle(guess, floor_n, target_width,
                   [&](std::int64_t m) { return pi_from_leverage(leverage, sigma2, m, z); });
    return out;
}

std::int64_t required_n_ci(const FisherUnitInformation& info, const Vector& profile, double target_width,
                           const PrecisionAssumptions& assumptions) {
    assumptions.validate();
    return required_n_ci_from_leverage(leverage_form(info, profile), target_width, z_critical(assumptions.alpha),
                                       minimum_sample_size(info));
}

PredictionRequirement required_n_pi(const FisherUnitInformation& info, const Vector& profile, double target_width,
                                    const PrecisionAssumptions& assumptions) {
    assumptions.validate();
    return required_n_pi_from_leverage(leverage_form(info, profile), info.sigma2(), target_width,
                                       z_critical(assumptions.alpha), minimum_sample_size(info));
}

std::vector<ProfileWidth> profile_widths(const FisherUnitInformation& info, const Cohort& cohort, std::int64_t n,
                                         const PrecisionAssumptions& assumptions, bool with_prediction_intervals) {
    assumptions.validate();
    check_n(info, n);
    const double c = critical_value(assumptions, n, info.predictor_count());
    const auto leverages = leverage_forms(info, cohort);
    std::vector<ProfileWidth> out(leverages.size());
    for (std::size_t i = 0; i < leverages.size(); ++i) {
        out[i].row_index = i;
        out[i].leverage_form = leverages[i];
        out[i].ci_width = ci_from_leverage(leverages[i], n, c);
        if (with_prediction_intervals) {
            out[i].pi_width = pi_from_leverage(leverages[i], info.sigma2(), n, c);
        }
    }
    return out;
}

WidthStats width_stats(std::span<const double> widths) {
    if (widths.empty()) {
        fail(ErrorKind::configuration, "no profiles to summarize");
    }
    WidthStats s;
    s.min = *std::min_element(widths.begin(), widths.end());
    s.max = *std::max_element(widths.begin(), widths.end());
    s.mean = std::accumulate(widths.begin(), widths.end(), 0.0) / static_cast<double>(widths.size());
    // The mean of values in [min, max] can drift past the bounds by one ulp.
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

WidthSummary summarize(std::span<const ProfileWidth> widths, std::int64_t n) {
    WidthSummary summary;
    summary.n = n;
    summary.profiles = widths.size();
    std::vector<double> ci(widths.size());
    std::transform(widths.begin(), widths.end(), ci.begin(), [](const ProfileWidth& w) { return w.ci_width; });
    summary.ci = width_stats(ci);
    if (!widths.empty() && widths.front().pi_width) {
        std::vector<double> pi(widths.size());
        std::transform(widths.begin(), widths.end(), pi.begin(), [](const ProfileWidth& w) { return *w.pi_width; });
        summary.pi = width_stats(pi);
    }
    return summary;
}

std::size_t trimmed_count(double trim_fraction, std::size_t rows) {
    if (!(trim_fraction >= 0.0 && trim_fraction < 0.01)) {
        fail(ErrorKind::configuration, "trim fraction must lie in [0, 0.01)");
    }
    // 1e-5 * 1e6 is not exactly 10 in binary; absorb the representation error.
    return static_cast<std::size_t>(std::ceil(trim_fraction * static_cast<double>(rows) - 1e-9));
}

namespace {

// Positions of the retained profiles: all but the `drop` largest leverages,
// ties broken towards dropping the earlier row.
std::vector<std::size_t> retained_positions(std::span<const double> leverages, std::size_t drop) {
    std::vector<std::size_t> order(leverages.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (drop == 0) {
        return order;
    }
    auto larger = [&](std::size_t a, std::size_t b) {
        return leverages[a] != leverages[b] ? leverages[a] > leverages[b] : a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(drop - 1), order.end(), larger);
    std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(drop), order.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

double max_retained_leverage(std::span<const double> leverages, double trim_fraction) {
    const std::size_t drop = trimmed_count(trim_fraction, leverages.size());
    if (drop >= leverages.size()) {
        fail(ErrorKind::configuration, "no profiles remain after trimming");
    }
    std::vector<double> sorted(leverages.begin(), leverages.end());
    auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(drop);
    std::nth_element(sorted.begin(), nth, sorted.end(), std::greater<>());
    return *nth;
}

} // namespace

SampleSizeAnswer population_answer_from_leverage(const FisherUnitInformation& info, std::span<const double> leverages,
                                                 std::span<const std::size_t> row_ids, double target_width,
                                                 IntervalKind kind, const PrecisionAssumptions& assumptions,
                                                 double trim_fraction) {
    assumptions.validate();
    check_target(target_width);
    if (row_ids.size() != leverages.size()) {
        fail(ErrorKind::shape, "row ids and leverages differ in length");
    }
    const std::size_t drop = trimmed_count(trim_fraction, leverages.size());
    if (drop >= leverages.size()) {
        fail(ErrorKind::configuration, "no profiles remain after trimming");
    }

    const double z = z_critical(assumptions.alpha);
    const std::int64_t floor_n = minimum_sample_size(info);

    SampleSizeAnswer answer;
    answer.target_width = target_width;
    answer.interval_kind = kind;
    answer.trimmed_rows = drop;

    if (kind == IntervalKind::prediction) {
        answer.min_achievable_width = 2.0 * z * std::sqrt(info.sigma2());
        const double half = target_width / (2.0 * z);
        if (!(half * half > info.sigma2())) {
            answer.feasible = false;
            return answer;
        }
    }

    answer.per_profile_n.resize(leverages.size());
    for (std::size_t i = 0; i < leverages.size(); ++i) {
        answer.per_profile_n[i] =
            kind == IntervalKind::confidence
                ? required_n_ci_from_leverage(leverages[i], target_width, z, floor_n)
                : required_n_pi_from_leverage(leverages[i], info.sigma2(), target_width, z, floor_n).n;
    }

    std::int64_t best = 0;
    std::size_t best_pos = 0;
    for (std::size_t pos : retained_positions(leverages, drop)) {
        if (answer.per_profile_n[pos] > best) {
            best = answer.per_profile_n[pos];
            best_pos = pos;
        }
    }
    answer.required_n = best;
    answer.limiting_row = row_ids[best_pos];
    return answer;
}

SampleSizeAnswer population_answer(const FisherUnitInformation& info, const Cohort& cohort, double target_width,
                                   IntervalKind kind, const PrecisionAssumptions& assumptions, double trim_fraction) {
    const auto leverages = leverage_forms(info, cohort);
    std::vector<std::size_t> ids(leverages.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    return population_answer_from_leverage(info, leverages, ids, target_width, kind, assumptions, trim_fraction);
}

std::vector<SweepPoint> width_threshold_sweep(const FisherUnitInformation& info, const Cohort& cohort,
                                              std::span<const double> width_grid,
                                              const PrecisionAssumptions& assumptions, double trim_fraction) {
    assumptions.validate();
    if (width_grid.empty()) {
        fail(ErrorKind::configuration, "width grid is empty");
    }
    for (std::size_t i = 0; i < width_grid.size(); ++i) {
        check_target(width_grid[i]);
        if (i > 0 && !(width_grid[i] > width_grid[i - 1])) {
            fail(ErrorKind::configuration, "width grid must be sorted strictly ascending");
        }
    }
    const auto leverages = leverage_forms(info, cohort);
    // Per-profile n is monotone in leverage, so the retained maximum is set
    // by the largest retained leverage.
    const double worst = max_retained_leverage(leverages, trim_fraction);
    const double z = z_critical(assumptions.alpha);
    const std::int64_t floor_n = minimum_sample_size(info);

    std::vector<SweepPoint> out;
    out.reserve(width_grid.size());
    for (double w : width_grid) {
        out.push_back({w, required_n_ci_from_leverage(worst, w, z, floor_n)});
    }
    return out;
}

std::vector<double> default_width_grid(const FisherUnitInformation& info, const Cohort& cohort,
                                       std::int64_t baseline_n, const PrecisionAssumptions& assumptions,
                                       std::size_t points) {
    if (points == 0) {
        fail(ErrorKind::configuration, "grid needs at least one point");
    }
    const auto widths = profile_widths(info, cohort, baseline_n, assumptions, false);
    const auto summary = summarize(widths, baseline_n);
    const double lo = summary.ci.min;
    const double hi = summary.ci.max;
    if (points == 1 || !(hi > lo)) {
        return {hi};
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

} // namespace precisen
