#include <doctest.h>

#include <cmath>
#include <numeric>

#include "precisen/error.hpp"
#include "precisen/precision_engine.hpp"
#include "test_support.hpp"

using namespace precisen;
namespace ts = testing_support;

namespace {

const PrecisionAssumptions normal{};
constexpr double z95 = 1.959963984540054;

FisherUnitInformation intercept_only(double sigma2) {
    Vector y(3);
    y << 0.0, 1.0, 2.0;
    const auto c = Cohort::from_columns({}, Matrix(3, 0), y);
    return fisher_unit_information(c, VarianceAssumption::residual_variance(sigma2));
}

Vector one() {
    return Vector::Ones(1);
}

Vector row_of(const Cohort& c, std::size_t i) {
    return c.design().row(static_cast<Eigen::Index>(i)).transpose();
}

} // namespace

TEST_CASE("intercept-only widths") {
    const auto info = intercept_only(1.0);
    CHECK(prediction_variance(info, one(), 100) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(ci_width(info, one(), 100, normal) == doctest::Approx(2.0 * z95 * 0.1).epsilon(1e-14));
    CHECK(ci_width(info, one(), 100, normal) == doctest::Approx(0.39199).epsilon(1e-5));
    CHECK(pi_width(info, one(), 100, normal) == doctest::Approx(2.0 * z95 * std::sqrt(1.01)).epsilon(1e-14));
    CHECK(required_n_ci(info, one(), 0.392, normal) == 100);
}

TEST_CASE("two-row cohort prediction variance") {
    Matrix v(2, 1);
    v << 0.0, 1.0;
    Vector y(2);
    y << 0.0, 1.0;
    const auto c = Cohort::from_columns({{"x", PredictorKind::continuous, ""}}, v, y);
    const auto info = fisher_unit_information(c, VarianceAssumption::residual_variance(2.0));
    Vector x(2);
    x << 1.0, 0.0;
    // top-left entry of the coefficient variance [[1,-1],[-1,2]]
    CHECK(prediction_variance(info, x, 4) == doctest::Approx(1.0).epsilon(1e-14));
    x << 1.0, 1.0;
    CHECK(prediction_variance(info, x, 4) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("PI target 4.2 for the intercept-only model") {
    const auto info = intercept_only(1.0);
    const auto req = required_n_pi(info, one(), 4.2, normal);
    REQUIRE(req.feasible);
    CHECK(req.n == 7);
    CHECK(req.min_achievable_width == doctest::Approx(2.0 * z95).epsilon(1e-14));

    std::int64_t scan = minimum_sample_size(info);
    while (pi_width(info, one(), scan, normal) > 4.2) {
        ++scan;
    }
    CHECK(scan == req.n);
}

TEST_CASE("PI target at or below the floor is infeasible") {
    const auto info = intercept_only(1.0);
    CHECK_FALSE(required_n_pi(info, one(), 2.0 * z95, normal).feasible);
    CHECK_FALSE(required_n_pi(info, one(), 1.0, normal).feasible);
    CHECK(required_n_pi(info, one(), 2.0 * z95 * 1.001, normal).feasible);
}

TEST_CASE("PI inversion approaches the CI inversion as sigma^2 vanishes") {
    for (double lev : {0.3, 1.7, 12.0}) {
        for (double w : {0.05, 0.2, 1.0}) {
            const auto pi = required_n_pi_from_leverage(lev, 1e-300, w, z95, 3);
            CHECK(pi.feasible);
            CHECK(pi.n == required_n_ci_from_leverage(lev, w, z95, 3));
        }
    }
}

TEST_CASE("widths follow the inverse square-root law exactly") {
    const auto c = ts::random_cohort(21, 400, 3, 1);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.5));
    for (std::size_t i : {0u, 13u, 399u}) {
        const Vector x = row_of(c, i);
        for (std::int64_t n : {10, 100, 1000}) {
            for (std::int64_t k : {2, 4, 9}) {
                const double ratio = ci_width(info, x, n, normal) / ci_width(info, x, k * n, normal);
                CHECK(ratio == doctest::Approx(std::sqrt(static_cast<double>(k))).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("required n round trip") {
    const auto c = ts::random_cohort(22, 300, 2, 1);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.7));
    for (std::size_t i = 0; i < c.rows(); i += 7) {
        const Vector x = row_of(c, i);
        for (double w : {0.01, 0.05, 0.123, 0.3, 0.9}) {
            const auto n = required_n_ci(info, x, w, normal);
            CHECK(ci_width(info, x, n, normal) <= w);
            if (n > minimum_sample_size(info)) {
                CHECK(ci_width(info, x, n - 1, normal) > w);
            }
            const double pw = w + 2.0 * z95 * std::sqrt(info.sigma2());
            const auto pr = required_n_pi(info, x, pw, normal);
            REQUIRE(pr.feasible);
            CHECK(pi_width(info, x, pr.n, normal) <= pw);
            if (pr.n > minimum_sample_size(info)) {
                CHECK(pi_width(info, x, pr.n - 1, normal) > pw);
            }
        }
    }
}

TEST_CASE("widths are invariant to affine rescaling of predictors") {
    const auto c = ts::random_cohort(23, 250, 3);
    Matrix v = c.design().rightCols(3);
    Matrix shifted = v;
    shifted.col(0) = v.col(0) * 2.54 + Vector::Constant(v.rows(), 7.0);
    shifted.col(1) = v.col(1) * 0.001 - Vector::Constant(v.rows(), 3.0);
    shifted.col(2) = v.col(2) * -12.0;
    const auto c2 = Cohort::from_columns(c.predictors(), shifted, c.outcome());
    const auto a = fisher_unit_information(c, VarianceAssumption::r_squared(0.4));
    const auto b = fisher_unit_information(c2, VarianceAssumption::r_squared(0.4));
    const auto wa = profile_widths(a, c, 150, normal, true);
    const auto wb = profile_widths(b, c2, 150, normal, true);
    for (std::size_t i = 0; i < wa.size(); ++i) {
        CHECK(std::abs(wa[i].ci_width - wb[i].ci_width) / wa[i].ci_width < 1e-9);
        CHECK(std::abs(*wa[i].pi_width - *wb[i].pi_width) / *wa[i].pi_width < 1e-9);
    }
}

TEST_CASE("leverage forms match the brute-force oracle") {
    const auto c = ts::random_cohort(24, 500, 4, 2);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.3));
    const auto expect = ts::brute_force_leverages(c, info.sigma2());
    const auto got = leverage_forms(info, c);
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-9));
    }
    // leverage forms are sigma^2 N h_ii, so they average to sigma^2 (p + 1)
    const double mean = std::accumulate(got.begin(), got.end(), 0.0) / static_cast<double>(got.size());
    CHECK(mean / info.sigma2() == doctest::Approx(static_cast<double>(c.parameter_count())).epsilon(1e-10));
}

TEST_CASE("the covariate mean profile has the smallest variance") {
    const auto c = ts::random_cohort(25, 300, 3, 1);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.5));
    const Vector centre = c.design().colwise().mean().transpose();
    const double at_mean = prediction_variance(info, centre, 100);
    // the mean profile gives exactly sigma^2 / n
    CHECK(at_mean == doctest::Approx(info.sigma2() / 100.0).epsilon(1e-10));
    for (std::size_t i = 0; i < c.rows(); ++i) {
        CHECK(prediction_variance(info, row_of(c, i), 100) >= at_mean * (1.0 - 1e-12));
    }
}

TEST_CASE("profile shape errors") {
    const auto info = intercept_only(1.0);
    CHECK_THROWS_AS(ci_width(info, Vector::Ones(2), 10, normal), Error);
    CHECK_THROWS_AS(ci_width(info, Vector::Zero(1), 10, normal), Error);
    CHECK_THROWS_AS(ci_width(info, one(), 1, normal), Error);
    CHECK_THROWS_AS(required_n_ci(info, one(), 0.0, normal), Error);
    CHECK_THROWS_AS(required_n_ci(info, one(), 1e-12, normal), Error);
}

TEST_CASE("student t widths exceed normal widths and converge") {
    const auto info = intercept_only(1.0);
    const PrecisionAssumptions t{0.05, CriticalValuePolicy::student_t};
    CHECK(ci_width(info, one(), 10, t) > ci_width(info, one(), 10, normal));
    CHECK(ci_width(info, one(), 1000000, t) == doctest::Approx(ci_width(info, one(), 1000000, normal)).epsilon(1e-5));
}

TEST_CASE("population answer and trimming") {
    const auto c = ts::random_cohort(26, 2000, 3, 1);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.6));
    const auto lev = leverage_forms(info, c);

    const auto all = population_answer(info, c, 0.25, IntervalKind::confidence, normal, 0.0);
    REQUIRE(all.required_n);
    std::int64_t brute = 0;
    for (std::size_t i = 0; i < c.rows(); ++i) {
        brute = std::max(brute, required_n_ci(info, row_of(c, i), 0.25, normal));
    }
    CHECK(*all.required_n == brute);
    CHECK(all.trimmed_rows == 0);
    const auto top = static_cast<std::size_t>(std::max_element(lev.begin(), lev.end()) - lev.begin());
    CHECK(*all.limiting_row == top);

    // trimming 0.1% of 2000 rows drops the two highest leverages
    const auto trimmed = population_answer(info, c, 0.25, IntervalKind::confidence, normal, 0.001);
    CHECK(trimmed.trimmed_rows == 2);
    std::vector<double> sorted = lev;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    CHECK(*trimmed.required_n == required_n_ci_from_leverage(sorted[2], 0.25, z95, minimum_sample_size(info)));
    CHECK(*trimmed.required_n <= *all.required_n);

    CHECK(trimmed_count(1e-5, 1000000) == 10);
    CHECK(trimmed_count(1e-5, 654) == 1);
    CHECK(trimmed_count(0.0, 654) == 0);
    CHECK_THROWS_AS(trimmed_count(0.02, 100), Error);
}

TEST_CASE("target equal to the max width at n0 needs at most n0") {
    const auto c = ts::random_cohort(27, 500, 2, 1);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.6));
    for (std::int64_t n0 : {50, 237, 654}) {
        const auto s = summarize(profile_widths(info, c, n0, normal, false), n0);
        const auto ans = population_answer(info, c, s.ci.max, IntervalKind::confidence, normal, 0.0);
        CHECK(*ans.required_n <= n0);
    }
}

TEST_CASE("population PI answer reports infeasibility") {
    const auto c = ts::random_cohort(28, 200, 2);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.6));
    const double floor = 2.0 * z95 * std::sqrt(info.sigma2());
    const auto bad = population_answer(info, c, floor * 0.6, IntervalKind::prediction, normal, 0.0);
    CHECK_FALSE(bad.feasible);
    CHECK_FALSE(bad.required_n.has_value());
    CHECK(bad.per_profile_n.empty());
    CHECK(*bad.min_achievable_width == doctest::Approx(floor).epsilon(1e-14));
    const auto ok = population_answer(info, c, floor * 1.05, IntervalKind::prediction, normal, 0.0);
    CHECK(ok.feasible);
    CHECK(*ok.required_n >= minimum_sample_size(info));
}

TEST_CASE("sweep is monotone and agrees with the population answer") {
    const auto c = ts::random_cohort(29, 1000, 3, 1);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.6));
    const auto grid = default_width_grid(info, c, 200, normal, 40);
    REQUIRE(grid.size() == 40);
    const auto sweep = width_threshold_sweep(info, c, grid, normal, 0.0);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        CHECK(sweep[i].min_n <= sweep[i - 1].min_n);
    }
    CHECK(sweep.back().min_n <= 200);
    for (std::size_t i : {0u, 19u, 39u}) {
        const auto ans = population_answer(info, c, grid[i], IntervalKind::confidence, normal, 0.0);
        CHECK(sweep[i].min_n == *ans.required_n);
    }
    const std::vector<double> unsorted{0.3, 0.2};
    CHECK_THROWS_AS(width_threshold_sweep(info, c, unsorted, normal, 0.0), Error);
}

TEST_CASE("width statistics") {
    const std::vector<double> w{0.3, 0.1, 0.2};
    const auto s = width_stats(w);
    CHECK(s.min == 0.1);
    CHECK(s.max == 0.3);
    CHECK(s.mean == doctest::Approx(0.2));
    CHECK_THROWS_AS(width_stats(std::span<const double>{}), Error);
}
