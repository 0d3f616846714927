#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "precisen/error.hpp"
#include "precisen/evidence_synthesis.hpp"
#include "precisen/mc_oracle.hpp"
#include "test_support.hpp"

using namespace precisen;
namespace ts = testing_support;

namespace {

const Cohort& fev_like() {
    static const Cohort c = [] {
        const auto s = ts::fev_summary();
        return synthesize_cohort(recover_covariance(s), s, 1000, 654);
    }();
    return c;
}

Vector fev_beta() {
    Vector b(4);
    b << -4.4, 0.061, 0.105, 0.161;
    return b;
}

OracleSpec base_spec() {
    OracleSpec spec;
    spec.true_coefficients = fev_beta();
    spec.sigma2 = 0.173;
    spec.n = 654;
    spec.replicates = 2000;
    spec.seed = 77;
    for (std::size_t i = 0; i < 1000; i += 10) {
        spec.profile_set.push_back(i);
    }
    return spec;
}

const OracleResult& base_result() {
    static const OracleResult r = run_oracle(base_spec(), fev_like());
    return r;
}

} // namespace

TEST_CASE("empirical widths, coverage and coefficient variance") {
    const auto& r = base_result();
    CHECK(r.replicates_used == 2000);
    CHECK(r.replicates_discarded == 0);
    CHECK(r.warnings.empty());
    CHECK(std::abs(r.mean_empirical_ci_width / r.mean_analytic_ci_width - 1.0) < 0.02);
    CHECK(r.mean_ci_coverage == doctest::Approx(0.95).epsilon(0.02 / 0.95));
    CHECK(r.mean_pi_coverage == doctest::Approx(0.95).epsilon(0.02 / 0.95));
    for (Eigen::Index a = 0; a < 4; ++a) {
        for (Eigen::Index b = 0; b < 4; ++b) {
            const double gap = std::abs(r.empirical_coefficient_variance(a, b) - r.analytic_coefficient_variance(a, b));
            CHECK(gap < 4.0 * r.coefficient_variance_se(a, b));
        }
    }
    CHECK(empirical_vs_analytic_report(r, 0.03).all_pass());
}

TEST_CASE("analytic side matches the closed form") {
    const auto& r = base_result();
    const auto lev = ts::brute_force_leverages(fev_like(), 0.173);
    for (const auto& prof : r.profiles) {
        const double expect = 2.0 * 1.959963984540054 * std::sqrt(lev[prof.row] / 654.0);
        CHECK(prof.analytic_ci_width == doctest::Approx(expect).epsilon(1e-9));
        CHECK(prof.analytic_pi_width == doctest::Approx(2.0 * 1.959963984540054 * std::sqrt(lev[prof.row] / 654.0 + 0.173))
                                            .epsilon(1e-9));
    }
}

TEST_CASE("doubling sigma^2 scales widths by sqrt 2") {
    auto spec = base_spec();
    spec.replicates = 200;
    const auto one = run_oracle(spec, fev_like());
    spec.sigma2 *= 2.0;
    const auto two = run_oracle(spec, fev_like());
    for (std::size_t i = 0; i < one.profiles.size(); ++i) {
        CHECK(two.profiles[i].empirical_ci_width / one.profiles[i].empirical_ci_width ==
              doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
        CHECK(two.profiles[i].analytic_ci_width / one.profiles[i].analytic_ci_width ==
              doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("widths do not depend on the true coefficients") {
    auto spec = base_spec();
    spec.replicates = 200;
    const auto a = run_oracle(spec, fev_like());
    spec.true_coefficients << 3.0, -1.0, 0.5, 2.0;
    const auto b = run_oracle(spec, fev_like());
    for (std::size_t i = 0; i < a.profiles.size(); ++i) {
        CHECK(b.profiles[i].empirical_ci_width == doctest::Approx(a.profiles[i].empirical_ci_width).epsilon(1e-8));
        CHECK(b.profiles[i].ci_coverage == a.profiles[i].ci_coverage);
    }
}

TEST_CASE("oracle is deterministic across thread counts") {
    auto spec = base_spec();
    spec.replicates = 150;
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = run_oracle(spec, fev_like());
    omp_set_num_threads(4);
    const auto b = run_oracle(spec, fev_like());
    omp_set_num_threads(saved);
    CHECK(a.mean_empirical_ci_width == b.mean_empirical_ci_width);
    CHECK(a.empirical_coefficient_variance == b.empirical_coefficient_variance);
}

TEST_CASE("verdict on identical and perturbed inputs") {
    OracleResult same;
    for (std::size_t i = 0; i < 5; ++i) {
        OracleProfile p;
        p.row = i;
        p.analytic_ci_width = 0.1 + 0.01 * static_cast<double>(i);
        p.empirical_ci_width = p.analytic_ci_width;
        same.profiles.push_back(p);
    }
    CHECK(empirical_vs_analytic_report(same, 0.03).all_pass());

    OracleResult bumped = same;
    for (auto& p : bumped.profiles) {
        p.analytic_ci_width *= 1.10;
    }
    const auto v = empirical_vs_analytic_report(bumped, 0.03);
    CHECK(v.failures == bumped.profiles.size());
    for (const auto& check : v.checks) {
        CHECK_FALSE(check.pass);
        CHECK(check.relative_error == doctest::Approx(0.1 / 1.1));
    }
}

TEST_CASE("strict mode uses t on the analytic side") {
    auto spec = base_spec();
    spec.replicates = 100;
    spec.n = 12;
    spec.strict = true;
    const auto r = run_oracle(spec, fev_like());
    const auto lev = ts::brute_force_leverages(fev_like(), 0.173);
    const double t = t_critical(0.05, 8.0);
    CHECK(r.profiles[0].analytic_ci_width == doctest::Approx(2.0 * t * std::sqrt(lev[0] / 12.0)).epsilon(1e-9));
}

TEST_CASE("singular replicates are discarded with a warning") {
    // one rare binary level: small replicates often miss it entirely
    Matrix v(200, 1);
    Vector y(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        v(i, 0) = i < 3 ? 1.0 : 0.0;
        y(i) = static_cast<double>(i % 7);
    }
    const auto c = Cohort::from_columns({{"rare", PredictorKind::binary, "1"}}, v, y);
    OracleSpec spec;
    spec.true_coefficients = Vector::Ones(2);
    spec.sigma2 = 1.0;
    spec.n = 10;
    spec.replicates = 200;
    spec.seed = 3;
    spec.profile_set = {0, 5};
    const auto r = run_oracle(spec, c);
    CHECK(r.replicates_discarded > 2);
    CHECK(r.replicates_used + r.replicates_discarded == 200);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("oracle argument checks") {
    auto spec = base_spec();
    spec.true_coefficients = Vector::Ones(3);
    CHECK_THROWS_AS(run_oracle(spec, fev_like()), Error);
    spec = base_spec();
    spec.replicates = 50;
    CHECK_THROWS_AS(run_oracle(spec, fev_like()), Error);
    spec = base_spec();
    spec.n = 4;
    CHECK_THROWS_AS(run_oracle(spec, fev_like()), Error);
    spec = base_spec();
    spec.profile_set = {5000};
    CHECK_THROWS_AS(run_oracle(spec, fev_like()), Error);
}
