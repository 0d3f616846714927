#include <doctest.h>

#include <map>
#include <random>

#include "precisen/error.hpp"
#include "precisen/fairness.hpp"
#include "test_support.hpp"

using namespace precisen;
namespace ts = testing_support;

namespace {

const PrecisionAssumptions normal{};

Cohort with_subgroup(const Cohort& base, const std::string& name, Categorical cat) {
    std::map<std::string, Categorical> groups{{name, std::move(cat)}};
    return Cohort(base.predictors(), base.design(), base.outcome(), groups);
}

Categorical random_split(std::size_t rows, std::uint64_t seed, std::size_t levels) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(levels - 1));
    Categorical cat;
    for (std::size_t l = 0; l < levels; ++l) {
        cat.levels.push_back("g" + std::to_string(l));
    }
    for (std::size_t i = 0; i < rows; ++i) {
        cat.codes.push_back(pick(gen));
    }
    return cat;
}

} // namespace

TEST_CASE("single-level subgroup equals the overall summary") {
    const auto base = ts::random_cohort(41, 400, 3, 1);
    Categorical all{{"everyone"}, std::vector<std::uint32_t>(base.rows(), 0)};
    const auto c = with_subgroup(base, "site", all);
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.5));
    const auto report = subgroup_widths(info, c, 300, normal, "site", true);
    const auto overall = summarize(profile_widths(info, c, 300, normal, true), 300);
    REQUIRE(report.levels.size() == 1);
    CHECK(report.levels[0].count == c.rows());
    CHECK(report.levels[0].ci.mean == overall.ci.mean);
    CHECK(report.levels[0].ci.min == overall.ci.min);
    CHECK(report.levels[0].ci.max == overall.ci.max);
    CHECK(report.levels[0].pi->mean == overall.pi->mean);
    CHECK(report.disparity == 0.0);

    const auto req = subgroup_required_n(info, c, 0.3, normal, "site", 0.0);
    const auto pop = population_answer(info, c, 0.3, IntervalKind::confidence, normal, 0.0);
    REQUIRE(req.size() == 1);
    CHECK(*req[0].answer.required_n == *pop.required_n);
    CHECK(*req[0].answer.limiting_row == *pop.limiting_row);
}

TEST_CASE("level requirements partition the population requirement") {
    const auto base = ts::random_cohort(42, 1500, 2, 1);
    const auto c = with_subgroup(base, "grp", random_split(base.rows(), 7, 3));
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.6));
    for (double w : {0.1, 0.25, 0.5}) {
        const auto req = subgroup_required_n(info, c, w, normal, "grp", 0.0);
        const auto pop = population_answer(info, c, w, IntervalKind::confidence, normal, 0.0);
        std::int64_t worst = 0;
        std::size_t total = 0;
        for (const auto& level : req) {
            CHECK(*level.answer.required_n <= *pop.required_n);
            worst = std::max(worst, *level.answer.required_n);
            total += level.count;
            // the limiting row belongs to the level
            CHECK(c.subgroups().at("grp").levels[c.subgroups().at("grp").codes[*level.answer.limiting_row]] ==
                  level.level);
        }
        CHECK(worst == *pop.required_n);
        CHECK(total == c.rows());
    }
}

TEST_CASE("count-weighted level means recover the overall mean") {
    const auto base = ts::random_cohort(43, 800, 3);
    const auto c = with_subgroup(base, "grp", random_split(base.rows(), 8, 4));
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.5));
    const auto report = subgroup_widths(info, c, 654, normal, "grp");
    double weighted = 0.0;
    std::size_t total = 0;
    double disparity = 0.0;
    for (const auto& level : report.levels) {
        weighted += level.ci.mean * static_cast<double>(level.count);
        total += level.count;
        disparity = std::max(disparity, std::abs(level.ci.mean - report.overall_ci.mean));
        CHECK(level.ci.min >= report.overall_ci.min);
        CHECK(level.ci.max <= report.overall_ci.max);
    }
    CHECK(weighted / static_cast<double>(total) == doctest::Approx(report.overall_ci.mean).epsilon(1e-12));
    CHECK(report.disparity == disparity);
}

TEST_CASE("random halves have matching mean widths") {
    const auto base = ts::random_cohort(44, 20000, 3, 1);
    const auto c = with_subgroup(base, "half", random_split(base.rows(), 9, 2));
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.5));
    const auto report = subgroup_widths(info, c, 500, normal, "half");
    REQUIRE(report.levels.size() == 2);
    // Monte Carlo tolerance: 4 standard errors of a difference of two means
    const auto widths = profile_widths(info, c, 500, normal, false);
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& w : widths) {
        sum += w.ci_width;
        sum_sq += w.ci_width * w.ci_width;
    }
    const double n = static_cast<double>(widths.size());
    const double sd = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
    const double se = sd * std::sqrt(1.0 / static_cast<double>(report.levels[0].count) +
                                     1.0 / static_cast<double>(report.levels[1].count));
    CHECK(std::abs(report.levels[0].ci.mean - report.levels[1].ci.mean) < 4.0 * se);
}

TEST_CASE("binary predictor as subgroup and empty levels") {
    const auto base = ts::random_cohort(45, 300, 2, 1);
    const auto info = fisher_unit_information(base, VarianceAssumption::r_squared(0.5));
    const auto report = subgroup_widths(info, base, 300, normal, "b0");
    REQUIRE(report.levels.size() == 2);
    CHECK(report.levels[0].level == "0");
    CHECK(report.levels[1].level == "1");

    Categorical sparse{{"a", "b", "c"}, std::vector<std::uint32_t>(base.rows(), 0)};
    for (std::size_t i = 0; i < base.rows(); i += 2) {
        sparse.codes[i] = 2;
    }
    const auto c = with_subgroup(base, "grp", sparse);
    const auto r2 = subgroup_widths(info, c, 300, normal, "grp");
    CHECK(r2.levels.size() == 2);
    REQUIRE(r2.warnings.size() == 1);
    CHECK(r2.warnings[0].find("'b'") != std::string::npos);
}

TEST_CASE("unknown subgroup variable") {
    const auto base = ts::random_cohort(46, 100, 2);
    const auto info = fisher_unit_information(base, VarianceAssumption::r_squared(0.5));
    try {
        subgroup_widths(info, base, 100, normal, "ethnicity");
        FAIL("expected configuration error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::configuration);
        CHECK(e.module() == "fairness");
    }
    CHECK_THROWS_AS(subgroup_required_n(info, base, 0.3, normal, "x0", 0.0), Error);
}

TEST_CASE("trimming applies within each level") {
    const auto base = ts::random_cohort(47, 2000, 2, 1);
    const auto c = with_subgroup(base, "grp", random_split(base.rows(), 10, 2));
    const auto info = fisher_unit_information(c, VarianceAssumption::r_squared(0.6));
    const auto req = subgroup_required_n(info, c, 0.2, normal, "grp", 0.005);
    for (const auto& level : req) {
        CHECK(level.answer.trimmed_rows == trimmed_count(0.005, level.count));
    }
}
