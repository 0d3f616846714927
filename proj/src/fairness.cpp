#include "precisen/fairness.hpp"

#include <cmath>

#include "precisen/error.hpp"

namespace precisen {

namespace {

// Row indices per level code.
std::vector<std::vector<std::size_t>> rows_by_level(const Categorical& cat) {
    std::vector<std::vector<std::size_t>> rows(cat.levels.size());
    for (std::size_t i = 0; i < cat.codes.size(); ++i) {
        rows[cat.codes[i]].push_back(i);
    }
    return rows;
}

Categorical lookup(const Cohort& cohort, const std::string& variable) {
    try {
        return cohort.subgroup(variable);
    } catch (const Error&) {
        throw Error(ErrorKind::configuration, "fairness", "unknown subgroup variable '" + variable + "'");
    }
}

} // namespace

SubgroupReport subgroup_widths(const FisherUnitInformation& info, const Cohort& cohort, std::int64_t n,
                               const PrecisionAssumptions& assumptions, const std::string& subgroup_variable,
                               bool with_prediction_intervals) {
    const Categorical cat = lookup(cohort, subgroup_variable);
    const auto widths = profile_widths(info, cohort, n, assumptions, with_prediction_intervals);

    SubgroupReport report;
    report.subgroup_variable = subgroup_variable;
    report.n = n;
    report.overall_ci = summarize(widths, n).ci;

    const auto rows = rows_by_level(cat);
    for (std::size_t level = 0; level < cat.levels.size(); ++level) {
        if (rows[level].empty()) {
            report.warnings.push_back("level '" + cat.levels[level] + "' of '" + subgroup_variable +
                                      "' has no rows and was dropped");
            continue;
        }
        std::vector<double> ci;
        std::vector<double> pi;
        for (std::size_t i : rows[level]) {
            ci.push_back(widths[i].ci_width);
            if (widths[i].pi_width) {
                pi.push_back(*widths[i].pi_width);
            }
        }
        SubgroupLevel entry;
        entry.level = cat.levels[level];
        entry.count = rows[level].size();
        entry.ci = width_stats(ci);
        if (!pi.empty()) {
            entry.pi = width_stats(pi);
        }
        report.disparity = std::max(report.disparity, std::abs(entry.ci.mean - report.overall_ci.mean));
        report.levels.push_back(std::move(entry));
    }
    return report;
}

std::vector<LevelRequirement> subgroup_required_n(const FisherUnitInformation& info, const Cohort& cohort,
                                                  double target_width, const PrecisionAssumptions& assumptions,
                                                  const std::string& subgroup_variable, double trim_fraction,
                                                  IntervalKind kind) {
    const Categorical cat = lookup(cohort, subgroup_variable);
    const auto leverages = leverage_forms(info, cohort);
    const auto rows = rows_by_level(cat);

    std::vector<LevelRequirement> out;
    for (std::size_t level = 0; level < cat.levels.size(); ++level) {
        if (rows[level].empty()) {
            continue;
        }
        std::vector<double> lev;
        lev.reserve(rows[level].size());
        for (std::size_t i : rows[level]) {
            lev.push_back(leverages[i]);
        }
        out.push_back({cat.levels[level], rows[level].size(),
                       population_answer_from_leverage(info, lev, rows[level], target_width, kind, assumptions,
                                                       trim_fraction)});
    }
    return out;
}

} // namespace precisen
