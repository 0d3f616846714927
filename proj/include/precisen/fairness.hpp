#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "precisen/precision_engine.hpp"

namespace precisen {

struct SubgroupLevel {
    std::string level;
    std::size_t count = 0;
    WidthStats ci;
    std::optional<WidthStats> pi;
    /// Filled when a target width was requested.
    std::optional<SampleSizeAnswer> requirement;
};

/// Widths within each level of a subgroup variable, all computed with the
/// overall information matrix at the same n.
struct SubgroupReport {
    std::string subgroup_variable;
    std::int64_t n = 0;
    WidthStats overall_ci;
    std::vector<SubgroupLevel> levels;
    /// max over levels of |level mean CI width - overall mean CI width|.
    double disparity = 0.0;
    std::vector<std::string> warnings;
};

struct LevelRequirement {
    std::string level;
    std::size_t count = 0;
    SampleSizeAnswer answer;
};

SubgroupReport subgroup_widths(const FisherUnitInformation& info, const Cohort& cohort, std::int64_t n,
                               const PrecisionAssumptions& assumptions, const std::string& subgroup_variable,
                               bool with_prediction_intervals = false);

/// population_answer restricted to each level's rows. Trimming is applied
/// within each level.
std::vector<LevelRequirement> subgroup_required_n(const FisherUnitInformation& info, const Cohort& cohort,
                                                  double target_width, const PrecisionAssumptions& assumptions,
                                                  const std::string& subgroup_variable, double trim_fraction,
                                                  IntervalKind kind = IntervalKind::confidence);

} // namespace precisen
