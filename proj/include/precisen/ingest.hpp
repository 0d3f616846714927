#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "precisen/evidence_synthesis.hpp"
#include "precisen/model_core.hpp"

namespace precisen {

struct BinarySpec {
    std::string column;
    /// Label coded as 1; when absent the column must already hold 0/1.
    std::optional<std::string> level_one;
};

struct CsvSpec {
    std::string outcome;
    std::vector<std::string> predictors;
    std::vector<BinarySpec> binary;
    std::vector<std::string> subgroups;
    bool allow_incomplete = false;
};

struct IngestedCohort {
    Cohort cohort;
    /// 1-based data row numbers that were dropped (only with allow_incomplete).
    std::vector<std::size_t> rejected_rows;
    std::vector<std::string> warnings;
};

/// Parses "name" or "name=label" as used by --binary.
BinarySpec parse_binary_spec(const std::string& text);

/// Reads a comma-separated file with a header row. Declared columns are
/// parsed strictly; a row with any missing or unparseable declared field is
/// rejected, and rejection is an error unless `allow_incomplete` is set.
IngestedCohort ingest_csv(const std::filesystem::path& path, const CsvSpec& spec);

/// Loads an evidence summary document:
/// { predictors: [{name, kind, mean?, sd?, proportion?}], outcome: {mean, sd},
///   coefficients: [{name, beta_uni, beta_multi}], source_n, correlation? }
EvidenceSummary ingest_evidence(const std::filesystem::path& path);
EvidenceSummary parse_evidence(const std::string& json_text);

/// Writes predictors and outcome (no intercept) with a header row.
void write_cohort_csv(const Cohort& cohort, const std::string& outcome_name, std::ostream& out);

} // namespace precisen
