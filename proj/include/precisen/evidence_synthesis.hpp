#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "precisen/model_core.hpp"

namespace precisen {

/// Published marginal summary for one predictor. Continuous predictors carry
/// mean and sd; binary predictors carry the proportion coded 1.
struct EvidencePredictor {
    std::string name;
    PredictorKind kind = PredictorKind::continuous;
    double mean = 0.0;
    double sd = 0.0;
    double proportion = 0.0;

    /// sd^2, or p(1 - p) for a binary predictor.
    double variance() const;
};

struct EvidenceCoefficient {
    std::string name;
    double beta_uni = 0.0;
    double beta_multi = 0.0;
};

struct OutcomeSummary {
    double mean = 0.0;
    double sd = 0.0;
};

/// Marginal summaries plus univariable and multivariable coefficients, as a
/// baseline-characteristics table and a coefficient table would report them.
struct EvidenceSummary {
    std::vector<EvidencePredictor> predictors;
    OutcomeSummary outcome;
    /// Aligned with `predictors` by position.
    std::vector<EvidenceCoefficient> coefficients;
    std::int64_t source_n = 0;
    /// Optional p x p predictor correlation matrix supplied by a data holder.
    std::optional<Matrix> correlation;

    void validate() const;
    std::size_t predictor_count() const noexcept { return predictors.size(); }
    std::vector<PredictorSpec> predictor_specs() const;
    Vector beta_uni() const;
    Vector beta_multi() const;
    Vector variances() const;
};

enum class RecoveryMode { exact_p3, least_squares, user_supplied, independence };

std::string to_string(RecoveryMode mode);

struct RecoveredJoint {
    Vector mean_vector;
    Matrix covariance;
    Vector predictor_outcome_cov;
    RecoveryMode recovery_mode = RecoveryMode::exact_p3;
};

/// cov(x_j, y) = beta_uni_j * var(x_j).
Vector predictor_outcome_covariances(const EvidenceSummary& summary);

/// Solves Cov(X) beta_multi = cov(X, y) for the off-diagonal entries of
/// Cov(X); the diagonal is copied from the published variances.
///
/// `exact_p3` requires the square system of three predictors (one predictor
/// is accepted as a consistency check with no unknowns). `least_squares`
/// takes the minimum-norm least-squares off-diagonals for any p. The result
/// is checked for positive semi-definiteness.
RecoveredJoint recover_covariance(const EvidenceSummary& summary, RecoveryMode mode = RecoveryMode::exact_p3);

/// Joint built from `summary.correlation` (mode user_supplied).
RecoveredJoint joint_from_correlation(const EvidenceSummary& summary);

/// Diagonal joint: published variances, zero covariances.
RecoveredJoint independence_joint(const EvidenceSummary& summary);

/// Throws not-psd when an eigenvalue falls below -1e-8 * max eigenvalue.
void validate_psd(const Matrix& covariance);

/// Rows per RNG block in the synthesizer.
inline constexpr std::int64_t synthesis_block_rows = 65536;

/// Draws `n_sim` multivariate-normal rows, converts binary columns by rank
/// (the round(n_sim * proportion) largest latent draws become 1, ties going
/// to the earlier draw), and draws the outcome independently from the
/// published outcome mean and sd.
Cohort synthesize_cohort(const RecoveredJoint& joint, const EvidenceSummary& summary, std::int64_t n_sim,
                         std::uint64_t seed);

Cohort independence_cohort(const EvidenceSummary& summary, std::int64_t n_sim, std::uint64_t seed);

} // namespace precisen
