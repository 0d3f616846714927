#include "precisen/evidence_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "precisen/error.hpp"
#include "precisen/random.hpp"

namespace precisen {

namespace {

constexpr const char* kModule = "evidence_synthesis";

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, kModule, message);
}

} // namespace

double EvidencePredictor::variance() const {
    return kind == PredictorKind::binary ? proportion * (1.0 - proportion) : sd * sd;
}

void EvidenceSummary::validate() const {
    if (predictors.empty()) {
        fail(ErrorKind::validation, "at least one predictor is required");
    }
    std::set<std::string> names;
    for (const auto& p : predictors) {
        if (!names.insert(p.name).second) {
            fail(ErrorKind::validation, "duplicate predictor '" + p.name + "'");
        }
        if (p.kind == PredictorKind::continuous) {
            if (!(p.sd > 0.0) || !std::isfinite(p.sd) || !std::isfinite(p.mean)) {
                fail(ErrorKind::validation, "predictor '" + p.name + "' needs a finite mean and sd > 0");
            }
        } else if (!(p.proportion > 0.0 && p.proportion < 1.0)) {
            fail(ErrorKind::validation, "binary predictor '" + p.name + "' needs 0 < proportion < 1");
        }
    }
    if (!(outcome.sd > 0.0) || !std::isfinite(outcome.mean)) {
        fail(ErrorKind::validation, "outcome needs a finite mean and sd > 0");
    }
    if (coefficients.size() != predictors.size()) {
        fail(ErrorKind::validation, "expected " + std::to_string(predictors.size()) + " coefficients, got " +
                                        std::to_string(coefficients.size()));
    }
    for (std::size_t j = 0; j < predictors.size(); ++j) {
        if (coefficients[j].name != predictors[j].name) {
            fail(ErrorKind::validation, "coefficient " + std::to_string(j) + " is for '" + coefficients[j].name +
                                            "' but predictor " + std::to_string(j) + " is '" + predictors[j].name +
                                            "'");
        }
        if (!std::isfinite(coefficients[j].beta_uni) || !std::isfinite(coefficients[j].beta_multi)) {
            fail(ErrorKind::validation, "non-finite coefficient for '" + predictors[j].name + "'");
        }
    }
    if (correlation) {
        const auto p = static_cast<Eigen::Index>(predictors.size());
        if (correlation->rows() != p || correlation->cols() != p) {
            fail(ErrorKind::validation, "correlation matrix must be p x p");
        }
    }
}

std::vector<PredictorSpec> EvidenceSummary::predictor_specs() const {
    std::vector<PredictorSpec> specs;
    for (const auto& p : predictors) {
        specs.push_back({p.name, p.kind, p.kind == PredictorKind::binary ? "1" : ""});
    }
    return specs;
}

Vector EvidenceSummary::beta_uni() const {
    Vector b(static_cast<Eigen::Index>(coefficients.size()));
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        b(static_cast<Eigen::Index>(j)) = coefficients[j].beta_uni;
    }
    return b;
}

Vector EvidenceSummary::beta_multi() const {
    Vector b(static_cast<Eigen::Index>(coefficients.size()));
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        b(static_cast<Eigen::Index>(j)) = coefficients[j].beta_multi;
    }
    return b;
}

Vector EvidenceSummary::variances() const {
    Vector v(static_cast<Eigen::Index>(predictors.size()));
    for (std::size_t j = 0; j < predictors.size(); ++j) {
        v(static_cast<Eigen::Index>(j)) = predictors[j].variance();
    }
    return v;
}

std::string to_string(RecoveryMode mode) {
    switch (mode) {
    case RecoveryMode::exact_p3: return "exact_p3";
    case RecoveryMode::least_squares: return "least_squares";
    case RecoveryMode::user_supplied: return "user_supplied";
    case RecoveryMode::independence: return "independence";
    }
    return "unknown";
}

Vector predictor_outcome_covariances(const EvidenceSummary& summary) {
    summary.validate();
    return summary.beta_uni().cwiseProduct(summary.variances());
}

void validate_psd(const Matrix& covariance) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (lo < -1e-8 * std::max(hi, 0.0)) {
        std::ostringstream msg;
        msg << "recovered covariance is not positive semi-definite (eigenvalue " << lo
            << "); check that the published coefficients and summaries describe the same cohort";
        fail(ErrorKind::not_psd, msg.str());
    }
}

namespace {

Vector mean_vector(const EvidenceSummary& summary) {
    Vector m(static_cast<Eigen::Index>(summary.predictors.size()));
    for (std::size_t j = 0; j < summary.predictors.size(); ++j) {
        const auto& p = summary.predictors[j];
        m(static_cast<Eigen::Index>(j)) = p.kind == PredictorKind::binary ? p.proportion : p.mean;
    }
    return m;
}

} // namespace

RecoveredJoint recover_covariance(const EvidenceSummary& summary, RecoveryMode mode) {
    summary.validate();
    if (mode != RecoveryMode::exact_p3 && mode != RecoveryMode::least_squares) {
        fail(ErrorKind::configuration, "recover_covariance supports exact_p3 or least_squares");
    }
    const auto p = static_cast<Eigen::Index>(summary.predictors.size());
    const Vector var = summary.variances();
    const Vector beta = summary.beta_multi();
    const Vector cxy = predictor_outcome_covariances(summary);

    RecoveredJoint joint;
    joint.mean_vector = mean_vector(summary);
    joint.predictor_outcome_cov = cxy;
    joint.recovery_mode = mode;
    joint.covariance = var.asDiagonal();

    if (p == 1) {
        const double gap = std::abs(beta(0) * var(0) - cxy(0));
        if (gap > 1e-8 * std::max(std::abs(cxy(0)), 1e-300)) {
            fail(ErrorKind::inconsistent_evidence,
                 "with one predictor the univariable and multivariable coefficients must agree");
        }
        return joint;
    }

    if (mode == RecoveryMode::exact_p3 && p != 3) {
        fail(ErrorKind::underdetermined,
             "exact recovery needs exactly 3 predictors (p equations, p(p-1)/2 unknowns); with p = " +
                 std::to_string(p) + " choose least_squares or supply a correlation matrix");
    }

    // Unknown u indexes the upper-triangle pair (a, b), a < b. Row j of
    // Cov(X) beta = cov(X, y) gives sum_{k != j} C_jk beta_k = cov_j - beta_j var_j.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = a + 1; b < p; ++b) {
            pairs.emplace_back(a, b);
        }
    }
    Matrix system = Matrix::Zero(p, static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t u = 0; u < pairs.size(); ++u) {
        const auto [a, b] = pairs[u];
        system(a, static_cast<Eigen::Index>(u)) = beta(b);
        system(b, static_cast<Eigen::Index>(u)) = beta(a);
    }
    const Vector rhs = cxy - beta.cwiseProduct(var);

    Vector offdiag;
    if (mode == RecoveryMode::exact_p3) {
        Eigen::FullPivLU<Matrix> lu(system);
        if (!lu.isInvertible()) {
            fail(ErrorKind::underdetermined,
                 "the 3-equation system is singular; every multivariable coefficient must be non-zero");
        }
        offdiag = lu.solve(rhs);
    } else {
        offdiag = system.completeOrthogonalDecomposition().solve(rhs);
    }

    for (std::size_t u = 0; u < pairs.size(); ++u) {
        const auto [a, b] = pairs[u];
        joint.covariance(a, b) = offdiag(static_cast<Eigen::Index>(u));
        joint.covariance(b, a) = offdiag(static_cast<Eigen::Index>(u));
    }
    validate_psd(joint.covariance);
    return joint;
}

RecoveredJoint joint_from_correlation(const EvidenceSummary& summary) {
    summary.validate();
    if (!summary.correlation) {
        fail(ErrorKind::configuration, "evidence summary has no correlation matrix");
    }
    const Matrix& r = *summary.correlation;
    const auto p = r.rows();
    for (Eigen::Index a = 0; a < p; ++a) {
        if (r(a, a) != 1.0) {
            fail(ErrorKind::validation, "correlation matrix diagonal must be 1");
        }
        for (Eigen::Index b = 0; b < p; ++b) {
            if (r(a, b) != r(b, a) || std::abs(r(a, b)) > 1.0) {
                fail(ErrorKind::validation, "correlation matrix must be symmetric with entries in [-1, 1]");
            }
        }
    }
    const Vector var = summary.variances();
    const Vector sd = var.cwiseSqrt();
    RecoveredJoint joint;
    joint.mean_vector = mean_vector(summary);
    joint.predictor_outcome_cov = predictor_outcome_covariances(summary);
    joint.recovery_mode = RecoveryMode::user_supplied;
    joint.covariance = sd.asDiagonal() * r * sd.asDiagonal();
    joint.covariance.diagonal() = var;
    validate_psd(joint.covariance);
    return joint;
}

RecoveredJoint independence_joint(const EvidenceSummary& summary) {
    summary.validate();
    RecoveredJoint joint;
    joint.mean_vector = mean_vector(summary);
    joint.predictor_outcome_cov = predictor_outcome_covariances(summary);
    joint.recovery_mode = RecoveryMode::independence;
    joint.covariance = summary.variances().asDiagonal();
    return joint;
}

namespace {

// Factor F with F F' = covariance. Cholesky when possible, otherwise a
// symmetric square root with tiny negative eigenvalues clamped.
Matrix sampling_factor(const Matrix& covariance) {
    validate_psd(covariance);
    Eigen::LLT<Matrix> llt(covariance);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
    if (eig.info() != Eigen::Success) {
        fail(ErrorKind::not_psd, "could not factorize the covariance matrix");
    }
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

void binarize_by_rank(Matrix& values, Eigen::Index column, double proportion) {
    const auto n = static_cast<std::size_t>(values.rows());
    const auto ones = static_cast<std::size_t>(std::llround(static_cast<double>(n) * proportion));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto col = values.col(column);
    if (ones > 0 && ones < n) {
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(ones), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             const double va = col(static_cast<Eigen::Index>(a));
                             const double vb = col(static_cast<Eigen::Index>(b));
                             return va != vb ? va > vb : a < b;
                         });
    }
    std::vector<double> coded(n, 0.0);
    for (std::size_t i = 0; i < ones; ++i) {
        coded[order[i]] = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        col(static_cast<Eigen::Index>(i)) = coded[i];
    }
}

} // namespace

Cohort synthesize_cohort(const RecoveredJoint& joint, const EvidenceSummary& summary, std::int64_t n_sim,
                         std::uint64_t seed) {
    summary.validate();
    if (n_sim < 1000) {
        fail(ErrorKind::configuration, "n_sim must be at least 1000");
    }
    const auto p = static_cast<Eigen::Index>(summary.predictors.size());
    if (joint.mean_vector.size() != p || joint.covariance.rows() != p || joint.covariance.cols() != p) {
        fail(ErrorKind::shape, "joint distribution does not match the evidence summary");
    }
    const Matrix factor = sampling_factor(joint.covariance);

    const Eigen::Index n = n_sim;
    Matrix values(n, p);
    Vector outcome(n);
    const std::int64_t blocks = (n_sim + synthesis_block_rows - 1) / synthesis_block_rows;

#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
        const Eigen::Index begin = b * synthesis_block_rows;
        const Eigen::Index end = std::min<Eigen::Index>(n, begin + synthesis_block_rows);
        auto gen = substream(seed, StreamPurpose::predictors, static_cast<std::uint64_t>(b));
        auto outcome_gen = substream(seed, StreamPurpose::outcome, static_cast<std::uint64_t>(b));
        std::normal_distribution<double> standard(0.0, 1.0);
        std::normal_distribution<double> outcome_draw(summary.outcome.mean, summary.outcome.sd);
        Vector z(p);
        for (Eigen::Index i = begin; i < end; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) {
                z(j) = standard(gen);
            }
            values.row(i) = (joint.mean_vector + factor * z).transpose();
            outcome(i) = outcome_draw(outcome_gen);
        }
    }

    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& pred = summary.predictors[static_cast<std::size_t>(j)];
        if (pred.kind == PredictorKind::binary) {
            binarize_by_rank(values, j, pred.proportion);
        }
    }
    return Cohort::from_columns(summary.predictor_specs(), values, std::move(outcome));
}

Cohort independence_cohort(const EvidenceSummary& summary, std::int64_t n_sim, std::uint64_t seed) {
    return synthesize_cohort(independence_joint(summary), summary, n_sim, seed);
}

} // namespace precisen
