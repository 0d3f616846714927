#include "precisen/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "precisen/error.hpp"
#include "precisen/kernels.hpp"

namespace precisen {

namespace {

constexpr const char* kModule = "model_core";

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, kModule, message);
}

} // namespace

// ---------------------------------------------------------------------------
// Cohort
// ---------------------------------------------------------------------------

Cohort::Cohort(std::vector<PredictorSpec> predictors, DesignMatrix design, Vector outcome,
               std::map<std::string, Categorical> subgroups)
    : predictors_(std::move(predictors)),
      design_(std::move(design)),
      outcome_(std::move(outcome)),
      subgroups_(std::move(subgroups)) {
    std::set<std::string> names;
    for (const auto& p : predictors_) {
        if (p.name.empty()) {
            fail(ErrorKind::validation, "predictor names must be non-empty");
        }
        if (!names.insert(p.name).second) {
            fail(ErrorKind::validation, "duplicate predictor name '" + p.name + "'");
        }
    }

    const auto k = static_cast<Eigen::Index>(predictors_.size() + 1);
    if (design_.cols() != k) {
        fail(ErrorKind::shape, "design has " + std::to_string(design_.cols()) + " columns, expected " +
                                   std::to_string(k) + " (intercept + predictors)");
    }
    if (outcome_.size() != design_.rows()) {
        fail(ErrorKind::shape, "outcome length does not match design rows");
    }
    // X'X needs at least p + 1 rows to be invertible; residual degrees of
    // freedom (N >= p + 2) are enforced where sigma^2 is estimated from data.
    if (design_.rows() < k) {
        fail(ErrorKind::insufficient_rows, "cohort has " + std::to_string(design_.rows()) +
                                               " rows but needs at least " + std::to_string(k));
    }

    for (Eigen::Index i = 0; i < design_.rows(); ++i) {
        if (design_(i, 0) != 1.0) {
            fail(ErrorKind::validation, "intercept column is not 1 at row " + std::to_string(i));
        }
        if (!std::isfinite(outcome_(i))) {
            fail(ErrorKind::validation, "non-finite outcome at row " + std::to_string(i));
        }
        for (Eigen::Index j = 1; j < k; ++j) {
            const double v = design_(i, j);
            if (!std::isfinite(v)) {
                fail(ErrorKind::validation, "non-finite value in '" + predictors_[j - 1].name + "' at row " +
                                                std::to_string(i));
            }
            if (predictors_[j - 1].kind == PredictorKind::binary && v != 0.0 && v != 1.0) {
                fail(ErrorKind::validation, "binary predictor '" + predictors_[j - 1].name +
                                                "' has a value other than 0/1 at row " + std::to_string(i));
            }
        }
    }

    for (const auto& [name, cat] : subgroups_) {
        if (cat.codes.size() != rows()) {
            fail(ErrorKind::shape, "subgroup '" + name + "' length does not match cohort rows");
        }
        for (auto c : cat.codes) {
            if (c >= cat.levels.size()) {
                fail(ErrorKind::validation, "subgroup '" + name + "' has a code without a level");
            }
        }
    }
}

Cohort Cohort::from_columns(std::vector<PredictorSpec> predictors, const Matrix& values, Vector outcome,
                            std::map<std::string, Categorical> subgroups) {
    DesignMatrix design(values.rows(), values.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(values.cols()) = values;
    return Cohort(std::move(predictors), std::move(design), std::move(outcome), std::move(subgroups));
}

std::vector<std::string> Cohort::column_names() const {
    std::vector<std::string> names{"(intercept)"};
    for (const auto& p : predictors_) {
        names.push_back(p.name);
    }
    return names;
}

Categorical Cohort::subgroup(const std::string& name) const {
    if (auto it = subgroups_.find(name); it != subgroups_.end()) {
        return it->second;
    }
    for (std::size_t j = 0; j < predictors_.size(); ++j) {
        if (predictors_[j].name == name && predictors_[j].kind == PredictorKind::binary) {
            Categorical cat;
            cat.levels = {"0", "1"};
            cat.codes.resize(rows());
            for (std::size_t i = 0; i < rows(); ++i) {
                cat.codes[i] = design_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) == 1.0 ? 1u : 0u;
            }
            return cat;
        }
    }
    fail(ErrorKind::configuration, "unknown subgroup variable '" + name + "'");
}

// ---------------------------------------------------------------------------
// Assumptions
// ---------------------------------------------------------------------------

VarianceAssumption VarianceAssumption::residual_variance(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        fail(ErrorKind::invalid_assumption, "residual variance must be positive and finite");
    }
    return VarianceAssumption(Sigma2{sigma2});
}

VarianceAssumption VarianceAssumption::r_squared(double r2) {
    if (!(r2 >= 0.0 && r2 < 1.0)) {
        fail(ErrorKind::invalid_assumption, "R-squared must lie in [0, 1)");
    }
    return VarianceAssumption(RSquared{r2});
}

double VarianceAssumption::value() const noexcept {
    return std::visit([](auto v) { return v.v; }, value_);
}

void PrecisionAssumptions::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        fail(ErrorKind::invalid_assumption, "alpha must lie in (0, 1)");
    }
}

double z_critical(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        fail(ErrorKind::invalid_assumption, "alpha must lie in (0, 1)");
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
}

double t_critical(double alpha, double degrees_of_freedom) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        fail(ErrorKind::invalid_assumption, "alpha must lie in (0, 1)");
    }
    if (!(degrees_of_freedom > 0.0)) {
        fail(ErrorKind::insufficient_rows, "t critical value needs positive degrees of freedom");
    }
    return boost::math::quantile(boost::math::students_t_distribution<double>(degrees_of_freedom),
                                 1.0 - alpha / 2.0);
}

double critical_value(const PrecisionAssumptions& assumptions, std::int64_t n, std::size_t p) {
    if (assumptions.policy == CriticalValuePolicy::normal) {
        return z_critical(assumptions.alpha);
    }
    return t_critical(assumptions.alpha, static_cast<double>(n) - static_cast<double>(p) - 1.0);
}

// ---------------------------------------------------------------------------
// Fisher unit information
// ---------------------------------------------------------------------------

FisherUnitInformation::FisherUnitInformation(Matrix matrix, double sigma2, std::vector<PredictorSpec> predictors,
                                             VarianceSource source, std::optional<double> sum_sq_outcome,
                                             std::optional<double> r_squared)
    : matrix_(std::move(matrix)),
      sigma2_(sigma2),
      source_(source),
      sum_sq_outcome_(sum_sq_outcome),
      r_squared_(r_squared),
      predictors_(std::move(predictors)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
        fail(ErrorKind::shape, "information matrix must be square and non-empty");
    }
    if (static_cast<std::size_t>(matrix_.rows()) != predictors_.size() + 1) {
        fail(ErrorKind::shape, "information matrix size does not match predictor list");
    }
    if (!(sigma2_ > 0.0)) {
        fail(ErrorKind::invalid_assumption, "residual variance must be positive");
    }
    const double scale = matrix_.cwiseAbs().maxCoeff();
    if (((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale) {
        fail(ErrorKind::validation, "information matrix is not symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
        fail(ErrorKind::collinearity, "information matrix is not positive definite");
    }
    condition_number_ = hi / lo;

    Eigen::LLT<Matrix> llt(matrix_);
    if (llt.info() != Eigen::Success) {
        fail(ErrorKind::collinearity, "Cholesky factorization of the information matrix failed");
    }
    inverse_ = llt.solve(Matrix::Identity(matrix_.rows(), matrix_.cols()));
    inverse_ = 0.5 * (inverse_ + inverse_.transpose()).eval();
}

double sum_squared_deviation(const Vector& y) {
    if (y.size() == 0) {
        return 0.0;
    }
    const double mean = y.mean();
    return (y.array() - mean).square().sum();
}

double residual_variance_from_r2(const Cohort& cohort, double r_squared) {
    if (!(r_squared >= 0.0 && r_squared < 1.0)) {
        fail(ErrorKind::invalid_assumption, "R-squared must lie in [0, 1)");
    }
    const auto n = cohort.rows();
    if (n == 0) {
        fail(ErrorKind::insufficient_rows, "cohort is empty");
    }
    const double ss = sum_squared_deviation(cohort.outcome());
    if (!(ss > 0.0)) {
        fail(ErrorKind::degenerate_outcome, "outcome is constant; sum of squared deviations is zero");
    }
    return (1.0 - r_squared) * ss / static_cast<double>(n);
}

namespace {

void check_collinearity(const Matrix& gram, const std::vector<std::string>& names) {
    const Eigen::Index k = gram.rows();
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(gram(j, j) > 0.0)) {
            fail(ErrorKind::collinearity, "column '" + names[static_cast<std::size_t>(j)] + "' is identically zero");
        }
    }
    const Vector d = gram.diagonal().cwiseSqrt().cwiseInverse();
    const Matrix scaled = d.asDiagonal() * gram * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(k - 1);
    if (lo / hi >= collinearity_rcond) {
        return;
    }
    const Vector v = eig.eigenvectors().col(0);
    const double vmax = v.cwiseAbs().maxCoeff();
    std::ostringstream msg;
    msg << "X'X is singular to working precision (rcond " << lo / hi << "); dependent columns:";
    for (Eigen::Index j = 0; j < k; ++j) {
        if (std::abs(v(j)) > 0.05 * vmax) {
            msg << " '" << names[static_cast<std::size_t>(j)] << "'";
        }
    }
    fail(ErrorKind::collinearity, msg.str());
}

} // namespace

FisherUnitInformation fisher_unit_information(const Cohort& cohort, const VarianceAssumption& assumption) {
    const auto n = cohort.rows();
    const auto k = cohort.parameter_count();

    double sigma2 = 0.0;
    std::optional<double> ss;
    std::optional<double> r2;
    VarianceSource source = VarianceSource::given_sigma2;
    if (assumption.is_r_squared()) {
        if (n < k + 1) {
            fail(ErrorKind::insufficient_rows, "deriving sigma^2 from R-squared needs N >= p + 2 rows, got " +
                                                   std::to_string(n));
        }
        r2 = assumption.value();
        sigma2 = residual_variance_from_r2(cohort, *r2);
        ss = sum_squared_deviation(cohort.outcome());
        source = VarianceSource::from_r_squared;
    } else {
        sigma2 = assumption.value();
    }

    const Matrix gram = kernels::parallel::gram(cohort.design());
    check_collinearity(gram, cohort.column_names());

    Matrix info = gram / (sigma2 * static_cast<double>(n));
    return FisherUnitInformation(std::move(info), sigma2, cohort.predictors(), source, ss, r2);
}

Matrix coefficient_variance(const FisherUnitInformation& info, std::int64_t n) {
    const auto min_n = static_cast<std::int64_t>(info.parameter_count()) + 1;
    if (n < min_n) {
        fail(ErrorKind::insufficient_rows, "sample size " + std::to_string(n) + " is below p + 2 = " +
                                               std::to_string(min_n));
    }
    return info.inverse() / static_cast<double>(n);
}

} // namespace precisen
