#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace precisen {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major so that per-profile kernels walk contiguous memory.
using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PredictorKind { continuous, binary };

struct PredictorSpec {
    std::string name;
    PredictorKind kind = PredictorKind::continuous;
    /// For binary predictors read from labelled data: the label coded as 1.
    std::string level_one;
};

/// A categorical column stored as level codes into `levels`.
struct Categorical {
    std::vector<std::string> levels;
    std::vector<std::uint32_t> codes;
};

/// Design matrix (intercept column first) plus outcome for a target population,
/// real or synthetic. Immutable once constructed; the constructor enforces
/// shape, intercept, binary coding and finiteness.
class Cohort {
public:
    Cohort(std::vector<PredictorSpec> predictors, DesignMatrix design, Vector outcome,
           std::map<std::string, Categorical> subgroups = {});

    /// Builds the design by prepending the intercept column to `values` (N x p).
    static Cohort from_columns(std::vector<PredictorSpec> predictors, const Matrix& values,
                               Vector outcome, std::map<std::string, Categorical> subgroups = {});

    const std::vector<PredictorSpec>& predictors() const noexcept { return predictors_; }
    const DesignMatrix& design() const noexcept { return design_; }
    const Vector& outcome() const noexcept { return outcome_; }
    const std::map<std::string, Categorical>& subgroups() const noexcept { return subgroups_; }

    std::size_t rows() const noexcept { return static_cast<std::size_t>(design_.rows()); }
    std::size_t predictor_count() const noexcept { return predictors_.size(); }
    std::size_t parameter_count() const noexcept { return predictors_.size() + 1; }

    /// Column names in design order, "(intercept)" first.
    std::vector<std::string> column_names() const;

    /// Subgroup lookup that also accepts a binary predictor name, in which case
    /// levels are "0" and "1" taken from the design column.
    Categorical subgroup(const std::string& name) const;

private:
    std::vector<PredictorSpec> predictors_;
    DesignMatrix design_;
    Vector outcome_;
    std::map<std::string, Categorical> subgroups_;
};

/// Either a residual variance or an anticipated R-squared.
class VarianceAssumption {
public:
    static VarianceAssumption residual_variance(double sigma2);
    static VarianceAssumption r_squared(double r2);

    bool is_r_squared() const noexcept { return std::holds_alternative<RSquared>(value_); }
    double value() const noexcept;

private:
    struct Sigma2 { double v; };
    struct RSquared { double v; };
    explicit VarianceAssumption(std::variant<Sigma2, RSquared> v) : value_(v) {}
    std::variant<Sigma2, RSquared> value_;
};

enum class VarianceSource { given_sigma2, from_r_squared };

/// Per-observation information matrix I(beta) = E(x'x) / sigma^2 together with
/// its inverse, which every width calculation needs.
class FisherUnitInformation {
public:
    /// Validates symmetry and positive definiteness, then factorizes.
    FisherUnitInformation(Matrix matrix, double sigma2, std::vector<PredictorSpec> predictors,
                          VarianceSource source = VarianceSource::given_sigma2,
                          std::optional<double> sum_sq_outcome = std::nullopt,
                          std::optional<double> r_squared = std::nullopt);

    const Matrix& matrix() const noexcept { return matrix_; }
    const Matrix& inverse() const noexcept { return inverse_; }
    double sigma2() const noexcept { return sigma2_; }
    VarianceSource source() const noexcept { return source_; }
    const std::optional<double>& sum_sq_outcome() const noexcept { return sum_sq_outcome_; }
    const std::optional<double>& r_squared() const noexcept { return r_squared_; }
    const std::vector<PredictorSpec>& predictors() const noexcept { return predictors_; }

    std::size_t parameter_count() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    std::size_t predictor_count() const noexcept { return parameter_count() - 1; }
    /// lambda_max / lambda_min of I(beta).
    double condition_number() const noexcept { return condition_number_; }

private:
    Matrix matrix_;
    Matrix inverse_;
    double sigma2_;
    VarianceSource source_;
    std::optional<double> sum_sq_outcome_;
    std::optional<double> r_squared_;
    std::vector<PredictorSpec> predictors_;
    double condition_number_ = 0.0;
};

enum class CriticalValuePolicy { normal, student_t };

struct PrecisionAssumptions {
    double alpha = 0.05;
    CriticalValuePolicy policy = CriticalValuePolicy::normal;

    void validate() const;
};

double z_critical(double alpha);
double t_critical(double alpha, double degrees_of_freedom);
/// z_{alpha/2}, or t_{alpha/2, n-p-1} under the student_t policy.
double critical_value(const PrecisionAssumptions& assumptions, std::int64_t n, std::size_t p);

/// Sum of (y_i - mean(y))^2, two-pass.
double sum_squared_deviation(const Vector& y);

/// sigma^2 = (1 - R^2) * sum (y - ybar)^2 / N. The denominator is N, not N - 1.
double residual_variance_from_r2(const Cohort& cohort, double r_squared);

/// Reciprocal condition number of X'X after unit-diagonal equilibration.
/// Below this threshold the design is treated as collinear.
inline constexpr double collinearity_rcond = 1e-12;

FisherUnitInformation fisher_unit_information(const Cohort& cohort, const VarianceAssumption& assumption);

/// var(beta_hat) at sample size n: I(beta)^-1 / n.
Matrix coefficient_variance(const FisherUnitInformation& info, std::int64_t n);

} // namespace precisen
