#include "precisen/mc_oracle.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "precisen/error.hpp"
#include "precisen/random.hpp"

namespace precisen {

namespace {

constexpr const char* kModule = "mc_oracle";

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, kModule, message);
}

struct Accumulator {
    std::vector<double> ci_width;
    std::vector<double> pi_width;
    std::vector<std::int64_t> ci_hits;
    std::vector<std::int64_t> pi_hits;
    Matrix dd;
    Matrix dd_sq;
    std::int64_t used = 0;
    std::int64_t discarded = 0;

    Accumulator(std::size_t profiles, Eigen::Index k)
        : ci_width(profiles, 0.0),
          pi_width(profiles, 0.0),
          ci_hits(profiles, 0),
          pi_hits(profiles, 0),
          dd(Matrix::Zero(k, k)),
          dd_sq(Matrix::Zero(k, k)) {}

    void merge(const Accumulator& other) {
        for (std::size_t i = 0; i < ci_width.size(); ++i) {
            ci_width[i] += other.ci_width[i];
            pi_width[i] += other.pi_width[i];
            ci_hits[i] += other.ci_hits[i];
            pi_hits[i] += other.pi_hits[i];
        }
        dd += other.dd;
        dd_sq += other.dd_sq;
        used += other.used;
        discarded += other.discarded;
    }
};

bool well_conditioned(const Matrix& gram) {
    for (Eigen::Index j = 0; j < gram.rows(); ++j) {
        if (!(gram(j, j) > 0.0)) {
            return false;
        }
    }
    const Vector d = gram.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(d.asDiagonal() * gram * d.asDiagonal(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0) / eig.eigenvalues()(gram.rows() - 1) >= collinearity_rcond;
}

void run_replicate(const OracleSpec& spec, const DesignMatrix& design, const DesignMatrix& profiles,
                   const Vector& profile_means, double t_crit, std::int64_t replicate, Accumulator& acc) {
    const Eigen::Index k = design.cols();
    const Eigen::Index n = spec.n;
    auto gen = substream(spec.seed, StreamPurpose::oracle_replicate, static_cast<std::uint64_t>(replicate));
    std::uniform_int_distribution<Eigen::Index> pick(0, design.rows() - 1);
    std::normal_distribution<double> noise(0.0, std::sqrt(spec.sigma2));

    DesignMatrix x(n, k);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = design.row(pick(gen));
        y(i) = x.row(i).dot(spec.true_coefficients) + noise(gen);
    }

    const Matrix gram = x.transpose() * x;
    if (!well_conditioned(gram)) {
        ++acc.discarded;
        return;
    }
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        ++acc.discarded;
        return;
    }
    const Vector beta = llt.solve(x.transpose() * y);
    const double rss = (y - x * beta).squaredNorm();
    const double s2 = rss / static_cast<double>(n - k);
    const Matrix gram_inv = llt.solve(Matrix::Identity(k, k));

    for (Eigen::Index i = 0; i < profiles.rows(); ++i) {
        const auto xi = profiles.row(i);
        const double lev = xi.dot(gram_inv * xi.transpose());
        const double se_mean = std::sqrt(s2 * lev);
        const double se_new = std::sqrt(s2 * (1.0 + lev));
        const double fitted = xi.dot(beta);
        const auto idx = static_cast<std::size_t>(i);
        acc.ci_width[idx] += 2.0 * t_crit * se_mean;
        acc.pi_width[idx] += 2.0 * t_crit * se_new;
        if (std::abs(fitted - profile_means(i)) <= t_crit * se_mean) {
            ++acc.ci_hits[idx];
        }
        const double fresh = profile_means(i) + noise(gen);
        if (std::abs(fresh - fitted) <= t_crit * se_new) {
            ++acc.pi_hits[idx];
        }
    }

    const Vector d = beta - spec.true_coefficients;
    const Matrix outer = d * d.transpose();
    acc.dd += outer;
    acc.dd_sq += outer.cwiseProduct(outer);
    ++acc.used;
}

} // namespace

OracleResult run_oracle(const OracleSpec& spec, const Cohort& cohort) {
    const auto k = static_cast<Eigen::Index>(cohort.parameter_count());
    const auto p = cohort.predictor_count();
    if (spec.true_coefficients.size() != k) {
        fail(ErrorKind::shape, "true coefficients must have p + 1 = " + std::to_string(k) + " entries");
    }
    if (!(spec.sigma2 > 0.0)) {
        fail(ErrorKind::invalid_assumption, "sigma2 must be positive");
    }
    if (spec.replicates < 100) {
        fail(ErrorKind::configuration, "at least 100 replicates are required");
    }
    if (spec.n < k + 1) {
        fail(ErrorKind::insufficient_rows, "replicate size must be at least p + 2");
    }

    std::vector<std::size_t> rows = spec.profile_set;
    if (rows.empty()) {
        rows.resize(cohort.rows());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    DesignMatrix profiles(static_cast<Eigen::Index>(rows.size()), k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= cohort.rows()) {
            fail(ErrorKind::configuration, "profile row " + std::to_string(rows[i]) + " is outside the cohort");
        }
        profiles.row(static_cast<Eigen::Index>(i)) = cohort.design().row(static_cast<Eigen::Index>(rows[i]));
    }
    const Vector profile_means = profiles * spec.true_coefficients;

    const double df = static_cast<double>(spec.n) - static_cast<double>(p) - 1.0;
    const double t_crit = t_critical(spec.alpha, df);
    const double analytic_crit = spec.strict ? t_crit : z_critical(spec.alpha);

    const auto info = fisher_unit_information(cohort, VarianceAssumption::residual_variance(spec.sigma2));

    const std::int64_t chunks = (spec.replicates + oracle_chunk - 1) / oracle_chunk;
    std::vector<Accumulator> partial(static_cast<std::size_t>(chunks), Accumulator(rows.size(), k));

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::int64_t begin = c * oracle_chunk;
        const std::int64_t end = std::min(spec.replicates, begin + oracle_chunk);
        for (std::int64_t r = begin; r < end; ++r) {
            run_replicate(spec, cohort.design(), profiles, profile_means, t_crit, r,
                          partial[static_cast<std::size_t>(c)]);
        }
    }

    Accumulator total(rows.size(), k);
    for (const auto& a : partial) {
        total.merge(a);
    }

    OracleResult result;
    result.replicates_used = total.used;
    result.replicates_discarded = total.discarded;
    if (total.used == 0) {
        fail(ErrorKind::collinearity, "every replicate design was singular");
    }
    if (static_cast<double>(total.discarded) > 0.01 * static_cast<double>(spec.replicates)) {
        result.warnings.push_back(std::to_string(total.discarded) + " of " + std::to_string(spec.replicates) +
                                  " replicate designs were singular and discarded");
    }

    const auto used = static_cast<double>(total.used);
    result.empirical_coefficient_variance = total.dd / used;
    const Matrix second = total.dd_sq / used;
    result.coefficient_variance_se =
        ((second - result.empirical_coefficient_variance.cwiseProduct(result.empirical_coefficient_variance)) /
         used)
            .cwiseMax(0.0)
            .cwiseSqrt();
    result.analytic_coefficient_variance = coefficient_variance(info, spec.n);

    const auto nd = static_cast<double>(spec.n);
    double sum_emp = 0.0;
    double sum_ana = 0.0;
    double sum_ci_cov = 0.0;
    double sum_pi_cov = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        OracleProfile prof;
        prof.row = rows[i];
        const auto xi = profiles.row(static_cast<Eigen::Index>(i));
        const double lev = xi.dot(info.inverse() * xi.transpose());
        prof.empirical_ci_width = total.ci_width[i] / used;
        prof.analytic_ci_width = 2.0 * analytic_crit * std::sqrt(lev / nd);
        prof.relative_error = std::abs(prof.empirical_ci_width - prof.analytic_ci_width) / prof.analytic_ci_width;
        prof.ci_coverage = static_cast<double>(total.ci_hits[i]) / used;
        prof.empirical_pi_width = total.pi_width[i] / used;
        prof.analytic_pi_width = 2.0 * analytic_crit * std::sqrt(lev / nd + spec.sigma2);
        prof.pi_coverage = static_cast<double>(total.pi_hits[i]) / used;
        sum_emp += prof.empirical_ci_width;
        sum_ana += prof.analytic_ci_width;
        sum_ci_cov += prof.ci_coverage;
        sum_pi_cov += prof.pi_coverage;
        result.profiles.push_back(prof);
    }
    const auto np = static_cast<double>(rows.size());
    result.mean_empirical_ci_width = sum_emp / np;
    result.mean_analytic_ci_width = sum_ana / np;
    result.mean_ci_coverage = sum_ci_cov / np;
    result.mean_pi_coverage = sum_pi_cov / np;
    return result;
}

OracleVerdict empirical_vs_analytic_report(const OracleResult& result, double tolerance) {
    OracleVerdict verdict;
    verdict.tolerance = tolerance;
    for (const auto& prof : result.profiles) {
        const double rel = std::abs(prof.empirical_ci_width - prof.analytic_ci_width) / prof.analytic_ci_width;
        const bool pass = rel <= tolerance;
        verdict.checks.push_back({prof.row, rel, pass});
        if (!pass) {
            ++verdict.failures;
        }
    }
    return verdict;
}

} // namespace precisen
