#include "precisen/kernels.hpp"

#include <omp.h>

#include <vector>

#include "precisen/error.hpp"

namespace precisen::kernels {

namespace {

void accumulate_rows(const DesignMatrix& x, Eigen::Index begin, Eigen::Index end, Matrix& acc) {
    const Eigen::Index k = x.cols();
    for (Eigen::Index i = begin; i < end; ++i) {
        const double* row = x.row(i).data();
        for (Eigen::Index a = 0; a < k; ++a) {
            const double xa = row[a];
            for (Eigen::Index b = a; b < k; ++b) {
                acc(a, b) += xa * row[b];
            }
        }
    }
}

void mirror_upper(Matrix& m) {
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        for (Eigen::Index b = 0; b < a; ++b) {
            m(a, b) = m(b, a);
        }
    }
}

inline double quadratic_form_row(const double* row, const Matrix& a) {
    const Eigen::Index k = a.rows();
    double total = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
        double inner = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) {
            inner += a(r, c) * row[c];
        }
        total += row[r] * inner;
    }
    return total;
}

void check_shapes(const DesignMatrix& x, const Matrix& a, std::span<double> out) {
    if (a.rows() != x.cols() || a.cols() != x.cols()) {
        throw Error(ErrorKind::shape, "kernels", "quadratic form matrix does not match design width");
    }
    if (out.size() != static_cast<std::size_t>(x.rows())) {
        throw Error(ErrorKind::shape, "kernels", "output span does not match row count");
    }
}

} // namespace

namespace serial {

Matrix gram(const DesignMatrix& x) {
    Matrix acc = Matrix::Zero(x.cols(), x.cols());
    accumulate_rows(x, 0, x.rows(), acc);
    mirror_upper(acc);
    return acc;
}

void quadratic_forms(const DesignMatrix& x, const Matrix& a, std::span<double> out) {
    check_shapes(x, a, out);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = quadratic_form_row(x.row(i).data(), a);
    }
}

} // namespace serial

namespace parallel {

Matrix gram(const DesignMatrix& x) {
    const Eigen::Index k = x.cols();
    const Eigen::Index n = x.rows();
    const Eigen::Index blocks = (n + reduction_block - 1) / reduction_block;
    std::vector<Matrix> partial(static_cast<std::size_t>(blocks), Matrix::Zero(k, k));

#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index begin = b * reduction_block;
        const Eigen::Index end = std::min(n, begin + reduction_block);
        accumulate_rows(x, begin, end, partial[static_cast<std::size_t>(b)]);
    }

    Matrix acc = Matrix::Zero(k, k);
    for (const auto& p : partial) {
        acc += p;
    }
    mirror_upper(acc);
    return acc;
}

void quadratic_forms(const DesignMatrix& x, const Matrix& a, std::span<double> out) {
    check_shapes(x, a, out);
    const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = quadratic_form_row(x.row(i).data(), a);
    }
}

} // namespace parallel

int max_threads() { return omp_get_max_threads(); }

} // namespace precisen::kernels
