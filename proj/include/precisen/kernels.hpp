#pragma once

// Data-parallel inner loops over cohort rows. Each kernel has a serial
// reference and an OpenMP version; tests pin them against each other and
// bench/ compares their throughput.

#include <span>

#include "precisen/model_core.hpp"

namespace precisen::kernels {

/// Rows per block in blocked reductions. Fixed so that results do not depend
/// on the thread count.
inline constexpr Eigen::Index reduction_block = 8192;

namespace serial {

/// X'X by a single pass over rows.
Matrix gram(const DesignMatrix& x);

/// out[i] = x_i A x_i' for each row of x.
void quadratic_forms(const DesignMatrix& x, const Matrix& a, std::span<double> out);

} // namespace serial

namespace parallel {

/// X'X as a sum of per-block partial Grams reduced in block order.
Matrix gram(const DesignMatrix& x);

/// Same arithmetic per row as serial::quadratic_forms, so results are
/// bitwise identical.
void quadratic_forms(const DesignMatrix& x, const Matrix& a, std::span<double> out);

} // namespace parallel

int max_threads();

} // namespace precisen::kernels
