#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "retrieveall/errors.hpp"

namespace retrieveall {

// Storage is 32-bit float, row-major, matching the on-disk layouts. Products and
// dot products accumulate in 64-bit and round once at the end.
using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorF = Eigen::VectorXf;
using MatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Checked matrix product. Throws DimensionMismatch when a.cols != b.rows.
MatrixF matmul(const Eigen::Ref<const MatrixF>& a, const Eigen::Ref<const MatrixF>& b);

/// Cosine similarity in [-1, 1], clamped against rounding overshoot.
/// Throws DimensionMismatch on unequal dims and ZeroNorm when either norm is 0.
float cosine(const Eigen::Ref<const VectorF>& u, const Eigen::Ref<const VectorF>& v);

bool all_finite(const Eigen::Ref<const MatrixF>& m);

/// Throws Error naming `what` when m contains a NaN or Inf.
void require_finite(const Eigen::Ref<const MatrixF>& m, std::string_view what);

}  // namespace retrieveall
