#include "retrieveall/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace retrieveall {

MatrixF matmul(const Eigen::Ref<const MatrixF>& a, const Eigen::Ref<const MatrixF>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionMismatch("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                            " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  return (a.cast<double>() * b.cast<double>()).cast<float>();
}

float cosine(const Eigen::Ref<const VectorF>& u, const Eigen::Ref<const VectorF>& v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine: dim " + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()));
  }
  const Eigen::VectorXd ud = u.cast<double>();
  const Eigen::VectorXd vd = v.cast<double>();
  const double uu = ud.squaredNorm();
  const double vv = vd.squaredNorm();
  if (uu == 0.0 || vv == 0.0) {
    throw ZeroNorm("cosine: zero-norm operand");
  }
  const double c = ud.dot(vd) / (std::sqrt(uu) * std::sqrt(vv));
  return static_cast<float>(std::clamp(c, -1.0, 1.0));
}

bool all_finite(const Eigen::Ref<const MatrixF>& m) { return m.allFinite(); }

void require_finite(const Eigen::Ref<const MatrixF>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error("non-finite values in " + std::string(what));
  }
}

}  // namespace retrieveall
