#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace detdag::stats {

// A residual with (numerically) no variance left: the column is a linear
// function of the regressors.
class DegenerateColumn : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Derived>
typename Derived::Scalar variance(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const auto n = v.size();
  if (n < 2) return Scalar(0);
  Scalar mean = v.mean();
  return (v.array() - mean).square().sum() / Scalar(n - 1);
}

template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar covariance(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const auto n = x.size();
  if (n < 2) return Scalar(0);
  return ((x.array() - x.mean()) * (y.array() - y.mean())).sum() / Scalar(n - 1);
}

template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar pearson(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  Scalar vx = variance(x);
  Scalar vy = variance(y);
  if (!(vx > Scalar(0)) || !(vy > Scalar(0))) throw DegenerateColumn("constant column in correlation");
  return std::clamp(covariance(x, y) / std::sqrt(vx * vy), Scalar(-1), Scalar(1));
}

/// Residual of `v` after least-squares projection on an intercept and the
/// columns of `regressors` (which may have zero columns).
template <typename DerivedV, typename DerivedZ>
Eigen::Matrix<typename DerivedV::Scalar, Eigen::Dynamic, 1> residualize(
    const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedZ>& regressors) {
  using Scalar = typename DerivedV::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Vector centred = v.array() - v.mean();
  if (regressors.cols() == 0) return centred;
  Matrix z = regressors.rowwise() - regressors.colwise().mean();
  Eigen::ColPivHouseholderQR<Matrix> qr(z);
  Vector beta = qr.solve(centred);
  return centred - z * beta;
}

/// Pearson correlation of the residuals of x and y on `given`.
template <typename DerivedX, typename DerivedY, typename DerivedZ>
typename DerivedX::Scalar partial_correlation(const Eigen::MatrixBase<DerivedX>& x,
                                              const Eigen::MatrixBase<DerivedY>& y,
                                              const Eigen::MatrixBase<DerivedZ>& given) {
  using Scalar = typename DerivedX::Scalar;
  auto rx = residualize(x, given);
  auto ry = residualize(y, given);
  // Relative to the raw variance so that the check is scale-free above unit variance.
  const Scalar tol = Scalar(1e-12);
  if (variance(rx) < tol * std::max(Scalar(1), variance(x)) ||
      variance(ry) < tol * std::max(Scalar(1), variance(y))) {
    throw DegenerateColumn("residual variance vanishes after conditioning");
  }
  return pearson(rx, ry);
}

// Fisher z statistic of a partial correlation from n samples with k regressors.
template <typename Scalar>
Scalar fisher_z(Scalar r, long n, long k) {
  const Scalar bound = Scalar(1) - Scalar(1e-15);
  r = std::clamp(r, -bound, bound);
  return std::atanh(r) * std::sqrt(Scalar(n - k - 3));
}

// Two-sided normal p-value.
template <typename Scalar>
Scalar two_sided_p(Scalar z) {
  return std::erfc(std::abs(z) / std::sqrt(Scalar(2)));
}

}  // namespace detdag::stats
