#ifndef DMD_NUMERICS_HPP
#define DMD_NUMERICS_HPP

// Scalar-generic kernels shared by the projection and mirror-map code.
// Everything here takes Eigen expressions and returns plain dense objects.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace dmd::numerics {

/// Largest argument passed to exp() before saturation.
inline constexpr double kMaxExponent = 700.0;

template <typename Scalar>
Scalar clamp_exponent(Scalar t, bool* saturated = nullptr) {
  if (t > Scalar(kMaxExponent)) {
    if (saturated) *saturated = true;
    return Scalar(kMaxExponent);
  }
  return t;
}

/// log(1 + exp(t)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar t) {
  using std::abs;
  using std::exp;
  using std::log1p;
  using std::max;
  return log1p(exp(-abs(t))) + max(t, Scalar(0));
}

/// exp(t) / (1 + exp(t)) evaluated on the branch that cannot overflow.
template <typename Scalar>
Scalar logistic(Scalar t) {
  using std::exp;
  if (t >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-t));
  const Scalar e = exp(t);
  return e / (Scalar(1) + e);
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = (v.array() - m).exp().matrix();
  return e / e.sum();
}

template <typename DerivedX, typename DerivedL, typename DerivedU>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> project_box(
    const Eigen::MatrixBase<DerivedX>& x,
    const Eigen::MatrixBase<DerivedL>& lower,
    const Eigen::MatrixBase<DerivedU>& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

/// Euclidean projection onto {y >= 0, sum(y) = 1} by sort-and-threshold.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_simplex(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  std::vector<Scalar> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sorted[i] = x(i);
  std::sort(sorted.begin(), sorted.end(), std::greater<Scalar>());
  Scalar cumulative(0);
  Scalar theta(0);
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const Scalar candidate = (cumulative - Scalar(1)) / Scalar(k + 1);
    if (sorted[k] - candidate > Scalar(0)) theta = candidate;
  }
  return (x.array() - theta).cwiseMax(Scalar(0)).matrix();
}

/// Radial projection onto the closed ball of given center and radius.
template <typename DerivedX, typename DerivedC>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> project_ball(
    const Eigen::MatrixBase<DerivedX>& x,
    const Eigen::MatrixBase<DerivedC>& center,
    typename DerivedX::Scalar radius) {
  using Scalar = typename DerivedX::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> offset = x - center;
  const Scalar norm = offset.norm();
  if (norm <= radius) return x;
  return center + offset * (radius / norm);
}

}  // namespace dmd::numerics

#endif  // DMD_NUMERICS_HPP
