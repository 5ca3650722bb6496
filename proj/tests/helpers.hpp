#ifndef DMD_TESTS_HELPERS_HPP
#define DMD_TESTS_HELPERS_HPP

#include "dmd/game.hpp"
#include "dmd/regularizer.hpp"

#include <cmath>
#include <initializer_list>

namespace testing {

inline dmd::Vector vec(std::initializer_list<double> values) {
  dmd::Vector v(static_cast<dmd::Index>(values.size()));
  dmd::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline dmd::Matrix mat2(double a, double b, double c, double d) {
  dmd::Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline std::vector<dmd::ActionSet> intervals(double lo = -100, double hi = 100) {
  return {dmd::ActionSet::box(1, lo, hi), dmd::ActionSet::box(1, lo, hi)};
}

inline dmd::GameSpec monotone_game() {
  return dmd::GameSpec::affine(mat2(-10, 10, 10, -10), vec({500, -500}),
                               intervals());
}

inline dmd::GameSpec hypo_game() {
  return dmd::GameSpec::affine(mat2(-10, 15, 15, -10), vec({500, -500}),
                               intervals());
}

inline dmd::GameSpec mean_learning_game() {
  return dmd::GameSpec::affine(mat2(0, 1, -1, 0), vec({0, 50}), intervals());
}

inline dmd::RegularizerProfile euclidean_profile(const dmd::GameSpec& game,
                                                 double eps) {
  std::vector<dmd::Regularizer> regs;
  for (const auto& s : game.sets()) regs.push_back(dmd::Regularizer::euclidean(s, eps));
  return dmd::RegularizerProfile(regs);
}

/// Independent 2x2 solve of M x = r by Cramer's rule.
inline dmd::Vector cramer2(const dmd::Matrix& M, const dmd::Vector& r) {
  const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  return vec({(r(0) * M(1, 1) - M(0, 1) * r(1)) / det,
              (M(0, 0) * r(1) - r(0) * M(1, 0)) / det});
}

/// Perturbed equilibrium of an affine game with Euclidean regularizer and an
/// interior solution: (R - eps I) x = -b.
inline dmd::Vector euclidean_rest_point_oracle(const dmd::Matrix& R,
                                               const dmd::Vector& b, double eps) {
  dmd::Matrix M = R;
  M(0, 0) -= eps;
  M(1, 1) -= eps;
  return cramer2(M, -b);
}

}  // namespace testing

#endif  // DMD_TESTS_HELPERS_HPP
