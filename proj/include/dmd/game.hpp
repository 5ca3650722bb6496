#ifndef DMD_GAME_HPP
#define DMD_GAME_HPP

#include "dmd/action_set.hpp"
#include "dmd/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dmd {

/// An N-player concave game described by its pseudo-gradient.
///
/// Players' actions are stacked into one vector x = (x^1, ..., x^N) of size
/// n = sum n_p. The oracle returns U(x), the stack of each player's partial
/// gradient of its own payoff. Immutable once built.
class GameSpec {
 public:
  using Oracle = std::function<Vector(const Vector&)>;

  /// Set when U(x) = R x + b. Used by closed-form solvers.
  struct Affine {
    Matrix R;
    Vector b;
  };

  GameSpec(std::vector<ActionSet> sets, Oracle pseudo_gradient);
  static GameSpec affine(Matrix R, Vector b, std::vector<ActionSet> sets);

  Index players() const { return static_cast<Index>(sets_.size()); }
  Index dim() const { return dim_; }
  Index offset(Index player) const { return offsets_.at(player); }
  std::vector<Index> dims() const;
  const std::vector<ActionSet>& sets() const { return sets_; }
  const Affine* affine_form() const { return affine_.get(); }

  /// Same oracle over different action sets, e.g. truncated ones.
  GameSpec with_sets(std::vector<ActionSet> sets) const;

  Vector pseudo_gradient(const Vector& x) const;
  Vector project(const Vector& x) const;
  bool contains(const Vector& x, double tol = kMembershipTolerance) const;

 private:
  std::vector<ActionSet> sets_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
  Oracle oracle_;
  std::shared_ptr<const Affine> affine_;
};

/// Quadratic game U^p = 1/2 x'A^p x + b^p'x + c^p, whose pseudo-gradient is
/// U(x) = R x + b with R stacking the player rows of each A^p.
struct QuadraticGame {
  Matrix R;
  Vector b;
  /// Payoff constants c^p; they never enter the dynamics.
  std::vector<double> payoff_offsets;
  std::vector<ActionSet> sets;

  GameSpec spec() const;
};

/// Free-function form of GameSpec::pseudo_gradient.
Vector pseudo_gradient(const GameSpec& game, const Vector& x);

enum class MonotonicityClass {
  strongly_monotone,
  strictly_monotone,
  monotone,
  hypo_monotone,
  indeterminate,
};

std::string to_string(MonotonicityClass c);

struct MonotonicityReport {
  MonotonicityClass cls = MonotonicityClass::indeterminate;
  /// eta for strongly monotone, mu for hypo-monotone, 0 otherwise.
  double modulus = 0.0;
  /// Largest eigenvalue of R + R' (exact path) or the worst sampled value of
  /// (U(x) - U(x'))'(x - x') / |x - x'|^2 (sampled path).
  double max_eigenvalue = 0.0;
  /// Sampled path only: the pair attaining the worst gap.
  std::optional<std::pair<Vector, Vector>> violation;
};

/// Exact classification from the spectrum of R + R'.
MonotonicityReport classify_monotonicity(const QuadraticGame& game);
MonotonicityReport classify_monotonicity(const GameSpec::Affine& affine);

/// Sampled classification for general games: draws `samples` pairs in the
/// (truncated) action sets and reports the worst monotonicity gap.
MonotonicityReport classify_monotonicity_sampled(const GameSpec& game,
                                                 std::uint64_t seed,
                                                 int samples = 1000);

/// |x - proj_Omega(x + U(x))|_2; zero exactly at Nash equilibria.
double nash_residual(const GameSpec& game, const Vector& x);

/// A Nash-equilibrium reference: a point, or the hyperplane {x : a'x = d}.
struct EquilibriumPoint {
  Vector x;
};
struct EquilibriumHyperplane {
  Vector normal;
  double offset;
};
using EquilibriumSet = std::variant<EquilibriumPoint, EquilibriumHyperplane>;

/// Euclidean distance from x to the set.
double distance_to_equilibrium_set(const Vector& x, const EquilibriumSet& set);

}  // namespace dmd

#endif  // DMD_GAME_HPP
