#ifndef DMD_EQUILIBRIUM_HPP
#define DMD_EQUILIBRIUM_HPP

#include "dmd/game.hpp"
#include "dmd/regularizer.hpp"

#include <optional>
#include <string>

namespace dmd {

/// Rest point of the discounted dynamics: x = C(z), z = U(x). Equivalently
/// the Nash equilibrium of the game whose payoffs are penalized by psi.
struct PerturbedEquilibrium {
  Vector x;
  Vector z;
  /// perturbed_residual(game, regs, x)
  double residual = 0.0;
  int iterations = 0;
  /// "linear_solve", "newton" or "fixed_point".
  std::string method;
};

struct PerturbedEquilibriumOptions {
  double tolerance = 1e-8;
  /// Dual starting point for the iterative solvers; zero when unset.
  std::optional<Vector> start;
  int newton_iterations = 200;
  /// Damped fixed point x <- (1 - a) x + a C(U(x)), tried when Newton fails.
  double damping = 0.1;
  long fixed_point_iterations = 1'000'000;
};

/// |x - proj_Omega(x + U(x) - grad psi(x))|_2 where Omega is the product of
/// the regularizer domains. Infinite where grad psi is undefined.
double perturbed_residual(const GameSpec& game, const RegularizerProfile& regs,
                          const Vector& x);

/// Solves U(x) - grad psi(x) in N_Omega(x).
///
/// Affine games with Euclidean regularizers first try the linear system
/// (R - eps I) x = -b and accept it when the solution is interior. Otherwise
/// a damped Newton iteration on z - U(C(z)) = 0 runs, then the damped fixed
/// point as a last resort. Throws NonConvergenceError if none reaches the
/// tolerance.
PerturbedEquilibrium perturbed_equilibrium(
    const GameSpec& game, const RegularizerProfile& regs,
    const PerturbedEquilibriumOptions& options = {});

/// Same, with every player's regularizer rescaled to `epsilon`.
PerturbedEquilibrium perturbed_equilibrium(
    const GameSpec& game, const RegularizerProfile& regs, double epsilon,
    const PerturbedEquilibriumOptions& options = {});

}  // namespace dmd

#endif  // DMD_EQUILIBRIUM_HPP
