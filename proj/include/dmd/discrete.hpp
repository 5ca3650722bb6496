#ifndef DMD_DISCRETE_HPP
#define DMD_DISCRETE_HPP

#include "dmd/game.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dmd {

/// Iterates of a discrete-time scheme, one column per recorded iteration.
struct DiscreteRun {
  std::vector<long> iterations;
  Matrix iterates;
  /// nash_residual at each recorded iterate.
  std::vector<double> residuals;
  std::string schedule;
  long iteration_count = 0;
  bool diverged = false;
  /// First k (checked every iteration) whose iterate lies within
  /// `hit_radius` of the monitored set; unset if never reached or unmonitored.
  std::optional<long> hit_iteration;

  Index samples() const { return static_cast<Index>(iterations.size()); }
  Vector final_x() const { return iterates.col(iterates.cols() - 1); }
};

struct DiscreteOptions {
  long max_iter = 1'000'000;
  int record_every = 1;
  std::optional<EquilibriumSet> monitor;
  double hit_radius = 1.0;
};

/// Euler discretization of projected discounted mirror descent:
///   z_{k+1} = z_k + t (-z_k + U(x_k)),  x_{k+1} = proj_Omega(z_{k+1} / eps)
/// with x_0 = proj_Omega(z_0 / eps). Omega is the game's action sets.
struct PdmdSchedule {
  double step = 1e-3;
  double epsilon = 0.1;
};
DiscreteRun run_discrete_pdmd(const GameSpec& game, const Vector& z0,
                              const PdmdSchedule& schedule,
                              const DiscreteOptions& options = {});

/// Iterative Tikhonov regularization:
///   x_{k+1} = proj_Omega(x_k - t_k (-U(x_k) + eps_k x_k)),
///   t_k = k^-step_exponent, eps_k = k^-regularization_exponent, k >= 1.
struct ItrSchedule {
  double step_exponent = 0.48;
  double regularization_exponent = 0.51;
};
DiscreteRun run_itr(const GameSpec& game, const Vector& x0,
                    const ItrSchedule& schedule,
                    const DiscreteOptions& options = {});

}  // namespace dmd

#endif  // DMD_DISCRETE_HPP
