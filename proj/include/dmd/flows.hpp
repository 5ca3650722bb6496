#ifndef DMD_FLOWS_HPP
#define DMD_FLOWS_HPP

#include "dmd/game.hpp"
#include "dmd/regularizer.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmd {

/// Continuous-time learning dynamics.
///   dmd:  z' = gamma (-z + U(C(z)))   discounted mirror descent
///   md:   z' = gamma U(C(z))          undiscounted mirror descent
///   psgd: x' = gamma U(x)             pseudo-gradient flow, kept in Omega by
///                                     projecting after every step
enum class Dynamics { dmd, md, psgd };

std::string to_string(Dynamics d);
Dynamics parse_dynamics(std::string_view name);

/// The pseudo-gradient returned a non-finite value.
class NonFiniteFieldError : public Error {
 public:
  NonFiniteFieldError(const std::string& what, Vector x)
      : Error(what), x_(std::move(x)) {}
  const Vector& offending_point() const { return x_; }

 private:
  Vector x_;
};

struct FlowSpec {
  Dynamics dynamics = Dynamics::dmd;
  double gamma = 1.0;
  GameSpec game;
  /// Unused for psgd.
  RegularizerProfile regs;
  /// z(0) for dmd/md, x(0) for psgd.
  Vector initial;
};

Vector dmd_vector_field(const GameSpec& game, const RegularizerProfile& regs,
                        double gamma, const Vector& z);
Vector md_vector_field(const GameSpec& game, const RegularizerProfile& regs,
                       double gamma, const Vector& z);
Vector psgd_vector_field(const GameSpec& game, double gamma, const Vector& x);

/// Recorded samples of one integration. Paths hold one column per sample.
struct Trajectory {
  std::vector<double> times;
  Matrix z_path;
  Matrix x_path;
  /// Empty unless a Lyapunov reference was supplied.
  std::vector<double> lyapunov;
  /// nash_residual of the flow's game at each recorded x (NaN when x is
  /// outside the game's action sets).
  std::vector<double> residuals;
  std::vector<bool> saturated;
  bool diverged = false;
  std::optional<double> divergence_time;

  Index samples() const { return static_cast<Index>(times.size()); }
  Index dim() const { return x_path.rows(); }
  Vector final_x() const { return x_path.col(x_path.cols() - 1); }
  Vector final_z() const { return z_path.col(z_path.cols() - 1); }
};

struct IntegrateOptions {
  double horizon = 50.0;
  double dt = 1e-3;
  int record_every = 1;
  /// Rest point z_bar; enables Lyapunov sampling for dmd/md.
  std::optional<Vector> lyapunov_reference;
};

/// Fixed-step classical Runge-Kutta integration of the chosen field.
///
/// Requires dt <= horizon and gamma * dt < 1. A non-finite state stops the
/// integration: the samples so far are returned with `diverged` set.
Trajectory integrate(const FlowSpec& flow, const IntegrateOptions& options);

}  // namespace dmd

#endif  // DMD_FLOWS_HPP
