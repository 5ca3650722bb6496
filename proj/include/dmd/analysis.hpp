#ifndef DMD_ANALYSIS_HPP
#define DMD_ANALYSIS_HPP

#include "dmd/discrete.hpp"
#include "dmd/flows.hpp"
#include "dmd/regularizer.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace dmd {

enum class ConvergenceStatus { converged, cycling, diverged, undetermined };

std::string to_string(ConvergenceStatus s);

struct ConvergenceVerdict {
  ConvergenceStatus status = ConvergenceStatus::undetermined;
  /// Mean of the tail window.
  Vector limit_estimate;
  /// max_k |x_k - limit_estimate| over the tail window.
  double window_radius = 0.0;
  /// Largest sup-norm over the tail window.
  double tail_sup_norm = 0.0;
  std::optional<double> target_distance;
};

struct ConvergenceOptions {
  double tail_fraction = 0.25;
  double tolerance = 1e-3;
  /// Tail sup-norm beyond which a bounded-looking path counts as diverged.
  double norm_guard = 1e6;
  std::optional<EquilibriumSet> target;
};

/// Classifies the tail of a sampled path (one column per sample).
///
/// diverged:     flagged divergence, a non-finite entry, or tail sup-norm
///               above norm_guard
/// converged:    window_radius <= tolerance
/// cycling:      bounded tail with window_radius > tolerance
/// undetermined: fewer than 10 samples
ConvergenceVerdict detect_convergence(const Matrix& path, bool flagged_divergent,
                                      const ConvergenceOptions& options = {});
ConvergenceVerdict detect_convergence(const Trajectory& traj,
                                      const ConvergenceOptions& options = {});
ConvergenceVerdict detect_convergence(const DiscreteRun& run,
                                      const ConvergenceOptions& options = {});

struct LyapunovAudit {
  /// max_k V(t_{k+1}) - V(t_k); zero for a single sample.
  double max_increase = 0.0;
  double max_value = 0.0;
  /// max_increase <= 1e-6 (1 + max_value)
  bool monotone_up_to_slack = true;
};

/// Throws DomainError if the trajectory carries no Lyapunov samples.
LyapunovAudit audit_lyapunov_decay(const Trajectory& traj);

/// Worst cases of the mirror-map properties over seeded samples. Dual points
/// are drawn from [-10, 10]^n; primal points from the domain interior.
/// Fields that do not apply to the regularizer's class are left unset.
struct MirrorMapReport {
  std::string kind;
  double epsilon = 0.0;
  Index dim = 0;
  int samples = 0;
  std::uint64_t seed = 0;

  /// Strongly convex kinds, in the regularizer's norm pairing
  /// (l2/l2, or l_inf -> l1 for the simplex entropy).
  std::optional<double> lipschitz_ratio;
  std::optional<double> lipschitz_bound;
  std::optional<double> cocoercivity_gap;
  /// min (C(z) - C(z'))'(z - z') over sampled pairs.
  double monotonicity_gap = 0.0;
  /// max |C(grad psi(x)) - x| over interior x.
  double left_inverse_error = 0.0;
  /// Legendre kinds: max |grad psi(C(z)) - z| / (1 + |z|) for |z / eps| <= 10.
  std::optional<double> inverse_error;
  /// max relative error of a central-difference gradient of psi* against C.
  double conjugate_gradient_error = 0.0;
  /// Points where C(z) left the domain (or touched the boundary, if steep).
  int range_violations = 0;
  /// max of [y'z - psi(y)] - [C(z)'z - psi(C(z))], relative, over y in dom.
  double argmax_violation = 0.0;

  bool lipschitz_ok = true;
  bool cocoercivity_ok = true;
  bool strict_monotone_ok = true;
  bool left_inverse_ok = true;
  bool inverse_ok = true;
  bool conjugate_gradient_ok = true;
  bool range_ok = true;
  bool argmax_ok = true;
  bool passed() const;
};

MirrorMapReport verify_mirror_map_properties(const Regularizer& reg,
                                             int sample_count,
                                             std::uint64_t seed);

/// The regularizer verify-maps uses for a kind: dimension `dim` over
/// [-1, 1]^n (Euclidean), the simplex, the orthant, [0, 1]^n (Fermi-Dirac)
/// or the unit ball (Hellinger).
Regularizer default_regularizer(RegularizerKind kind, double epsilon,
                                Index dim = 3);

/// Pretty-printed JSON, keys in declaration order.
std::string to_json(const MirrorMapReport& report);

}  // namespace dmd

#endif  // DMD_ANALYSIS_HPP
