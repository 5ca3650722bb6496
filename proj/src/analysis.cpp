#include "dmd/analysis.hpp"

#include "dmd/numerics.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>

namespace dmd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Tolerances of the property checks.
constexpr double kLipschitzSlack = 1e-9;
constexpr double kCocoercivitySlack = 1e-9;
constexpr double kLeftInverseTol = 1e-9;
constexpr double kInverseTol = 1e-8;
constexpr double kConjugateGradientTol = 1e-5;
constexpr double kArgmaxTol = 1e-8;
constexpr double kDualBox = 10.0;

double dual_norm(const Regularizer& reg, const Vector& v) {
  return reg.convexity_norm() == ConvexityNorm::l1 ? v.lpNorm<Eigen::Infinity>()
                                                   : v.norm();
}

double primal_norm(const Regularizer& reg, const Vector& v) {
  return reg.convexity_norm() == ConvexityNorm::l1 ? v.lpNorm<1>() : v.norm();
}

// C(z) - C(z') without the cancellation a plain subtraction suffers where the
// logistic saturates at the upper bound.
Vector map_difference(const Regularizer& reg, const Vector& z,
                      const Vector& zp) {
  if (reg.kind() != RegularizerKind::fermi_dirac)
    return mirror_map(reg, z) - mirror_map(reg, zp);
  const auto& box = reg.domain().as<ActionSet::Box>();
  Vector d(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double w = z(i) / reg.epsilon();
    const double wp = zp(i) / reg.epsilon();
    const double diff = (w >= 0.0 && wp >= 0.0)
                            ? numerics::logistic(-wp) - numerics::logistic(-w)
                            : numerics::logistic(w) - numerics::logistic(wp);
    d(i) = (box.upper(i) - box.lower(i)) * diff;
  }
  return d;
}

Vector uniform_cube(std::mt19937_64& rng, Index n, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

bool in_range(const Regularizer& reg, const Vector& x) {
  if (!reg.domain().contains(x)) return false;
  // Steep kinds map into the relative interior; exact boundary hits in
  // floating point come only from saturation, which is flagged separately.
  return true;
}

}  // namespace

std::string to_string(ConvergenceStatus s) {
  switch (s) {
    case ConvergenceStatus::converged: return "converged";
    case ConvergenceStatus::cycling: return "cycling";
    case ConvergenceStatus::diverged: return "diverged";
    case ConvergenceStatus::undetermined: return "undetermined";
  }
  return "undetermined";
}

ConvergenceVerdict detect_convergence(const Matrix& path, bool flagged_divergent,
                                      const ConvergenceOptions& options) {
  if (!(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0))
    throw ConfigError("detect_convergence: tail_fraction must lie in (0, 1]");
  if (!(options.tolerance > 0.0))
    throw ConfigError("detect_convergence: tolerance must be positive");

  ConvergenceVerdict verdict;
  const Index samples = path.cols();
  if (samples == 0) return verdict;
  const Index tail = std::max<Index>(
      2, static_cast<Index>(std::ceil(options.tail_fraction *
                                      static_cast<double>(samples))));
  const auto window = path.rightCols(std::min(tail, samples));

  verdict.limit_estimate = window.rowwise().mean();
  verdict.tail_sup_norm = window.cwiseAbs().maxCoeff();
  double radius = 0.0;
  for (Index k = 0; k < window.cols(); ++k)
    radius = std::max(radius, (window.col(k) - verdict.limit_estimate).norm());
  verdict.window_radius = radius;
  if (options.target && verdict.limit_estimate.allFinite())
    verdict.target_distance =
        distance_to_equilibrium_set(verdict.limit_estimate, *options.target);

  if (flagged_divergent || !window.allFinite() ||
      !(verdict.tail_sup_norm <= options.norm_guard)) {
    verdict.status = ConvergenceStatus::diverged;
  } else if (samples < 10) {
    verdict.status = ConvergenceStatus::undetermined;
  } else if (radius <= options.tolerance) {
    verdict.status = ConvergenceStatus::converged;
  } else {
    verdict.status = ConvergenceStatus::cycling;
  }
  return verdict;
}

ConvergenceVerdict detect_convergence(const Trajectory& traj,
                                      const ConvergenceOptions& options) {
  return detect_convergence(traj.x_path, traj.diverged, options);
}

ConvergenceVerdict detect_convergence(const DiscreteRun& run,
                                      const ConvergenceOptions& options) {
  return detect_convergence(run.iterates, run.diverged, options);
}

LyapunovAudit audit_lyapunov_decay(const Trajectory& traj) {
  if (traj.lyapunov.empty())
    throw DomainError("audit_lyapunov_decay: trajectory has no Lyapunov "
                      "samples");
  LyapunovAudit audit;
  audit.max_value = traj.lyapunov.front();
  for (std::size_t k = 1; k < traj.lyapunov.size(); ++k) {
    audit.max_increase =
        std::max(audit.max_increase, traj.lyapunov[k] - traj.lyapunov[k - 1]);
    audit.max_value = std::max(audit.max_value, traj.lyapunov[k]);
  }
  for (double v : traj.lyapunov) {
    if (!std::isfinite(v)) {
      audit.max_increase = std::numeric_limits<double>::infinity();
      break;
    }
  }
  audit.monotone_up_to_slack =
      audit.max_increase <= 1e-6 * (1.0 + audit.max_value);
  return audit;
}

bool MirrorMapReport::passed() const {
  return lipschitz_ok && cocoercivity_ok && strict_monotone_ok &&
         left_inverse_ok && inverse_ok && conjugate_gradient_ok && range_ok &&
         argmax_ok;
}

MirrorMapReport verify_mirror_map_properties(const Regularizer& reg,
                                             int sample_count,
                                             std::uint64_t seed) {
  if (sample_count < 2)
    throw ConfigError("verify_mirror_map_properties: need at least 2 samples");
  std::mt19937_64 rng(seed);
  const Index n = reg.dim();
  const double eps = reg.epsilon();
  const auto rho = reg.strong_convexity();

  MirrorMapReport r;
  r.kind = reg.name();
  r.epsilon = eps;
  r.dim = n;
  r.samples = sample_count;
  r.seed = seed;
  r.monotonicity_gap = std::numeric_limits<double>::infinity();
  if (rho) {
    r.lipschitz_ratio = 0.0;
    r.lipschitz_bound = 1.0 / (eps * *rho);
    r.cocoercivity_gap = std::numeric_limits<double>::infinity();
  }
  if (reg.legendre()) r.inverse_error = 0.0;

  for (int s = 0; s < sample_count; ++s) {
    const Vector z = uniform_cube(rng, n, kDualBox);
    const Vector zp = uniform_cube(rng, n, kDualBox);
    const Vector dz = z - zp;
    const Vector dc = map_difference(reg, z, zp);
    const double inner = dc.dot(dz);
    r.monotonicity_gap = std::min(r.monotonicity_gap, inner);
    if (rho) {
      const double dcn = primal_norm(reg, dc);
      const double dzn = dual_norm(reg, dz);
      if (dzn > 0.0) r.lipschitz_ratio = std::max(*r.lipschitz_ratio, dcn / dzn);
      r.cocoercivity_gap =
          std::min(*r.cocoercivity_gap, inner - eps * *rho * dcn * dcn);
    }

    // Range and the argmax characterization at x_c = C(z).
    const Vector xc = mirror_map(reg, z);
    if (!in_range(reg, xc)) ++r.range_violations;
    const double best = xc.dot(z) - regularizer_value(reg, xc);
    const Vector y = reg.domain().sample(rng);
    const double other = y.dot(z) - regularizer_value(reg, y);
    r.argmax_violation =
        std::max(r.argmax_violation, (other - best) / (1.0 + std::abs(best)));

    // Left inverse on interior points.
    const Vector x = reg.domain().sample_interior(rng, 0.01);
    r.left_inverse_error = std::max(
        r.left_inverse_error,
        (mirror_map(reg, regularizer_gradient(reg, x)) - x).norm());

    // Full inverse for Legendre kinds, away from numerical saturation.
    if (r.inverse_error) {
      const Vector zi = uniform_cube(rng, n, 10.0 * eps);
      const Vector back = regularizer_gradient(reg, mirror_map(reg, zi));
      r.inverse_error =
          std::max(*r.inverse_error, (back - zi).norm() / (1.0 + zi.norm()));
    }

    // Central differences of the conjugate against the map.
    Vector fd(n);
    for (Index i = 0; i < n; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(z(i)));
      Vector zh = z, zl = z;
      zh(i) += h;
      zl(i) -= h;
      fd(i) = (conjugate_value(reg, zh) - conjugate_value(reg, zl)) / (2.0 * h);
    }
    const double err = (fd - xc).norm() / std::max(xc.norm(), 1e-12);
    r.conjugate_gradient_error = std::max(r.conjugate_gradient_error, err);
  }

  if (rho) {
    r.lipschitz_ok = *r.lipschitz_ratio <= *r.lipschitz_bound * (1.0 + kLipschitzSlack);
    r.cocoercivity_ok = *r.cocoercivity_gap >= -kCocoercivitySlack;
  } else {
    r.strict_monotone_ok = r.monotonicity_gap > 0.0;
  }
  if (r.inverse_error) r.inverse_ok = *r.inverse_error <= kInverseTol;
  r.left_inverse_ok = r.left_inverse_error <= kLeftInverseTol;
  r.conjugate_gradient_ok = r.conjugate_gradient_error <= kConjugateGradientTol;
  r.range_ok = r.range_violations == 0;
  r.argmax_ok = r.argmax_violation <= kArgmaxTol;
  return r;
}

Regularizer default_regularizer(RegularizerKind kind, double epsilon,
                                Index dim) {
  switch (kind) {
    case RegularizerKind::euclidean:
      return Regularizer::euclidean(ActionSet::box(dim, -1.0, 1.0), epsilon);
    case RegularizerKind::simplex_entropy:
      return Regularizer::simplex_entropy(dim, epsilon);
    case RegularizerKind::boltzmann_shannon:
      return Regularizer::boltzmann_shannon(dim, 0.0, epsilon);
    case RegularizerKind::fermi_dirac:
      return Regularizer::fermi_dirac(dim, 0.0, 1.0, epsilon);
    case RegularizerKind::hellinger:
      return Regularizer::hellinger(Vector::Zero(dim), 1.0, epsilon);
  }
  throw ConfigError("default_regularizer: unknown kind");
}

std::string to_json(const MirrorMapReport& r) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["kind"] = r.kind;
  j["epsilon"] = r.epsilon;
  j["dim"] = r.dim;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["lipschitz_ratio"] = opt(r.lipschitz_ratio);
  j["lipschitz_bound"] = opt(r.lipschitz_bound);
  j["cocoercivity_gap"] = opt(r.cocoercivity_gap);
  j["monotonicity_gap"] = r.monotonicity_gap;
  j["left_inverse_error"] = r.left_inverse_error;
  j["inverse_error"] = opt(r.inverse_error);
  j["conjugate_gradient_error"] = r.conjugate_gradient_error;
  j["range_violations"] = r.range_violations;
  j["argmax_violation"] = r.argmax_violation;
  j["lipschitz_ok"] = r.lipschitz_ok;
  j["cocoercivity_ok"] = r.cocoercivity_ok;
  j["strict_monotone_ok"] = r.strict_monotone_ok;
  j["left_inverse_ok"] = r.left_inverse_ok;
  j["inverse_ok"] = r.inverse_ok;
  j["conjugate_gradient_ok"] = r.conjugate_gradient_ok;
  j["range_ok"] = r.range_ok;
  j["argmax_ok"] = r.argmax_ok;
  j["passed"] = r.passed();
  return j.dump(2);
}

}  // namespace dmd
