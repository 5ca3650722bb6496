#include "dmd/flows.hpp"

#include <cmath>
#include <limits>

namespace dmd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector checked_pseudo_gradient(const GameSpec& game, const Vector& x) {
  Vector u = game.pseudo_gradient(x);
  if (!u.allFinite())
    throw NonFiniteFieldError("pseudo-gradient is not finite", x);
  return u;
}

void require_finite_state(const Vector& z) {
  if (!z.allFinite()) throw DomainError("vector field: non-finite state");
}

struct Recorder {
  const FlowSpec& flow;
  const IntegrateOptions& options;
  Trajectory traj;
  Index count = 0;

  Recorder(const FlowSpec& f, const IntegrateOptions& o, Index capacity)
      : flow(f), options(o) {
    const Index n = f.initial.size();
    traj.z_path.resize(n, capacity);
    traj.x_path.resize(n, capacity);
    traj.times.reserve(static_cast<std::size_t>(capacity));
    traj.residuals.reserve(static_cast<std::size_t>(capacity));
    traj.saturated.reserve(static_cast<std::size_t>(capacity));
  }

  void record(double t, const Vector& state) {
    bool saturated = false;
    Vector x = flow.dynamics == Dynamics::psgd
                   ? state
                   : flow.regs.mirror_map(state, &saturated);
    if (count == traj.z_path.cols()) {
      traj.z_path.conservativeResize(Eigen::NoChange, 2 * count + 1);
      traj.x_path.conservativeResize(Eigen::NoChange, 2 * count + 1);
    }
    traj.z_path.col(count) = state;
    traj.x_path.col(count) = x;
    traj.times.push_back(t);
    traj.saturated.push_back(saturated);
    traj.residuals.push_back(flow.game.contains(x) ? nash_residual(flow.game, x)
                                                   : kNaN);
    if (options.lyapunov_reference && flow.dynamics != Dynamics::psgd)
      traj.lyapunov.push_back(
          lyapunov_value(flow.regs, state, *options.lyapunov_reference));
    ++count;
  }

  Trajectory finish() && {
    traj.z_path.conservativeResize(Eigen::NoChange, count);
    traj.x_path.conservativeResize(Eigen::NoChange, count);
    return std::move(traj);
  }
};

}  // namespace

std::string to_string(Dynamics d) {
  switch (d) {
    case Dynamics::dmd: return "dmd";
    case Dynamics::md: return "md";
    case Dynamics::psgd: return "psgd";
  }
  return "unknown";
}

Dynamics parse_dynamics(std::string_view name) {
  if (name == "dmd") return Dynamics::dmd;
  if (name == "md") return Dynamics::md;
  if (name == "psgd") return Dynamics::psgd;
  throw ConfigError("unknown continuous dynamics '" + std::string(name) + "'");
}

Vector dmd_vector_field(const GameSpec& game, const RegularizerProfile& regs,
                        double gamma, const Vector& z) {
  require_finite_state(z);
  const Vector x = regs.mirror_map(z);
  return gamma * (checked_pseudo_gradient(game, x) - z);
}

Vector md_vector_field(const GameSpec& game, const RegularizerProfile& regs,
                       double gamma, const Vector& z) {
  require_finite_state(z);
  return gamma * checked_pseudo_gradient(game, regs.mirror_map(z));
}

Vector psgd_vector_field(const GameSpec& game, double gamma, const Vector& x) {
  if (x.size() != game.dim())
    throw DimensionError("psgd_vector_field: dimension mismatch");
  return gamma * checked_pseudo_gradient(game, x);
}

Trajectory integrate(const FlowSpec& flow, const IntegrateOptions& options) {
  const double T = options.horizon;
  const double dt = options.dt;
  if (!(T > 0.0) || !(dt > 0.0) || dt > T)
    throw ConfigError("integrate: need 0 < dt <= horizon");
  if (!(flow.gamma > 0.0))
    throw ConfigError("integrate: gamma must be positive");
  if (!(flow.gamma * dt < 1.0))
    throw ConfigError("integrate: gamma * dt must be < 1");
  if (options.record_every < 1)
    throw ConfigError("integrate: record_every must be >= 1");
  if (flow.initial.size() != flow.game.dim())
    throw DimensionError("integrate: initial state has wrong size");
  if (flow.dynamics != Dynamics::psgd) {
    if (flow.regs.dim() != flow.game.dim())
      throw DimensionError("integrate: regularizers do not match the game");
  } else if (!flow.game.contains(flow.initial)) {
    throw DomainError("integrate: psgd initial point lies outside Omega");
  }
  if (options.lyapunov_reference &&
      options.lyapunov_reference->size() != flow.game.dim())
    throw DimensionError("integrate: Lyapunov reference has wrong size");

  auto field = [&](const Vector& s) -> Vector {
    switch (flow.dynamics) {
      case Dynamics::dmd: return dmd_vector_field(flow.game, flow.regs, flow.gamma, s);
      case Dynamics::md: return md_vector_field(flow.game, flow.regs, flow.gamma, s);
      case Dynamics::psgd: return psgd_vector_field(flow.game, flow.gamma, s);
    }
    throw Error("integrate: unhandled dynamics");
  };

  const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
  Recorder rec(flow, options, steps / options.record_every + 2);
  Vector state = flow.initial;
  rec.record(0.0, state);

  for (long k = 1; k <= steps; ++k) {
    const double t0 = static_cast<double>(k - 1) * dt;
    const double h = k == steps ? T - t0 : dt;
    Vector next;
    try {
      const Vector k1 = field(state);
      const Vector k2 = field(state + 0.5 * h * k1);
      const Vector k3 = field(state + 0.5 * h * k2);
      const Vector k4 = field(state + h * k3);
      next = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const NonFiniteFieldError&) {
      next = Vector::Constant(state.size(), kNaN);
    } catch (const DomainError&) {
      next = Vector::Constant(state.size(), kNaN);
    }
    if (flow.dynamics == Dynamics::psgd && next.allFinite())
      next = flow.game.project(next);
    const double t = k == steps ? T : static_cast<double>(k) * dt;
    if (!next.allFinite()) {
      rec.traj.diverged = true;
      rec.traj.divergence_time = t;
      break;
    }
    state = std::move(next);
    if (k % options.record_every == 0 || k == steps) rec.record(t, state);
  }
  return std::move(rec).finish();
}

}  // namespace dmd
