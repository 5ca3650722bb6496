#include "dmd/discrete.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dmd {

namespace {

class RunRecorder {
 public:
  RunRecorder(const GameSpec& game, const DiscreteOptions& options)
      : game_(game), options_(options) {
    if (options.max_iter < 0) throw ConfigError("max_iter must be >= 0");
    if (options.record_every < 1)
      throw ConfigError("record_every must be >= 1");
    const Index capacity = options.max_iter / options.record_every + 2;
    run_.iterates.resize(game.dim(), capacity);
  }

  void observe(long k, const Vector& x) {
    if (options_.monitor && !run_.hit_iteration &&
        distance_to_equilibrium_set(x, *options_.monitor) <= options_.hit_radius)
      run_.hit_iteration = k;
    if (k % options_.record_every == 0 || k == options_.max_iter) record(k, x);
  }

  void diverge(long k) {
    run_.diverged = true;
    run_.iteration_count = k;
  }

  DiscreteRun finish(std::string schedule, long count) && {
    run_.schedule = std::move(schedule);
    if (!run_.diverged) run_.iteration_count = count;
    run_.iterates.conservativeResize(Eigen::NoChange, count_);
    return std::move(run_);
  }

 private:
  void record(long k, const Vector& x) {
    if (count_ > 0 && run_.iterations.back() == k) return;
    run_.iterates.col(count_++) = x;
    run_.iterations.push_back(k);
    run_.residuals.push_back(nash_residual(game_, x));
  }

  const GameSpec& game_;
  const DiscreteOptions& options_;
  DiscreteRun run_;
  Index count_ = 0;
};

}  // namespace

DiscreteRun run_discrete_pdmd(const GameSpec& game, const Vector& z0,
                              const PdmdSchedule& schedule,
                              const DiscreteOptions& options) {
  if (!(schedule.step > 0.0 && schedule.step < 1.0))
    throw ConfigError("discrete PDMD step must lie in (0, 1)");
  if (!(schedule.epsilon > 0.0))
    throw ConfigError("discrete PDMD epsilon must be positive");
  if (z0.size() != game.dim())
    throw DimensionError("discrete PDMD: z0 has wrong size");

  const double t = schedule.step;
  const double eps = schedule.epsilon;
  RunRecorder rec(game, options);
  Vector z = z0;
  Vector x = game.project(z / eps);
  rec.observe(0, x);
  long k = 0;
  while (k < options.max_iter) {
    z += t * (game.pseudo_gradient(x) - z);
    ++k;
    if (!z.allFinite()) {
      rec.diverge(k);
      break;
    }
    x = game.project(z / eps);
    rec.observe(k, x);
  }
  std::ostringstream desc;
  desc << "t_k = " << t << ", eps = " << eps;
  return std::move(rec).finish(desc.str(), k);
}

DiscreteRun run_itr(const GameSpec& game, const Vector& x0,
                    const ItrSchedule& schedule,
                    const DiscreteOptions& options) {
  const double pt = schedule.step_exponent;
  const double pe = schedule.regularization_exponent;
  if (!(pt > 0.0 && pt < 1.0 && pe > 0.0 && pe < 1.0))
    throw ConfigError("ITR exponents must lie in (0, 1)");
  if (x0.size() != game.dim())
    throw DimensionError("ITR: x0 has wrong size");
  if (!game.contains(x0)) throw DomainError("ITR: x0 lies outside Omega");

  RunRecorder rec(game, options);
  Vector x = x0;
  rec.observe(0, x);
  long k = 0;
  while (k < options.max_iter) {
    ++k;
    const double kk = static_cast<double>(k);
    const double t = std::pow(kk, -pt);
    const double eps = std::pow(kk, -pe);
    Vector next = game.project(x + t * (game.pseudo_gradient(x) - eps * x));
    if (!next.allFinite()) {
      rec.diverge(k);
      break;
    }
    x = std::move(next);
    rec.observe(k, x);
  }
  std::ostringstream desc;
  desc << "t_k = k^-" << pt << ", eps_k = k^-" << pe;
  return std::move(rec).finish(desc.str(), k);
}

}  // namespace dmd
