// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include "dmd/analysis.hpp"
#include "dmd/discrete.hpp"
#include "dmd/equilibrium.hpp"
#include "dmd/experiment.hpp"
#include "dmd/flows.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace dmd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

template <class Body>
void criterion(int id, double budget_seconds, Body body) {
  Outcome o;
  const auto start = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (budget_seconds > 0) o.require(secs <= budget_seconds, "runtime budget");
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s (%.2f s)%s\n", id, o.pass ? "PASS" : "FAIL", secs,
              o.detail.str().c_str());
  std::fflush(stdout);
}

std::string fmt(const Vector& v) {
  std::ostringstream s;
  s << "(";
  for (Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v(i);
  s << ")";
  return s.str();
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Independent 2x2 solve of (R - eps I) x = -b by Cramer's rule.
Vector cramer_rest_point(double r11, double r12, double r21, double r22, double b1,
                         double b2, double eps) {
  const double a11 = r11 - eps, a22 = r22 - eps;
  const double det = a11 * a22 - r12 * r21;
  return vec2((-b1 * a22 + b2 * r12) / det, (-b2 * a11 + b1 * r21) / det);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dmd_acceptance" / name;
  fs::remove_all(dir);
  return dir;
}

std::vector<Trajectory> dmd_trajectories;

}  // namespace

int main() {
  std::printf("acceptance: 8 criteria\n");

  criterion(1, 10.0, [](Outcome& o) {
    ExperimentConfig c = preset("quadratic-monotone");
    c.epsilon = 0.5;
    c.gamma = 1.0;
    c.horizon = 50.0;
    c.dt = 1e-3;
    c.record_every = 100;
    c.runs = {RunConfig{"euclidean", RunKind::dmd, RegularizerKind::euclidean, {},
                        Vector::Zero(2), {}, {}}};
    c.out = scratch("c1");
    const auto result = run_experiment(c);
    const auto& run = result.runs.at(0);
    const Vector oracle = cramer_rest_point(-10, 10, 10, -10, 500, -500, 0.5);
    const Vector x = run.trajectory->final_x();
    const double d_oracle = (x - oracle).norm();
    const double d_line = std::abs(x(0) - x(1) - 50.0) / std::sqrt(2.0);
    o.detail << " verdict=" << to_string(run.verdict.status) << " x=" << fmt(x)
             << " oracle=" << fmt(oracle) << " |x-oracle|=" << d_oracle
             << " dist(NE line)=" << d_line;
    o.require(run.verdict.status == ConvergenceStatus::converged, "verdict converged");
    o.require(d_oracle <= 5e-2, "within 5e-2 of oracle");
    o.require(d_line <= 1.0, "within 1.0 of NE line");
    dmd_trajectories.push_back(*run.trajectory);
  });

  criterion(2, 30.0, [](Outcome& o) {
    ExperimentConfig c = preset("quadratic-hypo");
    c.epsilon = 5.1;
    c.out = scratch("c2");
    const auto result = run_experiment(c);
    const Vector oracle = cramer_rest_point(-10, 15, 15, -10, 500, -500, 5.1);
    for (const auto& run : result.runs) {
      const std::string kind = to_string(*run.regularizer);
      o.detail << " | " << kind << ": verdict=" << to_string(run.verdict.status)
               << " limit=" << fmt(run.verdict.limit_estimate)
               << " at_rest_point_near_x*=" << (run.converged_to_rest_point ? "yes" : "no");
      if (*run.regularizer == RegularizerKind::euclidean) {
        const double d = (run.trajectory->final_x() - oracle).norm();
        o.detail << " |x-oracle|=" << d;
        o.require(run.verdict.status == ConvergenceStatus::converged,
                  "euclidean converged");
        o.require(d <= 0.5, "euclidean within 0.5 of oracle");
      } else {
        o.require(run.verdict.status != ConvergenceStatus::converged,
                  kind + " verdict non-converged");
      }
    }
  });

  criterion(3, 30.0, [](Outcome& o) {
    ExperimentConfig c = preset("mean-learning");
    c.out = scratch("c3");
    const auto result = run_experiment(c);
    for (const auto& run : result.runs) {
      const std::string name = run.label;
      const double d = (run.trajectory->final_x() - vec2(50, 0)).norm();
      o.detail << " | " << name << ": " << to_string(run.verdict.status);
      if (run.kind == RunKind::dmd) {
        o.detail << " dist=" << d;
        o.require(run.verdict.status == ConvergenceStatus::converged, name + " converged");
        o.require(d <= 1.0, name + " within 1.0 of (50,0)");
        dmd_trajectories.push_back(*run.trajectory);
      } else {
        o.detail << " radius=" << run.verdict.window_radius;
        o.require(run.verdict.status == ConvergenceStatus::cycling, name + " cycling");
        o.require(run.verdict.window_radius > 1.0, name + " window radius > 1");
        o.require(run.verdict.tail_sup_norm < 1e6, name + " bounded");
      }
    }
  });

  criterion(4, 0.0, [](Outcome& o) {
    o.require(dmd_trajectories.size() == 5, "five DMD trajectories from criteria 1 and 3");
    double worst = -INFINITY;
    for (const auto& t : dmd_trajectories) {
      const auto audit = audit_lyapunov_decay(t);
      worst = std::max(worst, audit.max_increase / (1.0 + audit.max_value));
      o.require(audit.monotone_up_to_slack, "Lyapunov non-increasing");
    }
    o.detail << " trajectories=" << dmd_trajectories.size()
             << " worst relative increase=" << worst;
  });

  criterion(5, 5.0, [](Outcome& o) {
    int checked = 0;
    for (auto kind : {RegularizerKind::euclidean, RegularizerKind::simplex_entropy,
                      RegularizerKind::boltzmann_shannon, RegularizerKind::fermi_dirac,
                      RegularizerKind::hellinger}) {
      for (double eps : {0.1, 0.5, 1.0}) {
        const auto r = verify_mirror_map_properties(default_regularizer(kind, eps), 1000, 2024);
        const std::string tag = to_string(kind) + "@" + std::to_string(eps);
        if (r.lipschitz_ratio) {
          o.require(r.lipschitz_ok, tag + " Lipschitz");
          o.require(r.cocoercivity_ok, tag + " cocoercivity");
        } else {
          o.require(r.strict_monotone_ok, tag + " strict monotonicity");
        }
        o.require(r.left_inverse_ok, tag + " left inverse");
        o.require(r.conjugate_gradient_ok, tag + " conjugate gradient");
        ++checked;
      }
    }
    o.detail << " kind/eps combinations=" << checked << " samples=1000";
  });

  criterion(6, 60.0, [](Outcome& o) {
    ExperimentConfig c = preset("pdmd-vs-itr");
    c.out = scratch("c6");
    const auto result = run_experiment(c);
    const RunResult* pdmd = nullptr;
    const RunResult* itr = nullptr;
    for (const auto& run : result.runs) {
      if (run.kind == RunKind::discrete_pdmd) pdmd = &run;
      if (run.kind == RunKind::itr) itr = &run;
    }
    o.require(pdmd && itr, "both schemes present");
    if (!pdmd || !itr) return;
    const EquilibriumSet line = EquilibriumHyperplane{vec2(1, -1), 50.0};
    const double dp = distance_to_equilibrium_set(pdmd->discrete->final_x(), line);
    const double di = distance_to_equilibrium_set(itr->discrete->final_x(), line);
    o.detail << " pdmd final dist=" << dp << " itr final dist=" << di;
    o.require(dp <= 1.0 && di <= 1.0, "both within 1.0 of NE line");
    o.require(pdmd->discrete->hit_iteration.has_value(), "pdmd reaches distance 1.0");
    o.require(itr->discrete->hit_iteration.has_value(), "itr reaches distance 1.0");
    if (pdmd->discrete->hit_iteration && itr->discrete->hit_iteration) {
      o.detail << " hit pdmd=" << *pdmd->discrete->hit_iteration
               << " hit itr=" << *itr->discrete->hit_iteration;
      o.require(*pdmd->discrete->hit_iteration < *itr->discrete->hit_iteration,
                "pdmd strictly faster");
    }
  });

  criterion(7, 0.0, [](Outcome& o) {
    const Vector b = vec2(1.0, -2.0);
    const GameSpec g = GameSpec::affine(-Matrix::Identity(2, 2), b,
                                        {ActionSet::box(2, -100, 100)});
    double previous = INFINITY;
    for (double eps : {1.0, 0.1, 0.01}) {
      const RegularizerProfile regs({Regularizer::euclidean(ActionSet::box(2, -100, 100), eps)});
      const double d = (perturbed_equilibrium(g, regs).x - b).norm();
      const double closed = eps * b.norm() / (1.0 + eps);
      o.detail << " eps=" << eps << ": " << d << " (closed form " << closed << ")";
      o.require(d < previous, "strictly decreasing");
      o.require(std::abs(d - closed) <= 1e-9, "matches closed form");
      previous = d;
    }
  });

  criterion(8, 0.0, [](Outcome& o) {
    // Same game, regularizer and start as criterion 1 over the unit horizon.
    const GameSpec g = GameSpec::affine(
        (Matrix(2, 2) << -10, 10, 10, -10).finished(), vec2(500, -500),
        {ActionSet::box(1, -100, 100), ActionSet::box(1, -100, 100)});
    const double eps = 0.5;
    const RegularizerProfile regs({Regularizer::euclidean(ActionSet::box(1, -100, 100), eps),
                                   Regularizer::euclidean(ActionSet::box(1, -100, 100), eps)});
    IntegrateOptions ref_opts;
    ref_opts.horizon = 1.0;
    ref_opts.dt = 1e-5;
    ref_opts.record_every = 100;  // one sample per 1e-3
    const Trajectory ref =
        integrate(FlowSpec{Dynamics::dmd, 1.0, g, regs, Vector::Zero(2)}, ref_opts);

    auto deviation = [&](double step) {
      DiscreteOptions opts;
      opts.max_iter = std::lround(1.0 / step);
      opts.record_every = 1;
      const auto run = run_discrete_pdmd(g, Vector::Zero(2), {step, eps}, opts);
      const long stride = std::lround(step / 1e-3);
      double worst = 0.0;
      for (Index k = 0; k < run.samples(); ++k) {
        const Index col = run.iterations[k] * stride;
        worst = std::max(worst, (run.iterates.col(k) - ref.x_path.col(col)).norm());
      }
      return worst;
    };
    const double coarse = deviation(1e-2);
    const double fine = deviation(1e-3);
    const double ratio = coarse / fine;
    o.detail << " max dev(1e-2)=" << coarse << " max dev(1e-3)=" << fine
             << " ratio=" << ratio;
    o.require(ratio >= 8.0 && ratio <= 12.0, "ratio in [8, 12]");
  });

  std::printf("acceptance: %d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
