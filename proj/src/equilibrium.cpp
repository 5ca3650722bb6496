#include "dmd/equilibrium.hpp"

#include <cmath>
#include <limits>

namespace dmd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_conformity(const GameSpec& game, const RegularizerProfile& regs) {
  if (regs.players() != game.players())
    throw DimensionError("regularizer profile and game have different player "
                         "counts");
  for (Index p = 0; p < game.players(); ++p) {
    if (regs[p].dim() != game.sets()[p].dim())
      throw DimensionError("regularizer dimension differs from player " +
                           std::to_string(p) + "'s action dimension");
  }
}

bool all_euclidean(const RegularizerProfile& regs) {
  for (const auto& r : regs.regularizers())
    if (r.kind() != RegularizerKind::euclidean) return false;
  return true;
}

Vector epsilon_diagonal(const RegularizerProfile& regs) {
  Vector d(regs.dim());
  for (Index p = 0; p < regs.players(); ++p)
    d.segment(regs.offset(p), regs[p].dim()).setConstant(regs[p].epsilon());
  return d;
}

std::optional<PerturbedEquilibrium> try_linear_solve(
    const GameSpec& game, const RegularizerProfile& regs, double tolerance) {
  const auto* affine = game.affine_form();
  if (affine == nullptr || !all_euclidean(regs)) return std::nullopt;
  const Matrix system = affine->R - Matrix(epsilon_diagonal(regs).asDiagonal());
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) return std::nullopt;
  Vector x = lu.solve(-affine->b);
  if (!x.allFinite() || !regs.contains(x, 0.0)) return std::nullopt;
  const double r = perturbed_residual(game, regs, x);
  if (!(r <= tolerance)) return std::nullopt;
  return PerturbedEquilibrium{x, game.pseudo_gradient(x), r, 1, "linear_solve"};
}

Vector dual_defect(const GameSpec& game, const RegularizerProfile& regs,
                   const Vector& z) {
  return z - game.pseudo_gradient(regs.mirror_map(z));
}

std::optional<PerturbedEquilibrium> try_newton(const GameSpec& game,
                                               const RegularizerProfile& regs,
                                               const Vector& start,
                                               const PerturbedEquilibriumOptions& opt) {
  const Index n = regs.dim();
  Vector z = start;
  Vector f = dual_defect(game, regs, z);
  if (!f.allFinite()) return std::nullopt;
  for (int it = 1; it <= opt.newton_iterations; ++it) {
    const double fnorm = f.norm();
    const Vector x = regs.mirror_map(z);
    if (fnorm <= 1e-13 * (1.0 + z.norm())) {
      const double r = perturbed_residual(game, regs, x);
      if (r <= opt.tolerance)
        return PerturbedEquilibrium{x, game.pseudo_gradient(x), r, it, "newton"};
    }
    // Central-difference Jacobian of z - U(C(z)).
    Matrix J(n, n);
    for (Index j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(z(j)));
      Vector zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      J.col(j) = (dual_defect(game, regs, zp) - dual_defect(game, regs, zm)) /
                 (2.0 * h);
    }
    if (!J.allFinite()) return std::nullopt;
    const Vector step = J.fullPivLu().solve(-f);
    if (!step.allFinite()) return std::nullopt;

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      const Vector trial = z + t * step;
      const Vector ft = dual_defect(game, regs, trial);
      if (ft.allFinite() && ft.norm() < (1.0 - 1e-4 * t) * fnorm) {
        z = trial;
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Stalled at round-off level; accept if the primal residual is fine.
      const double r = perturbed_residual(game, regs, x);
      if (r <= opt.tolerance)
        return PerturbedEquilibrium{x, game.pseudo_gradient(x), r, it, "newton"};
      return std::nullopt;
    }
  }
  const Vector x = regs.mirror_map(z);
  const double r = perturbed_residual(game, regs, x);
  if (r <= opt.tolerance)
    return PerturbedEquilibrium{x, game.pseudo_gradient(x), r,
                                opt.newton_iterations, "newton"};
  return std::nullopt;
}

PerturbedEquilibrium fixed_point(const GameSpec& game,
                                 const RegularizerProfile& regs,
                                 const Vector& start,
                                 const PerturbedEquilibriumOptions& opt) {
  const double a = opt.damping;
  Vector x = regs.mirror_map(start);
  double r = kInf;
  for (long k = 1; k <= opt.fixed_point_iterations; ++k) {
    const Vector target = regs.mirror_map(game.pseudo_gradient(x));
    x = (1.0 - a) * x + a * target;
    if (!x.allFinite()) break;
    if (k % 100 == 0 || k == opt.fixed_point_iterations) {
      r = perturbed_residual(game, regs, x);
      if (r <= opt.tolerance)
        return PerturbedEquilibrium{x, game.pseudo_gradient(x), r,
                                    static_cast<int>(k), "fixed_point"};
    }
  }
  throw NonConvergenceError(
      "perturbed_equilibrium: no solver reached the residual target", x, r);
}

}  // namespace

double perturbed_residual(const GameSpec& game, const RegularizerProfile& regs,
                          const Vector& x) {
  check_conformity(game, regs);
  if (!regs.gradient_defined_at(x)) return kInf;
  const Vector g = game.pseudo_gradient(x) - regs.gradient(x);
  if (!g.allFinite()) return kInf;
  return (x - regs.project(x + g)).norm();
}

PerturbedEquilibrium perturbed_equilibrium(
    const GameSpec& game, const RegularizerProfile& regs,
    const PerturbedEquilibriumOptions& options) {
  check_conformity(game, regs);
  if (auto linear = try_linear_solve(game, regs, options.tolerance))
    return *linear;
  const Vector start = options.start.value_or(Vector::Zero(regs.dim()));
  if (start.size() != regs.dim())
    throw DimensionError("perturbed_equilibrium: start has wrong size");
  if (auto newton = try_newton(game, regs, start, options)) return *newton;
  return fixed_point(game, regs, start, options);
}

PerturbedEquilibrium perturbed_equilibrium(
    const GameSpec& game, const RegularizerProfile& regs, double epsilon,
    const PerturbedEquilibriumOptions& options) {
  return perturbed_equilibrium(game, regs.with_epsilon(epsilon), options);
}

}  // namespace dmd
