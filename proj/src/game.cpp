#include "dmd/game.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

namespace dmd {

GameSpec::GameSpec(std::vector<ActionSet> sets, Oracle pseudo_gradient)
    : sets_(std::move(sets)), oracle_(std::move(pseudo_gradient)) {
  if (sets_.empty()) throw ConfigError("a game needs at least one player");
  if (!oracle_) throw ConfigError("a game needs a pseudo-gradient oracle");
  offsets_.reserve(sets_.size());
  for (const auto& s : sets_) {
    offsets_.push_back(dim_);
    dim_ += s.dim();
  }
}

GameSpec GameSpec::affine(Matrix R, Vector b, std::vector<ActionSet> sets) {
  Index n = 0;
  for (const auto& s : sets) n += s.dim();
  if (R.rows() != R.cols())
    throw DimensionError("quadratic game: R must be square");
  if (R.rows() != n || b.size() != n)
    throw DimensionError("quadratic game: R and b must conform to the "
                         "per-player dimensions (n = " + std::to_string(n) + ")");
  auto form = std::make_shared<const Affine>(Affine{std::move(R), std::move(b)});
  GameSpec game(std::move(sets),
                [form](const Vector& x) -> Vector { return form->R * x + form->b; });
  game.affine_ = std::move(form);
  return game;
}

std::vector<Index> GameSpec::dims() const {
  std::vector<Index> out;
  out.reserve(sets_.size());
  for (const auto& s : sets_) out.push_back(s.dim());
  return out;
}

GameSpec GameSpec::with_sets(std::vector<ActionSet> sets) const {
  if (sets.size() != sets_.size())
    throw DimensionError("with_sets: player count changed");
  for (std::size_t p = 0; p < sets.size(); ++p) {
    if (sets[p].dim() != sets_[p].dim())
      throw DimensionError("with_sets: player dimension changed");
  }
  GameSpec copy = *this;
  copy.sets_ = std::move(sets);
  return copy;
}

Vector GameSpec::pseudo_gradient(const Vector& x) const {
  if (x.size() != dim_)
    throw DimensionError("pseudo_gradient: expected a vector of size " +
                         std::to_string(dim_) + ", got " +
                         std::to_string(x.size()));
  Vector u = oracle_(x);
  if (u.size() != dim_)
    throw DimensionError("pseudo_gradient: oracle returned " +
                         std::to_string(u.size()) + " entries, expected " +
                         std::to_string(dim_));
  return u;
}

Vector GameSpec::project(const Vector& x) const {
  if (x.size() != dim_) throw DimensionError("project: dimension mismatch");
  Vector out(dim_);
  for (std::size_t p = 0; p < sets_.size(); ++p) {
    const Index n = sets_[p].dim();
    out.segment(offsets_[p], n) = sets_[p].project(x.segment(offsets_[p], n));
  }
  return out;
}

bool GameSpec::contains(const Vector& x, double tol) const {
  if (x.size() != dim_) return false;
  for (std::size_t p = 0; p < sets_.size(); ++p) {
    if (!sets_[p].contains(x.segment(offsets_[p], sets_[p].dim()), tol))
      return false;
  }
  return true;
}

GameSpec QuadraticGame::spec() const { return GameSpec::affine(R, b, sets); }

Vector pseudo_gradient(const GameSpec& game, const Vector& x) {
  return game.pseudo_gradient(x);
}

std::string to_string(MonotonicityClass c) {
  switch (c) {
    case MonotonicityClass::strongly_monotone: return "strongly_monotone";
    case MonotonicityClass::strictly_monotone: return "strictly_monotone";
    case MonotonicityClass::monotone: return "monotone";
    case MonotonicityClass::hypo_monotone: return "hypo_monotone";
    case MonotonicityClass::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

MonotonicityReport classify_monotonicity(const GameSpec::Affine& affine) {
  const Matrix& R = affine.R;
  if (R.rows() != R.cols())
    throw DimensionError("classify_monotonicity: R must be square");
  const Matrix sym = R + R.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error("classify_monotonicity: eigenvalue solver failed");
  const double lambda_max = solver.eigenvalues().maxCoeff();
  const double tol = 1e-9 * std::max(1.0, sym.cwiseAbs().maxCoeff());

  MonotonicityReport report;
  report.max_eigenvalue = lambda_max;
  if (lambda_max < -tol) {
    report.cls = MonotonicityClass::strongly_monotone;
    report.modulus = -0.5 * lambda_max;
  } else if (lambda_max <= tol) {
    report.cls = MonotonicityClass::monotone;
    report.modulus = 0.0;
  } else {
    report.cls = MonotonicityClass::hypo_monotone;
    report.modulus = 0.5 * lambda_max;
  }
  return report;
}

MonotonicityReport classify_monotonicity(const QuadraticGame& game) {
  Index n = 0;
  for (const auto& s : game.sets) n += s.dim();
  if (game.R.rows() != n || game.R.cols() != n || game.b.size() != n)
    throw DimensionError("classify_monotonicity: R does not conform to the "
                         "player dimensions");
  return classify_monotonicity(GameSpec::Affine{game.R, game.b});
}

MonotonicityReport classify_monotonicity_sampled(const GameSpec& game,
                                                 std::uint64_t seed,
                                                 int samples) {
  if (samples < 1) throw ConfigError("sampled classification needs samples");
  std::mt19937_64 rng(seed);
  std::vector<ActionSet> sets;
  for (const auto& s : game.sets()) sets.push_back(truncate(s));

  auto draw = [&]() {
    Vector x(game.dim());
    for (std::size_t p = 0; p < sets.size(); ++p)
      x.segment(game.offset(static_cast<Index>(p)), sets[p].dim()) =
          sets[p].sample(rng);
    return x;
  };

  // ratio = (U(x) - U(x'))'(x - x') / |x - x'|^2; monotone iff ratio <= 0.
  double worst_ratio = -std::numeric_limits<double>::infinity();
  bool all_strict = true;
  MonotonicityReport report;
  for (int k = 0; k < samples; ++k) {
    const Vector x = draw();
    const Vector y = draw();
    const Vector d = x - y;
    const double dd = d.squaredNorm();
    if (dd == 0.0) continue;
    const double inner = (game.pseudo_gradient(x) - game.pseudo_gradient(y)).dot(d);
    if (inner >= 0.0) all_strict = false;
    const double ratio = inner / dd;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      report.violation = std::make_pair(x, y);
    }
  }
  report.max_eigenvalue = 2.0 * worst_ratio;
  constexpr double tol = 1e-9;
  if (worst_ratio < -tol) {
    report.cls = MonotonicityClass::strongly_monotone;
    report.modulus = -worst_ratio;
  } else if (worst_ratio <= tol) {
    report.cls = all_strict ? MonotonicityClass::strictly_monotone
                            : MonotonicityClass::monotone;
  } else {
    report.cls = MonotonicityClass::hypo_monotone;
    report.modulus = worst_ratio;
  }
  return report;
}

double nash_residual(const GameSpec& game, const Vector& x) {
  if (x.size() != game.dim())
    throw DimensionError("nash_residual: dimension mismatch");
  if (!game.contains(x))
    throw DomainError("nash_residual: point lies outside the action sets");
  return (x - game.project(x + game.pseudo_gradient(x))).norm();
}

double distance_to_equilibrium_set(const Vector& x, const EquilibriumSet& set) {
  if (const auto* p = std::get_if<EquilibriumPoint>(&set)) {
    if (p->x.size() != x.size())
      throw DimensionError("distance_to_equilibrium_set: point size mismatch");
    return (x - p->x).norm();
  }
  const auto& h = std::get<EquilibriumHyperplane>(set);
  if (h.normal.size() != x.size())
    throw DimensionError("distance_to_equilibrium_set: normal size mismatch");
  const double norm = h.normal.norm();
  if (!(norm > 0.0) || !std::isfinite(h.offset))
    throw ConfigError("distance_to_equilibrium_set: malformed hyperplane");
  return std::abs(h.normal.dot(x) - h.offset) / norm;
}

}  // namespace dmd
