#include "dmd/action_set.hpp"

#include "dmd/numerics.hpp"

#include <cmath>

namespace dmd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive_dim(Index dim) {
  if (dim < 1) throw ConfigError("action set dimension must be >= 1");
}

Vector uniform_box(std::mt19937_64& rng, const Vector& lower,
                   const Vector& upper) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector x(lower.size());
  for (Index i = 0; i < x.size(); ++i)
    x(i) = lower(i) + (upper(i) - lower(i)) * unit(rng);
  return x;
}

}  // namespace

ActionSet ActionSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size())
    throw DimensionError("box bounds have different sizes");
  require_positive_dim(lower.size());
  for (Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) < upper(i)))
      throw ConfigError("box requires lower[i] < upper[i] for all i");
  }
  return ActionSet(Box{std::move(lower), std::move(upper)});
}

ActionSet ActionSet::box(Index dim, double lower, double upper) {
  require_positive_dim(dim);
  return box(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

ActionSet ActionSet::simplex(Index dim) {
  require_positive_dim(dim);
  return ActionSet(Simplex{dim});
}

ActionSet ActionSet::shifted_orthant(double shift, Index dim) {
  require_positive_dim(dim);
  if (!(shift >= 0.0) || !std::isfinite(shift))
    throw ConfigError("orthant shift must be finite and >= 0");
  return ActionSet(ShiftedOrthant{shift, dim});
}

ActionSet ActionSet::ball(Vector center, double radius) {
  require_positive_dim(center.size());
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ConfigError("ball radius must be finite and > 0");
  return ActionSet(Ball{std::move(center), radius});
}

ActionSet ActionSet::ball(Index dim, double radius) {
  require_positive_dim(dim);
  return ball(Vector::Zero(dim), radius);
}

ActionSet ActionSet::whole_space(Index dim) {
  require_positive_dim(dim);
  return ActionSet(WholeSpace{dim});
}

Index ActionSet::dim() const {
  return std::visit(overloaded{
                        [](const Box& b) { return b.lower.size(); },
                        [](const Simplex& s) { return s.dim; },
                        [](const ShiftedOrthant& o) { return o.dim; },
                        [](const Ball& b) { return b.center.size(); },
                        [](const WholeSpace& w) { return w.dim; },
                    },
                    descriptor_);
}

std::string ActionSet::name() const {
  return std::visit(overloaded{
                        [](const Box&) { return "box"; },
                        [](const Simplex&) { return "simplex"; },
                        [](const ShiftedOrthant&) { return "shifted_orthant"; },
                        [](const Ball&) { return "ball"; },
                        [](const WholeSpace&) { return "whole_space"; },
                    },
                    descriptor_);
}

bool ActionSet::bounded() const {
  return !is<ShiftedOrthant>() && !is<WholeSpace>();
}

bool ActionSet::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  if (!x.allFinite()) return false;
  return std::visit(
      overloaded{
          [&](const Box& b) {
            return (x - b.lower).minCoeff() >= -tol &&
                   (b.upper - x).minCoeff() >= -tol;
          },
          [&](const Simplex&) {
            return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
          },
          [&](const ShiftedOrthant& o) { return x.minCoeff() >= -o.shift - tol; },
          [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
          [&](const WholeSpace&) { return true; },
      },
      descriptor_);
}

Vector ActionSet::project(const Vector& x) const {
  if (x.size() != dim())
    throw DimensionError("projection: point dimension does not match set");
  return std::visit(
      overloaded{
          [&](const Box& b) -> Vector {
            return numerics::project_box(x, b.lower, b.upper);
          },
          [&](const Simplex&) -> Vector { return numerics::project_simplex(x); },
          [&](const ShiftedOrthant& o) -> Vector {
            return x.cwiseMax(-o.shift);
          },
          [&](const Ball& b) -> Vector {
            return numerics::project_ball(x, b.center, b.radius);
          },
          [&](const WholeSpace&) -> Vector { return x; },
      },
      descriptor_);
}

Vector ActionSet::interior_point() const {
  return std::visit(
      overloaded{
          [](const Box& b) -> Vector { return 0.5 * (b.lower + b.upper); },
          [](const Simplex& s) -> Vector {
            return Vector::Constant(s.dim, 1.0 / static_cast<double>(s.dim));
          },
          [](const ShiftedOrthant& o) -> Vector {
            return Vector::Constant(o.dim, 1.0 - o.shift);
          },
          [](const Ball& b) -> Vector { return b.center; },
          [](const WholeSpace& w) -> Vector { return Vector::Zero(w.dim); },
      },
      descriptor_);
}

Vector ActionSet::sample(std::mt19937_64& rng) const {
  return std::visit(
      overloaded{
          [&](const Box& b) -> Vector {
            return uniform_box(rng, b.lower, b.upper);
          },
          [&](const Simplex& s) -> Vector {
            // Dirichlet(1, ..., 1) via normalized exponentials.
            std::exponential_distribution<double> exponential(1.0);
            Vector x(s.dim);
            for (Index i = 0; i < s.dim; ++i) x(i) = exponential(rng);
            return x / x.sum();
          },
          [&](const ShiftedOrthant& o) -> Vector {
            return uniform_box(rng, Vector::Constant(o.dim, -o.shift),
                               Vector::Constant(o.dim, kTruncationRadius));
          },
          [&](const Ball& b) -> Vector {
            std::normal_distribution<double> normal(0.0, 1.0);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const Index n = b.center.size();
            Vector direction(n);
            for (Index i = 0; i < n; ++i) direction(i) = normal(rng);
            const double norm = direction.norm();
            if (norm == 0.0) return b.center;
            const double r =
                b.radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
            return b.center + direction * (r / norm);
          },
          [&](const WholeSpace& w) -> Vector {
            return uniform_box(rng, Vector::Constant(w.dim, -kTruncationRadius),
                               Vector::Constant(w.dim, kTruncationRadius));
          },
      },
      descriptor_);
}

Vector ActionSet::sample_interior(std::mt19937_64& rng, double margin) const {
  const Vector anchor = interior_point();
  const Vector x = sample(rng);
  if (is<ShiftedOrthant>()) {
    // The anchor is not a center here; shift away from the boundary instead.
    const double shift = as<ShiftedOrthant>().shift;
    return (x.array() + shift).cwiseMax(margin * kTruncationRadius).matrix() -
           Vector::Constant(x.size(), shift);
  }
  return anchor + (1.0 - margin) * (x - anchor);
}

ActionSet truncate(const ActionSet& set, double radius) {
  if (set.is<ActionSet::WholeSpace>())
    return ActionSet::box(set.dim(), -radius, radius);
  if (set.is<ActionSet::ShiftedOrthant>()) {
    const auto& o = set.as<ActionSet::ShiftedOrthant>();
    return ActionSet::box(o.dim, -o.shift, radius);
  }
  return set;
}

}  // namespace dmd
