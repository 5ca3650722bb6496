#ifndef DMD_ACTION_SET_HPP
#define DMD_ACTION_SET_HPP

#include "dmd/types.hpp"

#include <random>
#include <string>
#include <variant>

namespace dmd {

/// Tolerance used when testing whether a point belongs to a set.
inline constexpr double kMembershipTolerance = 1e-9;

/// Half-width used to truncate unbounded sets whenever a bounded region is
/// needed (sampling, experiment presets).
inline constexpr double kTruncationRadius = 100.0;

/// A player's closed convex action set.
///
/// Immutable after construction. Every variant is non-empty and exposes its
/// Euclidean projection, a strictly interior point and a membership test.
class ActionSet {
 public:
  struct Box {
    Vector lower;
    Vector upper;
  };
  /// {x >= 0, sum(x) = 1}
  struct Simplex {
    Index dim;
  };
  /// [-shift, inf)^dim
  struct ShiftedOrthant {
    double shift;
    Index dim;
  };
  struct Ball {
    Vector center;
    double radius;
  };
  struct WholeSpace {
    Index dim;
  };

  using Descriptor =
      std::variant<Box, Simplex, ShiftedOrthant, Ball, WholeSpace>;

  static ActionSet box(Vector lower, Vector upper);
  static ActionSet box(Index dim, double lower, double upper);
  static ActionSet simplex(Index dim);
  static ActionSet shifted_orthant(double shift, Index dim);
  static ActionSet ball(Vector center, double radius);
  static ActionSet ball(Index dim, double radius);
  static ActionSet whole_space(Index dim);

  Index dim() const;
  /// "box", "simplex", "shifted_orthant", "ball" or "whole_space".
  std::string name() const;
  bool bounded() const;
  const Descriptor& descriptor() const { return descriptor_; }

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(descriptor_);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(descriptor_);
  }

  bool contains(const Vector& x, double tol = kMembershipTolerance) const;
  Vector project(const Vector& x) const;
  Vector interior_point() const;

  /// Uniform sample; unbounded sets are truncated to kTruncationRadius.
  Vector sample(std::mt19937_64& rng) const;
  /// Sample pulled toward interior_point() so that it is at relative depth
  /// at least `margin` inside the set.
  Vector sample_interior(std::mt19937_64& rng, double margin) const;

 private:
  explicit ActionSet(Descriptor d) : descriptor_(std::move(d)) {}
  Descriptor descriptor_;
};

/// Replaces unbounded sets by the bounded stand-ins used in experiments:
/// whole space -> [-100, 100]^n, shifted orthant -> [-c, 100]^n.
ActionSet truncate(const ActionSet& set, double radius = kTruncationRadius);

}  // namespace dmd

#endif  // DMD_ACTION_SET_HPP
