#ifndef DMD_REGULARIZER_HPP
#define DMD_REGULARIZER_HPP

#include "dmd/action_set.hpp"
#include "dmd/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmd {

enum class RegularizerKind {
  euclidean,
  simplex_entropy,
  boltzmann_shannon,
  fermi_dirac,
  hellinger,
};

std::string to_string(RegularizerKind kind);
/// Accepts the names produced by to_string, plus "euclidean_box".
RegularizerKind parse_regularizer_kind(std::string_view name);

/// Which norm the strong convexity modulus refers to.
enum class ConvexityNorm { l2, l1 };

/// A scaled regularizer psi = epsilon * theta over its domain.
///
/// The five kinds and their closed forms, with w = z / epsilon:
///
///   kind               domain          mirror map C(z)
///   euclidean          any set Omega   proj_Omega(w)
///   simplex_entropy    simplex         softmax(w)
///   boltzmann_shannon  [-c, inf)^n     exp(w) - c
///   fermi_dirac        [a, b]^n        (a + b exp(w)) / (exp(w) + 1)
///   hellinger          ball(c, r)      c + r w / sqrt(1 + |w|^2)
///
/// The Fermi-Dirac entropy on [a, b] is the unit-interval entropy of the
/// rescaled coordinate u = (x - a) / (b - a), multiplied by (b - a); that
/// choice keeps grad psi = epsilon log((x - a) / (b - x)) and the map above
/// mutually inverse.
///
/// Boltzmann-Shannon with shift c uses theta(x) = sum (x + c) log(x + c) -
/// (x + c), whose conjugate is epsilon sum exp(w) - c sum z.
class Regularizer {
 public:
  static Regularizer euclidean(ActionSet domain, double epsilon);
  static Regularizer simplex_entropy(Index dim, double epsilon);
  static Regularizer boltzmann_shannon(Index dim, double shift, double epsilon);
  static Regularizer fermi_dirac(Vector lower, Vector upper, double epsilon);
  static Regularizer fermi_dirac(Index dim, double lower, double upper,
                                 double epsilon);
  static Regularizer hellinger(Vector center, double radius, double epsilon);

  RegularizerKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }
  double epsilon() const { return epsilon_; }
  const ActionSet& domain() const { return domain_; }
  Index dim() const { return domain_.dim(); }

  /// Strong convexity modulus rho of theta, or nullopt for the kinds that are
  /// only Legendre.
  std::optional<double> strong_convexity() const;
  ConvexityNorm convexity_norm() const;
  bool legendre() const { return !strong_convexity().has_value(); }
  /// Steep kinds confine the mirror map to the relative interior.
  bool steep() const { return kind_ != RegularizerKind::euclidean; }

  Regularizer with_epsilon(double epsilon) const;

  /// True when grad psi is defined at x: inside the domain for the Euclidean
  /// kind, and at relative depth > 1e-12 for the steep kinds.
  bool gradient_defined_at(const Vector& x) const;

 private:
  Regularizer(RegularizerKind kind, double epsilon, ActionSet domain);

  RegularizerKind kind_;
  double epsilon_;
  ActionSet domain_;
};

/// Margin used by gradient_defined_at for steep kinds.
inline constexpr double kInteriorMargin = 1e-12;

/// argmax_{y in dom} y'z - psi(y). Sets *saturated when an exponent had to be
/// clamped (see numerics::kMaxExponent).
Vector mirror_map(const Regularizer& reg, const Vector& z,
                  bool* saturated = nullptr);
/// grad psi(x); the left inverse of mirror_map.
Vector regularizer_gradient(const Regularizer& reg, const Vector& x);
/// psi(x); +inf outside the domain.
double regularizer_value(const Regularizer& reg, const Vector& x);
/// psi*(z).
double conjugate_value(const Regularizer& reg, const Vector& z,
                       bool* saturated = nullptr);
/// psi(x) - psi(q) - grad psi(q)'(x - q).
double bregman_divergence(const Regularizer& reg, const Vector& x,
                          const Vector& q);
/// psi*(z) - psi*(z_ref) - C(z_ref)'(z - z_ref).
double dual_bregman_divergence(const Regularizer& reg, const Vector& z,
                               const Vector& z_ref);

/// One regularizer per player, applied blockwise to stacked vectors.
class RegularizerProfile {
 public:
  RegularizerProfile() = default;
  explicit RegularizerProfile(std::vector<Regularizer> regs);

  Index players() const { return static_cast<Index>(regs_.size()); }
  Index dim() const { return dim_; }
  Index offset(Index player) const { return offsets_.at(player); }
  const Regularizer& operator[](Index player) const { return regs_.at(player); }
  const std::vector<Regularizer>& regularizers() const { return regs_; }
  std::vector<ActionSet> domains() const;
  std::vector<Index> dims() const;

  RegularizerProfile with_epsilon(double epsilon) const;

  Vector mirror_map(const Vector& z, bool* saturated = nullptr) const;
  Vector gradient(const Vector& x) const;
  bool gradient_defined_at(const Vector& x) const;
  Vector project(const Vector& x) const;
  bool contains(const Vector& x, double tol = kMembershipTolerance) const;

 private:
  void check_size(const Vector& v) const;

  std::vector<Regularizer> regs_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
};

/// Sum over players of dual_bregman_divergence; the Lyapunov function of the
/// discounted dynamics when z_ref is a rest point.
double lyapunov_value(const RegularizerProfile& regs, const Vector& z,
                      const Vector& z_ref);

}  // namespace dmd

#endif  // DMD_REGULARIZER_HPP
