#include "dmd/regularizer.hpp"

#include "dmd/numerics.hpp"

#include <cmath>
#include <limits>

namespace dmd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite())
    throw DomainError(std::string(what) + ": non-finite input");
}

void require_dim(const Regularizer& reg, const Vector& v) {
  if (v.size() != reg.dim())
    throw DimensionError("regularizer dimension " + std::to_string(reg.dim()) +
                         " does not match vector of size " +
                         std::to_string(v.size()));
}

double x_log_x(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double clamped_exp(double t, bool* saturated) {
  return std::exp(numerics::clamp_exponent(t, saturated));
}

}  // namespace

std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::euclidean: return "euclidean";
    case RegularizerKind::simplex_entropy: return "simplex_entropy";
    case RegularizerKind::boltzmann_shannon: return "boltzmann_shannon";
    case RegularizerKind::fermi_dirac: return "fermi_dirac";
    case RegularizerKind::hellinger: return "hellinger";
  }
  return "unknown";
}

RegularizerKind parse_regularizer_kind(std::string_view name) {
  if (name == "euclidean" || name == "euclidean_box")
    return RegularizerKind::euclidean;
  if (name == "simplex_entropy") return RegularizerKind::simplex_entropy;
  if (name == "boltzmann_shannon") return RegularizerKind::boltzmann_shannon;
  if (name == "fermi_dirac") return RegularizerKind::fermi_dirac;
  if (name == "hellinger") return RegularizerKind::hellinger;
  throw ConfigError("unknown regularizer kind '" + std::string(name) + "'");
}

Regularizer::Regularizer(RegularizerKind kind, double epsilon, ActionSet domain)
    : kind_(kind), epsilon_(epsilon), domain_(std::move(domain)) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ConfigError("regularizer epsilon must be finite and > 0");
}

Regularizer Regularizer::euclidean(ActionSet domain, double epsilon) {
  return Regularizer(RegularizerKind::euclidean, epsilon, std::move(domain));
}

Regularizer Regularizer::simplex_entropy(Index dim, double epsilon) {
  return Regularizer(RegularizerKind::simplex_entropy, epsilon,
                     ActionSet::simplex(dim));
}

Regularizer Regularizer::boltzmann_shannon(Index dim, double shift,
                                           double epsilon) {
  return Regularizer(RegularizerKind::boltzmann_shannon, epsilon,
                     ActionSet::shifted_orthant(shift, dim));
}

Regularizer Regularizer::fermi_dirac(Vector lower, Vector upper,
                                     double epsilon) {
  return Regularizer(RegularizerKind::fermi_dirac, epsilon,
                     ActionSet::box(std::move(lower), std::move(upper)));
}

Regularizer Regularizer::fermi_dirac(Index dim, double lower, double upper,
                                     double epsilon) {
  return Regularizer(RegularizerKind::fermi_dirac, epsilon,
                     ActionSet::box(dim, lower, upper));
}

Regularizer Regularizer::hellinger(Vector center, double radius,
                                   double epsilon) {
  return Regularizer(RegularizerKind::hellinger, epsilon,
                     ActionSet::ball(std::move(center), radius));
}

std::optional<double> Regularizer::strong_convexity() const {
  switch (kind_) {
    case RegularizerKind::euclidean:
    case RegularizerKind::simplex_entropy:
      return 1.0;
    default:
      return std::nullopt;
  }
}

ConvexityNorm Regularizer::convexity_norm() const {
  return kind_ == RegularizerKind::simplex_entropy ? ConvexityNorm::l1
                                                   : ConvexityNorm::l2;
}

Regularizer Regularizer::with_epsilon(double epsilon) const {
  return Regularizer(kind_, epsilon, domain_);
}

bool Regularizer::gradient_defined_at(const Vector& x) const {
  if (x.size() != dim() || !x.allFinite()) return false;
  switch (kind_) {
    case RegularizerKind::euclidean:
      return domain_.contains(x);
    case RegularizerKind::simplex_entropy:
      return x.minCoeff() > kInteriorMargin &&
             std::abs(x.sum() - 1.0) <= kMembershipTolerance;
    case RegularizerKind::boltzmann_shannon: {
      const double c = domain_.as<ActionSet::ShiftedOrthant>().shift;
      return (x.array() + c).minCoeff() > kInteriorMargin;
    }
    case RegularizerKind::fermi_dirac: {
      const auto& b = domain_.as<ActionSet::Box>();
      return (x - b.lower).minCoeff() > kInteriorMargin &&
             (b.upper - x).minCoeff() > kInteriorMargin;
    }
    case RegularizerKind::hellinger: {
      const auto& b = domain_.as<ActionSet::Ball>();
      return b.radius - (x - b.center).norm() > kInteriorMargin;
    }
  }
  return false;
}

Vector mirror_map(const Regularizer& reg, const Vector& z, bool* saturated) {
  require_dim(reg, z);
  require_finite(z, "mirror_map");
  const double eps = reg.epsilon();
  const Vector w = z / eps;
  switch (reg.kind()) {
    case RegularizerKind::euclidean:
      return reg.domain().project(w);
    case RegularizerKind::simplex_entropy:
      if (saturated && w.maxCoeff() - w.minCoeff() > numerics::kMaxExponent)
        *saturated = true;
      return numerics::softmax(w);
    case RegularizerKind::boltzmann_shannon: {
      const double c = reg.domain().as<ActionSet::ShiftedOrthant>().shift;
      Vector x(w.size());
      for (Index i = 0; i < w.size(); ++i) x(i) = clamped_exp(w(i), saturated) - c;
      return x;
    }
    case RegularizerKind::fermi_dirac: {
      const auto& box = reg.domain().as<ActionSet::Box>();
      Vector x(w.size());
      for (Index i = 0; i < w.size(); ++i) {
        if (saturated && std::abs(w(i)) > numerics::kMaxExponent)
          *saturated = true;
        x(i) = box.lower(i) +
               (box.upper(i) - box.lower(i)) * numerics::logistic(w(i));
      }
      return x;
    }
    case RegularizerKind::hellinger: {
      const auto& ball = reg.domain().as<ActionSet::Ball>();
      const double scale = std::hypot(1.0, w.stableNorm());
      return ball.center + (ball.radius / scale) * w;
    }
  }
  throw Error("mirror_map: unhandled regularizer kind");
}

Vector regularizer_gradient(const Regularizer& reg, const Vector& x) {
  require_dim(reg, x);
  if (!reg.gradient_defined_at(x))
    throw DomainError("regularizer_gradient: point is not in the interior of "
                      "the " + reg.name() + " domain");
  const double eps = reg.epsilon();
  switch (reg.kind()) {
    case RegularizerKind::euclidean:
      return eps * x;
    case RegularizerKind::simplex_entropy:
      return eps * (x.array().log() + 1.0).matrix();
    case RegularizerKind::boltzmann_shannon: {
      const double c = reg.domain().as<ActionSet::ShiftedOrthant>().shift;
      return eps * (x.array() + c).log().matrix();
    }
    case RegularizerKind::fermi_dirac: {
      const auto& box = reg.domain().as<ActionSet::Box>();
      return eps *
             ((x - box.lower).array() / (box.upper - x).array()).log().matrix();
    }
    case RegularizerKind::hellinger: {
      const auto& ball = reg.domain().as<ActionSet::Ball>();
      const Vector y = x - ball.center;
      const double gap = ball.radius * ball.radius - y.squaredNorm();
      return (eps / std::sqrt(gap)) * y;
    }
  }
  throw Error("regularizer_gradient: unhandled regularizer kind");
}

double regularizer_value(const Regularizer& reg, const Vector& x) {
  require_dim(reg, x);
  if (!reg.domain().contains(x)) return kInf;
  const double eps = reg.epsilon();
  switch (reg.kind()) {
    case RegularizerKind::euclidean:
      return 0.5 * eps * x.squaredNorm();
    case RegularizerKind::simplex_entropy: {
      double s = 0.0;
      for (Index i = 0; i < x.size(); ++i) s += x_log_x(std::max(x(i), 0.0));
      return eps * s;
    }
    case RegularizerKind::boltzmann_shannon: {
      const double c = reg.domain().as<ActionSet::ShiftedOrthant>().shift;
      double s = 0.0;
      for (Index i = 0; i < x.size(); ++i) {
        const double y = std::max(x(i) + c, 0.0);
        s += x_log_x(y) - y;
      }
      return eps * s;
    }
    case RegularizerKind::fermi_dirac: {
      const auto& box = reg.domain().as<ActionSet::Box>();
      double s = 0.0;
      for (Index i = 0; i < x.size(); ++i) {
        const double width = box.upper(i) - box.lower(i);
        const double u = std::clamp((x(i) - box.lower(i)) / width, 0.0, 1.0);
        s += width * (x_log_x(u) + x_log_x(1.0 - u));
      }
      return eps * s;
    }
    case RegularizerKind::hellinger: {
      const auto& ball = reg.domain().as<ActionSet::Ball>();
      const double gap =
          ball.radius * ball.radius - (x - ball.center).squaredNorm();
      return -eps * std::sqrt(std::max(gap, 0.0));
    }
  }
  throw Error("regularizer_value: unhandled regularizer kind");
}

double conjugate_value(const Regularizer& reg, const Vector& z,
                       bool* saturated) {
  require_dim(reg, z);
  require_finite(z, "conjugate_value");
  const double eps = reg.epsilon();
  const Vector w = z / eps;
  switch (reg.kind()) {
    case RegularizerKind::euclidean: {
      // eps/2 (|w|^2 - |w - p|^2) rewritten as z'p - eps/2 |p|^2.
      const Vector p = reg.domain().project(w);
      return z.dot(p) - 0.5 * eps * p.squaredNorm();
    }
    case RegularizerKind::simplex_entropy:
      return eps * numerics::log_sum_exp(w);
    case RegularizerKind::boltzmann_shannon: {
      const double c = reg.domain().as<ActionSet::ShiftedOrthant>().shift;
      double s = 0.0;
      for (Index i = 0; i < w.size(); ++i) s += clamped_exp(w(i), saturated);
      return eps * s - c * z.sum();
    }
    case RegularizerKind::fermi_dirac: {
      const auto& box = reg.domain().as<ActionSet::Box>();
      double s = 0.0;
      for (Index i = 0; i < w.size(); ++i) {
        s += box.lower(i) * z(i) +
             (box.upper(i) - box.lower(i)) * eps * numerics::softplus(w(i));
      }
      return s;
    }
    case RegularizerKind::hellinger: {
      const auto& ball = reg.domain().as<ActionSet::Ball>();
      return eps * ball.radius * std::hypot(1.0, w.stableNorm()) +
             ball.center.dot(z);
    }
  }
  throw Error("conjugate_value: unhandled regularizer kind");
}

double bregman_divergence(const Regularizer& reg, const Vector& x,
                          const Vector& q) {
  require_dim(reg, x);
  require_dim(reg, q);
  if (!reg.domain().contains(x))
    throw DomainError("bregman_divergence: x outside the regularizer domain");
  const Vector grad_q = regularizer_gradient(reg, q);
  const double d = regularizer_value(reg, x) - regularizer_value(reg, q) -
                   grad_q.dot(x - q);
  return std::max(d, 0.0);
}

double dual_bregman_divergence(const Regularizer& reg, const Vector& z,
                               const Vector& z_ref) {
  require_dim(reg, z);
  require_dim(reg, z_ref);
  const double d = conjugate_value(reg, z) - conjugate_value(reg, z_ref) -
                   mirror_map(reg, z_ref).dot(z - z_ref);
  return std::max(d, 0.0);
}

RegularizerProfile::RegularizerProfile(std::vector<Regularizer> regs)
    : regs_(std::move(regs)) {
  if (regs_.empty()) throw ConfigError("regularizer profile is empty");
  offsets_.reserve(regs_.size());
  for (const auto& r : regs_) {
    offsets_.push_back(dim_);
    dim_ += r.dim();
  }
}

std::vector<ActionSet> RegularizerProfile::domains() const {
  std::vector<ActionSet> out;
  out.reserve(regs_.size());
  for (const auto& r : regs_) out.push_back(r.domain());
  return out;
}

std::vector<Index> RegularizerProfile::dims() const {
  std::vector<Index> out;
  out.reserve(regs_.size());
  for (const auto& r : regs_) out.push_back(r.dim());
  return out;
}

RegularizerProfile RegularizerProfile::with_epsilon(double epsilon) const {
  std::vector<Regularizer> scaled;
  scaled.reserve(regs_.size());
  for (const auto& r : regs_) scaled.push_back(r.with_epsilon(epsilon));
  return RegularizerProfile(std::move(scaled));
}

void RegularizerProfile::check_size(const Vector& v) const {
  if (v.size() != dim_)
    throw DimensionError("profile dimension " + std::to_string(dim_) +
                         " does not match vector of size " +
                         std::to_string(v.size()));
}

Vector RegularizerProfile::mirror_map(const Vector& z, bool* saturated) const {
  check_size(z);
  Vector x(dim_);
  for (std::size_t p = 0; p < regs_.size(); ++p) {
    const Index n = regs_[p].dim();
    x.segment(offsets_[p], n) =
        dmd::mirror_map(regs_[p], z.segment(offsets_[p], n), saturated);
  }
  return x;
}

Vector RegularizerProfile::gradient(const Vector& x) const {
  check_size(x);
  Vector g(dim_);
  for (std::size_t p = 0; p < regs_.size(); ++p) {
    const Index n = regs_[p].dim();
    g.segment(offsets_[p], n) =
        regularizer_gradient(regs_[p], x.segment(offsets_[p], n));
  }
  return g;
}

bool RegularizerProfile::gradient_defined_at(const Vector& x) const {
  if (x.size() != dim_) return false;
  for (std::size_t p = 0; p < regs_.size(); ++p) {
    if (!regs_[p].gradient_defined_at(x.segment(offsets_[p], regs_[p].dim())))
      return false;
  }
  return true;
}

Vector RegularizerProfile::project(const Vector& x) const {
  check_size(x);
  Vector out(dim_);
  for (std::size_t p = 0; p < regs_.size(); ++p) {
    const Index n = regs_[p].dim();
    out.segment(offsets_[p], n) =
        regs_[p].domain().project(x.segment(offsets_[p], n));
  }
  return out;
}

bool RegularizerProfile::contains(const Vector& x, double tol) const {
  if (x.size() != dim_) return false;
  for (std::size_t p = 0; p < regs_.size(); ++p) {
    if (!regs_[p].domain().contains(x.segment(offsets_[p], regs_[p].dim()), tol))
      return false;
  }
  return true;
}

double lyapunov_value(const RegularizerProfile& regs, const Vector& z,
                      const Vector& z_ref) {
  if (z.size() != regs.dim() || z_ref.size() != regs.dim())
    throw DimensionError("lyapunov_value: dimension mismatch");
  double v = 0.0;
  for (Index p = 0; p < regs.players(); ++p) {
    const Index n = regs[p].dim();
    v += dual_bregman_divergence(regs[p], z.segment(regs.offset(p), n),
                                 z_ref.segment(regs.offset(p), n));
  }
  return v;
}

}  // namespace dmd
