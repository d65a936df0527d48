#include "mpb/space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mpb/errors.hpp"

namespace mpb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNormTol = 1e-9;

double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double circle_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, kTwoPi - d);
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::EuclideanL2: return "l2";
    case SpaceKind::EuclideanL1: return "l1";
    case SpaceKind::Circle: return "circle";
    case SpaceKind::Sphere2: return "sphere2";
    case SpaceKind::SO3: return "so3";
    case SpaceKind::Compound: return "compound";
  }
  return "?";
}

struct StateSpace::Node {
  SpaceKind kind = SpaceKind::EuclideanL2;
  std::vector<Bounds> bounds;
  std::vector<StateSpace> children;
  std::vector<double> weights;
  std::vector<std::size_t> offsets;
  double p = 1.0;
  int dim = 0;
  std::size_t width = 0;
};

namespace {

std::vector<Bounds> unit_bounds(int d) {
  if (d < 1) throw StructuralError("Euclidean space needs d >= 1");
  return std::vector<Bounds>(static_cast<std::size_t>(d), Bounds{0.0, 1.0});
}

}  // namespace

StateSpace StateSpace::l2(std::vector<Bounds> bounds) {
  if (bounds.empty()) throw StructuralError("Euclidean space needs d >= 1");
  for (const auto& b : bounds) {
    if (!(b.lo < b.hi)) throw StructuralError("axis bound requires lower < upper");
  }
  auto n = std::make_shared<Node>();
  n->kind = SpaceKind::EuclideanL2;
  n->dim = static_cast<int>(bounds.size());
  n->width = bounds.size();
  n->bounds = std::move(bounds);
  return StateSpace(std::move(n));
}

StateSpace StateSpace::l1(std::vector<Bounds> bounds) {
  auto s = l2(std::move(bounds));
  auto n = std::make_shared<Node>(*s.node_);
  n->kind = SpaceKind::EuclideanL1;
  return StateSpace(std::move(n));
}

StateSpace StateSpace::l2_unit(int d) { return l2(unit_bounds(d)); }
StateSpace StateSpace::l1_unit(int d) { return l1(unit_bounds(d)); }

StateSpace StateSpace::circle() {
  auto n = std::make_shared<Node>();
  n->kind = SpaceKind::Circle;
  n->dim = 1;
  n->width = 1;
  return StateSpace(std::move(n));
}

StateSpace StateSpace::sphere2() {
  auto n = std::make_shared<Node>();
  n->kind = SpaceKind::Sphere2;
  n->dim = 2;
  n->width = 3;
  return StateSpace(std::move(n));
}

StateSpace StateSpace::so3() {
  auto n = std::make_shared<Node>();
  n->kind = SpaceKind::SO3;
  n->dim = 3;
  n->width = 4;
  return StateSpace(std::move(n));
}

StateSpace StateSpace::compound(std::vector<StateSpace> children, std::vector<double> weights,
                                double p) {
  if (children.size() < 2) throw StructuralError("compound space needs at least two children");
  if (weights.size() != children.size()) {
    throw StructuralError("compound space needs one weight per child");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw StructuralError("compound weights must be positive");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw StructuralError("compound exponent p must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = SpaceKind::Compound;
  n->p = p;
  std::size_t off = 0;
  for (const auto& c : children) {
    n->offsets.push_back(off);
    off += c.width();
    n->dim += c.dimension();
  }
  n->width = off;
  n->children = std::move(children);
  n->weights = std::move(weights);
  return StateSpace(std::move(n));
}

StateSpace StateSpace::se2(std::vector<Bounds> bounds, double w_translation, double w_rotation) {
  if (bounds.size() != 2) throw StructuralError("SE(2) needs two translation bounds");
  return compound({l2(std::move(bounds)), circle()}, {w_translation, w_rotation});
}

StateSpace StateSpace::se3(std::vector<Bounds> bounds, double w_translation, double w_rotation) {
  if (bounds.size() != 3) throw StructuralError("SE(3) needs three translation bounds");
  return compound({l2(std::move(bounds)), so3()}, {w_translation, w_rotation});
}

StateSpace StateSpace::torus(int d, std::vector<double> weights) {
  if (d < 2) throw StructuralError("torus needs d >= 2 (T(1) is the circle)");
  if (weights.empty()) weights.assign(static_cast<std::size_t>(d), 1.0);
  return compound(std::vector<StateSpace>(static_cast<std::size_t>(d), circle()), std::move(weights));
}

SpaceKind StateSpace::kind() const { return node_->kind; }
int StateSpace::dimension() const { return node_->dim; }
std::size_t StateSpace::width() const { return node_->width; }
std::span<const Bounds> StateSpace::bounds() const { return node_->bounds; }
std::span<const StateSpace> StateSpace::children() const { return node_->children; }
std::span<const double> StateSpace::weights() const { return node_->weights; }
double StateSpace::p() const { return node_->p; }
std::size_t StateSpace::child_offset(std::size_t i) const { return node_->offsets.at(i); }

bool StateSpace::same_structure(const StateSpace& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind() || width() != other.width()) return false;
  if (node_->bounds != other.node_->bounds) return false;
  if (node_->weights != other.node_->weights || node_->p != other.node_->p) return false;
  for (std::size_t i = 0; i < node_->children.size(); ++i) {
    if (!node_->children[i].same_structure(other.node_->children[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

void normalize_into(const StateSpace& space, double* c) {
  switch (space.kind()) {
    case SpaceKind::Circle: c[0] = normalize_angle(c[0]); break;
    case SpaceKind::Compound:
      for (std::size_t i = 0; i < space.children().size(); ++i) {
        normalize_into(space.children()[i], c + space.child_offset(i));
      }
      break;
    default: break;
  }
}

void validate_into(const StateSpace& space, const double* c) {
  switch (space.kind()) {
    case SpaceKind::EuclideanL2:
    case SpaceKind::EuclideanL1: {
      const auto b = space.bounds();
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (!(c[i] >= b[i].lo && c[i] <= b[i].hi)) {
          throw StructuralError("Euclidean coordinate outside its axis bounds");
        }
      }
      break;
    }
    case SpaceKind::Circle:
      if (!(c[0] >= 0.0 && c[0] < kTwoPi)) throw StructuralError("circle angle outside [0, 2pi)");
      break;
    case SpaceKind::Sphere2: {
      const double n = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
      if (std::fabs(n - 1.0) > kNormTol) throw StructuralError("sphere point is not unit length");
      break;
    }
    case SpaceKind::SO3: {
      const double n = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
      if (std::fabs(n - 1.0) > kNormTol) throw StructuralError("quaternion is not unit length");
      break;
    }
    case SpaceKind::Compound:
      for (std::size_t i = 0; i < space.children().size(); ++i) {
        validate_into(space.children()[i], c + space.child_offset(i));
      }
      break;
  }
}

void check_layout(const StateSpace& space, const Point& x) {
  if (x.size() != space.width()) {
    throw StructuralError("point has " + std::to_string(x.size()) + " coordinates, space expects " +
                          std::to_string(space.width()));
  }
}

}  // namespace

Point make_point(const StateSpace& space, std::vector<double> coords) {
  Point p(std::move(coords));
  check_layout(space, p);
  normalize_into(space, p.data());
  validate_into(space, p.data());
  return p;
}

void validate_point(const StateSpace& space, const Point& x) {
  check_layout(space, x);
  validate_into(space, x.data());
}

double distance_unchecked(const StateSpace& space, const double* x, const double* y) {
  switch (space.kind()) {
    case SpaceKind::EuclideanL2: {
      double s = 0.0;
      const std::size_t d = space.width();
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = x[i] - y[i];
        s += diff * diff;
      }
      return std::sqrt(s);
    }
    case SpaceKind::EuclideanL1: {
      double s = 0.0;
      const std::size_t d = space.width();
      for (std::size_t i = 0; i < d; ++i) s += std::fabs(x[i] - y[i]);
      return s;
    }
    case SpaceKind::Circle: return circle_distance(x[0], y[0]);
    // atan2 of |x - y| and |x + y| halves the angle without acos's loss near 0.
    case SpaceKind::Sphere2: {
      double dm = 0.0, dp = 0.0;
      for (int i = 0; i < 3; ++i) {
        dm += (x[i] - y[i]) * (x[i] - y[i]);
        dp += (x[i] + y[i]) * (x[i] + y[i]);
      }
      return 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp));
    }
    case SpaceKind::SO3: {
      double dm = 0.0, dp = 0.0;
      for (int i = 0; i < 4; ++i) {
        dm += (x[i] - y[i]) * (x[i] - y[i]);
        dp += (x[i] + y[i]) * (x[i] + y[i]);
      }
      // q and -q are the same rotation
      return 2.0 * std::atan2(std::sqrt(std::min(dm, dp)), std::sqrt(std::max(dm, dp)));
    }
    case SpaceKind::Compound: {
      const auto ch = space.children();
      const auto w = space.weights();
      const double p = space.p();
      double s = 0.0;
      if (p == 1.0) {
        for (std::size_t i = 0; i < ch.size(); ++i) {
          const std::size_t off = space.child_offset(i);
          s += w[i] * distance_unchecked(ch[i], x + off, y + off);
        }
        return s;
      }
      for (std::size_t i = 0; i < ch.size(); ++i) {
        const std::size_t off = space.child_offset(i);
        s += w[i] * std::pow(distance_unchecked(ch[i], x + off, y + off), p);
      }
      return std::pow(s, 1.0 / p);
    }
  }
  return 0.0;
}

double distance(const StateSpace& space, const Point& x, const Point& y) {
  check_layout(space, x);
  check_layout(space, y);
  return distance_unchecked(space, x.data(), y.data());
}

namespace {

// Spherical linear interpolation between unit vectors of dimension n.
void slerp(const double* x, const double* y, std::size_t n, double t, double* out) {
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += x[i] * y[i];
  dot = clamp_unit(dot);
  const double theta = std::acos(dot);
  if (theta < 1e-12) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + t * (y[i] - x[i]);
  } else if (kPi - theta < 1e-9) {
    // Antipodal: any great circle works; pick one through a fixed perpendicular.
    double perp[4] = {0, 0, 0, 0};
    std::size_t k = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::fabs(x[i]) < std::fabs(x[k])) k = i;
    }
    perp[k] = 1.0;
    double proj = x[k];
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      perp[i] -= proj * x[i];
      norm += perp[i] * perp[i];
    }
    norm = std::sqrt(norm);
    const double a = t * theta;
    for (std::size_t i = 0; i < n; ++i) out[i] = std::cos(a) * x[i] + std::sin(a) * perp[i] / norm;
  } else {
    const double s = std::sin(theta);
    const double a = std::sin((1.0 - t) * theta) / s;
    const double b = std::sin(t * theta) / s;
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) norm += out[i] * out[i];
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < n; ++i) out[i] /= norm;
}

}  // namespace

void interpolate_into(const StateSpace& space, const double* x, const double* y, double t,
                      double* out) {
  switch (space.kind()) {
    case SpaceKind::EuclideanL2:
    case SpaceKind::EuclideanL1: {
      const std::size_t d = space.width();
      if (t == 1.0) {
        std::copy(y, y + d, out);
        return;
      }
      for (std::size_t i = 0; i < d; ++i) out[i] = x[i] + t * (y[i] - x[i]);
      return;
    }
    case SpaceKind::Circle: {
      if (t == 1.0) {
        out[0] = y[0];
        return;
      }
      double diff = y[0] - x[0];
      if (diff > kPi) diff -= kTwoPi;
      if (diff < -kPi) diff += kTwoPi;
      out[0] = normalize_angle(x[0] + t * diff);
      return;
    }
    case SpaceKind::Sphere2:
      if (t == 1.0) {
        std::copy(y, y + 3, out);
        return;
      }
      slerp(x, y, 3, t, out);
      return;
    case SpaceKind::SO3: {
      if (t == 1.0) {
        std::copy(y, y + 4, out);
        return;
      }
      double yy[4] = {y[0], y[1], y[2], y[3]};
      if (x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3] < 0.0) {
        for (double& v : yy) v = -v;
      }
      slerp(x, yy, 4, t, out);
      return;
    }
    case SpaceKind::Compound: {
      const auto ch = space.children();
      for (std::size_t i = 0; i < ch.size(); ++i) {
        const std::size_t off = space.child_offset(i);
        interpolate_into(ch[i], x + off, y + off, t, out + off);
      }
      return;
    }
  }
}

Point interpolate(const StateSpace& space, const Point& x, const Point& y, double t) {
  check_layout(space, x);
  check_layout(space, y);
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("interpolation parameter outside [0, 1]");
  if (t == 0.0) return x;
  std::vector<double> out(space.width());
  interpolate_into(space, x.data(), y.data(), t, out.data());
  return Point(std::move(out));
}

namespace {

void sample_into(const StateSpace& space, Rng& rng, double* out) {
  switch (space.kind()) {
    case SpaceKind::EuclideanL2:
    case SpaceKind::EuclideanL1: {
      const auto b = space.bounds();
      for (std::size_t i = 0; i < b.size(); ++i) out[i] = uniform(rng, b[i].lo, b[i].hi);
      return;
    }
    case SpaceKind::Circle: out[0] = normalize_angle(kTwoPi * uniform01(rng)); return;
    case SpaceKind::Sphere2: {
      double n = 0.0;
      do {
        for (int i = 0; i < 3; ++i) out[i] = gaussian(rng);
        n = std::sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2]);
      } while (n < 1e-12);
      for (int i = 0; i < 3; ++i) out[i] /= n;
      return;
    }
    case SpaceKind::SO3: {
      // Shoemake's subgroup algorithm: Haar-uniform unit quaternions.
      const double u1 = uniform01(rng);
      const double u2 = uniform01(rng);
      const double u3 = uniform01(rng);
      const double a = std::sqrt(1.0 - u1);
      const double b = std::sqrt(u1);
      out[0] = a * std::sin(kTwoPi * u2);
      out[1] = a * std::cos(kTwoPi * u2);
      out[2] = b * std::sin(kTwoPi * u3);
      out[3] = b * std::cos(kTwoPi * u3);
      return;
    }
    case SpaceKind::Compound: {
      const auto ch = space.children();
      for (std::size_t i = 0; i < ch.size(); ++i) sample_into(ch[i], rng, out + space.child_offset(i));
      return;
    }
  }
}

}  // namespace

Point sample_uniform(const StateSpace& space, Rng& rng) {
  std::vector<double> out(space.width());
  sample_into(space, rng, out.data());
  return Point(std::move(out));
}

double extent(const StateSpace& space) {
  switch (space.kind()) {
    case SpaceKind::EuclideanL2: {
      double s = 0.0;
      for (const auto& b : space.bounds()) s += b.length() * b.length();
      return std::sqrt(s);
    }
    case SpaceKind::EuclideanL1: {
      double s = 0.0;
      for (const auto& b : space.bounds()) s += b.length();
      return s;
    }
    case SpaceKind::Circle: return kPi;
    case SpaceKind::Sphere2: return kPi;
    case SpaceKind::SO3: return kPi / 2.0;
    case SpaceKind::Compound: {
      const auto ch = space.children();
      const auto w = space.weights();
      const double p = space.p();
      double s = 0.0;
      for (std::size_t i = 0; i < ch.size(); ++i) s += w[i] * std::pow(extent(ch[i]), p);
      return std::pow(s, 1.0 / p);
    }
  }
  return 0.0;
}

double measure(const StateSpace& space) {
  switch (space.kind()) {
    case SpaceKind::EuclideanL2:
    case SpaceKind::EuclideanL1: {
      double s = 1.0;
      for (const auto& b : space.bounds()) s *= b.length();
      return s;
    }
    case SpaceKind::Circle: return kTwoPi;
    case SpaceKind::Sphere2: return 4.0 * kPi;
    case SpaceKind::SO3: return kPi * kPi;
    case SpaceKind::Compound: {
      double s = 1.0;
      for (const auto& c : space.children()) s *= measure(c);
      return s;
    }
  }
  return 0.0;
}

std::string describe(const StateSpace& space) {
  std::ostringstream os;
  switch (space.kind()) {
    case SpaceKind::EuclideanL2: os << "L2(" << space.dimension() << ")"; break;
    case SpaceKind::EuclideanL1: os << "L1(" << space.dimension() << ")"; break;
    case SpaceKind::Circle: os << "S1"; break;
    case SpaceKind::Sphere2: os << "S2"; break;
    case SpaceKind::SO3: os << "SO3"; break;
    case SpaceKind::Compound: {
      os << "(";
      const auto ch = space.children();
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (i) os << " x ";
        os << space.weights()[i] << "*" << describe(ch[i]);
      }
      os << ")";
      if (space.p() != 1.0) os << "^p" << space.p();
      break;
    }
  }
  return os.str();
}

}  // namespace mpb
