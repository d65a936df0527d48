#include "mpb/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "mpb/errors.hpp"
#include "mpb/quadrature.hpp"

namespace mpb {

namespace {

constexpr double kPi = std::numbers::pi;

struct WeightedLeaf {
  StateSpace leaf;
  double weight;
};

// Flattens nested p = 1 compounds into a list of leaves with accumulated weights.
bool flatten_p1(const StateSpace& space, double scale, std::vector<WeightedLeaf>& out) {
  if (space.is_leaf()) {
    out.push_back({space, scale});
    return true;
  }
  if (space.p() != 1.0) return false;
  const auto ch = space.children();
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (!flatten_p1(ch[i], scale * space.weights()[i], out)) return false;
  }
  return true;
}

double factorial(int k) { return std::tgamma(static_cast<double>(k) + 1.0); }

// Leaves whose ball volume is a * r^k (below saturation for the circle).
struct Homogeneous {
  double coeff;
  int degree;
};

std::optional<Homogeneous> homogeneous_form(const StateSpace& leaf) {
  const int d = leaf.dimension();
  switch (leaf.kind()) {
    case SpaceKind::EuclideanL2:
      return Homogeneous{std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0), d};
    case SpaceKind::EuclideanL1: return Homogeneous{std::pow(2.0, d) / factorial(d), d};
    case SpaceKind::Circle: return Homogeneous{2.0, 1};
    default: return std::nullopt;
  }
}

// Radius beyond which the leaf ball covers the whole leaf.
double saturation_radius(const StateSpace& leaf) {
  switch (leaf.kind()) {
    case SpaceKind::Circle:
    case SpaceKind::Sphere2: return kPi;
    case SpaceKind::SO3: return kPi / 2.0;
    default: return std::numeric_limits<double>::infinity();
  }
}

double leaf_ball_volume(const StateSpace& leaf, double r) {
  switch (leaf.kind()) {
    case SpaceKind::EuclideanL2:
    case SpaceKind::EuclideanL1: {
      const auto h = *homogeneous_form(leaf);
      return h.coeff * std::pow(r, h.degree);
    }
    case SpaceKind::Circle: return r >= kPi ? 2.0 * kPi : 2.0 * r;
    case SpaceKind::Sphere2: return r >= kPi ? 4.0 * kPi : 2.0 * kPi * (1.0 - std::cos(r));
    case SpaceKind::SO3: return r >= kPi / 2.0 ? kPi * kPi : kPi * (2.0 * r - std::sin(2.0 * r));
    case SpaceKind::Compound: break;
  }
  throw StructuralError("leaf_ball_volume called on a compound space");
}

// dB/dr for a leaf.
double leaf_radial_density(const StateSpace& leaf, double r) {
  switch (leaf.kind()) {
    case SpaceKind::EuclideanL2:
    case SpaceKind::EuclideanL1: {
      const auto h = *homogeneous_form(leaf);
      return h.degree * h.coeff * std::pow(r, h.degree - 1);
    }
    case SpaceKind::Circle: return r < kPi ? 2.0 : 0.0;
    case SpaceKind::Sphere2: return r < kPi ? 2.0 * kPi * std::sin(r) : 0.0;
    case SpaceKind::SO3: {
      if (r >= kPi / 2.0) return 0.0;
      const double s = std::sin(r);
      return 4.0 * kPi * s * s;
    }
    case SpaceKind::Compound: break;
  }
  throw StructuralError("leaf_radial_density called on a compound space");
}

// 1 - cos x - x^2/2 + x^4/24, accurate for small x.
double cos_remainder6(double x) {
  if (std::fabs(x) > 0.5) return 1.0 - std::cos(x) - x * x / 2.0 + x * x * x * x / 24.0;
  const double x2 = x * x;
  double term = x2 * x2 * x2 / 720.0;  // x^6 / 6!
  double sum = 0.0;
  for (int k = 3; k < 16; ++k) {
    sum += term;
    term *= -x2 / static_cast<double>((2 * k + 1) * (2 * k + 2));
  }
  return sum;
}

std::optional<double> compound_closed_form(const StateSpace& space, double r, bool extrapolate = false) {
  std::vector<WeightedLeaf> leaves;
  if (!flatten_p1(space, 1.0, leaves)) return std::nullopt;

  // Translating-and-rotating spatial body: L2(3) x SO(3).
  if (leaves.size() == 2) {
    const WeightedLeaf* tr = nullptr;
    const WeightedLeaf* rot = nullptr;
    for (const auto& l : leaves) {
      if (l.leaf.kind() == SpaceKind::EuclideanL2 && l.leaf.dimension() == 3) tr = &l;
      if (l.leaf.kind() == SpaceKind::SO3) rot = &l;
    }
    if (tr && rot) {
      const double w1 = tr->weight;
      const double w2 = rot->weight;
      if (!extrapolate && r > w2 * kPi / 2.0) return std::nullopt;
      // pi^2/(3 w1^3 w2) (2r^4 - 6 w2^2 r^2 + 3 w2^4 - 3 w2^4 cos(2r/w2)), rewritten
      // through the sixth-order cosine remainder to avoid cancellation at small r.
      return kPi * kPi * std::pow(w2 / w1, 3) * cos_remainder6(2.0 * r / w2);
    }
  }

  // Products of Euclidean and circle factors: with B_i = a_i r^k_i the p = 1
  // convolution telescopes to prod(a_i / w_i^k_i) * prod(k_i!) / K! * r^K.
  double coeff = 1.0;
  int total = 0;
  for (const auto& l : leaves) {
    const auto h = homogeneous_form(l.leaf);
    if (!h) return std::nullopt;
    if (!extrapolate && l.leaf.kind() == SpaceKind::Circle && r > l.weight * kPi) return std::nullopt;
    coeff *= h->coeff / std::pow(l.weight, h->degree) * factorial(h->degree);
    total += h->degree;
  }
  return coeff / factorial(total) * std::pow(r, total);
}

double radial_density(const StateSpace& space, double r);

// Integrates the radial density of `first` against ball volumes of `rest`.
double peel_integral(const StateSpace& first, double w1, const StateSpace& rest, double w2, double p,
                     double r) {
  double upper = r / std::pow(w1, 1.0 / p);
  const double sat = first.is_leaf() ? saturation_radius(first) : extent(first);
  upper = std::min(upper, sat);
  auto integrand = [&](double rho) {
    const double inner_p = (std::pow(r, p) - w1 * std::pow(rho, p)) / w2;
    const double inner = inner_p > 0.0 ? std::pow(inner_p, 1.0 / p) : 0.0;
    return radial_density(first, rho) * ball_volume(rest, inner);
  };
  return integrate(integrand, 0.0, upper);
}

double numeric_ball_volume(const StateSpace& space, double r) {
  const auto ch = space.children();
  const auto w = space.weights();
  // Prefer smooth densities: Euclidean, then circle, then any leaf, then a compound.
  std::size_t pick = ch.size();
  auto rank = [](const StateSpace& s) {
    if (s.is_euclidean()) return 0;
    if (s.kind() == SpaceKind::Circle) return 1;
    if (s.is_leaf()) return 2;
    return 3;
  };
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (pick == ch.size() || rank(ch[i]) < rank(ch[pick])) pick = i;
  }
  std::vector<StateSpace> rest_children;
  std::vector<double> rest_weights;
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (i == pick) continue;
    rest_children.push_back(ch[i]);
    rest_weights.push_back(w[i]);
  }
  if (rest_children.size() == 1) {
    return peel_integral(ch[pick], w[pick], rest_children[0], rest_weights[0], space.p(), r);
  }
  const auto rest = StateSpace::compound(std::move(rest_children), std::move(rest_weights), space.p());
  return peel_integral(ch[pick], w[pick], rest, 1.0, space.p(), r);
}

double radial_density(const StateSpace& space, double r) {
  if (space.is_leaf()) return leaf_radial_density(space, r);
  // Central difference of the ball volume; one-sided near zero.
  const double h = std::max(1e-6 * r, 1e-9);
  if (r <= h) return (ball_volume(space, r + h) - ball_volume(space, r)) / h;
  return (ball_volume(space, r + h) - ball_volume(space, r - h)) / (2.0 * h);
}

bool is_torus(const StateSpace& space) {
  if (space.is_leaf()) return false;
  std::vector<WeightedLeaf> leaves;
  if (!flatten_p1(space, 1.0, leaves)) return false;
  return std::all_of(leaves.begin(), leaves.end(),
                     [](const WeightedLeaf& l) { return l.leaf.kind() == SpaceKind::Circle; });
}

}  // namespace

BallVolume ball_volume_detailed(const StateSpace& space, double r) {
  if (!(r >= 0.0)) throw DomainError("ball radius must be nonnegative");
  if (r == 0.0) return {0.0, VolumeMethod::ClosedForm};
  if (space.is_leaf()) return {leaf_ball_volume(space, r), VolumeMethod::ClosedForm};
  if (auto v = compound_closed_form(space, r)) return {*v, VolumeMethod::ClosedForm};
  double v = numeric_ball_volume(space, r);
  // Spaces without Euclidean factors are compact; their balls saturate.
  bool compact = true;
  std::vector<const StateSpace*> stack{&space};
  while (!stack.empty()) {
    const auto* s = stack.back();
    stack.pop_back();
    if (s->is_euclidean()) compact = false;
    for (const auto& c : s->children()) stack.push_back(&c);
  }
  if (compact) v = std::min(v, measure(space));
  return {v, VolumeMethod::Numeric};
}

double ball_volume(const StateSpace& space, double r) { return ball_volume_detailed(space, r).value; }

double sphere_surface(const StateSpace& space, double r) {
  if (!(r > 0.0)) throw DomainError("sphere radius must be positive");
  switch (space.kind()) {
    case SpaceKind::EuclideanL2: return space.dimension() / r * ball_volume(space, r);
    case SpaceKind::EuclideanL1: {
      // 2^d facets, each a (d-1)-simplex of measure sqrt(d) r^(d-1) / (d-1)!.
      const int d = space.dimension();
      return std::pow(2.0, d) * std::sqrt(static_cast<double>(d)) * std::pow(r, d - 1) /
             factorial(d - 1);
    }
    case SpaceKind::Circle:
    case SpaceKind::Sphere2:
    case SpaceKind::SO3: return leaf_radial_density(space, r);
    case SpaceKind::Compound:
      if (is_torus(space)) {
        if (auto v = compound_closed_form(space, r)) return space.dimension() / r * *v;
        return radial_density(space, r);
      }
      break;
  }
  throw UnsupportedOperation("sphere_surface is not available for " + describe(space));
}

bool is_well_behaved(const StateSpace& space) {
  return space.kind() == SpaceKind::EuclideanL2 || space.kind() == SpaceKind::Circle ||
         is_torus(space);
}

double canonical_transform(const StateSpace& space, double r) {
  const double s = sphere_surface(space, r);
  if (s == 0.0) throw DomainError("sphere measure vanishes at this radius");
  return space.dimension() * ball_volume(space, r) / s;
}

double compound_ball_volume_numeric(const StateSpace& space1, const StateSpace& space2, double w1,
                                    double w2, double p, double r) {
  if (!is_well_behaved(space1)) {
    throw StructuralError("first factor must be well behaved (L2, circle or torus): " +
                          describe(space1));
  }
  if (!(w1 > 0.0 && w2 > 0.0)) throw StructuralError("weights must be positive");
  if (!(p >= 1.0)) throw StructuralError("exponent p must be >= 1");
  if (!(r >= 0.0)) throw DomainError("ball radius must be nonnegative");
  if (r == 0.0) return 0.0;
  double upper = r / std::pow(w1, 1.0 / p);
  upper = std::min(upper, space1.is_leaf() ? saturation_radius(space1) : extent(space1));
  auto integrand = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    const double inner_p = (std::pow(r, p) - w1 * std::pow(rho, p)) / w2;
    const double inner = inner_p > 0.0 ? std::pow(inner_p, 1.0 / p) : 0.0;
    return sphere_surface(space1, rho) * ball_volume(space2, inner);
  };
  return integrate(integrand, 0.0, upper);
}

std::optional<double> peeled_ball_volume(const StateSpace& space, double r) {
  std::vector<WeightedLeaf> leaves;
  if (space.is_leaf() || !flatten_p1(space, 1.0, leaves)) return std::nullopt;
  std::size_t pick = leaves.size();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (is_well_behaved(leaves[i].leaf)) {
      pick = i;
      break;
    }
  }
  if (pick == leaves.size()) return std::nullopt;
  std::vector<StateSpace> rest;
  std::vector<double> weights;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (i == pick) continue;
    rest.push_back(leaves[i].leaf);
    weights.push_back(leaves[i].weight);
  }
  if (rest.size() == 1) {
    return compound_ball_volume_numeric(leaves[pick].leaf, rest[0], leaves[pick].weight, weights[0], 1.0, r);
  }
  return compound_ball_volume_numeric(leaves[pick].leaf, StateSpace::compound(std::move(rest), std::move(weights)),
                                      leaves[pick].weight, 1.0, 1.0, r);
}

double unit_ball_coefficient(const StateSpace& space) {
  if (!space.is_leaf()) {
    if (auto v = compound_closed_form(space, 1.0, true)) return *v;
  }
  return ball_volume(space, 1.0);
}

RadiusParams radius_params_for(const StateSpace& space, double eta, std::optional<double> mu_free) {
  RadiusParams p;
  p.eta = eta;
  p.d = space.dimension();
  p.zeta_d = unit_ball_coefficient(space);
  p.mu_free = mu_free.value_or(measure(space));
  return p;
}

double connection_radius(std::int64_t n, const RadiusParams& params) {
  if (n < 2) throw DomainError("connection radius needs n >= 2");
  if (!(params.eta >= 1.0)) throw DomainError("eta must be >= 1");
  if (!(params.mu_free > 0.0) || !(params.zeta_d > 0.0) || params.d < 1) {
    throw DomainError("radius parameters must be positive");
  }
  const double d = params.d;
  const double nn = static_cast<double>(n);
  return 2.0 * params.eta * std::pow(params.mu_free / params.zeta_d, 1.0 / d) * std::pow(1.0 / d, 1.0 / d) *
         std::pow(std::log(nn) / nn, 1.0 / d);
}

int knn_count(std::int64_t n, int d) {
  if (n < 2) throw DomainError("k-NN count needs n >= 2");
  if (d < 1) throw DomainError("dimension must be >= 1");
  const double k = std::ceil(std::numbers::e * (1.0 + 1.0 / d) * std::log(static_cast<double>(n)));
  return std::max(1, static_cast<int>(k));
}

EffectiveRadius effective_radius(const StateSpace& space, std::int64_t n, const RadiusParams& params) {
  if (space.kind() != SpaceKind::Compound || space.children().size() != 2 || space.p() != 1.0) {
    throw StructuralError("effective radius needs a two-factor p = 1 compound");
  }
  const auto& x1 = space.children()[0];
  const auto& x2 = space.children()[1];
  if (measure(x1) < measure(x2)) throw StructuralError("effective radius needs mu(X1) >= mu(X2)");
  const double rn = connection_radius(n, params);
  const double w1 = space.weights()[0];
  const double w2 = space.weights()[1];
  if (rn <= w2 * extent(x2)) return {rn, false};
  // Keep the free fraction of the full space when moving to X1.
  const double free_fraction = params.mu_free / measure(space);
  RadiusParams p1;
  p1.eta = params.eta;
  p1.d = x1.dimension();
  p1.zeta_d = unit_ball_coefficient(x1);
  p1.mu_free = measure(x1) * free_fraction;
  return {w1 * connection_radius(n, p1), true};
}

// ---------------------------------------------------------------------------

namespace {

void center_into(const StateSpace& space, double* out) {
  switch (space.kind()) {
    case SpaceKind::EuclideanL2:
    case SpaceKind::EuclideanL1: {
      const auto b = space.bounds();
      for (std::size_t i = 0; i < b.size(); ++i) out[i] = 0.5 * (b[i].lo + b[i].hi);
      return;
    }
    case SpaceKind::Circle: out[0] = 0.0; return;
    case SpaceKind::Sphere2: out[0] = 0.0, out[1] = 0.0, out[2] = 1.0; return;
    case SpaceKind::SO3: out[0] = 1.0, out[1] = out[2] = out[3] = 0.0; return;
    case SpaceKind::Compound:
      for (std::size_t i = 0; i < space.children().size(); ++i) {
        center_into(space.children()[i], out + space.child_offset(i));
      }
      return;
  }
}

// Throws when a ball of radius `reach` (in this subspace's metric) around the center clips bounds.
void check_reach(const StateSpace& space, double reach) {
  if (space.is_euclidean()) {
    for (const auto& b : space.bounds()) {
      if (reach > 0.5 * b.length() * (1.0 + 1e-12)) {
        throw InfeasibleOracle("ball of radius " + std::to_string(reach) + " clips the bounds of " +
                               describe(space));
      }
    }
    return;
  }
  if (space.is_leaf()) return;
  for (std::size_t i = 0; i < space.children().size(); ++i) {
    check_reach(space.children()[i], reach / std::pow(space.weights()[i], 1.0 / space.p()));
  }
}

}  // namespace

Point ball_center(const StateSpace& space) {
  std::vector<double> c(space.width());
  center_into(space, c.data());
  return Point(std::move(c));
}

MonteCarloEstimate ball_volume_monte_carlo(const StateSpace& space, double r, std::int64_t trials,
                                           Rng& rng) {
  if (trials < 1000) throw DomainError("Monte-Carlo oracle needs at least 1000 trials");
  if (!(r >= 0.0)) throw DomainError("ball radius must be nonnegative");
  if (r == 0.0) return {0.0, 0.0};
  check_reach(space, r);
  const Point center = ball_center(space);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < trials; ++i) {
    const Point x = sample_uniform(space, rng);
    if (distance_unchecked(space, center.data(), x.data()) <= r) ++hits;
  }
  const double f = static_cast<double>(hits) / static_cast<double>(trials);
  const double mu = measure(space);
  return {f * mu, mu * std::sqrt(f * (1.0 - f) / static_cast<double>(trials))};
}

}  // namespace mpb
