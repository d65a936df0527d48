#include "mpb/collision.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "mpb/errors.hpp"
#include "mpb/rng.hpp"

namespace mpb {

namespace {

constexpr double kEps = 1e-6;
constexpr int kMaxRejections = 100;
constexpr int kGridCells = 64;

void collect_euclidean(const StateSpace& space, std::size_t base, std::vector<std::size_t>& out) {
  if (space.is_euclidean()) {
    for (std::size_t i = 0; i < space.width(); ++i) out.push_back(base + i);
    return;
  }
  if (space.is_leaf()) return;
  for (std::size_t i = 0; i < space.children().size(); ++i) {
    collect_euclidean(space.children()[i], base + space.child_offset(i), out);
  }
}

double point_segment_distance_sq(double px, double py, const Segment2& s) {
  const double dx = s.bx - s.ax;
  const double dy = s.by - s.ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - s.ax) * dx + (py - s.ay) * dy) / len2, 0.0, 1.0);
  const double cx = s.ax + t * dx - px;
  const double cy = s.ay + t * dy - py;
  return cx * cx + cy * cy;
}

struct ValidityVisitor {
  const Scenario& sc;
  const double* x;

  bool operator()(const Freespace&) const { return true; }

  bool operator()(const HypercubeBox& box) const {
    if (box.mu <= 0.0) return true;
    const double h = std::pow(box.mu, 1.0 / box.d);
    const double lo = 0.5 - 0.5 * h;
    const double hi = 0.5 + 0.5 * h;
    for (std::size_t off : sc.workspace_coords) {
      if (x[off] < lo || x[off] > hi) return true;
    }
    return false;
  }

  bool operator()(const SegmentSoup2D& soup) const {
    const double px = x[sc.workspace_coords[0]];
    const double py = x[sc.workspace_coords[1]];
    const double r2 = soup.inflation * soup.inflation;
    for (const auto& s : soup.segments) {
      if (point_segment_distance_sq(px, py, s) <= r2) return false;
    }
    return true;
  }

  bool operator()(const RectangleStrip& strip) const {
    const double px = x[sc.workspace_coords[0]];
    const double py = x[sc.workspace_coords[1]];
    return px >= 0.0 && px <= strip.length && py >= 0.0 && py <= 1.0;
  }
};

std::vector<Segment2> random_soup(int m, Rng& rng) {
  std::vector<Segment2> segs;
  if (m <= 0) return segs;
  if (m < 3) {
    for (int i = 0; i < m; ++i) {
      const double cx = uniform(rng, 0.2, 0.8);
      const double cy = uniform(rng, 0.2, 0.8);
      const double a = uniform(rng, 0.0, std::numbers::pi);
      segs.push_back({cx - 0.05 * std::cos(a), cy - 0.05 * std::sin(a), cx + 0.05 * std::cos(a),
                      cy + 0.05 * std::sin(a)});
    }
    return segs;
  }
  // A fixed number of convex polygons whose vertex counts grow with m, so the
  // obstacle footprint stays comparable while CD cost scales with m.
  const int polygons = std::min(16, m / 3);
  for (int p = 0; p < polygons; ++p) {
    const int verts = m / polygons + (p < m % polygons ? 1 : 0);
    const double cx = uniform(rng, 0.15, 0.85);
    const double cy = uniform(rng, 0.15, 0.85);
    const double radius = uniform(rng, 0.03, 0.07);
    std::vector<double> angles(static_cast<std::size_t>(verts));
    for (auto& a : angles) a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    std::sort(angles.begin(), angles.end());
    for (int i = 0; i < verts; ++i) {
      const double a0 = angles[static_cast<std::size_t>(i)];
      const double a1 = angles[static_cast<std::size_t>((i + 1) % verts)];
      segs.push_back({cx + radius * std::cos(a0), cy + radius * std::sin(a0), cx + radius * std::cos(a1),
                      cy + radius * std::sin(a1)});
    }
  }
  return segs;
}

// Breadth-first search over grid cell centers between the start and goal cells.
bool coarse_path_exists(const Scenario& sc) {
  auto cell_of = [](double v) { return std::clamp(static_cast<int>(v * kGridCells), 0, kGridCells - 1); };
  std::vector<double> probe(sc.space.width(), 0.0);
  auto free_cell = [&](int i, int j) {
    probe[sc.workspace_coords[0]] = (i + 0.5) / kGridCells;
    probe[sc.workspace_coords[1]] = (j + 0.5) / kGridCells;
    return config_valid(sc, probe.data());
  };
  const int si = cell_of(sc.start[sc.workspace_coords[0]]);
  const int sj = cell_of(sc.start[sc.workspace_coords[1]]);
  const int gi = cell_of(sc.goal[sc.workspace_coords[0]]);
  const int gj = cell_of(sc.goal[sc.workspace_coords[1]]);
  std::vector<char> seen(kGridCells * kGridCells, 0);
  std::deque<std::pair<int, int>> queue{{si, sj}};
  seen[si * kGridCells + sj] = 1;
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    if (i == gi && j == gj) return true;
    const int di[] = {1, -1, 0, 0};
    const int dj[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k];
      const int nj = j + dj[k];
      if (ni < 0 || nj < 0 || ni >= kGridCells || nj >= kGridCells) continue;
      if (seen[ni * kGridCells + nj]) continue;
      seen[ni * kGridCells + nj] = 1;
      if (free_cell(ni, nj) || (ni == gi && nj == gj)) queue.emplace_back(ni, nj);
    }
  }
  return false;
}

void finish(Scenario& sc, const ScenarioParams& params) {
  collect_euclidean(sc.space, 0, sc.workspace_coords);
  if (params.step) {
    if (!(*params.step > 0.0)) throw ConfigError("step must be positive");
    sc.step = *params.step;
  } else {
    if (!(params.res_fraction > 0.0)) throw ConfigError("res_fraction must be positive");
    sc.res_fraction = params.res_fraction;
    sc.step = params.res_fraction * extent(sc.space);
  }
}

}  // namespace

bool config_valid(const Scenario& scenario, const double* x) {
  return std::visit(ValidityVisitor{scenario, x}, scenario.obstacles);
}

bool config_valid(const Scenario& scenario, const Point& x) {
  if (x.size() != scenario.space.width()) throw StructuralError("point does not match the scenario space");
  return config_valid(scenario, x.data());
}

Scenario make_scenario(const ScenarioParams& params, std::uint64_t seed) {
  Scenario sc;
  sc.kind = params.kind;
  if (params.kind == "hypercube" || params.kind == "freespace") {
    if (params.d < 1) throw ConfigError("d must be >= 1");
    sc.space = StateSpace::l2_unit(params.d);
    if (params.kind == "hypercube") {
      if (!(params.mu >= 0.0 && params.mu < 1.0)) throw ConfigError("mu must lie in [0, 1)");
      sc.obstacles = HypercubeBox{params.d, params.mu};
      sc.mu_free = 1.0 - params.mu;
    } else {
      sc.obstacles = Freespace{};
      sc.mu_free = 1.0;
    }
    sc.start = Point(std::vector<double>(static_cast<std::size_t>(params.d), kEps));
    sc.goal = Point(std::vector<double>(static_cast<std::size_t>(params.d), 1.0 - kEps));
    finish(sc, params);
  } else if (params.kind == "segments") {
    if (params.m < 0) throw ConfigError("m must be >= 0");
    if (!(params.inflation > 0.0)) throw ConfigError("inflation must be positive");
    sc.space = StateSpace::l2_unit(2);
    sc.start = Point{0.05, 0.05};
    sc.goal = Point{0.95, 0.95};
    finish(sc, params);
    Rng rng(seed);
    int round = 0;
    for (;; ++round) {
      if (round >= kMaxRejections) {
        throw GenerationError("no feasible segment soup after " + std::to_string(kMaxRejections) + " rounds");
      }
      sc.obstacles = SegmentSoup2D{random_soup(params.m, rng), params.inflation};
      if (config_valid(sc, sc.start) && config_valid(sc, sc.goal) && coarse_path_exists(sc)) break;
    }
  } else if (params.kind == "strip") {
    if (!(params.length >= 1.0)) throw ConfigError("strip length must be >= 1");
    if (!(params.rotation_weight > 0.0)) throw ConfigError("rotation weight must be positive");
    sc.space = StateSpace::compound({StateSpace::l2({{0.0, params.length}, {0.0, 1.0}}), StateSpace::circle()},
                                    {1.0, params.rotation_weight});
    sc.obstacles = RectangleStrip{params.length};
    sc.start = make_point(sc.space, {kEps, 0.5, 0.0});
    sc.goal = make_point(sc.space, {params.length - kEps, 0.5, std::numbers::pi / 2.0});
    finish(sc, params);
  } else {
    throw ConfigError("unknown scenario kind '" + params.kind + "'");
  }
  validate_point(sc.space, sc.start);
  validate_point(sc.space, sc.goal);
  if (!config_valid(sc, sc.start) || !config_valid(sc, sc.goal)) {
    throw GenerationError("start or goal configuration is in collision");
  }
  return sc;
}

double chi(const PrimitiveLedger& ledger) {
  if (ledger.t_cd_ns <= 0) throw DomainError("chi is undefined when no CD time was recorded");
  return static_cast<double>(ledger.t_nn_ns) / static_cast<double>(ledger.t_cd_ns);
}

// ---------------------------------------------------------------------------

CollisionChecker::CollisionChecker(const Scenario& scenario, PrimitiveLedger& ledger)
    : scenario_(scenario), ledger_(ledger), scratch_(scenario.space.width()) {}

bool CollisionChecker::is_valid(const double* x) {
  ScopedTimer timer(ledger_.t_cd_ns);
  ++ledger_.cd;
  return config_valid(scenario_, x);
}

bool CollisionChecker::is_valid(const Point& x) {
  if (x.size() != scenario_.space.width()) throw StructuralError("point does not match the scenario space");
  return is_valid(x.data());
}

std::size_t CollisionChecker::lp_steps(const Point& x, const Point& y) const {
  const double d = distance(scenario_.space, x, y);
  if (d <= 0.0) return 0;
  // The small offset keeps exact multiples of step (e.g. 0.05 / 0.01) from rounding up.
  return static_cast<std::size_t>(std::ceil(d / scenario_.step - 1e-9));
}

bool CollisionChecker::segment_free(const Point& x, const Point& y, std::size_t first, std::size_t last,
                                    std::size_t k) {
  for (std::size_t i = first; i <= last; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(k);
    interpolate_into(scenario_.space, x.data(), y.data(), t, scratch_.data());
    ++ledger_.cd_in_lp;
    if (!config_valid(scenario_, scratch_.data())) return false;
  }
  return true;
}

bool CollisionChecker::local_plan(const Point& x, const Point& y) {
  ScopedTimer timer(ledger_.t_cd_ns);
  ++ledger_.lp;
  const std::size_t k = lp_steps(x, y);
  if (k == 0) return true;
  return segment_free(x, y, 1, k, k);
}

bool CollisionChecker::motion_check(const Point& x, const Point& y) {
  ScopedTimer timer(ledger_.t_cd_ns);
  ++ledger_.lp;
  ++ledger_.cd;
  if (!config_valid(scenario_, y.data())) return false;
  const std::size_t k = lp_steps(x, y);
  if (k <= 1) return true;
  return segment_free(x, y, 1, k - 1, k);
}

bool local_plan_free(const Scenario& scenario, const Point& x, const Point& y, double step) {
  const double d = distance(scenario.space, x, y);
  if (d <= 0.0) return true;
  const auto k = static_cast<std::size_t>(std::ceil(d / step - 1e-9));
  std::vector<double> buf(scenario.space.width());
  for (std::size_t i = 1; i <= k; ++i) {
    interpolate_into(scenario.space, x.data(), y.data(), static_cast<double>(i) / static_cast<double>(k),
                     buf.data());
    if (!config_valid(scenario, buf.data())) return false;
  }
  return true;
}

}  // namespace mpb
