#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mpb/errors.hpp"
#include "mpb/planner.hpp"
#include "mpb/rng.hpp"
#include "mpb/volume.hpp"

using namespace mpb;

namespace {

Scenario hypercube(int d, double mu) {
  ScenarioParams p;
  p.kind = mu > 0 ? "hypercube" : "freespace";
  p.d = d;
  p.mu = mu;
  return make_scenario(p, 1);
}

const EdgeFilter kAll = [](const RoadmapEdge&) { return true; };

// How far a point sits inside the centered box (negative outside).
double box_depth(const Scenario& s, const Point& x) {
  const auto& box = std::get<HypercubeBox>(s.obstacles);
  const double h = std::pow(box.mu, 1.0 / box.d);
  double depth = std::numeric_limits<double>::infinity();
  for (int i = 0; i < box.d; ++i) depth = std::min(depth, h / 2 - std::fabs(x[static_cast<std::size_t>(i)] - 0.5));
  return depth;
}

// Re-validates an edge at half the planner's step. A stepped LP can clip a box
// corner between two checks; the clipped chord is shorter than one step, so
// every missed point lies within step/2 of the boundary.
void revalidate(const Scenario& s, const Point& a, const Point& b) {
  const double len = distance(s.space, a, b);
  const auto k = static_cast<std::size_t>(std::ceil(len / (s.step / 2)));
  for (std::size_t i = 1; i <= k; ++i) {
    const auto x = interpolate(s.space, a, b, static_cast<double>(i) / static_cast<double>(k));
    if (config_valid(s, x)) continue;
    REQUIRE(std::holds_alternative<HypercubeBox>(s.obstacles));
    CHECK(box_depth(s, x) <= s.step / 2 + 1e-12);
  }
}

void check_path(const Scenario& s, const PlanResult& r) {
  REQUIRE(r.success);
  REQUIRE(r.path.size() >= 2);
  CHECK(r.path.front() == s.start);
  CHECK(r.path.back() == s.goal);
  double cost = 0;
  for (std::size_t i = 1; i < r.path.size(); ++i) {
    cost += distance(s.space, r.path[i - 1], r.path[i]);
    CHECK(local_plan_free(s, r.path[i - 1], r.path[i], s.step));
    revalidate(s, r.path[i - 1], r.path[i]);
  }
  CHECK(r.cost == doctest::Approx(cost).epsilon(1e-12));
  CHECK(r.cost >= distance(s.space, s.start, s.goal) - 1e-9);
}

void check_roadmap(const Scenario& s, const Roadmap& g) {
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    CHECK(std::fabs(edge.weight - distance(s.space, g.nodes[edge.u], g.nodes[edge.v])) <= 1e-12);
    const auto& au = g.adjacency[edge.u];
    const auto& av = g.adjacency[edge.v];
    CHECK(std::count(au.begin(), au.end(), e) == 1);
    CHECK(std::count(av.begin(), av.end(), e) == 1);
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("shortest path basics") {
  Roadmap g;
  for (int i = 0; i < 3; ++i) g.add_node(Point{static_cast<double>(i)});
  g.add_edge(0, 1, 1.0, EdgeStatus::Free);
  g.add_edge(1, 2, 1.0, EdgeStatus::Free);
  g.add_edge(0, 2, 3.0, EdgeStatus::Free);
  auto sp = shortest_path(g, 0, 2, kAll);
  CHECK(sp.found);
  CHECK(sp.ids == std::vector<NodeId>{0, 1, 2});
  CHECK(sp.cost == 2.0);
  sp = shortest_path(g, 1, 1, kAll);
  CHECK(sp.found);
  CHECK(sp.ids.empty());
  CHECK(sp.cost == 0.0);
  sp = shortest_path(g, 0, 2, [](const RoadmapEdge& e) { return e.weight < 2; });
  CHECK(sp.found);
  sp = shortest_path(g, 0, 2, [](const RoadmapEdge& e) { return e.u != 1 && e.v != 1 && e.weight < 2; });
  CHECK_FALSE(sp.found);

  // Two equal-cost routes: 0-1-3 and 0-2-3; the smaller id sequence wins.
  Roadmap h;
  for (int i = 0; i < 4; ++i) h.add_node(Point{0.0});
  h.add_edge(0, 2, 1.0, EdgeStatus::Free);
  h.add_edge(2, 3, 1.0, EdgeStatus::Free);
  h.add_edge(0, 1, 1.0, EdgeStatus::Free);
  h.add_edge(1, 3, 1.0, EdgeStatus::Free);
  CHECK(shortest_path(h, 0, 3, kAll).ids == std::vector<NodeId>{0, 1, 3});
}

TEST_CASE("shortest path matches Bellman-Ford") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    Roadmap g;
    const int n = 30;
    for (int i = 0; i < n; ++i) g.add_node(Point{0.0});
    for (int e = 0; e < 70; ++e) {
      const auto u = static_cast<NodeId>(rng() % n);
      const auto v = static_cast<NodeId>(rng() % n);
      if (u != v) g.add_edge(u, v, uniform(rng, 0.1, 2.0), rng() % 5 ? EdgeStatus::Free : EdgeStatus::Blocked);
    }
    const auto filter = [](const RoadmapEdge& e) { return e.status == EdgeStatus::Free; };
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    dist[0] = 0;
    for (int it = 0; it < n; ++it)
      for (const auto& e : g.edges) {
        if (e.status != EdgeStatus::Free) continue;
        dist[e.v] = std::min(dist[e.v], dist[e.u] + e.weight);
        dist[e.u] = std::min(dist[e.u], dist[e.v] + e.weight);
      }
    for (NodeId t = 1; t < n; ++t) {
      const auto sp = shortest_path(g, 0, t, filter);
      CHECK(sp.found == std::isfinite(dist[t]));
      if (!sp.found) continue;
      CHECK(sp.cost == doctest::Approx(dist[t]).epsilon(1e-12));
      CHECK(sp.ids.front() == 0);
      CHECK(sp.ids.back() == t);
    }
  }
}

TEST_CASE("resolve strategy") {
  const auto unit = StateSpace::l2_unit(2);
  auto r = resolve_strategy(Radial{}, unit, 100);
  CHECK(r.radial);
  CHECK(r.radius == doctest::Approx(0.17123).epsilon(1e-4));
  r = resolve_strategy(Knn{}, unit, 100);
  CHECK_FALSE(r.radial);
  CHECK(r.k == 19);
  r = resolve_strategy(Knn{2.0}, unit, 100);
  CHECK(r.k == 38);

  const auto strip = make_scenario({.kind = "strip"}, 1);
  r = resolve_strategy(Radial{1.0, std::nullopt, true}, strip.space, 2000, strip.mu_free);
  CHECK(r.projected);
  const auto plane = strip.space.children()[0];
  RadiusParams p = radius_params_for(plane);
  CHECK(r.radius == doctest::Approx(connection_radius(2000, p)).epsilon(1e-12));
  const auto plain = resolve_strategy(Radial{}, strip.space, 2000, strip.mu_free);
  CHECK_FALSE(plain.projected);
  CHECK(plain.radius < r.radius);
  CHECK_THROWS(resolve_strategy(Radial{0.5}, unit, 100));
}

TEST_CASE("sPRM* on the free unit square") {
  const auto s = hypercube(2, 0.0);
  const auto r = sprm_star(s, 500, Radial{1.0, 1.0}, 7);
  check_path(s, r);
  CHECK(r.cost >= std::sqrt(2.0));
  CHECK(r.cost <= 1.10 * std::sqrt(2.0));
  check_roadmap(s, r.roadmap);
  CHECK(r.ledger.rnn == r.roadmap.nodes.size());
  CHECK(r.ledger.lp == r.roadmap.edges.size());
  CHECK(r.stats.n_free == 500);
  CHECK(r.ledger.cd == r.stats.n_sampled);

  // Four nodes and k_2 = 3: the graph is complete, so the direct edge wins.
  const auto k = sprm_star(s, 2, Knn{}, 7);
  check_path(s, k);
  CHECK(k.path.size() == 2);
  CHECK(k.cost == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("sPRM* around the box") {
  const auto s = hypercube(2, 0.25);
  const auto r = sprm_star(s, 4000, Radial{}, 1);
  check_path(s, r);
  CHECK(r.cost == doctest::Approx(2 * std::sqrt(0.625)).epsilon(0.05));
  const auto k = sprm_star(s, 1000, Knn{}, 1);
  check_path(s, k);
  check_roadmap(s, k.roadmap);
  CHECK(k.ledger.knn == k.roadmap.nodes.size());
  CHECK(k.ledger.rnn == 0);
}

TEST_CASE("lazy sPRM*") {
  const auto free = hypercube(2, 0.0);
  const auto lz = lazy_sprm_star(free, 500, Radial{}, 3);
  check_path(free, lz);
  CHECK(lz.ledger.lp == lz.path.size() - 1);
  CHECK(lz.stats.repair_rounds == 1);

  const auto s = hypercube(2, 0.25);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto eager = sprm_star(s, 4000, Radial{}, seed);
    const auto lazy = lazy_sprm_star(s, 4000, Radial{}, seed);
    CHECK(lazy.success == eager.success);
    if (lazy.success) {
      check_path(s, lazy);
      CHECK(lazy.cost == doctest::Approx(eager.cost).epsilon(1e-12));
      CHECK(lazy.stats.edges_blocked > 0);
    }
    CHECK(lazy.ledger.cd_in_lp < eager.ledger.cd_in_lp);
    CHECK(lazy.stats.edges_unknown > 0);
  }
}

TEST_CASE("RRT* on free space") {
  const auto s = hypercube(2, 0.0);
  const auto r = rrt_star(s, 2000, Radial{}, 3);
  check_path(s, r);
  CHECK(r.cost <= 1.15 * distance(s.space, s.start, s.goal));
  CHECK(r.ledger.lp_a == 2000);
  CHECK(r.ledger.nn == 2000);
  CHECK(r.ledger.lp == r.ledger.lp_a + r.ledger.lp_b);
}

TEST_CASE("RRT* tree invariant") {
  for (const auto& s : {hypercube(2, 0.25), hypercube(3, 0.25)}) {
    for (const ConnectionStrategy& strat : {ConnectionStrategy{Radial{}}, ConnectionStrategy{Knn{}}}) {
      const auto r = rrt_star(s, 1500, strat, 5);
      const auto& par = r.parent;
      REQUIRE(par.size() == r.cost_to_come.size());
      CHECK(par[0] == -1);
      CHECK(r.cost_to_come[0] == 0.0);
      for (std::size_t i = 1; i < par.size(); ++i) {
        REQUIRE(par[i] >= 0);
        const auto p = static_cast<std::size_t>(par[i]);
        CHECK(r.cost_to_come[i] ==
              doctest::Approx(r.cost_to_come[p] + distance(s.space, r.roadmap.nodes[p], r.roadmap.nodes[i]))
                  .epsilon(1e-9));
        CHECK(local_plan_free(s, r.roadmap.nodes[p], r.roadmap.nodes[i], s.step));
      }
      CHECK(r.roadmap.edges.size() + 1 == r.roadmap.nodes.size());
      if (r.success) check_path(s, r);
    }
  }
}

TEST_CASE("RRT* rewiring never raises cost-to-come") {
  // Cost-to-come of each node after more iterations is no larger than before.
  const auto s = hypercube(2, 0.25);
  const auto a = rrt_star(s, 800, Radial{}, 8);
  const auto b = rrt_star(s, 1600, Radial{}, 8);
  // The goal, when connected, is appended after the tree nodes.
  const std::size_t tree_a = a.stats.n_free + 1;
  REQUIRE(b.stats.n_free + 1 >= tree_a);
  for (std::size_t i = 0; i < tree_a; ++i) {
    REQUIRE(a.roadmap.nodes[i] == b.roadmap.nodes[i]);
    CHECK(b.cost_to_come[i] <= a.cost_to_come[i] + 1e-12);
  }
  if (a.success && b.success) CHECK(b.cost <= a.cost + 1e-12);
}

TEST_CASE("RRT* unsuccessful iterations grow with d") {
  // Free space never blocks an extension, so the trend is asserted around the centered box.
  std::vector<double> frac;
  for (int d : {4, 8, 12}) {
    const auto s = hypercube(d, 0.25);
    const auto r = rrt_star(s, 3000, Radial{}, 1);
    frac.push_back(static_cast<double>(r.stats.unsuccessful_iterations) / static_cast<double>(r.stats.iterations));
  }
  CHECK(frac[0] < frac[1]);
  CHECK(frac[1] < frac[2]);
}

TEST_CASE("planners are deterministic") {
  const auto s = hypercube(3, 0.25);
  auto same = [](const PlanResult& a, const PlanResult& b) {
    CHECK(a.success == b.success);
    CHECK(a.cost == b.cost);
    CHECK(a.path_ids == b.path_ids);
    CHECK(a.ledger.nn == b.ledger.nn);
    CHECK(a.ledger.rnn == b.ledger.rnn);
    CHECK(a.ledger.knn == b.ledger.knn);
    CHECK(a.ledger.cd == b.ledger.cd);
    CHECK(a.ledger.lp == b.ledger.lp);
    CHECK(a.ledger.lp_b == b.ledger.lp_b);
    CHECK(a.ledger.cd_in_lp == b.ledger.cd_in_lp);
  };
  same(sprm_star(s, 800, Radial{}, 4), sprm_star(s, 800, Radial{}, 4));
  same(lazy_sprm_star(s, 800, Knn{}, 4), lazy_sprm_star(s, 800, Knn{}, 4));
  same(rrt_star(s, 800, Radial{}, 4), rrt_star(s, 800, Radial{}, 4));
  PlannerOptions linear;
  linear.nn = NnKind::LinearScan;
  const auto t = sprm_star(s, 800, Radial{}, 4);
  const auto l = sprm_star(s, 800, Radial{}, 4, linear);
  CHECK(t.cost == l.cost);
  CHECK(t.ledger.cd_in_lp == l.ledger.cd_in_lp);
}

TEST_CASE("sPRM* cost is anytime over n") {
  const auto s = hypercube(2, 0.25);
  double prev = std::numeric_limits<double>::infinity();
  for (std::int64_t n : {500, 1000, 2000, 4000}) {
    std::vector<double> costs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto r = sprm_star(s, n, Radial{}, seed);
      costs.push_back(r.success ? r.cost : std::numeric_limits<double>::infinity());
    }
    const double m = median(costs);
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("strategy descriptions") {
  CHECK(describe(Radial{}) == "radial");
  CHECK(describe(Radial{1.0, std::nullopt, true}) == "radial+heuristic");
  CHECK(describe(Knn{}) == "knn");
}
