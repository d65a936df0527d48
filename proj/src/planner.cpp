#include "mpb/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "mpb/errors.hpp"
#include "mpb/rng.hpp"
#include "mpb/volume.hpp"

namespace mpb {

NodeId Roadmap::add_node(Point p) {
  nodes.push_back(std::move(p));
  adjacency.emplace_back();
  return static_cast<NodeId>(nodes.size() - 1);
}

std::uint32_t Roadmap::add_edge(NodeId u, NodeId v, double weight, EdgeStatus status) {
  const auto e = static_cast<std::uint32_t>(edges.size());
  edges.push_back({u, v, weight, status});
  adjacency[u].push_back(e);
  adjacency[v].push_back(e);
  return e;
}

namespace {

bool qualifies_for_projection(const StateSpace& space) {
  if (space.kind() != SpaceKind::Compound || space.children().size() != 2 || space.p() != 1.0) return false;
  return measure(space.children()[0]) >= measure(space.children()[1]);
}

// Caches the unit-ball volume so incremental planners can re-resolve per step.
class StrategyResolver {
 public:
  StrategyResolver(const ConnectionStrategy& strategy, const StateSpace& space, std::optional<double> mu_free)
      : strategy_(strategy), space_(space) {
    if (const auto* knn = std::get_if<Knn>(&strategy_)) {
      if (!(knn->multiplier > 0.0)) throw DomainError("k-NN multiplier must be positive");
      params_ = radius_params_for(space, 1.0, mu_free);
    } else {
      const auto& radial = std::get<Radial>(strategy_);
      params_ = radius_params_for(space, radial.eta, radial.mu_free ? radial.mu_free : mu_free);
      project_ = radial.use_projection_heuristic && qualifies_for_projection(space);
    }
  }

  ResolvedStrategy at(std::int64_t n) const {
    if (n < 2) throw DomainError("strategy resolution needs n >= 2");
    ResolvedStrategy out;
    if (const auto* knn = std::get_if<Knn>(&strategy_)) {
      out.radial = false;
      out.k = static_cast<std::size_t>(
          std::max(1.0, std::ceil(knn->multiplier * knn_count(n, space_.dimension()) - 1e-9)));
    } else if (project_) {
      const auto eff = effective_radius(space_, n, params_);
      out.radius = eff.radius;
      out.projected = eff.projected;
    } else {
      out.radius = connection_radius(n, params_);
    }
    return out;
  }

  /// Plain connection radius with the cached parameters (goal connection under k-NN).
  double plain_radius(std::int64_t n) const { return connection_radius(n, params_); }

 private:
  const ConnectionStrategy& strategy_;
  const StateSpace& space_;
  RadiusParams params_;
  bool project_ = false;
};

}  // namespace

ResolvedStrategy resolve_strategy(const ConnectionStrategy& strategy, const StateSpace& space, std::int64_t n,
                                  std::optional<double> scenario_mu_free) {
  if (n < 2) throw DomainError("strategy resolution needs n >= 2");
  return StrategyResolver(strategy, space, scenario_mu_free).at(n);
}

std::string describe(const ConnectionStrategy& strategy) {
  std::ostringstream os;
  if (const auto* knn = std::get_if<Knn>(&strategy)) {
    os << "knn";
    if (knn->multiplier != 1.0) os << "x" << knn->multiplier;
  } else {
    const auto& r = std::get<Radial>(strategy);
    os << (r.use_projection_heuristic ? "radial+heuristic" : "radial");
    if (r.eta != 1.0) os << "(eta=" << r.eta << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

ShortestPath shortest_path(const Roadmap& roadmap, NodeId src, NodeId dst, const EdgeFilter& filter) {
  const std::size_t n = roadmap.nodes.size();
  if (src >= n || dst >= n) throw StructuralError("shortest_path endpoint not in roadmap");
  ShortestPath out;
  if (src == dst) {
    out.found = true;
    return out;
  }
  // Distances to dst, then a greedy walk from src that always takes the
  // smallest-id neighbor lying on some shortest path.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> to_dst(n, kInf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  to_dst[dst] = 0.0;
  heap.emplace(0.0, dst);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > to_dst[u]) continue;
    for (std::uint32_t e : roadmap.adjacency[u]) {
      const auto& edge = roadmap.edges[e];
      if (!filter(edge)) continue;
      const NodeId v = roadmap.other(e, u);
      const double nd = d + edge.weight;
      if (nd < to_dst[v]) {
        to_dst[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  if (to_dst[src] == kInf) return out;

  std::vector<char> visited(n, 0);
  NodeId u = src;
  out.ids.push_back(u);
  visited[u] = 1;
  while (u != dst) {
    NodeId best = std::numeric_limits<NodeId>::max();
    double best_w = 0.0;
    for (std::uint32_t e : roadmap.adjacency[u]) {
      const auto& edge = roadmap.edges[e];
      if (!filter(edge)) continue;
      const NodeId v = roadmap.other(e, u);
      if (visited[v] || to_dst[v] == kInf) continue;
      const double slack = 1e-12 * (1.0 + to_dst[u]);
      if (edge.weight + to_dst[v] <= to_dst[u] + slack && v < best) {
        best = v;
        best_w = edge.weight;
      }
    }
    if (best == std::numeric_limits<NodeId>::max()) {
      throw std::logic_error("shortest path reconstruction stalled");
    }
    out.cost += best_w;
    u = best;
    visited[u] = 1;
    out.ids.push_back(u);
  }
  out.found = true;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void tally_edges(PlanResult& result) {
  result.stats.edges_unknown = result.stats.edges_free = result.stats.edges_blocked = 0;
  for (const auto& e : result.roadmap.edges) {
    switch (e.status) {
      case EdgeStatus::Unknown: ++result.stats.edges_unknown; break;
      case EdgeStatus::Free: ++result.stats.edges_free; break;
      case EdgeStatus::Blocked: ++result.stats.edges_blocked; break;
    }
  }
}

void fill_path(PlanResult& result, const ShortestPath& sp) {
  result.success = true;
  result.path_ids = sp.ids;
  result.cost = sp.cost;
  result.path.clear();
  for (NodeId id : sp.ids) result.path.push_back(result.roadmap.nodes[id]);
  if (sp.ids.empty()) result.path.push_back(result.roadmap.nodes[0]);
}

// Samples n_target free configurations, adds start (id 0) and goal (id 1) and
// connects every node to its neighbor set. Edges are created Unknown.
void build_roadmap(const Scenario& scenario, std::int64_t n_target, const ConnectionStrategy& strategy,
                   std::uint64_t seed, const PlannerOptions& options, CollisionChecker& checker,
                   PlanResult& result) {
  if (n_target < 2) throw DomainError("n_target must be >= 2");
  auto& ledger = result.ledger;
  auto& roadmap = result.roadmap;
  Rng rng(seed);

  roadmap.add_node(scenario.start);
  roadmap.add_node(scenario.goal);
  while (result.stats.n_free < static_cast<std::size_t>(n_target)) {
    Point x = sample_uniform(scenario.space, rng);
    ++result.stats.n_sampled;
    if (checker.is_valid(x)) {
      roadmap.add_node(std::move(x));
      ++result.stats.n_free;
    }
  }

  const auto resolved = resolve_strategy(strategy, scenario.space, n_target, scenario.mu_free);
  NnIndex index(scenario.space, options.nn);
  {
    ScopedTimer timer(ledger.t_nn_ns);
    for (const auto& p : roadmap.nodes) index.insert(p);
    index.rebuild();
  }

  const std::size_t n = roadmap.nodes.size();
  std::vector<std::pair<NodeId, NodeId>> pairs;
  ++ledger.ap;
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = static_cast<NodeId>(i);
    std::vector<NodeId> near;
    {
      ScopedTimer timer(ledger.t_nn_ns);
      near = resolved.radial ? index.radius_near(roadmap.nodes[i], resolved.radius)
                             : index.k_nearest(roadmap.nodes[i], resolved.k + 1);
    }
    if (resolved.radial) {
      ++ledger.rnn;
    } else {
      ++ledger.knn;
    }
    for (NodeId v : near) {
      if (v == u) continue;
      pairs.emplace_back(std::min(u, v), std::max(u, v));
    }
  }
  // Radial sets are already symmetric; k-NN sets are symmetrized here.
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& [u, v] : pairs) {
    roadmap.add_edge(u, v, distance(scenario.space, roadmap.nodes[u], roadmap.nodes[v]), EdgeStatus::Unknown);
  }
}

}  // namespace

PlanResult sprm_star(const Scenario& scenario, std::int64_t n_target, const ConnectionStrategy& strategy,
                     std::uint64_t seed, const PlannerOptions& options) {
  PlanResult result;
  CollisionChecker checker(scenario, result.ledger);
  build_roadmap(scenario, n_target, strategy, seed, options, checker, result);
  auto& roadmap = result.roadmap;
  for (auto& e : roadmap.edges) {
    e.status = checker.local_plan(roadmap.nodes[e.u], roadmap.nodes[e.v]) ? EdgeStatus::Free : EdgeStatus::Blocked;
  }
  tally_edges(result);
  const auto sp = shortest_path(roadmap, 0, 1, [](const RoadmapEdge& e) { return e.status == EdgeStatus::Free; });
  if (sp.found) fill_path(result, sp);
  return result;
}

PlanResult lazy_sprm_star(const Scenario& scenario, std::int64_t n_target, const ConnectionStrategy& strategy,
                          std::uint64_t seed, const PlannerOptions& options) {
  PlanResult result;
  CollisionChecker checker(scenario, result.ledger);
  build_roadmap(scenario, n_target, strategy, seed, options, checker, result);
  auto& roadmap = result.roadmap;
  const auto usable = [](const RoadmapEdge& e) { return e.status != EdgeStatus::Blocked; };
  for (;;) {
    ++result.stats.repair_rounds;
    const auto sp = shortest_path(roadmap, 0, 1, usable);
    if (!sp.found) break;
    bool blocked = false;
    for (std::size_t i = 0; i + 1 < sp.ids.size() && !blocked; ++i) {
      const NodeId u = sp.ids[i];
      const NodeId v = sp.ids[i + 1];
      // Parallel edges never occur, so the first match is the path edge.
      for (std::uint32_t e : roadmap.adjacency[u]) {
        auto& edge = roadmap.edges[e];
        if (roadmap.other(e, u) != v) continue;
        if (edge.status == EdgeStatus::Unknown) {
          edge.status = checker.local_plan(roadmap.nodes[edge.u], roadmap.nodes[edge.v]) ? EdgeStatus::Free
                                                                                          : EdgeStatus::Blocked;
        }
        blocked = edge.status == EdgeStatus::Blocked;
        break;
      }
    }
    if (!blocked) {
      fill_path(result, sp);
      break;
    }
  }
  tally_edges(result);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

struct Tree {
  std::vector<Point> nodes;
  std::vector<std::int64_t> parent;
  std::vector<double> edge_weight;  // to parent
  std::vector<double> cost;
  std::vector<std::vector<NodeId>> children;

  NodeId add(Point p, std::int64_t par, double w) {
    nodes.push_back(std::move(p));
    parent.push_back(par);
    edge_weight.push_back(w);
    cost.push_back(par < 0 ? 0.0 : cost[static_cast<std::size_t>(par)] + w);
    children.emplace_back();
    if (par >= 0) children[static_cast<std::size_t>(par)].push_back(static_cast<NodeId>(nodes.size() - 1));
    return static_cast<NodeId>(nodes.size() - 1);
  }

  void reparent(NodeId u, NodeId new_parent, double w) {
    auto& old_children = children[static_cast<std::size_t>(parent[u])];
    old_children.erase(std::find(old_children.begin(), old_children.end(), u));
    parent[u] = new_parent;
    edge_weight[u] = w;
    children[new_parent].push_back(u);
    std::vector<NodeId> stack{u};
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      cost[x] = cost[static_cast<std::size_t>(parent[x])] + edge_weight[x];
      for (NodeId c : children[x]) stack.push_back(c);
    }
  }
};

}  // namespace

PlanResult rrt_star(const Scenario& scenario, std::int64_t iterations, const ConnectionStrategy& strategy,
                    std::uint64_t seed, const PlannerOptions& options) {
  if (iterations < 1) throw DomainError("RRT* needs at least one iteration");
  const double cap = options.steer_cap.value_or(0.2 * extent(scenario.space));
  if (!(cap > 0.0)) throw DomainError("steer cap must be positive");

  PlanResult result;
  auto& ledger = result.ledger;
  CollisionChecker checker(scenario, ledger);
  const auto& space = scenario.space;
  Rng rng(seed);

  Tree tree;
  tree.add(scenario.start, -1, 0.0);
  NnIndex index(space, options.nn);
  {
    ScopedTimer timer(ledger.t_nn_ns);
    index.insert(scenario.start);
  }
  std::int64_t goal_parent = -1;
  double goal_weight = 0.0;
  auto goal_cost = [&] {
    return goal_parent < 0 ? std::numeric_limits<double>::infinity()
                           : tree.cost[static_cast<std::size_t>(goal_parent)] + goal_weight;
  };

  const StrategyResolver resolver(strategy, space, scenario.mu_free);
  std::vector<double> buf(space.width());
  for (std::int64_t it = 0; it < iterations; ++it) {
    ++result.stats.iterations;
    Point sample = options.goal_bias > 0.0 && uniform01(rng) < options.goal_bias ? scenario.goal
                                                                                 : sample_uniform(space, rng);
    NodeId nearest = 0;
    {
      ScopedTimer timer(ledger.t_nn_ns);
      nearest = index.nearest(sample);
    }
    ++ledger.nn;
    const Point& from = tree.nodes[nearest];
    const double d = distance(space, from, sample);
    Point target = sample;
    if (d > cap) {
      interpolate_into(space, from.data(), sample.data(), cap / d, buf.data());
      target = Point(buf);
    }
    ++ledger.lp_a;
    if (!checker.motion_check(from, target) || d == 0.0) {
      ++result.stats.unsuccessful_iterations;
      continue;
    }

    const auto n = static_cast<std::int64_t>(std::max<std::size_t>(2, tree.nodes.size()));
    const auto resolved = resolver.at(n);
    std::vector<NodeId> near;
    {
      ScopedTimer timer(ledger.t_nn_ns);
      near = resolved.radial ? index.radius_near(target, std::min(resolved.radius, cap))
                             : index.k_nearest(target, resolved.k);
    }
    if (resolved.radial) {
      ++ledger.rnn;
    } else {
      ++ledger.knn;
    }

    // Choose parent.
    NodeId best_parent = nearest;
    double best_w = distance(space, from, target);
    double best_cost = tree.cost[nearest] + best_w;
    std::vector<double> near_dist(near.size());
    for (std::size_t i = 0; i < near.size(); ++i) {
      const NodeId u = near[i];
      near_dist[i] = distance(space, tree.nodes[u], target);
      if (u == nearest) continue;
      if (tree.cost[u] + near_dist[i] >= best_cost) continue;
      ++ledger.lp_b;
      if (checker.local_plan(tree.nodes[u], target)) {
        best_parent = u;
        best_w = near_dist[i];
        best_cost = tree.cost[u] + near_dist[i];
      }
    }
    const NodeId fresh = tree.add(target, best_parent, best_w);
    {
      ScopedTimer timer(ledger.t_nn_ns);
      index.insert(target);
    }

    // Rewire.
    for (std::size_t i = 0; i < near.size(); ++i) {
      const NodeId u = near[i];
      if (u == best_parent || u == 0) continue;
      if (tree.cost[fresh] + near_dist[i] >= tree.cost[u]) continue;
      ++ledger.lp_b;
      if (checker.local_plan(target, tree.nodes[u])) tree.reparent(u, fresh, near_dist[i]);
    }

    // Goal connection.
    const double dg = distance(space, target, scenario.goal);
    const double goal_radius = std::min(resolved.radial ? resolved.radius : resolver.plain_radius(n), cap);
    if (dg <= goal_radius &&
        tree.cost[fresh] + dg < goal_cost()) {
      ++ledger.lp_b;
      if (checker.local_plan(target, scenario.goal)) {
        goal_parent = fresh;
        goal_weight = dg;
      }
    }
  }

  // Export the tree as a roadmap plus the goal as its own node.
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) result.roadmap.add_node(tree.nodes[i]);
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    result.roadmap.add_edge(static_cast<NodeId>(tree.parent[i]), static_cast<NodeId>(i), tree.edge_weight[i],
                            EdgeStatus::Free);
  }
  result.parent = tree.parent;
  result.cost_to_come = tree.cost;
  result.stats.n_sampled = result.stats.iterations;
  result.stats.n_free = tree.nodes.size() - 1;
  if (goal_parent >= 0) {
    const NodeId g = result.roadmap.add_node(scenario.goal);
    result.roadmap.add_edge(static_cast<NodeId>(goal_parent), g, goal_weight, EdgeStatus::Free);
    result.parent.push_back(goal_parent);
    result.cost_to_come.push_back(goal_cost());
    std::vector<NodeId> ids{g};
    for (std::int64_t x = goal_parent; x >= 0; x = result.parent[static_cast<std::size_t>(x)]) {
      ids.push_back(static_cast<NodeId>(x));
    }
    std::reverse(ids.begin(), ids.end());
    result.success = true;
    result.path_ids = ids;
    result.cost = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      result.path.push_back(result.roadmap.nodes[ids[i]]);
      if (i > 0) result.cost += result.roadmap.edges[ids[i] - 1].weight;
    }
  }
  tally_edges(result);
  return result;
}

}  // namespace mpb
