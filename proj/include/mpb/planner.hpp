#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "mpb/collision.hpp"
#include "mpb/nn.hpp"
#include "mpb/space.hpp"

namespace mpb {

enum class EdgeStatus : std::uint8_t { Unknown, Free, Blocked };

struct RoadmapEdge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 0.0;
  EdgeStatus status = EdgeStatus::Unknown;
};

/// Undirected graph; every edge is listed once in `edges` and referenced from
/// the adjacency lists of both endpoints.
struct Roadmap {
  std::vector<Point> nodes;
  std::vector<RoadmapEdge> edges;
  std::vector<std::vector<std::uint32_t>> adjacency;  // edge indices per node

  NodeId add_node(Point p);
  std::uint32_t add_edge(NodeId u, NodeId v, double weight, EdgeStatus status);
  NodeId other(std::uint32_t edge, NodeId from) const {
    return edges[edge].u == from ? edges[edge].v : edges[edge].u;
  }
};

struct Radial {
  double eta = 1.0;
  std::optional<double> mu_free;  ///< falls back to the scenario, then to measure(space)
  bool use_projection_heuristic = false;
};

struct Knn {
  double multiplier = 1.0;
};

using ConnectionStrategy = std::variant<Radial, Knn>;

/// Either a radius (radial) or a neighbor count (k-NN).
struct ResolvedStrategy {
  bool radial = true;
  double radius = 0.0;
  std::size_t k = 0;
  bool projected = false;  ///< the heuristic replaced the full-space radius
};

ResolvedStrategy resolve_strategy(const ConnectionStrategy& strategy, const StateSpace& space, std::int64_t n,
                                  std::optional<double> scenario_mu_free = std::nullopt);

std::string describe(const ConnectionStrategy& strategy);

struct RoadmapStats {
  std::size_t n_free = 0;     ///< collision-free samples kept (excluding start/goal)
  std::size_t n_sampled = 0;  ///< sampling attempts (N)
  std::size_t edges_unknown = 0;
  std::size_t edges_free = 0;
  std::size_t edges_blocked = 0;
  std::size_t iterations = 0;               ///< RRT*
  std::size_t unsuccessful_iterations = 0;  ///< RRT*: extension blocked
  std::size_t repair_rounds = 0;            ///< Lazy-sPRM*: Dijkstra calls
};

struct PlanResult {
  bool success = false;
  std::vector<Point> path;
  std::vector<NodeId> path_ids;
  double cost = 0.0;
  PrimitiveLedger ledger;
  RoadmapStats stats;
  Roadmap roadmap;
  /// RRT* only: parent per node (-1 for the root) and cost-to-come.
  std::vector<std::int64_t> parent;
  std::vector<double> cost_to_come;
};

struct PlannerOptions {
  NnKind nn = NnKind::MetricTree;
  std::optional<double> steer_cap;  ///< RRT*; default 0.2 * extent(space)
  double goal_bias = 0.0;           ///< RRT*; probability of sampling the goal
};

PlanResult sprm_star(const Scenario& scenario, std::int64_t n_target, const ConnectionStrategy& strategy,
                     std::uint64_t seed, const PlannerOptions& options = {});

PlanResult lazy_sprm_star(const Scenario& scenario, std::int64_t n_target, const ConnectionStrategy& strategy,
                          std::uint64_t seed, const PlannerOptions& options = {});

PlanResult rrt_star(const Scenario& scenario, std::int64_t iterations, const ConnectionStrategy& strategy,
                    std::uint64_t seed, const PlannerOptions& options = {});

struct ShortestPath {
  bool found = false;
  std::vector<NodeId> ids;
  double cost = 0.0;
};

using EdgeFilter = std::function<bool(const RoadmapEdge&)>;

/// Dijkstra over the edges accepted by `filter`. Among minimal-cost paths the
/// lexicographically smallest id sequence wins. src == dst gives an empty path.
ShortestPath shortest_path(const Roadmap& roadmap, NodeId src, NodeId dst, const EdgeFilter& filter);

}  // namespace mpb
