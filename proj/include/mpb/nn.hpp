#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpb/space.hpp"

namespace mpb {

enum class NnKind { LinearScan, MetricTree };

const char* to_string(NnKind kind);
NnKind parse_nn_kind(const std::string& name);

using NodeId = std::uint32_t;

/// Exact nearest-neighbor index over any StateSpace metric.
///
/// LinearScan is the brute-force oracle. MetricTree is a GNAT-style tree: each
/// internal node holds up to 8 pivots chosen greedily (max-min) from a 32-point
/// candidate pool; the remaining points go to the nearest pivot's child, and
/// per (pivot, child) distance ranges prune subtrees. Points inserted after the
/// last build sit in a pending list that is scanned linearly until the next
/// rebuild. Results match LinearScan exactly, including (distance, id) order.
class NnIndex {
 public:
  NnIndex(StateSpace space, NnKind kind);

  NnKind kind() const { return kind_; }
  const StateSpace& space() const { return space_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  /// Returns the new point's id (the previous count).
  NodeId insert(const Point& p);
  Point point(NodeId id) const;
  const double* coords(NodeId id) const { return coords_.data() + static_cast<std::size_t>(id) * width_; }

  /// Forces a rebuild of the tree over every stored point (no-op for LinearScan).
  void rebuild();

  /// Argmin distance; ties go to the smallest id. Throws EmptyIndexError.
  NodeId nearest(const Point& q) const;
  /// min(k, size) ids sorted by (distance, id).
  std::vector<NodeId> k_nearest(const Point& q, std::size_t k) const;
  /// Ids with distance <= r + 1e-12, sorted by id.
  std::vector<NodeId> radius_near(const Point& q, double r) const;

  /// Number of distance evaluations performed by queries so far.
  std::uint64_t distance_evaluations() const { return distance_evals_; }

 private:
  struct TreeNode {
    std::vector<NodeId> pivots;
    std::vector<std::int32_t> children;  // node index per pivot, -1 when empty
    std::vector<double> range_lo;        // [pivot * k + child]
    std::vector<double> range_hi;
    std::vector<NodeId> bucket;          // leaf contents
    bool leaf = true;
  };

  double dist(const double* q, NodeId id) const;
  std::int32_t build(std::vector<NodeId> ids);
  void check(const Point& q) const;

  StateSpace space_;
  NnKind kind_;
  std::size_t width_;
  std::size_t count_ = 0;
  std::vector<double> coords_;

  std::vector<TreeNode> nodes_;
  std::int32_t root_ = -1;
  std::size_t built_count_ = 0;  // ids [0, built_count_) live in the tree
  mutable std::uint64_t distance_evals_ = 0;
};

/// All unordered pairs (i < j) with distance <= r + 1e-12, sorted; computed as
/// one radius query per point.
std::vector<std::pair<NodeId, NodeId>> all_pairs_near(std::span<const Point> points, const StateSpace& space,
                                                      double r, NnKind kind = NnKind::MetricTree);

}  // namespace mpb
