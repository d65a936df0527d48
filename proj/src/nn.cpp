#include "mpb/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "mpb/errors.hpp"

namespace mpb {

namespace {

constexpr std::size_t kBranching = 8;
constexpr std::size_t kPivotPool = 32;
constexpr std::size_t kLeafSize = 16;
constexpr std::size_t kMinRebuild = 64;
constexpr double kReportSlack = 1e-12;

// Pruning compares floating-point distances through the triangle inequality;
// the slack keeps rounding from discarding a subtree that holds a true answer.
inline double prune_slack(double a, double b) { return 1e-9 * (1.0 + a + b); }

using Candidate = std::pair<double, NodeId>;

}  // namespace

const char* to_string(NnKind kind) { return kind == NnKind::LinearScan ? "linear" : "tree"; }

NnKind parse_nn_kind(const std::string& name) {
  if (name == "linear") return NnKind::LinearScan;
  if (name == "tree") return NnKind::MetricTree;
  throw ConfigError("unknown nn kind '" + name + "' (expected linear or tree)");
}

NnIndex::NnIndex(StateSpace space, NnKind kind)
    : space_(std::move(space)), kind_(kind), width_(space_.width()) {}

void NnIndex::check(const Point& q) const {
  if (q.size() != width_) throw StructuralError("query point does not match the index space layout");
}

double NnIndex::dist(const double* q, NodeId id) const {
  ++distance_evals_;
  return distance_unchecked(space_, q, coords(id));
}

NodeId NnIndex::insert(const Point& p) {
  check(p);
  coords_.insert(coords_.end(), p.coords().begin(), p.coords().end());
  const auto id = static_cast<NodeId>(count_++);
  if (kind_ == NnKind::MetricTree) {
    const std::size_t pending = count_ - built_count_;
    if (pending > std::max(kMinRebuild, count_ / 8)) rebuild();
  }
  return id;
}

Point NnIndex::point(NodeId id) const {
  if (id >= count_) throw StructuralError("unknown point id");
  return Point(std::vector<double>(coords(id), coords(id) + width_));
}

void NnIndex::rebuild() {
  if (kind_ != NnKind::MetricTree) return;
  nodes_.clear();
  std::vector<NodeId> ids(count_);
  for (std::size_t i = 0; i < count_; ++i) ids[i] = static_cast<NodeId>(i);
  root_ = count_ == 0 ? -1 : build(std::move(ids));
  built_count_ = count_;
}

std::int32_t NnIndex::build(std::vector<NodeId> ids) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  if (ids.size() <= kLeafSize) {
    nodes_[index].bucket = std::move(ids);
    return index;
  }

  // Candidate pool: evenly strided, deterministic.
  std::vector<NodeId> pool;
  const std::size_t stride = std::max<std::size_t>(1, ids.size() / kPivotPool);
  for (std::size_t i = 0; i < ids.size() && pool.size() < kPivotPool; i += stride) pool.push_back(ids[i]);

  // Greedy max-min pivot selection.
  std::vector<NodeId> pivots{pool[0]};
  std::vector<double> min_d(pool.size(), std::numeric_limits<double>::infinity());
  while (pivots.size() < kBranching) {
    const double* last = coords(pivots.back());
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      min_d[i] = std::min(min_d[i], distance_unchecked(space_, last, coords(pool[i])));
      if (min_d[i] > best_d) {
        best_d = min_d[i];
        best = i;
      }
    }
    if (best_d <= 0.0) break;
    pivots.push_back(pool[best]);
  }
  if (pivots.size() < 2) {
    // Degenerate pool (coincident points): keep everything in one bucket.
    nodes_[index].bucket = std::move(ids);
    return index;
  }

  const std::size_t k = pivots.size();
  std::vector<std::vector<NodeId>> groups(k);
  std::vector<double> lo(k * k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k * k, -std::numeric_limits<double>::infinity());
  std::vector<double> dp(k);
  for (NodeId id : ids) {
    if (std::find(pivots.begin(), pivots.end(), id) != pivots.end()) continue;
    std::size_t owner = 0;
    for (std::size_t i = 0; i < k; ++i) {
      dp[i] = distance_unchecked(space_, coords(pivots[i]), coords(id));
      if (dp[i] < dp[owner]) owner = i;
    }
    groups[owner].push_back(id);
    for (std::size_t i = 0; i < k; ++i) {
      lo[i * k + owner] = std::min(lo[i * k + owner], dp[i]);
      hi[i * k + owner] = std::max(hi[i * k + owner], dp[i]);
    }
  }

  std::vector<std::int32_t> children(k, -1);
  for (std::size_t j = 0; j < k; ++j) {
    if (!groups[j].empty()) children[j] = build(std::move(groups[j]));
  }
  auto& node = nodes_[index];
  node.leaf = false;
  node.pivots = std::move(pivots);
  node.children = std::move(children);
  node.range_lo = std::move(lo);
  node.range_hi = std::move(hi);
  return index;
}

std::vector<NodeId> NnIndex::radius_near(const Point& q, double r) const {
  check(q);
  if (!(r >= 0.0)) throw DomainError("radius must be nonnegative");
  const double limit = r + kReportSlack;
  std::vector<NodeId> out;
  const double* qc = q.data();
  const std::size_t scan_from = kind_ == NnKind::MetricTree ? built_count_ : 0;

  if (kind_ == NnKind::MetricTree && root_ >= 0) {
    std::vector<std::int32_t> stack{root_};
    std::vector<double> dq;
    std::vector<char> alive;
    while (!stack.empty()) {
      const TreeNode& node = nodes_[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      if (node.leaf) {
        for (NodeId id : node.bucket) {
          if (dist(qc, id) <= limit) out.push_back(id);
        }
        continue;
      }
      const std::size_t k = node.pivots.size();
      dq.resize(k);
      alive.assign(k, 1);
      for (std::size_t i = 0; i < k; ++i) {
        dq[i] = dist(qc, node.pivots[i]);
        if (dq[i] <= limit) out.push_back(node.pivots[i]);
      }
      for (std::size_t i = 0; i < k; ++i) {
        const double slack = prune_slack(dq[i], r);
        for (std::size_t j = 0; j < k; ++j) {
          if (!alive[j]) continue;
          if (dq[i] - r - slack > node.range_hi[i * k + j] || dq[i] + r + slack < node.range_lo[i * k + j]) {
            alive[j] = 0;
          }
        }
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (alive[j] && node.children[j] >= 0) stack.push_back(node.children[j]);
      }
    }
  }
  for (std::size_t id = scan_from; id < count_; ++id) {
    if (dist(qc, static_cast<NodeId>(id)) <= limit) out.push_back(static_cast<NodeId>(id));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> NnIndex::k_nearest(const Point& q, std::size_t k) const {
  check(q);
  if (k == 0) throw DomainError("k must be >= 1");
  // Max-heap on (distance, id): top is the current worst kept candidate.
  std::priority_queue<Candidate> heap;
  const double* qc = q.data();
  auto offer = [&](double d, NodeId id) {
    if (heap.size() < k) {
      heap.emplace(d, id);
    } else if (Candidate{d, id} < heap.top()) {
      heap.pop();
      heap.emplace(d, id);
    }
  };
  auto bound = [&] {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first;
  };

  const std::size_t scan_from = kind_ == NnKind::MetricTree ? built_count_ : 0;
  // Pending points first: a tight initial bound prunes more of the tree.
  for (std::size_t id = scan_from; id < count_; ++id) offer(dist(qc, static_cast<NodeId>(id)), static_cast<NodeId>(id));

  if (kind_ == NnKind::MetricTree && root_ >= 0) {
    struct Frame {
      std::int32_t node;
    };
    std::vector<Frame> stack{{root_}};
    std::vector<double> dq;
    std::vector<std::pair<double, std::size_t>> order;
    while (!stack.empty()) {
      const TreeNode& node = nodes_[static_cast<std::size_t>(stack.back().node)];
      stack.pop_back();
      if (node.leaf) {
        for (NodeId id : node.bucket) offer(dist(qc, id), id);
        continue;
      }
      const std::size_t m = node.pivots.size();
      dq.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        dq[i] = dist(qc, node.pivots[i]);
        offer(dq[i], node.pivots[i]);
      }
      order.clear();
      for (std::size_t j = 0; j < m; ++j) {
        if (node.children[j] < 0) continue;
        const double radius = bound();
        bool keep = true;
        for (std::size_t i = 0; i < m && keep; ++i) {
          const double slack = prune_slack(dq[i], std::isinf(radius) ? 0.0 : radius);
          if (dq[i] - radius - slack > node.range_hi[i * m + j] ||
              dq[i] + radius + slack < node.range_lo[i * m + j]) {
            keep = false;
          }
        }
        if (keep) order.emplace_back(dq[j], j);
      }
      // Visit the closest pivot's child first (pushed last).
      std::sort(order.begin(), order.end(), std::greater<>());
      for (const auto& [d, j] : order) stack.push_back({node.children[j]});
    }
  }

  std::vector<Candidate> sorted;
  sorted.reserve(heap.size());
  while (!heap.empty()) {
    sorted.push_back(heap.top());
    heap.pop();
  }
  std::vector<NodeId> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) out[sorted.size() - 1 - i] = sorted[i].second;
  return out;
}

NodeId NnIndex::nearest(const Point& q) const {
  if (count_ == 0) throw EmptyIndexError("nearest query on an empty index");
  return k_nearest(q, 1).front();
}

std::vector<std::pair<NodeId, NodeId>> all_pairs_near(std::span<const Point> points, const StateSpace& space,
                                                      double r, NnKind kind) {
  NnIndex index(space, kind);
  for (const auto& p : points) index.insert(p);
  index.rebuild();
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (NodeId j : index.radius_near(points[i], r)) {
      if (j > i) pairs.emplace_back(static_cast<NodeId>(i), j);
    }
  }
  return pairs;
}

}  // namespace mpb
