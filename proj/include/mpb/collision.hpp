#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mpb/space.hpp"

namespace mpb {

// ---------------------------------------------------------------------------
// Obstacles and scenarios

/// Axis-aligned cube of measure mu centered in the unit box.
struct HypercubeBox {
  int d = 2;
  double mu = 0.0;
};

struct Segment2 {
  double ax = 0, ay = 0, bx = 0, by = 0;
};

/// Planar segments inflated by a clearance radius; CD scans every segment.
struct SegmentSoup2D {
  std::vector<Segment2> segments;
  double inflation = 0.02;
};

/// Valid region [0, length] x [0, 1] on the first two Euclidean coordinates.
struct RectangleStrip {
  double length = 1.0;
};

struct Freespace {};

using Obstacles = std::variant<Freespace, HypercubeBox, SegmentSoup2D, RectangleStrip>;

struct Scenario {
  std::string kind;  ///< "hypercube", "segments", "strip" or "freespace"
  StateSpace space = StateSpace::l2_unit(2);
  Obstacles obstacles;
  Point start;
  Point goal;
  double step = 0.01;  ///< LP resolution in distance units
  std::optional<double> res_fraction;
  std::optional<double> mu_free;  ///< known free-space measure, when available
  /// Offsets of the coordinates the obstacles act on (Euclidean leaves, in order).
  std::vector<std::size_t> workspace_coords;
};

/// Parameters accepted by make_scenario; fields irrelevant to a kind are ignored.
struct ScenarioParams {
  std::string kind = "hypercube";
  int d = 2;
  double mu = 0.0;
  int m = 0;
  double length = 20.0;
  double rotation_weight = 0.001;
  double res_fraction = 0.01;
  std::optional<double> step;  ///< absolute step; overrides res_fraction
  double inflation = 0.02;
};

/// Builds a scenario. Segment soups are resampled (up to 100 rounds) until start
/// and goal are free and a coarse grid path connects them; throws GenerationError.
Scenario make_scenario(const ScenarioParams& params, std::uint64_t seed);

/// Pure validity test (no accounting).
bool config_valid(const Scenario& scenario, const double* x);
bool config_valid(const Scenario& scenario, const Point& x);

// ---------------------------------------------------------------------------
// Accounting

/// Counters and accumulated wall time of the planning primitives. cd counts
/// standalone validity checks, cd_in_lp the checks performed inside LP; t_cd
/// covers both, t_nn covers every NN query type plus index maintenance.
struct PrimitiveLedger {
  std::uint64_t nn = 0;
  std::uint64_t rnn = 0;
  std::uint64_t knn = 0;
  std::uint64_t ap = 0;
  std::uint64_t cd = 0;
  std::uint64_t lp = 0;
  std::uint64_t lp_a = 0;
  std::uint64_t lp_b = 0;
  std::uint64_t cd_in_lp = 0;
  std::int64_t t_nn_ns = 0;
  std::int64_t t_cd_ns = 0;
};

/// t_nn / t_cd. Throws DomainError when t_cd is zero.
double chi(const PrimitiveLedger& ledger);

/// Adds the elapsed monotonic time to an accumulator on destruction.
class ScopedTimer {
 public:
  explicit ScopedTimer(std::int64_t& sink) : sink_(sink), begin_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    sink_ += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - begin_)
                 .count();
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  std::int64_t& sink_;
  std::chrono::steady_clock::time_point begin_;
};

/// CD and LP on a scenario, recording every call into a ledger.
class CollisionChecker {
 public:
  CollisionChecker(const Scenario& scenario, PrimitiveLedger& ledger);

  /// One CD.
  bool is_valid(const Point& x);
  bool is_valid(const double* x);

  /// One LP: with K = ceil(distance / step), checks interpolate(x, y, i/K) for
  /// i = 1..K (start excluded, end included), stopping at the first collision.
  bool local_plan(const Point& x, const Point& y);

  /// Number of configurations local_plan checks for a pair (K above).
  std::size_t lp_steps(const Point& x, const Point& y) const;

  /// Motion check used for tree extension: the endpoint y is tested as one CD,
  /// then interior points i = 1..K-1 as CD-in-LP. Counts as one LP.
  bool motion_check(const Point& x, const Point& y);

  const Scenario& scenario() const { return scenario_; }
  PrimitiveLedger& ledger() { return ledger_; }

 private:
  bool segment_free(const Point& x, const Point& y, std::size_t first, std::size_t last_inclusive,
                    std::size_t k);

  const Scenario& scenario_;
  PrimitiveLedger& ledger_;
  std::vector<double> scratch_;
};

/// LP without accounting; used for path re-validation.
bool local_plan_free(const Scenario& scenario, const Point& x, const Point& y, double step);

}  // namespace mpb
