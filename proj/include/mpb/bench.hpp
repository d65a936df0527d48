#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpb/collision.hpp"
#include "mpb/nn.hpp"
#include "mpb/planner.hpp"
#include "mpb/space.hpp"

namespace mpb {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON descriptors

/// {"l2":{"d":2}} / {"l2":{"bounds":[[0,1],[0,1]]}} / {"l1":...} / {"circle":{}} /
/// {"sphere2":{}} / {"so3":{}} / {"se2":{...}} / {"se3":{...}} / {"torus":{"d":3}} /
/// {"compound":{"p":1,"children":[...],"weights":[...]}}
StateSpace space_from_json(const Json& j);
Json space_to_json(const StateSpace& space);
/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string space_hash(const StateSpace& space);

ScenarioParams scenario_from_json(const Json& j);
Json scenario_to_json(const ScenarioParams& params);

/// {"type":"radial","eta":1,"heuristic":false,"mu_free":..} or {"type":"knn","multiplier":1}
ConnectionStrategy strategy_from_json(const Json& j);
Json strategy_to_json(const ConnectionStrategy& strategy);

// ---------------------------------------------------------------------------
// Experiments

enum class PlannerKind { Sprm, LazySprm, RrtStar };
const char* to_string(PlannerKind kind);
PlannerKind parse_planner(const std::string& name);

/// Swept parameters. n / N set the planner size, the others the scenario.
inline constexpr const char* kSweepAxes[] = {"n", "N", "d", "mu", "m", "res_fraction"};
bool is_sweep_axis(const std::string& axis);

struct ExperimentConfig {
  PlannerKind planner = PlannerKind::Sprm;
  ScenarioParams scenario;
  /// Every strategy runs the whole sweep (fig9b compares three).
  std::vector<ConnectionStrategy> strategies{Radial{}};
  std::int64_t size = 1000;  ///< n_target (PRM) or iterations (RRT*) unless swept
  std::string axis = "n";
  std::vector<double> values;
  /// Optional fixed family of curves (e.g. mu for fig6); uses the sweep axes.
  std::optional<std::string> series_axis;
  std::vector<double> series_values;
  std::vector<std::uint64_t> seeds;
  NnKind nn = NnKind::MetricTree;
  PlannerOptions options;
  std::string output = "results.csv";
};

/// Validates every field; throws ConfigError.
void validate(const ExperimentConfig& config);
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);

struct ResultRow {
  std::string planner;
  std::string scenario;
  int d = 0;
  double mu = 0.0;
  int m = 0;
  std::uint64_t n_free = 0;
  std::uint64_t n_sampled = 0;
  std::uint64_t seed = 0;
  std::string strategy;
  std::string nn_kind;
  double res_fraction = 0.0;
  std::int64_t t_nn_ns = 0;
  std::int64_t t_cd_ns = 0;
  std::optional<double> chi;  ///< absent when t_cd_ns == 0
  std::uint64_t nn = 0, rnn = 0, knn = 0, ap = 0, cd = 0, lp = 0, lp_a = 0, lp_b = 0, cd_in_lp = 0;
  double cost = 0.0;
  bool success = false;
  /// Not serialized: the swept size and series value, for grouping.
  double size = 0.0;
  std::optional<double> series;
};

inline constexpr const char* kCsvVersion = "# mp-bench-csv v1";
inline constexpr const char* kCsvHeader =
    "planner,scenario,d,mu,m,n_free,N_sampled,seed,strategy,nn_kind,res_fraction,t_nn_ns,t_cd_ns,chi,"
    "nn,rnn,knn,ap,cd,lp,lp_a,lp_b,cd_in_lp,cost,success";

std::string to_csv(const ResultRow& row);
ResultRow parse_csv_row(const std::string& line);
/// Reads a results file written by write_csv / run_sweep.
std::vector<ResultRow> read_csv(std::istream& in);
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

/// Numeric column of a row by CSV name (plus "size" and "t_total_ns").
double row_value(const ResultRow& row, const std::string& column);

/// One planner run; planner failures become success=false rows, scenario
/// generation errors too (cost 0, zero counts).
ResultRow run_trial(const ExperimentConfig& config, const ConnectionStrategy& strategy, double axis_value,
                    std::optional<double> series_value, std::uint64_t seed);

/// Runs every (strategy x series x axis value x seed) trial with `workers`
/// threads. Rows are returned (and streamed to `csv`, if given) in trial order.
std::vector<ResultRow> run_sweep(const ExperimentConfig& config, int workers = 1, std::ostream* csv = nullptr);

/// Nearest-rank percentile (p in [0, 100]) of an unsorted sample.
double percentile(std::vector<double> values, double p);

struct SummaryRow {
  std::string strategy;
  std::optional<double> series;
  double x = 0.0;
  std::string stat;
  double median = 0.0, p20 = 0.0, p80 = 0.0;
  std::size_t count = 0;
};

/// Per (strategy, series, x) median and 20th/80th percentiles of chi, cost,
/// cd_in_lp and t_total_ns; cost uses successful rows only.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, const std::string& x_axis);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& summary);

/// Lines "x median p20 p80" sorted by x; throws ConfigError for unknown axes.
void emit_plot_data(const std::vector<ResultRow>& rows, const std::string& x_axis, const std::string& y_stat,
                    std::ostream& out);

/// fig6-rnn, fig6-knn, fig7, fig8, fig9b, chi-growth.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace mpb
