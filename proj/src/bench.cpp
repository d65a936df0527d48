#include "mpb/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "mpb/errors.hpp"
#include "mpb/rng.hpp"

namespace mpb {

namespace {

std::vector<Bounds> bounds_from_json(const Json& j, const char* what) {
  if (j.contains("bounds")) {
    std::vector<Bounds> out;
    for (const auto& b : j.at("bounds")) {
      if (!b.is_array() || b.size() != 2) throw ConfigError(std::string(what) + ": bounds entries are [lo, hi]");
      out.push_back({b[0].get<double>(), b[1].get<double>()});
    }
    return out;
  }
  const int d = j.value("d", 0);
  if (d < 1) throw ConfigError(std::string(what) + " needs \"d\" or \"bounds\"");
  return std::vector<Bounds>(static_cast<std::size_t>(d), Bounds{});
}

Json bounds_to_json(std::span<const Bounds> bounds) {
  Json arr = Json::array();
  for (const auto& b : bounds) arr.push_back({b.lo, b.hi});
  return arr;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

StateSpace space_from_json(const Json& j) {
  if (!j.is_object() || j.size() != 1) throw ConfigError("space descriptor must be an object with one key");
  const auto& [key, body] = *j.items().begin();
  try {
    if (key == "l2") return StateSpace::l2(bounds_from_json(body, "l2"));
    if (key == "l1") return StateSpace::l1(bounds_from_json(body, "l1"));
    if (key == "circle") return StateSpace::circle();
    if (key == "sphere2") return StateSpace::sphere2();
    if (key == "so3") return StateSpace::so3();
    if (key == "se2" || key == "se3") {
      const int d = key == "se2" ? 2 : 3;
      auto b = body.contains("bounds") ? bounds_from_json(body, key.c_str())
                                       : std::vector<Bounds>(static_cast<std::size_t>(d), Bounds{});
      const double wt = body.value("w_translation", 1.0);
      const double wr = body.value("w_rotation", 1.0);
      return key == "se2" ? StateSpace::se2(std::move(b), wt, wr) : StateSpace::se3(std::move(b), wt, wr);
    }
    if (key == "torus") {
      return StateSpace::torus(body.at("d").get<int>(), body.value("weights", std::vector<double>{}));
    }
    if (key == "compound") {
      std::vector<StateSpace> children;
      for (const auto& c : body.at("children")) children.push_back(space_from_json(c));
      std::vector<double> weights = body.value("weights", std::vector<double>(children.size(), 1.0));
      return StateSpace::compound(std::move(children), std::move(weights), body.value("p", 1.0));
    }
  } catch (const Json::exception& e) {
    throw ConfigError("malformed space descriptor '" + key + "': " + e.what());
  } catch (const StructuralError& e) {
    throw ConfigError(std::string("invalid space: ") + e.what());
  }
  throw ConfigError("unknown space kind '" + key + "'");
}

Json space_to_json(const StateSpace& space) {
  switch (space.kind()) {
    case SpaceKind::EuclideanL2: return {{"l2", {{"bounds", bounds_to_json(space.bounds())}}}};
    case SpaceKind::EuclideanL1: return {{"l1", {{"bounds", bounds_to_json(space.bounds())}}}};
    case SpaceKind::Circle: return {{"circle", Json::object()}};
    case SpaceKind::Sphere2: return {{"sphere2", Json::object()}};
    case SpaceKind::SO3: return {{"so3", Json::object()}};
    case SpaceKind::Compound: {
      Json children = Json::array();
      for (const auto& c : space.children()) children.push_back(space_to_json(c));
      const auto w = space.weights();
      return {{"compound",
               {{"p", space.p()}, {"children", children}, {"weights", std::vector<double>(w.begin(), w.end())}}}};
    }
  }
  throw std::logic_error("unreachable");
}

std::string space_hash(const StateSpace& space) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : space_to_json(space).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

ScenarioParams scenario_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be an object");
  ScenarioParams p;
  try {
    p.kind = j.value("kind", p.kind);
    p.d = j.value("d", p.d);
    p.mu = j.value("mu", p.mu);
    p.m = j.value("m", p.m);
    p.length = j.value("length", p.length);
    p.rotation_weight = j.value("rotation_weight", p.rotation_weight);
    p.res_fraction = j.value("res_fraction", p.res_fraction);
    p.inflation = j.value("inflation", p.inflation);
    if (j.contains("step")) p.step = j.at("step").get<double>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  static const char* kinds[] = {"hypercube", "freespace", "segments", "strip"};
  if (std::find(std::begin(kinds), std::end(kinds), p.kind) == std::end(kinds)) {
    throw ConfigError("unknown scenario kind '" + p.kind + "'");
  }
  return p;
}

Json scenario_to_json(const ScenarioParams& p) {
  Json j{{"kind", p.kind}, {"res_fraction", p.res_fraction}};
  if (p.kind == "hypercube" || p.kind == "freespace") j["d"] = p.d;
  if (p.kind == "hypercube") j["mu"] = p.mu;
  if (p.kind == "segments") {
    j["m"] = p.m;
    j["inflation"] = p.inflation;
  }
  if (p.kind == "strip") {
    j["length"] = p.length;
    j["rotation_weight"] = p.rotation_weight;
  }
  if (p.step) j["step"] = *p.step;
  return j;
}

ConnectionStrategy strategy_from_json(const Json& j) {
  if (j.is_string()) return strategy_from_json(Json{{"type", j.get<std::string>()}});
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "radial" || type == "radial+heuristic") {
      Radial r;
      r.eta = j.value("eta", 1.0);
      r.use_projection_heuristic = j.value("heuristic", type == "radial+heuristic");
      if (j.contains("mu_free")) r.mu_free = j.at("mu_free").get<double>();
      if (!(r.eta >= 1.0)) throw ConfigError("eta must be >= 1");
      return r;
    }
    if (type == "knn") {
      Knn k{j.value("multiplier", 1.0)};
      if (!(k.multiplier > 0.0)) throw ConfigError("knn multiplier must be positive");
      return k;
    }
    throw ConfigError("unknown strategy type '" + type + "'");
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed strategy: ") + e.what());
  }
}

Json strategy_to_json(const ConnectionStrategy& strategy) {
  if (const auto* k = std::get_if<Knn>(&strategy)) return {{"type", "knn"}, {"multiplier", k->multiplier}};
  const auto& r = std::get<Radial>(strategy);
  Json j{{"type", "radial"}, {"eta", r.eta}, {"heuristic", r.use_projection_heuristic}};
  if (r.mu_free) j["mu_free"] = *r.mu_free;
  return j;
}

// ---------------------------------------------------------------------------

const char* to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::Sprm: return "sprm";
    case PlannerKind::LazySprm: return "lazy-sprm";
    case PlannerKind::RrtStar: return "rrt-star";
  }
  return "?";
}

PlannerKind parse_planner(const std::string& name) {
  if (name == "sprm") return PlannerKind::Sprm;
  if (name == "lazy-sprm") return PlannerKind::LazySprm;
  if (name == "rrt-star") return PlannerKind::RrtStar;
  throw ConfigError("unknown planner '" + name + "' (expected sprm, lazy-sprm or rrt-star)");
}

bool is_sweep_axis(const std::string& axis) {
  return std::find_if(std::begin(kSweepAxes), std::end(kSweepAxes),
                      [&](const char* a) { return axis == a; }) != std::end(kSweepAxes);
}

namespace {

// Applies a swept value to a copy of the config's parameters.
void apply_axis(const std::string& axis, double value, ScenarioParams& sc, std::int64_t& size) {
  if (axis == "n" || axis == "N") {
    size = static_cast<std::int64_t>(std::llround(value));
  } else if (axis == "d") {
    sc.d = static_cast<int>(std::lround(value));
  } else if (axis == "mu") {
    sc.mu = value;
  } else if (axis == "m") {
    sc.m = static_cast<int>(std::lround(value));
  } else if (axis == "res_fraction") {
    sc.res_fraction = value;
    sc.step.reset();
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
}

void check_axis_values(const ExperimentConfig& c, const std::string& axis, const std::vector<double>& values) {
  if (!is_sweep_axis(axis)) throw ConfigError("unknown sweep axis '" + axis + "'");
  if (values.empty()) throw ConfigError("axis '" + axis + "' needs at least one value");
  if (axis == "n" && c.planner == PlannerKind::RrtStar) throw ConfigError("RRT* sweeps use axis N");
  if (axis == "N" && c.planner != PlannerKind::RrtStar) throw ConfigError("roadmap planners sweep axis n");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("non-finite value on axis '" + axis + "'");
    const bool integral = v == std::round(v);
    if (axis == "n" && !(integral && v >= 2)) throw ConfigError("n values must be integers >= 2");
    if (axis == "N" && !(integral && v >= 1)) throw ConfigError("N values must be integers >= 1");
    if (axis == "d" && !(integral && v >= 1)) throw ConfigError("d values must be integers >= 1");
    if (axis == "mu" && !(v >= 0.0 && v < 1.0)) throw ConfigError("mu values must lie in [0, 1)");
    if (axis == "m" && !(integral && v >= 0)) throw ConfigError("m values must be integers >= 0");
    if (axis == "res_fraction" && !(v > 0.0 && v <= 1.0)) throw ConfigError("res_fraction must lie in (0, 1]");
  }
  if ((axis == "d" || axis == "mu") && c.scenario.kind != "hypercube" && c.scenario.kind != "freespace") {
    throw ConfigError("axis '" + axis + "' applies to hypercube/freespace scenarios");
  }
  if (axis == "m" && c.scenario.kind != "segments") throw ConfigError("axis 'm' applies to segment scenarios");
}

}  // namespace

void validate(const ExperimentConfig& c) {
  check_axis_values(c, c.axis, c.values);
  if (c.series_axis) {
    if (*c.series_axis == c.axis) throw ConfigError("series axis must differ from the sweep axis");
    check_axis_values(c, *c.series_axis, c.series_values);
  }
  if (c.seeds.empty()) throw ConfigError("at least one seed is required");
  if (c.strategies.empty()) throw ConfigError("at least one strategy is required");
  const bool rrt = c.planner == PlannerKind::RrtStar;
  if (c.size < (rrt ? 1 : 2)) throw ConfigError("size out of range for the planner");
  if (c.options.steer_cap && !(*c.options.steer_cap > 0.0)) throw ConfigError("steer_cap must be positive");
  if (!(c.options.goal_bias >= 0.0 && c.options.goal_bias < 1.0)) throw ConfigError("goal_bias must lie in [0, 1)");
  if (c.output.empty()) throw ConfigError("output path is empty");
  // Scenario parameters are checked by building each distinct scenario once.
  std::vector<double> series = c.series_values.empty() ? std::vector<double>{0.0} : c.series_values;
  for (double sv : series) {
    for (double v : c.values) {
      ScenarioParams sc = c.scenario;
      std::int64_t size = c.size;
      if (c.series_axis) apply_axis(*c.series_axis, sv, sc, size);
      apply_axis(c.axis, v, sc, size);
      if (sc.kind == "segments") {
        if (sc.m < 0) throw ConfigError("m must be >= 0");
        continue;  // generation depends on the seed; failures become rows
      }
      make_scenario(sc, 0);
    }
  }
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    c.planner = parse_planner(j.value("planner", std::string("sprm")));
    if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
    if (j.contains("strategy")) {
      c.strategies.clear();
      const auto& s = j.at("strategy");
      if (s.is_array()) {
        for (const auto& e : s) c.strategies.push_back(strategy_from_json(e));
      } else {
        c.strategies.push_back(strategy_from_json(s));
      }
    }
    c.size = j.value("size", c.size);
    const auto& sweep = j.at("sweep");
    c.axis = sweep.at("axis").get<std::string>();
    c.values = sweep.at("values").get<std::vector<double>>();
    if (j.contains("series")) {
      c.series_axis = j.at("series").at("axis").get<std::string>();
      c.series_values = j.at("series").at("values").get<std::vector<double>>();
    }
    const auto& seeds = j.at("seeds");
    if (seeds.is_array()) {
      c.seeds = seeds.get<std::vector<std::uint64_t>>();
    } else {
      const auto first = seeds.value("first", std::uint64_t{1});
      const auto count = seeds.at("count").get<std::uint64_t>();
      for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(first + i);
    }
    c.nn = parse_nn_kind(j.value("nn", std::string("tree")));
    if (j.contains("options")) {
      const auto& o = j.at("options");
      if (o.contains("steer_cap")) c.options.steer_cap = o.at("steer_cap").get<double>();
      c.options.goal_bias = o.value("goal_bias", 0.0);
    }
    c.output = j.value("output", c.output);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
  c.options.nn = c.nn;
  validate(c);
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json strategies = Json::array();
  for (const auto& s : c.strategies) strategies.push_back(strategy_to_json(s));
  Json j{{"planner", to_string(c.planner)},
         {"scenario", scenario_to_json(c.scenario)},
         {"strategy", strategies},
         {"size", c.size},
         {"sweep", {{"axis", c.axis}, {"values", c.values}}},
         {"seeds", c.seeds},
         {"nn", to_string(c.nn)},
         {"output", c.output}};
  if (c.series_axis) j["series"] = {{"axis", *c.series_axis}, {"values", c.series_values}};
  Json options = Json::object();
  if (c.options.steer_cap) options["steer_cap"] = *c.options.steer_cap;
  if (c.options.goal_bias > 0.0) options["goal_bias"] = c.options.goal_bias;
  if (!options.empty()) j["options"] = options;
  return j;
}

// ---------------------------------------------------------------------------
// CSV

std::string to_csv(const ResultRow& r) {
  std::ostringstream os;
  os << r.planner << ',' << r.scenario << ',' << r.d << ',' << fmt_double(r.mu) << ',' << r.m << ',' << r.n_free
     << ',' << r.n_sampled << ',' << r.seed << ',' << r.strategy << ',' << r.nn_kind << ','
     << fmt_double(r.res_fraction) << ',' << r.t_nn_ns << ',' << r.t_cd_ns << ','
     << (r.chi ? fmt_double(*r.chi) : std::string("nan")) << ',' << r.nn << ',' << r.rnn << ',' << r.knn << ','
     << r.ap << ',' << r.cd << ',' << r.lp << ',' << r.lp_a << ',' << r.lp_b << ',' << r.cd_in_lp << ','
     << fmt_double(r.cost) << ',' << (r.success ? 1 : 0);
  return os.str();
}

ResultRow parse_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 25) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields, expected 25");
  ResultRow r;
  try {
    std::size_t i = 0;
    r.planner = f[i++];
    r.scenario = f[i++];
    r.d = std::stoi(f[i++]);
    r.mu = std::stod(f[i++]);
    r.m = std::stoi(f[i++]);
    r.n_free = std::stoull(f[i++]);
    r.n_sampled = std::stoull(f[i++]);
    r.seed = std::stoull(f[i++]);
    r.strategy = f[i++];
    r.nn_kind = f[i++];
    r.res_fraction = std::stod(f[i++]);
    r.t_nn_ns = std::stoll(f[i++]);
    r.t_cd_ns = std::stoll(f[i++]);
    const auto& c = f[i++];
    if (c != "nan") r.chi = std::stod(c);
    for (auto* field : {&r.nn, &r.rnn, &r.knn, &r.ap, &r.cd, &r.lp, &r.lp_a, &r.lp_b, &r.cd_in_lp}) {
      *field = std::stoull(f[i++]);
    }
    r.cost = std::stod(f[i++]);
    r.success = f[i++] == "1";
  } catch (const std::logic_error& e) {
    throw ConfigError("malformed CSV row: " + line);
  }
  return r;
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == kCsvHeader) continue;
    rows.push_back(parse_csv_row(line));
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvVersion << '\n' << kCsvHeader << '\n';
  for (const auto& r : rows) out << to_csv(r) << '\n';
}

double row_value(const ResultRow& r, const std::string& c) {
  if (c == "d") return r.d;
  if (c == "mu") return r.mu;
  if (c == "m") return r.m;
  if (c == "n" || c == "N" || c == "size") return r.size;
  if (c == "n_free") return static_cast<double>(r.n_free);
  if (c == "N_sampled") return static_cast<double>(r.n_sampled);
  if (c == "seed") return static_cast<double>(r.seed);
  if (c == "res_fraction") return r.res_fraction;
  if (c == "t_nn_ns") return static_cast<double>(r.t_nn_ns);
  if (c == "t_cd_ns") return static_cast<double>(r.t_cd_ns);
  if (c == "t_total_ns") return static_cast<double>(r.t_nn_ns + r.t_cd_ns);
  if (c == "chi") return r.chi.value_or(std::nan(""));
  if (c == "nn") return static_cast<double>(r.nn);
  if (c == "rnn") return static_cast<double>(r.rnn);
  if (c == "knn") return static_cast<double>(r.knn);
  if (c == "ap") return static_cast<double>(r.ap);
  if (c == "cd") return static_cast<double>(r.cd);
  if (c == "lp") return static_cast<double>(r.lp);
  if (c == "lp_a") return static_cast<double>(r.lp_a);
  if (c == "lp_b") return static_cast<double>(r.lp_b);
  if (c == "cd_in_lp") return static_cast<double>(r.cd_in_lp);
  if (c == "cost") return r.cost;
  if (c == "success") return r.success ? 1.0 : 0.0;
  throw ConfigError("unknown column '" + c + "'");
}

// ---------------------------------------------------------------------------
// Trials

ResultRow run_trial(const ExperimentConfig& config, const ConnectionStrategy& strategy, double axis_value,
                    std::optional<double> series_value, std::uint64_t seed) {
  ScenarioParams sc = config.scenario;
  std::int64_t size = config.size;
  if (config.series_axis && series_value) apply_axis(*config.series_axis, *series_value, sc, size);
  apply_axis(config.axis, axis_value, sc, size);

  ResultRow row;
  row.planner = to_string(config.planner);
  row.scenario = sc.kind;
  row.d = sc.kind == "segments" || sc.kind == "strip" ? (sc.kind == "strip" ? 3 : 2) : sc.d;
  row.mu = sc.kind == "hypercube" ? sc.mu : 0.0;
  row.m = sc.kind == "segments" ? sc.m : 0;
  row.seed = seed;
  row.strategy = describe(strategy);
  row.nn_kind = to_string(config.nn);
  row.res_fraction = sc.step ? 0.0 : sc.res_fraction;
  row.size = static_cast<double>(size);
  row.series = series_value;

  PlanResult result;
  try {
    // Separate streams: obstacle generation and planner sampling.
    const Scenario scenario = make_scenario(sc, derive_seed(seed, 1));
    PlannerOptions options = config.options;
    options.nn = config.nn;
    const std::uint64_t planner_seed = derive_seed(seed, 2);
    switch (config.planner) {
      case PlannerKind::Sprm: result = sprm_star(scenario, size, strategy, planner_seed, options); break;
      case PlannerKind::LazySprm: result = lazy_sprm_star(scenario, size, strategy, planner_seed, options); break;
      case PlannerKind::RrtStar: result = rrt_star(scenario, size, strategy, planner_seed, options); break;
    }
  } catch (const GenerationError&) {
    return row;
  } catch (const DomainError&) {
    return row;
  }
  const auto& l = result.ledger;
  row.n_free = result.stats.n_free;
  row.n_sampled = result.stats.n_sampled;
  row.t_nn_ns = l.t_nn_ns;
  row.t_cd_ns = l.t_cd_ns;
  if (l.t_cd_ns > 0) row.chi = chi(l);
  row.nn = l.nn;
  row.rnn = l.rnn;
  row.knn = l.knn;
  row.ap = l.ap;
  row.cd = l.cd;
  row.lp = l.lp;
  row.lp_a = l.lp_a;
  row.lp_b = l.lp_b;
  row.cd_in_lp = l.cd_in_lp;
  row.cost = result.success ? result.cost : 0.0;
  row.success = result.success;
  return row;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config, int workers, std::ostream* csv) {
  validate(config);
  struct Trial {
    const ConnectionStrategy* strategy;
    std::optional<double> series;
    double value;
    std::uint64_t seed;
  };
  std::vector<Trial> trials;
  std::vector<std::optional<double>> series;
  if (config.series_axis) {
    series.assign(config.series_values.begin(), config.series_values.end());
  } else {
    series.push_back(std::nullopt);
  }
  for (const auto& st : config.strategies) {
    for (const auto& sv : series) {
      for (double v : config.values) {
        for (auto seed : config.seeds) trials.push_back({&st, sv, v, seed});
      }
    }
  }

  std::vector<ResultRow> rows(trials.size());
  std::vector<char> done(trials.size(), 0);
  std::size_t written = 0;
  std::mutex mu;
  if (csv) *csv << kCsvVersion << '\n' << kCsvHeader << '\n' << std::flush;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= trials.size()) return;
      const auto& t = trials[i];
      ResultRow row = run_trial(config, *t.strategy, t.value, t.series, t.seed);
      std::lock_guard lock(mu);
      rows[i] = std::move(row);
      done[i] = 1;
      // Single writer section: flush the completed prefix in trial order.
      while (written < trials.size() && done[written]) {
        if (csv) *csv << to_csv(rows[written]) << '\n' << std::flush;
        ++written;
      }
    }
  };
  const int k = std::max(1, std::min<int>(workers, static_cast<int>(trials.size())));
  if (k == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < k; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Statistics and plot data

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw DomainError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(p / 100.0 * n - 1e-12)));
  return values[std::min(rank, values.size()) - 1];
}

namespace {

void check_plot_axis(const std::string& axis) {
  if (!is_sweep_axis(axis)) throw ConfigError("unknown plot axis '" + axis + "'");
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, const std::string& x_axis) {
  check_plot_axis(x_axis);
  using Key = std::tuple<std::string, std::optional<double>, double>;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[{r.strategy, r.series, row_value(r, x_axis)}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    for (const char* stat : {"chi", "cost", "cd_in_lp", "t_total_ns"}) {
      std::vector<double> v;
      for (const auto* r : members) {
        if (std::string(stat) == "cost" && !r->success) continue;
        const double x = row_value(*r, stat);
        if (std::isfinite(x)) v.push_back(x);
      }
      if (v.empty()) continue;
      SummaryRow s;
      s.strategy = std::get<0>(key);
      s.series = std::get<1>(key);
      s.x = std::get<2>(key);
      s.stat = stat;
      s.median = percentile(v, 50.0);
      s.p20 = percentile(v, 20.0);
      s.p80 = percentile(v, 80.0);
      s.count = v.size();
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "strategy,series,x,stat,median,p20,p80,count\n";
  for (const auto& s : summary) {
    out << s.strategy << ',' << (s.series ? fmt_double(*s.series) : std::string()) << ',' << fmt_double(s.x)
        << ',' << s.stat << ',' << fmt_double(s.median) << ',' << fmt_double(s.p20) << ',' << fmt_double(s.p80)
        << ',' << s.count << '\n';
  }
}

void emit_plot_data(const std::vector<ResultRow>& rows, const std::string& x_axis, const std::string& y_stat,
                    std::ostream& out) {
  check_plot_axis(x_axis);
  if (rows.empty()) throw DomainError("no rows to plot");
  std::map<double, std::vector<double>> by_x;
  for (const auto& r : rows) {
    const double y = row_value(r, y_stat);
    if (std::isfinite(y)) by_x[row_value(r, x_axis)].push_back(y);
  }
  for (const auto& [x, ys] : by_x) {
    out << fmt_double(x) << ' ' << fmt_double(percentile(ys, 50.0)) << ' ' << fmt_double(percentile(ys, 20.0))
        << ' ' << fmt_double(percentile(ys, 80.0)) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() { return {"fig6-rnn", "fig6-knn", "fig7", "fig8", "fig9b", "chi-growth"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  for (std::uint64_t s = 1; s <= 20; ++s) c.seeds.push_back(s);
  if (name == "fig6-rnn" || name == "fig6-knn") {
    c.planner = PlannerKind::Sprm;
    c.scenario.kind = "hypercube";
    c.size = 5000;
    c.axis = "d";
    c.values = {2, 4, 6, 8, 10, 12, 14, 16};
    c.series_axis = "mu";
    c.series_values = {0.0, 0.25, 0.5};
    c.strategies = {name == "fig6-rnn" ? ConnectionStrategy{Radial{}} : ConnectionStrategy{Knn{}}};
  } else if (name == "fig7") {
    c.planner = PlannerKind::RrtStar;
    c.scenario.kind = "segments";
    c.size = 5000;
    c.axis = "m";
    c.values = {100, 400, 1600};
  } else if (name == "fig8") {
    c.planner = PlannerKind::RrtStar;
    c.scenario.kind = "hypercube";
    c.scenario.d = 3;
    c.scenario.mu = 0.25;
    c.size = 5000;
    c.axis = "res_fraction";
    c.values = {0.01, 0.02, 0.04};
  } else if (name == "fig9b") {
    // Cost-vs-time by batch restarts over a geometric n schedule.
    c.planner = PlannerKind::LazySprm;
    c.scenario.kind = "strip";
    c.axis = "n";
    c.values = {250, 500, 1000, 2000, 4000, 8000};
    c.strategies = {Radial{1.0, std::nullopt, true}, Knn{}, Radial{}};
  } else if (name == "chi-growth") {
    c.planner = PlannerKind::Sprm;
    c.scenario.kind = "hypercube";
    c.scenario.d = 4;
    c.scenario.mu = 0.25;
    c.axis = "n";
    c.values = {1600, 3200, 6400, 12800};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.size = c.axis == "n" || c.axis == "N" ? static_cast<std::int64_t>(c.values.front()) : c.size;
  c.output = name + ".csv";
  return c;
}

}  // namespace mpb
