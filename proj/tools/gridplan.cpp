// Command-line front end: wires configuration files, CSV datasets and the
// planning/aggregation/evaluation library into runnable commands. Every
// command echoes its effective configuration into the output directory and
// writes all artifacts there; wall-clock measurements are confined to the
// timings artifact so every other JSON/CSV file is bit-identical across
// reruns with the same inputs.
//
// Exit codes: 0 success, 1 configuration/validation/usage error, 2 solver
// failure (including non-optimal planning outcomes).

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridplan/errors.hpp"
#include "gridplan/evaluation.hpp"
#include "gridplan/siss.hpp"
#include "gridplan/synth.hpp"
#include "gridplan/system_model.hpp"
#include "gridplan/timeseries.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace gridplan;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Small file helpers

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("write to '" + path.string() + "' failed");
}

// Writes one artifact under the output directory and reports it on stdout.
void save(const fs::path& out_dir, const std::string& name,
          const std::string& text) {
  const fs::path path = out_dir / name;
  write_text_file(path, text);
  std::cout << "wrote " << path.string() << "\n";
}

// ---------------------------------------------------------------------------
// Options shared by every subcommand

struct CommonOpts {
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::vector<std::string> overrides;  // key=value, dotted paths
  std::string engine = "auto";
  double time_limit = 0.0;  // seconds; 0 = take GRIDPLAN_TIME_LIMIT or none
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_data) {
  cmd->add_option("--config", o.config_path, "system configuration JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  if (needs_data)
    cmd->add_option("--data", o.data_path, "hourly demand/wind CSV file")
        ->required()
        ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir,
                  "output directory (created if absent; all artifacts land "
                  "here)")
      ->required();
  cmd->add_option("--set", o.overrides,
                  "override a config value, e.g. --set voll=9000 or "
                  "--set storage.efficiency=0.9 (repeatable; dotted paths, "
                  "list indices allowed)");
  cmd->add_option("--engine", o.engine,
                  "LP engine: auto (interior point with simplex fallback), "
                  "interior_point, simplex")
      ->check(CLI::IsMember({"auto", "interior_point", "simplex"}));
  cmd->add_option("--time-limit", o.time_limit,
                  "solver time limit in seconds (takes precedence over the "
                  "GRIDPLAN_TIME_LIMIT environment variable)");
}

// Applies one key=value override onto parsed config JSON. The path must name
// an existing value (overrides adjust, they do not extend), with dots
// descending into objects and numeric components indexing lists.
json apply_override(json j, const std::string& spec) {
  const size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + spec + "' is not of the form key=value");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);  // numbers, booleans, lists, quoted strings
  } catch (const json::parse_error&) {
    value = raw;  // bare words are strings
  }

  json* cur = &j;
  size_t begin = 0;
  while (true) {
    const size_t dot = path.find('.', begin);
    const std::string key =
        path.substr(begin, dot == std::string::npos ? std::string::npos
                                                    : dot - begin);
    if (key.empty())
      throw ConfigError("override path '" + path + "' has an empty component");
    json* next = nullptr;
    if (cur->is_array()) {
      size_t idx = 0;
      try {
        idx = static_cast<size_t>(std::stoul(key));
      } catch (const std::exception&) {
        throw ConfigError("override path component '" + key +
                          "' must be a list index");
      }
      if (idx >= cur->size())
        throw ConfigError("override path '" + path + "' indexes past the end");
      next = &(*cur)[idx];
    } else if (cur->is_object()) {
      if (!cur->contains(key))
        throw ConfigError("override path '" + path +
                          "' names no existing config value (component '" +
                          key + "')");
      next = &(*cur)[key];
    } else {
      throw ConfigError("override path '" + path +
                        "' descends into a plain value");
    }
    if (dot == std::string::npos) {
      *next = std::move(value);
      break;
    }
    cur = next;
    begin = dot + 1;
  }
  return j;
}

SystemConfig load_config(const CommonOpts& o) {
  std::string text = read_text_file(o.config_path);
  if (!o.overrides.empty()) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw InputError("config file '" + o.config_path +
                       "' is not valid JSON: " + e.what());
    }
    for (const auto& spec : o.overrides) j = apply_override(std::move(j), spec);
    text = j.dump();
  }
  return SystemConfig::from_json_text(text);
}

SolveSettings solve_settings(const CommonOpts& o) {
  SolveSettings s;
  if (o.engine == "interior_point")
    s.engine = SolveSettings::Engine::InteriorPoint;
  else if (o.engine == "simplex")
    s.engine = SolveSettings::Engine::Simplex;

  double limit = o.time_limit;
  if (limit == 0.0) {
    if (const char* env = std::getenv("GRIDPLAN_TIME_LIMIT")) {
      try {
        size_t used = 0;
        limit = std::stod(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw ConfigError(
            "GRIDPLAN_TIME_LIMIT must be a number of seconds, got '" +
            std::string(env) + "'");
      }
    }
  }
  if (limit < 0.0)
    throw ConfigError("solver time limit must be >= 0 seconds");
  s.time_limit_seconds = limit;
  return s;
}

fs::path prepare_out_dir(const CommonOpts& o) {
  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw InputError("cannot create output directory '" + o.out_dir +
                     "': " + ec.message());
  return dir;
}

// ---------------------------------------------------------------------------
// List-flag parsing (comma-separated method/budget/seed lists)

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  size_t begin = 0;
  while (true) {
    const size_t comma = s.find(',', begin);
    out.push_back(s.substr(begin, comma == std::string::npos
                                      ? std::string::npos
                                      : comma - begin));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

long long parse_integer(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + " '" + s + "' is not an integer");
  }
}

std::vector<Method> parse_methods(const std::string& s) {
  std::vector<Method> out;
  for (const auto& part : split_commas(s)) out.push_back(method_from_string(part));
  return out;
}

std::vector<int> parse_budgets(const std::string& s) {
  std::vector<int> out;
  for (const auto& part : split_commas(s))
    out.push_back(
        static_cast<int>(parse_integer(part, "representative budget")));
  return out;
}

// "--seeds 5" means seeds 1..5; "--seeds 3,7,21" means exactly those.
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  const auto parts = split_commas(s);
  if (parts.size() == 1) {
    const long long n = parse_integer(parts[0], "seed count");
    if (n < 1) throw ConfigError("seed count must be at least 1");
    for (long long i = 1; i <= n; ++i)
      out.push_back(static_cast<std::uint64_t>(i));
    return out;
  }
  for (const auto& part : parts)
    out.push_back(static_cast<std::uint64_t>(parse_integer(part, "seed")));
  return out;
}

std::optional<ImportanceKind> parse_importance(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return importance_from_string(s);
}

std::string timings_json(std::initializer_list<std::pair<const char*, double>>
                             entries) {
  json j;
  for (const auto& [k, v] : entries) j[k] = v;
  return j.dump(2) + "\n";
}

json capacity_totals(const SystemDesign& d, const SystemConfig& cfg) {
  json totals = json::object();
  for (const auto& tech : cfg.techs) totals[tech.name] = d.total_gen(cfg, tech.name);
  totals["transmission"] = d.total_tr();
  totals["storage"] = d.total_sto();
  return totals;
}

// ---------------------------------------------------------------------------
// plan: full-resolution capacity expansion

struct PlanOpts {
  CommonOpts common;
};

int run_plan(const PlanOpts& o) {
  const SystemConfig cfg = load_config(o.common);
  const TimeSeriesSet ts = load_time_series(o.common.data_path, cfg);
  const fs::path out = prepare_out_dir(o.common);
  save(out, "config.json", cfg.to_json_text());

  Stopwatch sw;
  const PlanResult plan = solve_planning(ts, cfg, solve_settings(o.common));
  const double solve_seconds = sw.seconds();

  json summary;
  summary["command"] = "plan";
  summary["status"] = to_string(plan.status);
  if (!plan.message.empty()) summary["message"] = plan.message;
  summary["horizon_hours"] = ts.length();
  if (plan.status == PlanStatus::Optimal) {
    summary["objective"] = plan.objective;
    summary["lp_objective"] = plan.lp_objective;
    summary["solver_iterations"] = plan.iterations;
    summary["total_demand_mwh"] = ts.total_demand();
    summary["total_unserved_mwh"] = plan.schedule.total_unserved();
    summary["capacity_totals"] = capacity_totals(plan.design, cfg);
  }
  save(out, "summary.json", summary.dump(2) + "\n");
  save(out, "timings.json", timings_json({{"solve_seconds", solve_seconds}}));

  if (plan.status != PlanStatus::Optimal) {
    std::cerr << "planning failed: " << to_string(plan.status) << " ("
              << plan.message << ")\n";
    return 2;
  }
  save(out, "design.json", plan.design.to_json_text(cfg));
  save(out, "schedule.csv", schedule_csv(plan.schedule, cfg));
  std::cout << "status: optimal\nobjective: " << plan.objective << "\n";
  for (auto& [name, total] : summary["capacity_totals"].items())
    std::cout << "  " << name << ": " << total.get<double>() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// operate: fixed design, receding-horizon (or clairvoyant) dispatch

struct OperateOpts {
  CommonOpts common;
  std::string design_path;
  std::int64_t horizon = 8760;
  std::int64_t window = 4380;
  bool full = false;
};

int run_operate(const OperateOpts& o) {
  const SystemConfig cfg = load_config(o.common);
  const TimeSeriesSet ts = load_time_series(o.common.data_path, cfg);
  const SystemDesign design =
      SystemDesign::from_json_text(read_text_file(o.design_path), cfg);
  const fs::path out = prepare_out_dir(o.common);
  save(out, "config.json", cfg.to_json_text());

  const std::int64_t horizon = o.full ? ts.length() : o.horizon;
  const std::int64_t window = o.full ? ts.length() : o.window;

  Stopwatch sw;
  const OperationSchedule sched = solve_operation_rolling(
      ts, design, cfg, horizon, window, solve_settings(o.common));
  const double operate_seconds = sw.seconds();

  const double demand = ts.total_demand();
  const double unserved = sched.total_unserved();
  json summary;
  summary["command"] = "operate";
  summary["horizon_hours"] = ts.length();
  summary["foresight_horizon"] = horizon;
  summary["foresight_window"] = window;
  summary["solves"] = rolling_solve_count(ts.length(), horizon, window);
  summary["operation_cost"] = operation_cost(sched, cfg);
  summary["total_demand_mwh"] = demand;
  summary["total_unserved_mwh"] = unserved;
  summary["unserved_pct"] = demand > 0.0 ? 100.0 * unserved / demand : 0.0;
  save(out, "summary.json", summary.dump(2) + "\n");
  save(out, "timings.json",
       timings_json({{"operate_seconds", operate_seconds}}));
  save(out, "schedule.csv", schedule_csv(sched, cfg));
  std::cout << "unserved energy: " << unserved << " MWh ("
            << summary["unserved_pct"].get<double>() << "% of demand)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// aggregate: emit the representative-day aggregation a method would plan on

struct AggregateOpts {
  CommonOpts common;
  std::string method = "B";
  int n_a = 30;
  double p_e = 0.05;
  std::string importance;
  std::string reduction = "sum";
  int iterations = 1;
  std::int64_t horizon = 8760;
  std::int64_t window = 4380;
};

int run_aggregate(const AggregateOpts& o) {
  const SystemConfig cfg = load_config(o.common);
  const TimeSeriesSet ts = load_time_series(o.common.data_path, cfg);
  const Method method = method_from_string(o.method);
  const fs::path out = prepare_out_dir(o.common);
  save(out, "config.json", cfg.to_json_text());

  Aggregation agg;
  std::string timings;
  if (!is_a_posteriori(method)) {
    Stopwatch sw;
    const RepKind kind = method == Method::A ? RepKind::Mean : RepKind::Medoid;
    const ExtremeHeuristic heur = method == Method::C
                                      ? ExtremeHeuristic::MaxDemandMinWind
                                      : ExtremeHeuristic::None;
    agg = aggregate_a_priori(to_period_matrix(ts), o.n_a, kind, heur,
                             cfg.normalization);
    timings = timings_json({{"aggregate_seconds", sw.seconds()}});
  } else {
    // a-posteriori aggregations are defined by the full plan/operate/replan
    // pipeline; run it and keep the final (stratified) aggregation
    SissConfig sc;
    sc.method = method;
    sc.n_a = o.n_a;
    sc.p_e = o.p_e;
    sc.importance = parse_importance(o.importance);
    sc.reduction = reduction_from_string(o.reduction);
    sc.iterations = o.iterations;
    sc.horizon = o.horizon;
    sc.window = o.window;
    sc.solve = solve_settings(o.common);
    const SissResult result = run_siss(ts, cfg, sc);
    timings = result.timings_json_text();
    if (result.status != PlanStatus::Optimal) {
      save(out, "timings.json", timings);
      std::cerr << "aggregation pipeline failed: " << result.message << "\n";
      return 2;
    }
    agg = result.aggregation_final;
  }

  int extreme_reps = 0;
  for (const Stratum s : agg.stratum)
    if (s == Stratum::Extreme) ++extreme_reps;
  json summary;
  summary["command"] = "aggregate";
  summary["method"] = to_string(method);
  summary["n_days"] = agg.n_days();
  summary["n_reps"] = agg.n_reps();
  summary["extreme_reps"] = extreme_reps;
  save(out, "summary.json", summary.dump(2) + "\n");
  save(out, "timings.json", timings);
  save(out, "aggregation.json", agg.to_json_text());
  std::cout << "aggregated " << agg.n_days() << " days into " << agg.n_reps()
            << " representatives\n";
  return 0;
}

// ---------------------------------------------------------------------------
// siss: the full importance-subsampling pipeline

struct SissOpts {
  CommonOpts common;
  std::string method = "F";
  int n_a = 30;
  double p_e = 0.05;
  std::string importance;
  std::string reduction = "sum";
  int iterations = 1;
  std::int64_t horizon = 8760;
  std::int64_t window = 4380;
};

int run_siss_cmd(const SissOpts& o) {
  const SystemConfig cfg = load_config(o.common);
  const TimeSeriesSet ts = load_time_series(o.common.data_path, cfg);
  SissConfig sc;
  sc.method = method_from_string(o.method);
  sc.n_a = o.n_a;
  sc.p_e = o.p_e;
  sc.importance = parse_importance(o.importance);
  sc.reduction = reduction_from_string(o.reduction);
  sc.iterations = o.iterations;
  sc.horizon = o.horizon;
  sc.window = o.window;
  sc.solve = solve_settings(o.common);
  sc.validate();
  const fs::path out = prepare_out_dir(o.common);
  save(out, "config.json", cfg.to_json_text());

  const SissResult result = run_siss(ts, cfg, sc);
  save(out, "siss_result.json", result.to_json_text(cfg));
  if (!result.importances.empty())
    save(out, "importances.csv", result.importances_csv());
  save(out, "timings.json", result.timings_json_text());
  if (result.status != PlanStatus::Optimal) {
    std::cerr << "pipeline failed: " << result.message << "\n";
    return 2;
  }
  save(out, "design.json", result.design_final.to_json_text(cfg));
  std::cout << "status: optimal\nmethod " << to_string(result.method)
            << ": objective " << result.objective_final;
  if (is_a_posteriori(sc.method))
    std::cout << " (first stage " << result.objective_0 << ", "
              << result.partition.extreme.size() << " extreme days)";
  std::cout << "\nstage seconds: plan " << result.timings.plan_first
            << " + operate " << result.timings.operate << " + plan "
            << result.timings.plan_second << " = " << result.timings.total()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate: unserved energy of a stored design over a series

struct EvaluateOpts {
  CommonOpts common;
  std::string design_path;
  std::int64_t horizon = 8760;
  std::int64_t window = 4380;
  bool full = false;
};

int run_evaluate(const EvaluateOpts& o) {
  const SystemConfig cfg = load_config(o.common);
  const TimeSeriesSet ts = load_time_series(o.common.data_path, cfg);
  const SystemDesign design =
      SystemDesign::from_json_text(read_text_file(o.design_path), cfg);
  const fs::path out = prepare_out_dir(o.common);
  save(out, "config.json", cfg.to_json_text());

  const std::int64_t horizon = o.full ? ts.length() : o.horizon;
  const std::int64_t window = o.full ? ts.length() : o.window;
  Stopwatch sw;
  const double pct = evaluate_unserved(ts, design, cfg, horizon, window,
                                       solve_settings(o.common));
  const double evaluate_seconds = sw.seconds();

  const double demand = ts.total_demand();
  json summary;
  summary["command"] = "evaluate";
  summary["horizon_hours"] = ts.length();
  summary["foresight_horizon"] = horizon;
  summary["foresight_window"] = window;
  summary["total_demand_mwh"] = demand;
  summary["unserved_pct"] = pct;
  summary["unserved_mwh"] = pct / 100.0 * demand;
  save(out, "evaluation.json", summary.dump(2) + "\n");
  save(out, "timings.json",
       timings_json({{"evaluate_seconds", evaluate_seconds}}));
  std::cout << "unserved energy: " << pct << "% of demand\n";
  return 0;
}

// ---------------------------------------------------------------------------
// validate / example: experiment sweeps

struct ExperimentOpts {
  CommonOpts common;
  std::string seeds = "5";
  std::string methods = "A,B,F";
  std::string n_a = "10";
  double p_e = 0.05;
  std::string importance;
  std::string reduction = "sum";
  int iterations = 1;
  int resample_years = 1;
  std::int64_t horizon = 8760;
  std::int64_t window = 4380;
};

void add_experiment_flags(CLI::App* cmd, ExperimentOpts& o) {
  cmd->add_option("--seeds", o.seeds,
                  "seed count N (runs seeds 1..N) or explicit comma list");
  cmd->add_option("--methods", o.methods,
                  "comma list of aggregation methods (A-F)");
  cmd->add_option("--n-a", o.n_a, "comma list of representative-day budgets");
  cmd->add_option("--p-e", o.p_e,
                  "fraction of days treated as extreme (a-posteriori)");
  cmd->add_option("--importance", o.importance,
                  "importance override: generation_cost or unserved_energy "
                  "(default: by method)");
  cmd->add_option("--reduction", o.reduction,
                  "daily importance reduction: sum or max");
  cmd->add_option("--iterations", o.iterations,
                  "a-posteriori operate+replan repetitions");
  cmd->add_option("--resample-years", o.resample_years,
                  "calendar years drawn (with replacement) per seed");
  cmd->add_option("--horizon", o.horizon, "operation foresight horizon, hours");
  cmd->add_option("--window", o.window, "operation kept window, hours");
}

int run_experiment(const ExperimentOpts& o, bool with_truth) {
  const SystemConfig cfg = load_config(o.common);
  const TimeSeriesSet base = load_time_series(o.common.data_path, cfg);
  ExperimentConfig ec;
  ec.seeds = parse_seeds(o.seeds);
  ec.methods = parse_methods(o.methods);
  ec.n_a_values = parse_budgets(o.n_a);
  ec.p_e = o.p_e;
  ec.importance = parse_importance(o.importance);
  ec.reduction = reduction_from_string(o.reduction);
  ec.iterations = o.iterations;
  ec.resample_years = o.resample_years;
  ec.horizon = o.horizon;
  ec.window = o.window;
  ec.solve = solve_settings(o.common);
  ec.validate();
  const fs::path out = prepare_out_dir(o.common);
  save(out, "config.json", cfg.to_json_text());

  const ExperimentReport report =
      with_truth ? run_validation_experiment(base, cfg, ec)
                 : run_example_experiment(base, cfg, ec);
  save(out, "report.json", report.to_json_text());
  save(out, "report.csv", report.runs_csv());
  save(out, "timings.csv", report.timings_csv());

  int failed = 0;
  for (const auto& r : report.runs)
    if (!r.ok()) ++failed;
  for (const auto& t : report.truths)
    if (!t.ok()) ++failed;
  for (const auto& s : report.summaries)
    if (s.metric == "unserved_pct")
      std::cout << "method " << to_string(s.method) << " n_a=" << s.n_a
                << ": median unserved " << s.pct[2] << "% over " << s.n
                << " runs\n";
  if (failed > 0)
    std::cout << failed << " solve(s) failed; see report.json\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth: deterministic synthetic demand/wind series

struct SynthOpts {
  CommonOpts common;
  int days = 365;
  std::uint64_t seed = 1;
  int start_year = 2019;
  double demand_base = 50.0;
  int events = 0;
  int event_days = 3;
  double wind_factor = 0.08;
  double demand_factor = 1.25;
};

int run_synth(const SynthOpts& o) {
  const SystemConfig cfg = load_config(o.common);
  SynthSpec spec;
  spec.days = o.days;
  spec.seed = o.seed;
  spec.start = Timestamp{year_start_hours(o.start_year)};
  spec.demand_base = o.demand_base;
  spec.scarcity_events = o.events;
  spec.scarcity_days = o.event_days;
  spec.scarcity_wind_factor = o.wind_factor;
  spec.scarcity_demand_factor = o.demand_factor;

  const TimeSeriesSet ts = synthesize_series(cfg, spec);
  const fs::path out = prepare_out_dir(o.common);
  save(out, "config.json", cfg.to_json_text());
  save_time_series(ts, (out / "series.csv").string());
  std::cout << "wrote " << (out / "series.csv").string() << "\n";

  json summary;
  summary["command"] = "synth";
  summary["days"] = o.days;
  summary["seed"] = o.seed;
  summary["start"] = spec.start.to_string();
  summary["demand_base"] = o.demand_base;
  summary["scarcity_event_days"] = scarcity_event_days(spec);
  summary["total_demand_mwh"] = ts.total_demand();
  save(out, "summary.json", summary.dump(2) + "\n");
  std::cout << "synthesized " << o.days << " days for "
            << ts.demand_regions.size() << " demand and "
            << ts.wind_regions.size() << " wind regions\n";
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{
      "gridplan — capacity-expansion planning for multi-region power systems "
      "with representative-day time-series aggregation"};
  app.require_subcommand(1);

  PlanOpts plan_opts;
  auto* plan_cmd = app.add_subcommand(
      "plan", "solve full-resolution capacity expansion over a series");
  add_common(plan_cmd, plan_opts.common, /*needs_data=*/true);

  OperateOpts operate_opts;
  auto* operate_cmd = app.add_subcommand(
      "operate", "dispatch a fixed design over a series (receding horizon)");
  add_common(operate_cmd, operate_opts.common, /*needs_data=*/true);
  operate_cmd->add_option("--design", operate_opts.design_path,
                          "design JSON (from plan or siss)")
      ->required()
      ->check(CLI::ExistingFile);
  operate_cmd->add_option("--horizon", operate_opts.horizon,
                          "foresight horizon, hours");
  operate_cmd->add_option("--window", operate_opts.window,
                          "kept window, hours");
  operate_cmd->add_flag("--full", operate_opts.full,
                        "single clairvoyant solve over the whole series "
                        "(overrides --horizon/--window)");

  AggregateOpts aggregate_opts;
  auto* aggregate_cmd = app.add_subcommand(
      "aggregate", "emit the representative-day aggregation for a method");
  add_common(aggregate_cmd, aggregate_opts.common, /*needs_data=*/true);
  aggregate_cmd->add_option("--method", aggregate_opts.method,
                            "aggregation method A-F");
  aggregate_cmd->add_option("--n-a", aggregate_opts.n_a,
                            "representative-day budget");
  aggregate_cmd->add_option("--p-e", aggregate_opts.p_e,
                            "extreme-day fraction (D-F)");
  aggregate_cmd->add_option("--importance", aggregate_opts.importance,
                            "importance override: generation_cost or "
                            "unserved_energy");
  aggregate_cmd->add_option("--reduction", aggregate_opts.reduction,
                            "daily importance reduction: sum or max");
  aggregate_cmd->add_option("--iterations", aggregate_opts.iterations,
                            "operate+replan repetitions (D-F)");
  aggregate_cmd->add_option("--horizon", aggregate_opts.horizon,
                            "operation foresight horizon, hours (D-F)");
  aggregate_cmd->add_option("--window", aggregate_opts.window,
                            "operation kept window, hours (D-F)");

  SissOpts siss_opts;
  auto* siss_cmd = app.add_subcommand(
      "siss", "importance-subsampling pipeline: plan, operate, score, replan");
  add_common(siss_cmd, siss_opts.common, /*needs_data=*/true);
  siss_cmd->add_option("--method", siss_opts.method, "aggregation method A-F");
  siss_cmd->add_option("--n-a", siss_opts.n_a, "representative-day budget");
  siss_cmd->add_option("--p-e", siss_opts.p_e, "extreme-day fraction (D-F)");
  siss_cmd->add_option("--importance", siss_opts.importance,
                       "importance override: generation_cost or "
                       "unserved_energy (default: by method)");
  siss_cmd->add_option("--reduction", siss_opts.reduction,
                       "daily importance reduction: sum or max");
  siss_cmd->add_option("--iterations", siss_opts.iterations,
                       "operate+replan repetitions (D-F)");
  siss_cmd->add_option("--horizon", siss_opts.horizon,
                       "operation foresight horizon, hours");
  siss_cmd->add_option("--window", siss_opts.window,
                       "operation kept window, hours");

  EvaluateOpts evaluate_opts;
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "unserved energy of a stored design over a series");
  add_common(evaluate_cmd, evaluate_opts.common, /*needs_data=*/true);
  evaluate_cmd->add_option("--design", evaluate_opts.design_path,
                           "design JSON (from plan or siss)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--horizon", evaluate_opts.horizon,
                           "foresight horizon, hours");
  evaluate_cmd->add_option("--window", evaluate_opts.window,
                           "kept window, hours");
  evaluate_cmd->add_flag("--full", evaluate_opts.full,
                         "single clairvoyant solve over the whole series");

  ExperimentOpts validate_opts;
  auto* validate_cmd = app.add_subcommand(
      "validate",
      "experiment sweep scored against full-resolution truth solves");
  add_common(validate_cmd, validate_opts.common, /*needs_data=*/true);
  add_experiment_flags(validate_cmd, validate_opts);

  ExperimentOpts example_opts;
  auto* example_cmd = app.add_subcommand(
      "example",
      "experiment sweep without truth solves (for series too long to solve "
      "at full resolution)");
  add_common(example_cmd, example_opts.common, /*needs_data=*/true);
  add_experiment_flags(example_cmd, example_opts);

  SynthOpts synth_opts;
  auto* synth_cmd = app.add_subcommand(
      "synth", "generate a deterministic synthetic demand/wind series");
  add_common(synth_cmd, synth_opts.common, /*needs_data=*/false);
  synth_cmd->add_option("--days", synth_opts.days, "number of days");
  synth_cmd->add_option("--seed", synth_opts.seed, "random seed");
  synth_cmd->add_option("--start-year", synth_opts.start_year,
                        "calendar year of the first hour");
  synth_cmd->add_option("--demand-base", synth_opts.demand_base,
                        "mean demand level per region, MW");
  synth_cmd->add_option("--events", synth_opts.events,
                        "number of engineered scarcity events");
  synth_cmd->add_option("--event-days", synth_opts.event_days,
                        "consecutive days per scarcity event");
  synth_cmd->add_option("--wind-factor", synth_opts.wind_factor,
                        "wind multiplier inside events");
  synth_cmd->add_option("--demand-factor", synth_opts.demand_factor,
                        "demand multiplier inside events");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the problem and points at --help
    return 1;
  }

  try {
    if (plan_cmd->parsed()) return run_plan(plan_opts);
    if (operate_cmd->parsed()) return run_operate(operate_opts);
    if (aggregate_cmd->parsed()) return run_aggregate(aggregate_opts);
    if (siss_cmd->parsed()) return run_siss_cmd(siss_opts);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate_opts);
    if (validate_cmd->parsed())
      return run_experiment(validate_opts, /*with_truth=*/true);
    if (example_cmd->parsed())
      return run_experiment(example_opts, /*with_truth=*/false);
    if (synth_cmd->parsed()) return run_synth(synth_opts);
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
