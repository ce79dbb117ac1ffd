#include "gridplan/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string_view>

#include "gridplan/errors.hpp"
#include "json.hpp"

namespace gridplan {

using nlohmann::json;

namespace {

// Reference totals at or below this (MW / MWh) are treated as zero when
// forming percentage capacity errors.
constexpr double kZeroCapacity = 1e-6;

double now_seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

// Quotes a CSV field when it contains a delimiter, quote or newline.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> class_names(const SystemConfig& config) {
  std::vector<std::string> names;
  for (const auto& tech : config.techs) names.push_back(tech.name);
  names.push_back("transmission");
  names.push_back("storage");
  return names;
}

double class_total(const SystemDesign& d, const SystemConfig& config,
                   const std::string& name) {
  if (name == "transmission") return d.total_tr();
  if (name == "storage") return d.total_sto();
  return d.total_gen(config, name);
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

std::vector<double> percentiles(std::vector<double> values,
                                const std::vector<double>& levels) {
  if (values.empty())
    throw InputError("percentiles need at least one value");
  for (double q : levels)
    if (!(q >= 0.0 && q <= 100.0))
      throw InputError("percentile level " + std::to_string(q) +
                       " outside [0,100]");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  std::vector<double> out;
  out.reserve(levels.size());
  for (double q : levels) {
    const double h = static_cast<double>(n - 1) * q / 100.0;
    const size_t lo = static_cast<size_t>(h);
    const double frac = h - static_cast<double>(lo);
    double v = values[lo];
    if (lo + 1 < n) v += frac * (values[lo + 1] - values[lo]);
    out.push_back(v);
  }
  return out;
}

double CapacityError::for_class(const std::string& name) const {
  for (size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == name) return value[i];
  throw InputError("no capacity class named '" + name + "'");
}

CapacityError capacity_error(const SystemDesign& est,
                             const SystemDesign& truth,
                             const SystemConfig& config) {
  est.validate(config);
  truth.validate(config);

  CapacityError out;
  for (const std::string& name : class_names(config)) {
    const double e = class_total(est, config, name);
    const double t = class_total(truth, config, name);
    out.classes.push_back(name);
    // capacities below the solver's numerical noise floor count as zero, so
    // a 1e-10 MW reference does not blow a percentage up to 1e13
    if (t > kZeroCapacity) {
      out.value.push_back(100.0 * (e - t) / t);
      out.absolute.push_back(false);
    } else {
      out.value.push_back(e);
      out.absolute.push_back(true);
    }
  }
  return out;
}

double evaluate_unserved(const TimeSeriesSet& ts, const SystemDesign& design,
                         const SystemConfig& config, std::int64_t horizon,
                         std::int64_t window,
                         const SolveSettings& settings) {
  const std::int64_t h = std::min<std::int64_t>(horizon, ts.length());
  const std::int64_t w = std::min<std::int64_t>(window, h);
  const OperationSchedule op =
      solve_operation_rolling(ts, design, config, h, w, settings);
  const double demand = ts.total_demand();
  if (demand <= 0.0) return 0.0;
  const double pct = 100.0 * op.total_unserved() / demand;
  return std::clamp(pct, 0.0, 100.0);
}

// ---------------------------------------------------------------------------
// Experiment runner

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (methods.empty())
    throw ConfigError("experiment needs at least one method");
  if (n_a_values.empty())
    throw ConfigError("experiment needs at least one representative budget");
  for (int n_a : n_a_values)
    if (n_a < 1)
      throw ConfigError("representative budget must be positive, got " +
                        std::to_string(n_a));
  if (resample_years < 1)
    throw ConfigError("resample_years must be >= 1, got " +
                      std::to_string(resample_years));
  if (horizon < 1 || window < 1 || window > horizon)
    throw ConfigError("evaluation needs 0 < window <= horizon, got " +
                      std::to_string(window) + "/" + std::to_string(horizon));
  // surface per-method constraints (even budget, p_e range) before any solve
  for (const Method m : methods)
    for (const int n_a : n_a_values) {
      SissConfig sc;
      sc.method = m;
      sc.n_a = n_a;
      sc.p_e = p_e;
      sc.reduction = reduction;
      sc.iterations = iterations;
      sc.horizon = horizon;
      sc.window = window;
      sc.validate();
    }
}

namespace {

SissConfig siss_config_for(const ExperimentConfig& cfg, Method method,
                           int n_a) {
  SissConfig sc;
  sc.method = method;
  sc.n_a = n_a;
  sc.p_e = cfg.p_e;
  sc.importance = cfg.importance;
  sc.reduction = cfg.reduction;
  sc.iterations = cfg.iterations;
  sc.horizon = cfg.horizon;
  sc.window = cfg.window;
  sc.solve = cfg.solve;
  return sc;
}

void append_summaries(ExperimentReport& report, const ExperimentConfig& cfg) {
  const std::vector<double> levels(kReportPercentiles.begin(),
                                   kReportPercentiles.end());
  for (const Method m : cfg.methods)
    for (const int n_a : cfg.n_a_values) {
      std::vector<const RunRecord*> cell;
      for (const RunRecord& r : report.runs)
        if (r.method == m && r.n_a == n_a && r.ok()) cell.push_back(&r);
      if (cell.empty()) continue;

      std::vector<std::string> metrics = {"unserved_pct"};
      for (const std::string& c : report.capacity_classes)
        metrics.push_back("cap_err:" + c);
      for (const std::string& metric : metrics) {
        std::vector<double> sample;
        for (const RunRecord* r : cell) {
          if (metric == "unserved_pct") {
            if (r->unserved_pct >= 0.0) sample.push_back(r->unserved_pct);
          } else if (!r->capacity.empty()) {
            sample.push_back(r->capacity.for_class(metric.substr(8)));
          }
        }
        if (sample.empty()) continue;
        SummaryRecord s;
        s.method = m;
        s.n_a = n_a;
        s.metric = metric;
        s.n = static_cast<int>(sample.size());
        const std::vector<double> p = percentiles(sample, levels);
        std::copy(p.begin(), p.end(), s.pct.begin());
        report.summaries.push_back(std::move(s));
      }
    }
}

// Shared seed loop; `with_truth` selects the validation protocol.
ExperimentReport run_experiment(const TimeSeriesSet& base,
                                const SystemConfig& sys,
                                const ExperimentConfig& cfg,
                                bool with_truth) {
  cfg.validate();
  base.validate();

  ExperimentReport report;
  report.experiment = with_truth ? "validation" : "example";
  if (with_truth) report.capacity_classes = class_names(sys);

  for (const std::uint64_t seed : cfg.seeds) {
    const TimeSeriesSet ts = resample_years(base, cfg.resample_years, seed);

    const SystemDesign* truth_design = nullptr;
    SystemDesign truth_storage;
    if (with_truth) {
      TruthRecord tr;
      tr.seed = seed;
      const auto t0 = std::chrono::steady_clock::now();
      PlanResult truth;
      try {
        truth = solve_planning(ts, sys, cfg.solve);
      } catch (const SolverError& e) {
        truth.status = PlanStatus::Error;
        truth.message = e.what();
      }
      tr.solve_seconds = now_seconds_since(t0);
      if (truth.status == PlanStatus::Optimal) {
        tr.status = "optimal";
        tr.objective = truth.objective;
        try {
          tr.unserved_full_pct = evaluate_unserved(
              ts, truth.design, sys, ts.length(), ts.length(), cfg.solve);
          tr.unserved_rolling_pct = evaluate_unserved(
              ts, truth.design, sys, cfg.horizon, cfg.window, cfg.solve);
        } catch (const SolverError& e) {
          tr.status = std::string("unserved evaluation failed: ") + e.what();
        }
      } else {
        tr.status = truth.message.empty() ? to_string(truth.status)
                                          : truth.message;
      }
      const bool truth_ok = tr.ok();
      if (truth_ok) {
        truth_storage = truth.design;
        truth_design = &truth_storage;
      }
      report.truths.push_back(std::move(tr));
      // capacity errors need the reference; skip this seed's runs without it
      if (!truth_ok) continue;
    }

    for (const Method method : cfg.methods)
      for (const int n_a : cfg.n_a_values) {
        RunRecord rec;
        rec.seed = seed;
        rec.method = method;
        rec.n_a = n_a;
        SissResult r;
        try {
          r = run_siss(ts, sys, siss_config_for(cfg, method, n_a));
        } catch (const Error& e) {
          rec.status = e.what();
          report.runs.push_back(std::move(rec));
          continue;
        }
        rec.timings = r.timings;
        if (r.status != PlanStatus::Optimal) {
          rec.status = r.message.empty() ? to_string(r.status) : r.message;
          report.runs.push_back(std::move(rec));
          continue;
        }
        rec.objective = r.objective_final;
        if (truth_design)
          rec.capacity = capacity_error(r.design_final, *truth_design, sys);
        try {
          rec.unserved_pct = evaluate_unserved(ts, r.design_final, sys,
                                               cfg.horizon, cfg.window,
                                               cfg.solve);
          rec.status = "optimal";
        } catch (const SolverError& e) {
          rec.status = std::string("unserved evaluation failed: ") + e.what();
        }
        report.runs.push_back(std::move(rec));
      }
  }

  append_summaries(report, cfg);
  return report;
}

}  // namespace

ExperimentReport run_validation_experiment(const TimeSeriesSet& base,
                                           const SystemConfig& sys,
                                           const ExperimentConfig& cfg) {
  return run_experiment(base, sys, cfg, true);
}

ExperimentReport run_example_experiment(const TimeSeriesSet& base,
                                        const SystemConfig& sys,
                                        const ExperimentConfig& cfg) {
  return run_experiment(base, sys, cfg, false);
}

// ---------------------------------------------------------------------------
// Serialization

std::string ExperimentReport::to_json_text() const {
  json j;
  j["experiment"] = experiment;
  j["capacity_classes"] = capacity_classes;

  json jt = json::array();
  for (const TruthRecord& t : truths) {
    json e;
    e["seed"] = t.seed;
    e["status"] = t.status;
    if (t.ok()) {
      e["objective"] = t.objective;
      e["unserved_full_pct"] = t.unserved_full_pct;
      e["unserved_rolling_pct"] = t.unserved_rolling_pct;
    }
    jt.push_back(std::move(e));
  }
  j["truths"] = std::move(jt);

  json jr = json::array();
  for (const RunRecord& r : runs) {
    json e;
    e["seed"] = r.seed;
    e["method"] = to_string(r.method);
    e["n_a"] = r.n_a;
    e["status"] = r.status;
    if (r.ok()) {
      e["objective"] = r.objective;
      e["unserved_pct"] = r.unserved_pct;
      if (!r.capacity.empty()) {
        json c = json::object();
        for (size_t i = 0; i < r.capacity.classes.size(); ++i)
          c[r.capacity.classes[i]] = {{"value", r.capacity.value[i]},
                                      {"absolute", bool(r.capacity.absolute[i])}};
        e["capacity_error"] = std::move(c);
      }
    }
    jr.push_back(std::move(e));
  }
  j["runs"] = std::move(jr);

  json js = json::array();
  for (const SummaryRecord& s : summaries) {
    json e;
    e["method"] = to_string(s.method);
    e["n_a"] = s.n_a;
    e["metric"] = s.metric;
    e["n"] = s.n;
    json p = json::object();
    for (size_t i = 0; i < kReportPercentiles.size(); ++i)
      p[format_double(kReportPercentiles[i])] = s.pct[i];
    e["percentiles"] = std::move(p);
    js.push_back(std::move(e));
  }
  j["summaries"] = std::move(js);
  return j.dump(2) + "\n";
}

std::string ExperimentReport::runs_csv() const {
  std::ostringstream os;
  os << "seed,method,n_a,status,objective,unserved_pct";
  for (const std::string& c : capacity_classes)
    os << ",err_" << c << ",abs_" << c;
  os << '\n';
  for (const RunRecord& r : runs) {
    os << r.seed << ',' << to_string(r.method) << ',' << r.n_a << ','
       << csv_field(r.status);
    if (r.ok())
      os << ',' << format_double(r.objective) << ','
         << format_double(r.unserved_pct);
    else
      os << ",,";
    for (const std::string& c : capacity_classes) {
      if (r.ok() && !r.capacity.empty()) {
        size_t i = 0;
        while (i < r.capacity.classes.size() && r.capacity.classes[i] != c)
          ++i;
        if (i < r.capacity.classes.size()) {
          os << ',' << format_double(r.capacity.value[i]) << ','
             << (r.capacity.absolute[i] ? 1 : 0);
          continue;
        }
      }
      os << ",,";
    }
    os << '\n';
  }
  return os.str();
}

std::string ExperimentReport::timings_csv() const {
  std::ostringstream os;
  os << "kind,seed,method,n_a,plan_first_seconds,operate_seconds,"
        "plan_second_seconds,total_seconds\n";
  for (const TruthRecord& t : truths)
    os << "truth," << t.seed << ",," << ','
       << format_double(t.solve_seconds) << ",0,0,"
       << format_double(t.solve_seconds) << '\n';
  for (const RunRecord& r : runs)
    os << "run," << r.seed << ',' << to_string(r.method) << ',' << r.n_a
       << ',' << format_double(r.timings.plan_first) << ','
       << format_double(r.timings.operate) << ','
       << format_double(r.timings.plan_second) << ','
       << format_double(r.timings.total()) << '\n';
  return os.str();
}

}  // namespace gridplan
