#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridplan/siss.hpp"

namespace gridplan {

// Percentile levels used by every experiment summary.
inline constexpr std::array<double, 5> kReportPercentiles = {2.5, 25.0, 50.0,
                                                             75.0, 97.5};

// Percentiles of `values` at the given levels (percent, in [0,100]), using
// linear interpolation between order statistics. Throws InputError on an
// empty sample or an out-of-range level. Output is monotone in the level.
std::vector<double> percentiles(std::vector<double> values,
                                const std::vector<double>& levels);

// Installed-capacity comparison between an estimated and a reference design,
// per class: one class per configured technology plus "transmission" and
// "storage", each totalled across regions/edges. Values are percentage
// errors 100*(est-truth)/truth; classes whose reference total is zero (or
// below solver noise, 1e-6) report the absolute difference instead and are
// flagged.
struct CapacityError {
  std::vector<std::string> classes;
  std::vector<double> value;
  std::vector<bool> absolute;

  bool empty() const { return classes.empty(); }
  double for_class(const std::string& name) const;  // throws InputError
};

CapacityError capacity_error(const SystemDesign& est,
                             const SystemDesign& truth,
                             const SystemConfig& config);

// Unserved energy of a fixed design operated over the full series, as a
// percentage of total demand (clamped to [0,100]). Receding-horizon
// foresight; horizon/window are clamped to the series length, so passing a
// horizon at least as long as the series gives one clairvoyant solve.
double evaluate_unserved(const TimeSeriesSet& ts, const SystemDesign& design,
                         const SystemConfig& config,
                         std::int64_t horizon = 8760,
                         std::int64_t window = 4380,
                         const SolveSettings& settings = {});

// One experiment = |seeds| resampled base series x |methods| x |n_a_values|
// aggregation runs, each scored against the full series.
struct ExperimentConfig {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<Method> methods = {Method::A, Method::B, Method::F};
  std::vector<int> n_a_values = {10};
  double p_e = 0.05;
  std::optional<ImportanceKind> importance;  // default: by method
  ImportanceReduction reduction = ImportanceReduction::Sum;
  int iterations = 1;
  int resample_years = 1;  // calendar years per resampled series
  // foresight for both the SISS operation stage and unserved evaluation
  std::int64_t horizon = 8760;
  std::int64_t window = 4380;
  SolveSettings solve;

  void validate() const;  // throws ConfigError
};

// Outcome of one (seed, method, n_a) aggregation run. `status` is "optimal"
// or the failure description; failed runs keep their place in the report.
struct RunRecord {
  std::uint64_t seed = 0;
  Method method = Method::A;
  int n_a = 0;
  std::string status;
  double objective = 0.0;      // aggregated-model objective
  CapacityError capacity;      // empty for example runs and failures
  double unserved_pct = -1.0;  // receding-horizon, % of demand; -1 = not run
  StageTimings timings;

  bool ok() const { return status == "optimal"; }
};

// Full-resolution reference solve for one seed (validation experiment only).
// Unserved energy of the truth design is reported both clairvoyantly (sanity
// value, ~0) and under the same receding horizon as the estimates.
struct TruthRecord {
  std::uint64_t seed = 0;
  std::string status;
  double objective = 0.0;
  double unserved_full_pct = -1.0;
  double unserved_rolling_pct = -1.0;
  double solve_seconds = 0.0;

  bool ok() const { return status == "optimal"; }
};

// Percentile summary of one metric over the successful runs of one
// (method, n_a) cell. Metrics: "unserved_pct" and "cap_err:<class>".
struct SummaryRecord {
  Method method = Method::A;
  int n_a = 0;
  std::string metric;
  std::array<double, 5> pct{};  // at kReportPercentiles
  int n = 0;                    // contributing runs
};

struct ExperimentReport {
  std::string experiment;  // "validation" | "example"
  std::vector<std::string> capacity_classes;  // empty for example
  std::vector<TruthRecord> truths;            // empty for example
  std::vector<RunRecord> runs;
  std::vector<SummaryRecord> summaries;

  // Deterministic artifacts: wall-clock values are confined to timings_csv.
  std::string to_json_text() const;
  std::string runs_csv() const;
  std::string timings_csv() const;
};

// Resamples the base series per seed, solves the full-resolution truth,
// runs every (method, n_a) cell, and scores capacity errors plus receding-
// horizon unserved energy against the truth. Solver failures are recorded
// in the affected record and the experiment continues; a failed truth solve
// skips that seed's runs (capacity errors need the reference).
ExperimentReport run_validation_experiment(const TimeSeriesSet& base,
                                           const SystemConfig& sys,
                                           const ExperimentConfig& cfg);

// Same sweep without truth solves: unserved energy and timings only, for
// series too long to solve at full resolution.
ExperimentReport run_example_experiment(const TimeSeriesSet& base,
                                        const SystemConfig& sys,
                                        const ExperimentConfig& cfg);

}  // namespace gridplan
