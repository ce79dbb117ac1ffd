#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridplan/aggregation.hpp"
#include "gridplan/system_model.hpp"

namespace gridplan {

// The six aggregation schemes. A-C are a-priori (input time series only);
// D-F are a-posteriori: plan on an a-priori aggregation, operate the full
// series with that design, score each day's importance, then re-aggregate
// with the high-importance days kept in their own stratum.
enum class Method { A, B, C, D, E, F };

Method method_from_string(const std::string& s);
const char* to_string(Method m);
bool is_a_posteriori(Method m);

// Per-day importance score drawn from the operation schedule.
enum class ImportanceKind { GenerationCost, UnservedEnergy };
// How the 24 hourly values of a day collapse into one score.
enum class ImportanceReduction { Sum, Max };

ImportanceKind importance_from_string(const std::string& s);
const char* to_string(ImportanceKind k);
ImportanceReduction reduction_from_string(const std::string& s);
const char* to_string(ImportanceReduction r);

// Generation cost of one day of a schedule: sum over technologies and
// regions of gen_cost * generation plus voll * unserved, either summed over
// the day's 24 hours or reduced to the costliest hour.
double importance_generation_cost(
    const OperationSchedule& s, int day, const SystemConfig& config,
    ImportanceReduction reduction = ImportanceReduction::Sum);

// Unserved energy of one day of a schedule (MWh), summed or hourly maximum.
double importance_unserved(
    const OperationSchedule& s, int day,
    ImportanceReduction reduction = ImportanceReduction::Sum);

// One score per day of the schedule.
std::vector<double> day_importances(const OperationSchedule& s,
                                    const SystemConfig& config,
                                    ImportanceKind kind,
                                    ImportanceReduction reduction);

// Signed hourly charge decisions of the storage regions, reshaped to one row
// per day: column block s*24+h holds storage region s (in config order) at
// hour h. Fed to the stratified re-aggregation for Method F.
Eigen::MatrixXd storage_charge_features(const OperationSchedule& s,
                                        const SystemConfig& config);

struct SissConfig {
  Method method = Method::F;
  int n_a = 30;        // representative-day budget
  double p_e = 0.05;   // fraction of days treated as extreme (a-posteriori)
  // Importance defaults by method (D -> unserved energy, E/F -> generation
  // cost); set to override.
  std::optional<ImportanceKind> importance;
  ImportanceReduction reduction = ImportanceReduction::Sum;
  int iterations = 1;  // a-posteriori: how often to repeat operate+replan
  // Operation-stage foresight: solve `horizon` hours, keep `window`. Both
  // are clamped to the series length, so short series degrade gracefully to
  // a single full-horizon solve.
  std::int64_t horizon = 8760;
  std::int64_t window = 4380;
  SolveSettings solve;

  // Throws ConfigError on invalid combinations (p_e outside (0,1) or odd
  // n_a for a-posteriori methods, iterations < 1, nonpositive horizons).
  void validate() const;
  ImportanceKind effective_importance() const;
};

// Wall-clock stage decomposition (seconds). A-priori methods only fill
// `plan_first`; a-posteriori methods fill all three, accumulating over
// iterations.
struct StageTimings {
  double plan_first = 0.0;
  double operate = 0.0;
  double plan_second = 0.0;
  double total() const { return plan_first + operate + plan_second; }
};

struct SissResult {
  Method method = Method::A;
  PlanStatus status = PlanStatus::Error;
  std::string message;  // failure detail incl. the stage that failed

  SystemDesign design_0;      // first-stage (a-priori) design
  SystemDesign design_final;  // equals design_0 for a-priori methods
  double objective_0 = 0.0;
  double objective_final = 0.0;

  // A-posteriori only (empty otherwise): last iteration's per-day scores
  // and the extreme/regular split they induced.
  std::vector<double> importances;
  ImportancePartition partition;

  // The aggregation behind design_final: the stratified re-aggregation for
  // a-posteriori methods, the single a-priori aggregation otherwise.
  Aggregation aggregation_final;

  // Unserved energy of design_final over the full series as % of demand;
  // filled by the evaluation layer, not by run_siss.
  std::optional<double> unserved_full_pct;

  StageTimings timings;

  // Deterministic artifact: excludes wall-clock timings (serialized
  // separately) so identical runs are bit-identical.
  std::string to_json_text(const SystemConfig& config) const;
  std::string importances_csv() const;
  std::string timings_json_text() const;
};

// Runs the selected scheme end to end. A-priori methods aggregate and solve
// once. A-posteriori methods plan on a medoid a-priori aggregation, operate
// the full series with that design (receding horizon), score and partition
// days, re-aggregate stratified (Method F adds storage charge features) and
// re-plan; iterations > 1 repeats operate+replan from the latest design.
// Solver failures are reported through `status`/`message` with the timings
// of completed stages intact; config and input errors throw.
SissResult run_siss(const TimeSeriesSet& ts, const SystemConfig& sys,
                    const SissConfig& cfg);

}  // namespace gridplan
