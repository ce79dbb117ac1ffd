#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gridplan/aggregation.hpp"
#include "gridplan/system_config.hpp"
#include "gridplan/timeseries.hpp"

namespace gridplan {

// Installed capacities. Indexed positionally against a SystemConfig:
// cap_gen(i, r) follows config.techs and config.regions, cap_tr follows
// config.edges, cap_sto follows config.regions.
struct SystemDesign {
  Eigen::MatrixXd cap_gen;      // n_techs x n_regions, MW
  std::vector<double> cap_tr;   // per edge, MW
  std::vector<double> cap_sto;  // per region, MWh

  static SystemDesign zeros(const SystemConfig& config);

  double total_gen(const SystemConfig& config, const std::string& tech) const;
  double total_tr() const;
  double total_sto() const;

  // Nonnegativity and topology zeros; throws ValidationError.
  void validate(const SystemConfig& config) const;

  std::string to_json_text(const SystemConfig& config) const;
  static SystemDesign from_json_text(const std::string& text,
                                     const SystemConfig& config);
};

// Hourly dispatch. Matrices are n_regions (or n_edges / n_techs) by horizon,
// indexed positionally against the config like SystemDesign.
//
// storage_level holds the level at the *start* of each hour plus one final
// column: level(r, t+1) = (1-l)*level(r, t) + e*ch+ - ch-/e. For schedules
// over representative days (representative == true) the level columns hold
// the sign-free intra-day profiles, each day restarting at zero; the level
// reached at each representative day's end lives in PlanResult::intra_end.
struct OperationSchedule {
  std::int64_t horizon = 0;  // hours
  Timestamp start;
  std::vector<Eigen::MatrixXd> gen;  // per tech: n_regions x horizon, MWh
  Eigen::MatrixXd flow;     // n_edges x horizon, signed MWh (lower id -> higher)
  Eigen::MatrixXd charge;   // n_regions x horizon, signed MWh (+ = charging)
  Eigen::MatrixXd storage_level;  // n_regions x (horizon + 1), MWh
  Eigen::MatrixXd unserved;       // n_regions x horizon, MWh

  // Weight of each day (empty = all ones); set for representative schedules,
  // where day k stands for weight_of_day(k) original days.
  std::vector<int> day_weights;
  bool representative = false;

  int n_days() const { return static_cast<int>(horizon / 24); }
  double weight_of_day(int day) const {
    return day_weights.empty() ? 1.0 : static_cast<double>(day_weights[day]);
  }
  double weight_of_hour(std::int64_t t) const {
    return weight_of_day(static_cast<int>(t / 24));
  }
  double total_unserved() const;  // day-weighted MWh

  // Checks every schedule invariant (nonnegativity, capacity bounds, hourly
  // balance against ts, storage continuity) to the given relative tolerance.
  // For representative schedules the [0, cap] level bound is skipped; the
  // combined inter/intra check lives in validate_aggregated_storage.
  void validate(const SystemDesign& design, const SystemConfig& config,
                const TimeSeriesSet& ts, double tol = 1e-6) const;
};

enum class PlanStatus { Optimal, Infeasible, Error };
const char* to_string(PlanStatus s);

struct PlanResult {
  SystemDesign design;
  OperationSchedule schedule;
  // system_cost(design, schedule): install + generation (+ voll) cost of the
  // solved plan. The raw LP value, which adds the tiny charge tie-break
  // term, is kept separately for diagnostics.
  double objective = 0.0;
  double lp_objective = 0.0;
  PlanStatus status = PlanStatus::Error;
  std::string message;     // solver message on non-optimal outcomes
  int iterations = 0;

  // Aggregated solves only: inter-day storage trajectory (n_regions x
  // n_original_days + 1, start-of-day levels, first column zero) and the
  // level reached at each representative day's end (n_regions x n_reps).
  Eigen::MatrixXd inter_level;
  Eigen::MatrixXd intra_end;
};

struct SolveSettings {
  enum class Engine { Auto, InteriorPoint, Simplex };
  Engine engine = Engine::Auto;  // Auto: interior point, simplex fallback
  double tolerance = 1e-8;
  double time_limit_seconds = 0.0;  // 0 = no limit
};

// Minimizes install cost (scaled by T/8760, per-region perturbed) plus
// generation cost over capacities and dispatch jointly. No unserved-energy
// slack: capacities are free, so the balance is always satisfiable.
PlanResult solve_planning(const TimeSeriesSet& ts, const SystemConfig& config,
                          const SolveSettings& settings = {});

// Minimizes generation cost plus voll * unserved with capacities fixed.
// initial_level (per region, MWh) defaults to empty storage. Throws
// SolverError if the engine fails.
OperationSchedule solve_operation(const TimeSeriesSet& ts,
                                  const SystemDesign& design,
                                  const SystemConfig& config,
                                  const SolveSettings& settings = {},
                                  const Eigen::VectorXd& initial_level = {});

// Receding-horizon operation: solve `horizon_hours`, keep `window_hours`,
// carry the storage level at the kept window's end into the next solve; the
// last solve is truncated at the series end and kept in full.
OperationSchedule solve_operation_rolling(const TimeSeriesSet& ts,
                                          const SystemDesign& design,
                                          const SystemConfig& config,
                                          std::int64_t horizon_hours = 8760,
                                          std::int64_t window_hours = 4380,
                                          const SolveSettings& settings = {});

// Number of solves the rolling driver will perform for a given series length.
int rolling_solve_count(std::int64_t ts_hours, std::int64_t horizon_hours,
                        std::int64_t window_hours);

// Planning over representative days. Each day's generation cost is weighted
// by its occurrence count; install costs are scaled by (total original
// hours)/8760. With storage regions the aggregation must be ordered: storage
// is split into sign-free intra-day profiles (one per representative day,
// starting at zero) and an inter-day trajectory over original days with
// continuity inter[t+1] = (1-l)^24 * inter[t] + intra_end[mapping[t]], and
// the combined level (1-l)^h * inter[t] + intra[mapping[t]][h] is kept
// within [0, cap_sto] for every hour of every original day.
PlanResult solve_planning_aggregated(const Aggregation& agg,
                                     const SystemConfig& config,
                                     const SolveSettings& settings = {});

// (T/8760) * perturbed install costs + day-weighted generation cost +
// voll * day-weighted unserved, where T is the day-weighted hour count.
double system_cost(const SystemDesign& design, const OperationSchedule& s,
                   const SystemConfig& config);

// Generation cost + voll * unserved alone (the operation LP's objective
// without the charge tie-break term).
double operation_cost(const OperationSchedule& s, const SystemConfig& config);

// Checks the combined inter/intra storage trajectory of an aggregated plan:
// inter starts at zero, follows the decay/transfer continuity, and the
// combined level stays within [0, cap_sto] at every original hour.
void validate_aggregated_storage(const PlanResult& result,
                                 const Aggregation& agg,
                                 const SystemConfig& config, double tol = 1e-6);

// Chronological schedule as CSV text: one row per hour with a timestamp,
// generation per technology and allowed region, signed corridor flow
// (positive = lower id to higher id), signed charge and end-of-hour level per
// storage region, and unserved energy per demand region. Representative
// schedules are rejected — their rows are weighted stand-ins, not hours of a
// calendar timeline.
std::string schedule_csv(const OperationSchedule& s, const SystemConfig& config);

}  // namespace gridplan
