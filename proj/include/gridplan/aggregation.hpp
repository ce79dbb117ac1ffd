#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "gridplan/timeseries.hpp"

namespace gridplan {

// One agglomerative merge: clusters `a` and `b` (a < b) joined at `cost`.
// Initial singleton clusters are numbered 0..n-1 by row; merge k creates
// cluster n+k. Costs are twice the within-cluster variance increase, i.e.
// 2|A||B|/(|A|+|B|) times the squared centroid distance.
struct MergeStep {
  int a = 0;
  int b = 0;
  double cost = 0.0;
};

// Ward minimum-variance linkage over Euclidean distance, deterministic:
// equal-cost candidates resolve to the lexicographically smallest (a,b).
std::vector<MergeStep> ward_linkage(const Eigen::MatrixXd& x);

// Cuts the Ward tree at k clusters. Labels are 0..k-1, assigned in order of
// each cluster's smallest row index.
std::vector<int> ward_cluster(const Eigen::MatrixXd& x, int k);

enum class RepKind { Mean, Medoid };
enum class Stratum { Regular, Extreme };

RepKind rep_kind_from_string(const std::string& s);
const char* to_string(RepKind k);

// Representative selection: distances are measured in `cluster_space` (the
// normalized, possibly feature-augmented matrix used for clustering) while
// emitted vectors come from `emit_space` (unnormalized time-series features).
// Mean averages emit rows; medoid picks the member nearest its cluster-space
// centroid (ties to the lowest row index) and reports that row's emit vector.
struct RepResult {
  Eigen::MatrixXd reps;       // one row per cluster label
  std::vector<int> rep_day;   // source row for medoids, -1 for means
};
RepResult representatives(const Eigen::MatrixXd& cluster_space,
                          const Eigen::MatrixXd& emit_space,
                          const std::vector<int>& labels, int k, RepKind kind);

// Chronology-preserving aggregation of days into representative days.
struct Aggregation {
  std::vector<int> mapping;         // original day -> representative id
  Eigen::MatrixXd representatives;  // n_reps x (n_series*24), unnormalized
  std::vector<int> weights;         // occurrence count per id
  bool ordered = true;              // replayed in chronology vs purely weighted
  std::vector<Stratum> stratum;     // per id; empty when unstratified
  std::vector<int> provenance;      // per id: source day for medoids, else -1

  // layout context so representatives can be expanded back into series
  std::vector<std::string> series_names;
  std::vector<int> demand_regions, wind_regions;
  Timestamp start;

  int n_reps() const { return static_cast<int>(weights.size()); }
  int n_days() const { return static_cast<int>(mapping.size()); }

  void validate() const;  // throws ValidationError

  // The representative-day sequence viewed as a TimeSeriesSet of n_reps days
  // (used to build aggregated planning inputs).
  TimeSeriesSet representative_series() const;

  std::string to_json_text() const;
  static Aggregation from_json_text(const std::string& text);
};

enum class ExtremeHeuristic { None, MaxDemandMinWind };

// Methods using input time series only. Normalizes, clusters to n_A with
// Ward linkage, picks representatives. The heuristic variant first forces
// each demand region's maximum-total-demand day and each wind region's
// minimum-total-wind day to be singleton representatives, then clusters the
// remaining days into the remaining budget.
Aggregation aggregate_a_priori(const PeriodMatrix& pm, int n_a, RepKind kind,
                               ExtremeHeuristic heuristic,
                               Normalization mode = Normalization::Series);

// Day partition by importance: the floor(p_e * n) highest-importance days
// (at least one) form the extreme set; threshold ties resolve to earlier
// days. Both lists are ascending day indices.
struct ImportancePartition {
  std::vector<int> extreme;
  std::vector<int> regular;
};
ImportancePartition importance_partition(const std::vector<double>& importance,
                                         double p_e);

// Stratified aggregation: each stratum is clustered separately into
// min(n_A/2, |stratum|) representatives (n_A must be even). When
// storage_features is present (one row per day), clustering distance is
// taken in the concatenation of normalized time-series and normalized
// storage-feature columns; emitted representatives stay in time-series space.
Aggregation aggregate_stratified(
    const PeriodMatrix& pm, const ImportancePartition& partition, int n_a,
    RepKind kind,
    const std::optional<Eigen::MatrixXd>& storage_features = std::nullopt,
    Normalization mode = Normalization::Series);

}  // namespace gridplan
