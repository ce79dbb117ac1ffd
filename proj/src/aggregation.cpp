#include "gridplan/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gridplan/errors.hpp"
#include "json.hpp"

namespace gridplan {

using Eigen::MatrixXd;
using nlohmann::json;

RepKind rep_kind_from_string(const std::string& s) {
  if (s == "mean") return RepKind::Mean;
  if (s == "medoid") return RepKind::Medoid;
  throw ConfigError("unknown representative kind '" + s + "'");
}

const char* to_string(RepKind k) {
  return k == RepKind::Mean ? "mean" : "medoid";
}

std::vector<MergeStep> ward_linkage(const MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  if (n == 0) throw InputError("cannot cluster an empty matrix");
  std::vector<MergeStep> merges;
  if (n == 1) return merges;

  // squared Euclidean distances; Lance-Williams keeps this matrix current
  MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }

  std::vector<int> size(n, 1), cid(n);
  std::vector<char> alive(n, 1);
  for (int i = 0; i < n; ++i) cid[i] = i;

  merges.reserve(n - 1);
  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    int best_a = 0, best_b = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        const double v = d(i, j);
        const int a = std::min(cid[i], cid[j]);
        const int b = std::max(cid[i], cid[j]);
        if (v < best || (v == best && (a < best_a || (a == best_a && b < best_b)))) {
          best = v;
          bi = i;
          bj = j;
          best_a = a;
          best_b = b;
        }
      }
    }

    const double sa = size[bi], sb = size[bj];
    for (int k = 0; k < n; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      const double sk = size[k];
      const double v = ((sa + sk) * d(bi, k) + (sb + sk) * d(bj, k) -
                        sk * d(bi, bj)) /
                       (sa + sb + sk);
      d(bi, k) = v;
      d(k, bi) = v;
    }
    merges.push_back({best_a, best_b, best});
    size[bi] += size[bj];
    alive[bj] = 0;
    cid[bi] = n + step;
  }
  return merges;
}

std::vector<int> ward_cluster(const MatrixXd& x, int k) {
  const int n = static_cast<int>(x.rows());
  if (k < 1 || k > n)
    throw InputError("cluster count " + std::to_string(k) +
                     " outside [1," + std::to_string(n) + "]");
  const auto merges = ward_linkage(x);

  std::vector<int> cluster(n);
  for (int i = 0; i < n; ++i) cluster[i] = i;
  for (int s = 0; s < n - k; ++s) {
    const int a = merges[s].a, b = merges[s].b, id = n + s;
    for (int i = 0; i < n; ++i)
      if (cluster[i] == a || cluster[i] == b) cluster[i] = id;
  }

  // relabel 0..k-1 in order of smallest member row
  std::vector<int> labels(n, -1);
  int next = 0;
  std::vector<std::pair<int, int>> seen;  // (cluster id, label)
  for (int i = 0; i < n; ++i) {
    int lbl = -1;
    for (const auto& [cidv, l] : seen)
      if (cidv == cluster[i]) lbl = l;
    if (lbl < 0) {
      lbl = next++;
      seen.push_back({cluster[i], lbl});
    }
    labels[i] = lbl;
  }
  return labels;
}

RepResult representatives(const MatrixXd& cluster_space,
                          const MatrixXd& emit_space,
                          const std::vector<int>& labels, int k,
                          RepKind kind) {
  const int n = static_cast<int>(cluster_space.rows());
  if (static_cast<int>(labels.size()) != n ||
      emit_space.rows() != cluster_space.rows())
    throw InputError("labels/matrix size mismatch");
  std::vector<int> count(k, 0);
  for (int lbl : labels) {
    if (lbl < 0 || lbl >= k) throw InputError("label outside [0,k)");
    ++count[lbl];
  }
  for (int c = 0; c < k; ++c)
    if (count[c] == 0) throw InternalError("empty cluster " + std::to_string(c));

  RepResult out;
  out.reps = MatrixXd::Zero(k, emit_space.cols());
  out.rep_day.assign(k, -1);

  MatrixXd centroid = MatrixXd::Zero(k, cluster_space.cols());
  for (int i = 0; i < n; ++i) centroid.row(labels[i]) += cluster_space.row(i);
  for (int c = 0; c < k; ++c) centroid.row(c) /= count[c];

  if (kind == RepKind::Mean) {
    for (int i = 0; i < n; ++i) out.reps.row(labels[i]) += emit_space.row(i);
    for (int c = 0; c < k; ++c) out.reps.row(c) /= count[c];
    // a singleton's mean is the member itself; record its provenance
    std::vector<int> only(k, -1);
    for (int i = 0; i < n; ++i)
      only[labels[i]] = count[labels[i]] == 1 ? i : -1;
    out.rep_day = only;
  } else {
    std::vector<double> best(k, std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
      const int c = labels[i];
      const double dist =
          (cluster_space.row(i) - centroid.row(c)).squaredNorm();
      if (dist < best[c]) {  // strict: earlier rows win exact ties
        best[c] = dist;
        out.rep_day[c] = i;
      }
    }
    for (int c = 0; c < k; ++c) out.reps.row(c) = emit_space.row(out.rep_day[c]);
  }
  return out;
}

void Aggregation::validate() const {
  const int nr = n_reps();
  if (static_cast<int>(representatives.rows()) != nr)
    throw ValidationError("representative row count != weight count");
  if (!stratum.empty() && static_cast<int>(stratum.size()) != nr)
    throw ValidationError("stratum list size mismatch");
  if (static_cast<int>(provenance.size()) != nr)
    throw ValidationError("provenance size mismatch");
  std::vector<int> seen(nr, 0);
  for (int id : mapping) {
    if (id < 0 || id >= nr)
      throw ValidationError("mapping references unknown representative");
    ++seen[id];
  }
  int total = 0;
  for (int c = 0; c < nr; ++c) {
    if (seen[c] != weights[c])
      throw ValidationError("weight of representative " + std::to_string(c) +
                            " does not match its occurrence count");
    if (weights[c] <= 0)
      throw ValidationError("representative with zero occurrences");
    total += weights[c];
  }
  if (total != n_days())
    throw ValidationError("weights do not sum to the day count");
  for (int c = 0; c < nr; ++c) {
    if (provenance[c] >= 0) {
      if (provenance[c] >= n_days())
        throw ValidationError("provenance day out of range");
    }
  }
  if (static_cast<size_t>(representatives.cols()) != series_names.size() * 24)
    throw ValidationError("representative width != series count * 24");
}

TimeSeriesSet Aggregation::representative_series() const {
  PeriodMatrix pm;
  pm.features = representatives;
  pm.series_names = series_names;
  pm.demand_regions = demand_regions;
  pm.wind_regions = wind_regions;
  pm.start = start;
  pm.day_index.resize(n_reps());
  for (int i = 0; i < n_reps(); ++i) pm.day_index[i] = i;
  return from_period_matrix(pm);
}

namespace {

// Shared tail: turn a list of clusters (member day lists + rep vectors in
// time-series space) into an Aggregation ordered by smallest member day.
struct ClusterDraft {
  std::vector<int> members;  // ascending day indices
  Eigen::RowVectorXd rep;
  int provenance = -1;
  Stratum stratum = Stratum::Regular;
};

Aggregation assemble(const PeriodMatrix& pm, std::vector<ClusterDraft> drafts,
                     bool with_strata) {
  std::sort(drafts.begin(), drafts.end(),
            [](const ClusterDraft& a, const ClusterDraft& b) {
              return a.members.front() < b.members.front();
            });
  Aggregation agg;
  agg.ordered = true;
  agg.series_names = pm.series_names;
  agg.demand_regions = pm.demand_regions;
  agg.wind_regions = pm.wind_regions;
  agg.start = pm.start;
  agg.mapping.assign(pm.n_periods(), -1);
  agg.representatives.resize(static_cast<int>(drafts.size()),
                             pm.features.cols());
  for (size_t c = 0; c < drafts.size(); ++c) {
    agg.representatives.row(static_cast<int>(c)) = drafts[c].rep;
    agg.weights.push_back(static_cast<int>(drafts[c].members.size()));
    agg.provenance.push_back(drafts[c].provenance);
    if (with_strata) agg.stratum.push_back(drafts[c].stratum);
    for (int day : drafts[c].members) agg.mapping[day] = static_cast<int>(c);
  }
  agg.validate();
  return agg;
}

// Clusters the given day subset and returns drafts with global day indices.
std::vector<ClusterDraft> cluster_subset(const MatrixXd& cluster_space,
                                         const PeriodMatrix& pm,
                                         const std::vector<int>& days, int k,
                                         RepKind kind, Stratum stratum) {
  MatrixXd sub_cluster(days.size(), cluster_space.cols());
  MatrixXd sub_emit(days.size(), pm.features.cols());
  for (size_t i = 0; i < days.size(); ++i) {
    sub_cluster.row(static_cast<int>(i)) = cluster_space.row(days[i]);
    sub_emit.row(static_cast<int>(i)) = pm.features.row(days[i]);
  }
  const std::vector<int> labels = ward_cluster(sub_cluster, k);
  const RepResult reps = representatives(sub_cluster, sub_emit, labels, k, kind);

  std::vector<ClusterDraft> drafts(k);
  for (size_t i = 0; i < days.size(); ++i)
    drafts[labels[i]].members.push_back(days[i]);
  for (int c = 0; c < k; ++c) {
    drafts[c].rep = reps.reps.row(c);
    drafts[c].provenance = reps.rep_day[c] >= 0 ? days[reps.rep_day[c]] : -1;
    drafts[c].stratum = stratum;
  }
  return drafts;
}

}  // namespace

Aggregation aggregate_a_priori(const PeriodMatrix& pm, int n_a, RepKind kind,
                               ExtremeHeuristic heuristic,
                               Normalization mode) {
  const int n = pm.n_periods();
  if (n_a < 1 || n_a > n)
    throw InputError("representative budget " + std::to_string(n_a) +
                     " outside [1," + std::to_string(n) + "]");
  const PeriodMatrix norm = normalize_features(pm, mode);

  std::set<int> forced;
  if (heuristic == ExtremeHeuristic::MaxDemandMinWind) {
    const size_t nd = pm.demand_regions.size();
    const size_t nw = pm.wind_regions.size();
    auto daily_total = [&](int series, int day) {
      return pm.features.row(day).segment(series * 24, 24).sum();
    };
    for (size_t s = 0; s < nd; ++s) {
      int best_day = 0;
      for (int t = 1; t < n; ++t)
        if (daily_total(static_cast<int>(s), t) >
            daily_total(static_cast<int>(s), best_day))
          best_day = t;
      forced.insert(best_day);
    }
    for (size_t s = 0; s < nw; ++s) {
      const int col = static_cast<int>(nd + s);
      int best_day = 0;
      for (int t = 1; t < n; ++t)
        if (daily_total(col, t) < daily_total(col, best_day)) best_day = t;
      forced.insert(best_day);
    }
    if (static_cast<int>(forced.size()) > n_a)
      throw InputError("heuristic forces " + std::to_string(forced.size()) +
                       " singleton days, more than the budget " +
                       std::to_string(n_a));
  }

  std::vector<ClusterDraft> drafts;
  for (int day : forced) {
    ClusterDraft d;
    d.members = {day};
    d.rep = pm.features.row(day);
    d.provenance = day;
    drafts.push_back(std::move(d));
  }

  std::vector<int> rest;
  for (int t = 0; t < n; ++t)
    if (!forced.count(t)) rest.push_back(t);
  if (!rest.empty()) {
    const int budget = n_a - static_cast<int>(forced.size());
    if (budget > 0) {
      const int k = std::min<int>(budget, static_cast<int>(rest.size()));
      auto more = cluster_subset(norm.features, pm, rest, k, kind,
                                 Stratum::Regular);
      for (auto& d : more) drafts.push_back(std::move(d));
    } else {
      throw InputError("no clustering budget left after forced singletons");
    }
  }
  return assemble(pm, std::move(drafts), /*with_strata=*/false);
}

ImportancePartition importance_partition(const std::vector<double>& importance,
                                         double p_e) {
  if (!(p_e > 0.0 && p_e < 1.0))
    throw InputError("extreme fraction must lie strictly between 0 and 1");
  const int n = static_cast<int>(importance.size());
  if (n == 0) throw InputError("empty importance vector");
  const int n_extreme =
      std::max(1, static_cast<int>(std::floor(p_e * n)));

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return importance[a] > importance[b];  // ties keep earlier day first
  });

  ImportancePartition part;
  part.extreme.assign(order.begin(), order.begin() + n_extreme);
  part.regular.assign(order.begin() + n_extreme, order.end());
  std::sort(part.extreme.begin(), part.extreme.end());
  std::sort(part.regular.begin(), part.regular.end());
  return part;
}

Aggregation aggregate_stratified(
    const PeriodMatrix& pm, const ImportancePartition& partition, int n_a,
    RepKind kind, const std::optional<MatrixXd>& storage_features,
    Normalization mode) {
  const int n = pm.n_periods();
  if (n_a < 2 || n_a % 2 != 0)
    throw InputError("stratified aggregation needs an even budget >= 2");
  if (partition.extreme.empty() && partition.regular.empty())
    throw InputError("partition is empty");
  std::vector<char> seen(n, 0);
  for (int d : partition.extreme) {
    if (d < 0 || d >= n || seen[d]) throw InputError("bad extreme day list");
    seen[d] = 1;
  }
  for (int d : partition.regular) {
    if (d < 0 || d >= n || seen[d]) throw InputError("bad regular day list");
    seen[d] = 1;
  }
  for (int t = 0; t < n; ++t)
    if (!seen[t]) throw InputError("partition misses day " + std::to_string(t));

  const PeriodMatrix norm = normalize_features(pm, mode);
  MatrixXd cluster_space = norm.features;
  if (storage_features) {
    const MatrixXd& sf = *storage_features;
    if (sf.rows() != n)
      throw InputError("storage feature rows != day count");
    if (sf.cols() % 24 != 0)
      throw InputError("storage feature columns must come in 24-hour blocks");
    // normalize each 24-column block the same way as a time series
    PeriodMatrix fake;
    fake.features = sf;
    const int blocks = static_cast<int>(sf.cols()) / 24;
    for (int b = 0; b < blocks; ++b)
      fake.series_names.push_back("storage_feature_" + std::to_string(b));
    const MatrixXd sf_norm = normalize_features(fake, mode).features;
    MatrixXd joined(n, cluster_space.cols() + sf_norm.cols());
    joined << cluster_space, sf_norm;
    cluster_space = std::move(joined);
  }

  // each stratum gets half the budget; a degenerate partition with one empty
  // stratum hands the full budget to the other, matching plain clustering
  std::vector<ClusterDraft> drafts;
  for (const bool extreme : {true, false}) {
    const auto& days = extreme ? partition.extreme : partition.regular;
    const auto& other = extreme ? partition.regular : partition.extreme;
    if (days.empty()) continue;
    const int budget = other.empty() ? n_a : n_a / 2;
    auto part = cluster_subset(
        cluster_space, pm, days,
        std::min<int>(budget, static_cast<int>(days.size())), kind,
        extreme ? Stratum::Extreme : Stratum::Regular);
    for (auto& d : part) drafts.push_back(std::move(d));
  }
  return assemble(pm, std::move(drafts), /*with_strata=*/true);
}

std::string Aggregation::to_json_text() const {
  json j;
  j["mapping"] = mapping;
  json reps = json::array();
  for (int r = 0; r < representatives.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < representatives.cols(); ++c)
      row.push_back(representatives(r, c));
    reps.push_back(std::move(row));
  }
  j["representatives"] = reps;
  j["weights"] = weights;
  j["ordered"] = ordered;
  if (!stratum.empty()) {
    json st = json::array();
    for (Stratum s : stratum)
      st.push_back(s == Stratum::Extreme ? "extreme" : "regular");
    j["stratum"] = st;
  }
  j["provenance"] = provenance;
  j["series_names"] = series_names;
  j["demand_regions"] = demand_regions;
  j["wind_regions"] = wind_regions;
  j["start"] = start.to_string();
  return j.dump(2) + "\n";
}

Aggregation Aggregation::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("aggregation file is not valid JSON: ") +
                     e.what());
  }
  try {
    Aggregation a;
    a.mapping = j.at("mapping").get<std::vector<int>>();
    const auto& reps = j.at("representatives");
    const int nr = static_cast<int>(reps.size());
    const int nc = nr > 0 ? static_cast<int>(reps[0].size()) : 0;
    a.representatives.resize(nr, nc);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nc; ++c)
        a.representatives(r, c) = reps[r][c].get<double>();
    a.weights = j.at("weights").get<std::vector<int>>();
    a.ordered = j.at("ordered").get<bool>();
    if (j.contains("stratum")) {
      for (const auto& s : j.at("stratum"))
        a.stratum.push_back(s.get<std::string>() == "extreme"
                                ? Stratum::Extreme
                                : Stratum::Regular);
    }
    a.provenance = j.at("provenance").get<std::vector<int>>();
    a.series_names = j.at("series_names").get<std::vector<std::string>>();
    a.demand_regions = j.at("demand_regions").get<std::vector<int>>();
    a.wind_regions = j.at("wind_regions").get<std::vector<int>>();
    a.start = Timestamp::parse(j.at("start").get<std::string>());
    a.validate();
    return a;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed aggregation file: ") + e.what());
  }
}

}  // namespace gridplan
