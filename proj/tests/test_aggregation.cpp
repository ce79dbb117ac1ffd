#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "doctest.h"
#include "gridplan/aggregation.hpp"
#include "gridplan/errors.hpp"
#include "gridplan/rng.hpp"

using namespace gridplan;
using Eigen::MatrixXd;

namespace {

// Brute-force agglomerative Ward oracle: explicit member lists, centroids
// recomputed from scratch every step, merge cost 2|A||B|/(|A|+|B|) times the
// squared centroid distance. Shares no code with ward_linkage.
std::vector<MergeStep> ward_oracle(const MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  struct Cl {
    int id;
    std::vector<int> members;
  };
  std::vector<Cl> cls;
  for (int i = 0; i < n; ++i) cls.push_back({i, {i}});

  auto centroid = [&](const Cl& c) -> Eigen::RowVectorXd {
    Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(x.cols());
    for (int i : c.members) m += x.row(i);
    return m / static_cast<double>(c.members.size());
  };

  std::vector<MergeStep> out;
  int next_id = n;
  while (cls.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    size_t bi = 0, bj = 1;
    int best_a = 0, best_b = 0;
    for (size_t i = 0; i < cls.size(); ++i) {
      for (size_t j = i + 1; j < cls.size(); ++j) {
        const double na = static_cast<double>(cls[i].members.size());
        const double nb = static_cast<double>(cls[j].members.size());
        const double cost = 2.0 * na * nb / (na + nb) *
                            (centroid(cls[i]) - centroid(cls[j])).squaredNorm();
        const int a = std::min(cls[i].id, cls[j].id);
        const int b = std::max(cls[i].id, cls[j].id);
        if (cost < best ||
            (cost == best && (a < best_a || (a == best_a && b < best_b)))) {
          best = cost;
          bi = i;
          bj = j;
          best_a = a;
          best_b = b;
        }
      }
    }
    out.push_back({best_a, best_b, best});
    for (int m : cls[bj].members) cls[bi].members.push_back(m);
    cls[bi].id = next_id++;
    cls.erase(cls.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return out;
}

// Independent partition oracle: repeated max scans instead of sorting.
std::vector<int> partition_oracle(const std::vector<double>& imp, int n_e) {
  std::vector<char> taken(imp.size(), 0);
  std::vector<int> extreme;
  for (int k = 0; k < n_e; ++k) {
    int best = -1;
    for (size_t i = 0; i < imp.size(); ++i) {
      if (taken[i]) continue;
      if (best < 0 || imp[i] > imp[best]) best = static_cast<int>(i);
    }
    taken[best] = 1;
    extreme.push_back(best);
  }
  std::sort(extreme.begin(), extreme.end());
  return extreme;
}

PeriodMatrix matrix_to_pm(const MatrixXd& per_day_scalar) {
  // one synthetic demand series whose 24 hours each equal the scalar
  PeriodMatrix pm;
  const int n = static_cast<int>(per_day_scalar.rows());
  pm.features.resize(n, 24);
  for (int t = 0; t < n; ++t)
    pm.features.row(t).setConstant(per_day_scalar(t, 0));
  pm.series_names = {"demand_r1"};
  pm.demand_regions = {1};
  pm.day_index.resize(n);
  for (int t = 0; t < n; ++t) pm.day_index[t] = t;
  return pm;
}

}  // namespace

TEST_SUITE("aggregation") {

TEST_CASE("ward clusters the obvious pair first") {
  MatrixXd x(3, 1);
  x << 0.0, 0.1, 10.0;
  const auto labels = ward_cluster(x, 2);
  CHECK(labels[0] == labels[1]);
  CHECK(labels[0] != labels[2]);
  CHECK(labels[0] == 0);  // smallest member first
  CHECK(labels[2] == 1);

  CHECK(ward_cluster(x, 3) == std::vector<int>{0, 1, 2});
  CHECK(ward_cluster(x, 1) == std::vector<int>{0, 0, 0});
  CHECK_THROWS_AS(ward_cluster(x, 4), InputError);
  CHECK_THROWS_AS(ward_cluster(x, 0), InputError);
}

TEST_CASE("ward linkage matches the brute-force oracle") {
  Rng rng(314159);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(7));  // 2..8 points
    const int dim = 1 + static_cast<int>(rng.next_below(3));
    MatrixXd x(n, dim);
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < dim; ++d) x(i, d) = rng.uniform(-5.0, 5.0);
    // occasionally duplicate a row to force exact ties
    if (trial % 4 == 0 && n >= 3) x.row(n - 1) = x.row(0);

    const auto got = ward_linkage(x);
    const auto want = ward_oracle(x);
    REQUIRE(got.size() == want.size());
    for (size_t s = 0; s < got.size(); ++s) {
      CAPTURE(trial);
      CAPTURE(s);
      CHECK(got[s].a == want[s].a);
      CHECK(got[s].b == want[s].b);
      CHECK(got[s].cost ==
            doctest::Approx(want[s].cost).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("representative selection: mean, medoid, ties") {
  MatrixXd x(3, 2);
  x << 0, 0, 1, 1, 5, 5;
  const std::vector<int> labels{0, 0, 0};
  const RepResult mean = representatives(x, x, labels, 1, RepKind::Mean);
  CHECK(mean.reps(0, 0) == doctest::Approx(2.0));
  CHECK(mean.reps(0, 1) == doctest::Approx(2.0));
  CHECK(mean.rep_day[0] == -1);

  const RepResult med = representatives(x, x, labels, 1, RepKind::Medoid);
  CHECK(med.rep_day[0] == 1);
  CHECK(med.reps.row(0) == x.row(1));  // bit-exact member row

  // two points equidistant from the centroid: earlier index wins
  MatrixXd tie(2, 1);
  tie << -1.0, 1.0;
  const RepResult t =
      representatives(tie, tie, std::vector<int>{0, 0}, 1, RepKind::Medoid);
  CHECK(t.rep_day[0] == 0);

  // singleton cluster is its own mean and medoid
  MatrixXd single(1, 2);
  single << 3, 4;
  for (RepKind k : {RepKind::Mean, RepKind::Medoid}) {
    const RepResult r =
        representatives(single, single, std::vector<int>{0}, 1, k);
    CHECK(r.reps.row(0) == single.row(0));
    CHECK(r.rep_day[0] == 0);
  }
}

TEST_CASE("a priori aggregation: identity and the 6-to-3 worked shape") {
  MatrixXd scalars(6, 1);
  // days 0,2 near 1; day 3 near 5; days 1,4,5 near 9
  scalars << 1.0, 9.0, 1.1, 5.0, 9.1, 9.2;
  const PeriodMatrix pm = matrix_to_pm(scalars);

  const Aggregation ident =
      aggregate_a_priori(pm, 6, RepKind::Medoid, ExtremeHeuristic::None);
  CHECK(ident.n_reps() == 6);
  for (int t = 0; t < 6; ++t) {
    CHECK(ident.mapping[t] == t);
    CHECK(ident.weights[t] == 1);
    CHECK(ident.provenance[t] == t);
    CHECK(ident.representatives.row(t) == pm.features.row(t));
  }

  const Aggregation agg =
      aggregate_a_priori(pm, 3, RepKind::Medoid, ExtremeHeuristic::None);
  agg.validate();
  CHECK(agg.n_reps() == 3);
  // weights by first occurrence: day0's rep covers {0,2}, day1's {1,4,5},
  // day3's {3} — the worked 6-day example's (2,1,3) multiset
  CHECK(agg.weights[agg.mapping[0]] == 2);
  CHECK(agg.weights[agg.mapping[1]] == 3);
  CHECK(agg.weights[agg.mapping[3]] == 1);
  CHECK(agg.mapping[0] == agg.mapping[2]);
  CHECK(agg.mapping[1] == agg.mapping[4]);
  CHECK(agg.mapping[1] == agg.mapping[5]);
  CHECK(agg.ordered);

  // medoid representatives are original rows
  for (int c = 0; c < 3; ++c) {
    CHECK(agg.provenance[c] >= 0);
    CHECK(agg.representatives.row(c) == pm.features.row(agg.provenance[c]));
  }
}

TEST_CASE("max-demand / min-wind heuristic forces singletons") {
  // two demand series and one wind series, 8 days
  const int n = 8;
  PeriodMatrix pm;
  pm.features.resize(n, 3 * 24);
  pm.series_names = {"demand_r1", "demand_r2", "wind_r3"};
  pm.demand_regions = {1, 2};
  pm.wind_regions = {3};
  for (int t = 0; t < n; ++t) {
    pm.features.row(t).segment(0, 24).setConstant(10.0 + t * 0.01);
    pm.features.row(t).segment(24, 24).setConstant(20.0);
    pm.features.row(t).segment(48, 24).setConstant(0.5);
  }
  pm.day_index.resize(n);
  for (int t = 0; t < n; ++t) pm.day_index[t] = t;
  // day 6: region-1 demand spike; day 2: region-2 demand spike; day 4: calm
  pm.features.row(6).segment(0, 24).setConstant(50.0);
  pm.features.row(2).segment(24, 24).setConstant(90.0);
  pm.features.row(4).segment(48, 24).setConstant(0.01);

  const Aggregation agg = aggregate_a_priori(
      pm, 5, RepKind::Medoid, ExtremeHeuristic::MaxDemandMinWind);
  agg.validate();
  CHECK(agg.n_reps() == 5);
  for (int day : {6, 2, 4}) {
    const int id = agg.mapping[day];
    CHECK(agg.weights[id] == 1);
    CHECK(agg.provenance[id] == day);
  }

  // budget too small for the forced days
  CHECK_THROWS_AS(aggregate_a_priori(pm, 2, RepKind::Medoid,
                                     ExtremeHeuristic::MaxDemandMinWind),
                  InputError);
}

TEST_CASE("importance partition matches oracle and tie rules") {
  const std::vector<double> imp{3, 1, 4, 2};
  const ImportancePartition p = importance_partition(imp, 0.5);
  CHECK(p.extreme == std::vector<int>{0, 2});
  CHECK(p.regular == std::vector<int>{1, 3});

  const std::vector<double> equal(8, 7.0);
  const ImportancePartition q = importance_partition(equal, 0.25);
  CHECK(q.extreme == std::vector<int>{0, 1});

  // floor rule and the minimum of one
  CHECK(importance_partition(std::vector<double>(1095, 0.0), 0.05)
            .extreme.size() == 54);
  CHECK(importance_partition(std::vector<double>{5, 6}, 0.1).extreme ==
        std::vector<int>{1});

  CHECK_THROWS_AS(importance_partition(imp, 0.0), InputError);
  CHECK_THROWS_AS(importance_partition(imp, 1.0), InputError);

  Rng rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(40));
    std::vector<double> v(n);
    for (double& x : v)
      x = static_cast<double>(rng.next_below(6));  // many ties
    const double pe = 0.01 + 0.98 * rng.uniform01();
    const int n_e = std::max(1, static_cast<int>(std::floor(pe * n)));
    CHECK(importance_partition(v, pe).extreme == partition_oracle(v, n_e));
  }
}

TEST_CASE("stratified aggregation with storage features") {
  // time-series features constant: clustering must be driven by storage
  const int n = 10;
  PeriodMatrix pm;
  pm.features = MatrixXd::Constant(n, 24, 42.0);
  pm.series_names = {"demand_r1"};
  pm.demand_regions = {1};
  pm.day_index.resize(n);
  for (int t = 0; t < n; ++t) pm.day_index[t] = t;

  // storage features: two groups among the regular days
  MatrixXd sf = MatrixXd::Zero(n, 24);
  for (int t = 0; t < n; ++t) sf.row(t).setConstant(t < 5 ? -3.0 : 3.0);

  ImportancePartition part;
  part.extreme = {0, 9};
  part.regular = {1, 2, 3, 4, 5, 6, 7, 8};

  const Aggregation agg =
      aggregate_stratified(pm, part, 4, RepKind::Medoid, sf);
  agg.validate();
  REQUIRE(agg.n_reps() == 4);  // 2 extreme + 2 regular
  int n_extreme = 0, n_regular = 0;
  for (Stratum s : agg.stratum)
    (s == Stratum::Extreme ? n_extreme : n_regular)++;
  CHECK(n_extreme == 2);
  CHECK(n_regular == 2);
  // regular days split along the storage-feature groups
  CHECK(agg.mapping[1] == agg.mapping[2]);
  CHECK(agg.mapping[1] == agg.mapping[3]);
  CHECK(agg.mapping[5] == agg.mapping[6]);
  CHECK(agg.mapping[1] != agg.mapping[5]);
  // extreme days never share a representative with regular days
  for (int d : part.extreme)
    CHECK(agg.stratum[agg.mapping[d]] == Stratum::Extreme);
  for (int d : part.regular)
    CHECK(agg.stratum[agg.mapping[d]] == Stratum::Regular);

  // representatives live in time-series space (24 columns, constant 42)
  CHECK(agg.representatives.cols() == 24);
  CHECK(agg.representatives.minCoeff() == doctest::Approx(42.0));

  // the default-system dimensionality arithmetic: 6 series + 3 storage blocks
  CHECK((3 + 3) * 24 + 3 * 24 == 216);

  CHECK_THROWS_AS(aggregate_stratified(pm, part, 5, RepKind::Medoid, sf),
                  InputError);  // odd budget
  MatrixXd bad = MatrixXd::Zero(n, 23);
  CHECK_THROWS_AS(aggregate_stratified(pm, part, 4, RepKind::Medoid, bad),
                  InputError);  // not 24-hour blocks
  MatrixXd short_rows = MatrixXd::Zero(n - 1, 24);
  CHECK_THROWS_AS(
      aggregate_stratified(pm, part, 4, RepKind::Medoid, short_rows),
      InputError);

  // stratum smaller than its budget keeps size, no budget transfer
  ImportancePartition tiny;
  tiny.extreme = {0};
  tiny.regular = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const Aggregation small =
      aggregate_stratified(pm, tiny, 8, RepKind::Medoid, sf);
  int ex = 0;
  for (Stratum s : small.stratum)
    if (s == Stratum::Extreme) ++ex;
  CHECK(ex == 1);
  CHECK(small.n_reps() <= 1 + 4);
}

TEST_CASE("degenerate single-stratum partition equals plain clustering") {
  Rng rng(99);
  MatrixXd scalars(12, 1);
  for (int i = 0; i < 12; ++i) scalars(i, 0) = rng.uniform(0.0, 10.0);
  const PeriodMatrix pm = matrix_to_pm(scalars);

  ImportancePartition all_regular;
  for (int t = 0; t < 12; ++t) all_regular.regular.push_back(t);

  const Aggregation strat =
      aggregate_stratified(pm, all_regular, 4, RepKind::Medoid);
  const Aggregation plain =
      aggregate_a_priori(pm, 4, RepKind::Medoid, ExtremeHeuristic::None);
  CHECK(strat.mapping == plain.mapping);
  CHECK(strat.weights == plain.weights);
  CHECK(strat.representatives == plain.representatives);
}

TEST_CASE("clustering is permutation covariant on tie-free data") {
  Rng rng(1234);
  const int n = 9;
  MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < 2; ++d) x(i, d) = rng.uniform(-4.0, 4.0);

  const std::vector<int> base = ward_cluster(x, 3);
  // a fixed permutation
  const std::vector<int> perm{4, 7, 0, 2, 8, 1, 6, 3, 5};
  MatrixXd px(n, 2);
  for (int i = 0; i < n; ++i) px.row(i) = x.row(perm[i]);
  const std::vector<int> plabels = ward_cluster(px, 3);

  // cluster sets must coincide after undoing the permutation
  auto sets = [n](const std::vector<int>& labels,
                  const std::vector<int>& order) {
    std::set<std::set<int>> out;
    std::vector<std::set<int>> by_label(n);
    for (int i = 0; i < n; ++i) by_label[labels[i]].insert(order[i]);
    for (auto& s : by_label)
      if (!s.empty()) out.insert(s);
    return out;
  };
  std::vector<int> ident(n);
  for (int i = 0; i < n; ++i) ident[i] = i;
  CHECK(sets(base, ident) == sets(plabels, perm));
}

TEST_CASE("aggregation json round trip is lossless") {
  MatrixXd scalars(6, 1);
  scalars << 1.0, 9.0, 1.1, 5.0, 9.1, 9.2;
  PeriodMatrix pm = matrix_to_pm(scalars);
  pm.features(0, 3) = 0.12345678901234567;  // exercise shortest-round-trip
  pm.start = Timestamp::parse("2020-01-01T00:00Z");

  ImportancePartition part;
  part.extreme = {3};
  part.regular = {0, 1, 2, 4, 5};
  const Aggregation agg = aggregate_stratified(pm, part, 2, RepKind::Medoid);

  const std::string text = agg.to_json_text();
  const Aggregation back = Aggregation::from_json_text(text);
  CHECK(back.mapping == agg.mapping);
  CHECK(back.weights == agg.weights);
  CHECK(back.representatives == agg.representatives);  // bit-exact
  CHECK(back.provenance == agg.provenance);
  CHECK(back.stratum.size() == agg.stratum.size());
  CHECK(back.to_json_text() == text);
}

}  // TEST_SUITE
