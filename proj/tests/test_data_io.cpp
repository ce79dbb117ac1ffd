#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "gridplan/errors.hpp"
#include "gridplan/system_config.hpp"
#include "gridplan/timeseries.hpp"

using namespace gridplan;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    path = (std::filesystem::temp_directory_path() /
            ("gridplan_test_" + std::to_string(counter++) + ".csv"))
               .string();
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
  static inline int counter = 0;
};

// minimal two-region config: demand in 1, wind in 2
SystemConfig tiny_config() {
  SystemConfig c;
  c.regions = {1, 2};
  c.techs = {{"peaking", 100000.0, 35.0, false, {1}},
             {"wind", 100000.0, 0.0, true, {2}}};
  c.demand_regions = {1};
  c.wind_regions = {2};
  c.storage_regions = {};
  c.edges = {{1, 2, 100000.0}};
  c.storage = {1000.0, 0.95, 1e-5};
  c.validate();
  return c;
}

std::string make_csv(int hours, double demand = 10.0, double cf = 0.5) {
  std::string s = "timestamp,demand_r1,wind_r2\n";
  Timestamp t = Timestamp::parse("2020-01-01T00:00Z");
  for (int h = 0; h < hours; ++h) {
    s += t.plus_hours(h).to_string() + "," + std::to_string(demand) + "," +
         std::to_string(cf) + "\n";
  }
  return s;
}

}  // namespace

TEST_SUITE("data_io") {

TEST_CASE("timestamp parse and format round trip") {
  const Timestamp t = Timestamp::parse("2020-03-01T05:00Z");
  CHECK(t.to_string() == "2020-03-01T05:00Z");
  CHECK(t.year() == 2020);
  CHECK(Timestamp::parse("2020-03-01 05:00").hours == t.hours);
  CHECK(Timestamp::parse("2020-03-01T05:00:00Z").hours == t.hours);
  CHECK(t.plus_hours(24).to_string() == "2020-03-02T05:00Z");

  // leap day arithmetic
  const Timestamp feb28 = Timestamp::parse("2020-02-28T23:00Z");
  CHECK(feb28.plus_hours(1).to_string() == "2020-02-29T00:00Z");
  CHECK(year_start_hours(2021) - year_start_hours(2020) == 366 * 24);
  CHECK(year_start_hours(2022) - year_start_hours(2021) == 365 * 24);

  CHECK_THROWS_AS(Timestamp::parse("2020-03-01T05:30Z"), FormatError);
  CHECK_THROWS_AS(Timestamp::parse("not a time"), FormatError);
  CHECK_THROWS_AS(Timestamp::parse("2020-13-01T00:00Z"), FormatError);
}

TEST_CASE("csv loading validates shape and values") {
  const SystemConfig cfg = tiny_config();

  TempFile good(make_csv(48));
  const TimeSeriesSet ts = load_time_series(good.path, cfg);
  CHECK(ts.length() == 48);
  CHECK(ts.n_days() == 2);
  CHECK(ts.demand_for(1)[0] == doctest::Approx(10.0));
  CHECK(ts.wind_for(2)[47] == doctest::Approx(0.5));

  TempFile bad_cf("timestamp,demand_r1,wind_r2\n2020-01-01T00:00Z,10,1.2\n");
  CHECK_THROWS_WITH_AS(load_time_series(bad_cf.path, cfg),
                       doctest::Contains("line 2"), ValidationError);

  TempFile neg("timestamp,demand_r1,wind_r2\n2020-01-01T00:00Z,-1,0.5\n");
  CHECK_THROWS_AS(load_time_series(neg.path, cfg), ValidationError);

  TempFile missing("timestamp,demand_r1\n2020-01-01T00:00Z,10\n");
  CHECK_THROWS_WITH_AS(load_time_series(missing.path, cfg),
                       doctest::Contains("wind_r2"), SchemaError);

  TempFile extra(
      "timestamp,demand_r1,wind_r2,bogus\n2020-01-01T00:00Z,10,0.5,1\n");
  CHECK_THROWS_AS(load_time_series(extra.path, cfg), SchemaError);

  // gap in the timestamps
  TempFile gap("timestamp,demand_r1,wind_r2\n2020-01-01T00:00Z,10,0.5\n"
               "2020-01-01T02:00Z,10,0.5\n");
  CHECK_THROWS_AS(load_time_series(gap.path, cfg), FormatError);

  // 25 rows: not a whole day
  TempFile ragged(make_csv(25));
  CHECK_THROWS_AS(load_time_series(ragged.path, cfg), FormatError);
}

TEST_CASE("csv save/load round trip") {
  const SystemConfig cfg = tiny_config();
  TempFile src(make_csv(24, 123.456, 0.789));
  const TimeSeriesSet ts = load_time_series(src.path, cfg);
  TempFile dst("");
  save_time_series(ts, dst.path);
  const TimeSeriesSet again = load_time_series(dst.path, cfg);
  CHECK(again.start == ts.start);
  CHECK(again.demand == ts.demand);
  CHECK(again.wind_cf == ts.wind_cf);
}

TEST_CASE("year resampling draws whole calendar years") {
  // two years of data: 2019 (365d) then 2020 (366d), distinguishable levels
  TimeSeriesSet ts;
  ts.start = {year_start_hours(2019)};
  ts.demand_regions = {1};
  ts.wind_regions = {2};
  std::vector<double> d, w;
  for (int h = 0; h < 365 * 24; ++h) d.push_back(100.0);
  for (int h = 0; h < 366 * 24; ++h) d.push_back(200.0);
  for (size_t h = 0; h < d.size(); ++h) w.push_back(0.5);
  ts.demand = {d};
  ts.wind_cf = {w};

  const TimeSeriesSet r = resample_years(ts, 3, 42);
  std::int64_t pos = 0;
  int n_2019 = 0, n_2020 = 0;
  for (int k = 0; k < 3; ++k) {
    const double level = r.demand[0][pos];
    const std::int64_t len = level == 100.0 ? 365 * 24 : 366 * 24;
    for (std::int64_t h = pos; h < pos + len; ++h)
      REQUIRE(r.demand[0][h] == level);
    (level == 100.0 ? n_2019 : n_2020)++;
    pos += len;
  }
  CHECK(pos == r.length());
  CHECK(n_2019 + n_2020 == 3);

  // determinism: same seed, same picks
  const TimeSeriesSet r2 = resample_years(ts, 3, 42);
  CHECK(r2.demand == r.demand);

  // different seeds eventually differ
  bool any_diff = false;
  for (std::uint64_t s = 0; s < 100 && !any_diff; ++s)
    any_diff = resample_years(ts, 3, s).demand != r.demand;
  CHECK(any_diff);

  // single-year source: forced pick
  TimeSeriesSet one = ts;
  one.demand[0].resize(365 * 24);
  one.wind_cf[0].resize(365 * 24);
  const TimeSeriesSet f = resample_years(one, 1, 7);
  CHECK(f.demand == one.demand);

  // shorter than a calendar year: rejected
  TimeSeriesSet stub = ts;
  stub.demand[0].resize(100 * 24);
  stub.wind_cf[0].resize(100 * 24);
  CHECK_THROWS_AS(resample_years(stub, 1, 0), InputError);
}

TEST_CASE("period matrix reshape is lossless with deterministic layout") {
  SystemConfig cfg = tiny_config();
  TempFile src(make_csv(48));
  TimeSeriesSet ts = load_time_series(src.path, cfg);
  // make the values distinguishable per hour
  for (int h = 0; h < 48; ++h) {
    ts.demand[0][h] = h;
    ts.wind_cf[0][h] = h / 100.0;
  }
  const PeriodMatrix pm = to_period_matrix(ts);
  CHECK(pm.n_periods() == 2);
  CHECK(pm.features.cols() == 48);
  CHECK(pm.series_names[0] == "demand_r1");
  CHECK(pm.series_names[1] == "wind_r2");
  CHECK(pm.column_label(0) == "demand_r1_h1");
  CHECK(pm.column_label(47) == "wind_r2_h24");
  // row 1 hour 3 of demand = absolute hour 26
  CHECK(pm.features(1, 2) == doctest::Approx(26.0));
  CHECK(pm.features(0, 24) == doctest::Approx(0.0));  // wind hour 1 day 0

  const TimeSeriesSet back = from_period_matrix(pm);
  CHECK(back.demand == ts.demand);
  CHECK(back.wind_cf == ts.wind_cf);
  CHECK(back.start == ts.start);
}

TEST_CASE("feature normalization modes") {
  PeriodMatrix pm;
  pm.series_names = {"s"};
  pm.demand_regions = {1};
  pm.features.resize(3, 24);
  // 24 columns; fill one series whose pooled values are {1,2,3} repeated
  for (int c = 0; c < 24; ++c) {
    pm.features(0, c) = 1.0;
    pm.features(1, c) = 2.0;
    pm.features(2, c) = 3.0;
  }
  pm.day_index = {0, 1, 2};

  const PeriodMatrix n = normalize_features(pm);
  // population variance of {1,2,3}: 2/3; (1-2)/sqrt(2/3) = -1.224744...
  CHECK(n.features(0, 0) == doctest::Approx(-1.2247448714).epsilon(1e-9));
  CHECK(n.features(1, 0) == doctest::Approx(0.0));
  CHECK(n.features(2, 0) == doctest::Approx(1.2247448714).epsilon(1e-9));

  // mean 0, variance 1, idempotent
  const PeriodMatrix nn = normalize_features(n);
  CHECK((nn.features - n.features).cwiseAbs().maxCoeff() < 1e-9);

  // constant series goes to zero
  PeriodMatrix flat = pm;
  flat.features.setConstant(5.0);
  CHECK(normalize_features(flat).features.cwiseAbs().maxCoeff() == 0.0);

  // minmax maps to [0,1]
  const PeriodMatrix mm = normalize_features(pm, Normalization::MinMax);
  CHECK(mm.features.minCoeff() == doctest::Approx(0.0));
  CHECK(mm.features.maxCoeff() == doctest::Approx(1.0));
  const PeriodMatrix mm2 = normalize_features(mm, Normalization::MinMax);
  CHECK((mm2.features - mm.features).cwiseAbs().maxCoeff() < 1e-9);
}

}  // TEST_SUITE

TEST_SUITE("system_config") {

TEST_CASE("six bus defaults match the benchmark description") {
  const SystemConfig c = SystemConfig::six_bus();
  c.validate();
  CHECK(c.regions == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK(c.tech("baseload").install_cost == 300000.0);
  CHECK(c.tech("baseload").gen_cost == 5.0);
  CHECK(c.tech("peaking").install_cost == 100000.0);
  CHECK(c.tech("peaking").gen_cost == 35.0);
  CHECK(c.tech("wind").install_cost == 100000.0);
  CHECK(c.tech("wind").gen_cost == 0.0);
  CHECK(c.tech("wind").is_wind);
  CHECK(c.tech("baseload").regions == std::vector<int>{1, 3, 6});
  CHECK(c.tech("wind").regions == std::vector<int>{2, 5, 6});
  CHECK(c.demand_regions == std::vector<int>{2, 4, 5});
  CHECK(c.storage_regions == std::vector<int>{2, 5, 6});
  REQUIRE(c.edges.size() == 7);
  std::set<std::pair<int, int>> got;
  for (const auto& e : c.edges) {
    got.insert({e.a, e.b});
    CHECK(e.install_cost == ((e.a == 1 && e.b == 5) ? 150000.0 : 100000.0));
  }
  const std::set<std::pair<int, int>> want{{1, 2}, {1, 5}, {1, 6}, {2, 3},
                                           {3, 4}, {4, 5}, {5, 6}};
  CHECK(got == want);
  CHECK(c.storage.install_cost == 1000.0);
  CHECK(c.storage.efficiency == 0.95);
  CHECK(c.storage.self_loss == 1e-5);
  CHECK(c.voll == 6000.0);
}

TEST_CASE("json round trip preserves the config") {
  const SystemConfig c = SystemConfig::six_bus();
  const std::string text = c.to_json_text();
  const SystemConfig d = SystemConfig::from_json_text(text);
  CHECK(d.to_json_text() == text);
  CHECK(d.regions == c.regions);
  CHECK(d.edges.size() == c.edges.size());
  CHECK(d.storage.efficiency == c.storage.efficiency);
  CHECK(d.voll == c.voll);
}

TEST_CASE("validation rejects malformed configs") {
  SystemConfig c = SystemConfig::six_bus();
  c.edges.push_back({3, 3, 1000.0});
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = SystemConfig::six_bus();
  c.storage.efficiency = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = SystemConfig::six_bus();
  c.techs[0].install_cost = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = SystemConfig::six_bus();
  c.demand_regions = {2, 4, 9};
  CHECK_THROWS_AS(c.validate(), ConfigError);

  // wind tech in a region without a cf series
  c = SystemConfig::six_bus();
  c.wind_regions = {2, 5};
  CHECK_THROWS_AS(c.validate(), ConfigError);

  CHECK_THROWS_AS(SystemConfig::from_json_text("{ nope"), ConfigError);
  CHECK_THROWS_AS(SystemConfig::from_json_text("{}"), ConfigError);
}

TEST_CASE("install cost perturbation spreads ties") {
  const SystemConfig c = SystemConfig::six_bus();
  const double base = 100000.0;
  CHECK(c.perturbed(base, 1) == doctest::Approx(100010.0));
  CHECK(c.perturbed(base, 3) == doctest::Approx(100030.0));
  // every edge gets a distinct index
  std::set<double> indices;
  for (const auto& e : c.edges) indices.insert(c.edge_perturbation_index(e));
  CHECK(indices.size() == c.edges.size());
}

}  // TEST_SUITE
