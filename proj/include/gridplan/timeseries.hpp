#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gridplan/system_config.hpp"

namespace gridplan {

class Rng;

// UTC hour on the proleptic Gregorian calendar.
struct Timestamp {
  std::int64_t hours = 0;  // since 1970-01-01T00:00Z

  // Accepts "YYYY-MM-DDTHH:MM", optional ":SS", optional trailing "Z", and a
  // space instead of 'T'. Minutes and seconds must be zero (hourly data).
  static Timestamp parse(const std::string& text);
  std::string to_string() const;  // "YYYY-MM-DDTHH:00Z"

  int year() const;
  Timestamp plus_hours(std::int64_t h) const { return {hours + h}; }
  bool operator==(const Timestamp&) const = default;
};

// Hours from the epoch to Jan 1st 00:00 of the given year.
std::int64_t year_start_hours(int year);

// Hourly demand (MW) and wind capacity-factor series for the regions that
// carry them. Region lists are ascending; series vectors are parallel.
struct TimeSeriesSet {
  Timestamp start;
  std::vector<int> demand_regions;
  std::vector<int> wind_regions;
  std::vector<std::vector<double>> demand;
  std::vector<std::vector<double>> wind_cf;

  std::int64_t length() const {
    return demand.empty() ? (wind_cf.empty() ? 0 : static_cast<std::int64_t>(
                                                       wind_cf[0].size()))
                          : static_cast<std::int64_t>(demand[0].size());
  }
  int n_days() const { return static_cast<int>(length() / 24); }

  const std::vector<double>& demand_for(int region) const;
  const std::vector<double>& wind_for(int region) const;

  // Consecutive whole days [first_day, first_day + count).
  TimeSeriesSet slice_days(int first_day, int count) const;
  // Consecutive hours (used by the rolling-horizon driver).
  TimeSeriesSet slice_hours(std::int64_t first, std::int64_t count) const;

  double total_demand() const;

  // Throws ValidationError on any violated invariant (equal lengths, length
  // a multiple of 24, demand >= 0, capacity factors in [0,1]).
  void validate() const;
};

// Daily feature matrix: row t is day t's values of every series, columns
// ordered demand regions ascending then wind regions ascending, each with
// hours 1..24.
struct PeriodMatrix {
  Eigen::MatrixXd features;        // n_periods x (n_series * 24)
  std::vector<std::string> series_names;
  std::vector<int> day_index;      // original day of each row
  // carried for the lossless inverse reshape
  Timestamp start;
  std::vector<int> demand_regions;
  std::vector<int> wind_regions;

  int n_periods() const { return static_cast<int>(features.rows()); }
  int n_series() const { return static_cast<int>(series_names.size()); }
  std::string column_label(int col) const;
};

// CSV ingestion per the documented format: header
// "timestamp,demand_r<id>...,wind_r<id>..." covering exactly the config's
// demand and wind regions (any column order), hourly contiguous timestamps.
TimeSeriesSet load_time_series(const std::string& path,
                               const SystemConfig& config);

// Writes the same CSV format (used by the synthetic generator and tests).
void save_time_series(const TimeSeriesSet& ts, const std::string& path);

// Concatenation of n_years calendar years drawn independently with
// replacement from the whole years contained in ts. Deterministic per seed.
TimeSeriesSet resample_years(const TimeSeriesSet& ts, int n_years,
                             std::uint64_t seed);

PeriodMatrix to_period_matrix(const TimeSeriesSet& ts);
TimeSeriesSet from_period_matrix(const PeriodMatrix& pm);

// Scale/shift features for clustering. Series mode pools all hours of one
// series over all days to mean 0 / population variance 1; hour_of_day treats
// every column separately; minmax maps each pooled series to [0,1]. Constant
// series become all zeros in every mode.
PeriodMatrix normalize_features(const PeriodMatrix& m,
                                Normalization mode = Normalization::Series);

}  // namespace gridplan
