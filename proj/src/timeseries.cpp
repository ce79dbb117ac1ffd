#include "gridplan/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridplan/errors.hpp"
#include "gridplan/rng.hpp"

namespace gridplan {

namespace {

// days since 1970-01-01 for a civil date (proleptic Gregorian)
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

int parse_int_field(const std::string& s, size_t pos, size_t len) {
  int v = 0;
  for (size_t i = pos; i < pos + len; ++i) {
    if (i >= s.size() || !is_digit(s[i])) return -1;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

Timestamp Timestamp::parse(const std::string& text) {
  // YYYY-MM-DD[T ]HH:MM[:SS][Z]
  auto fail = [&text]() -> Timestamp {
    throw FormatError("bad timestamp '" + text +
                      "' (expected ISO-8601 hourly, e.g. 2020-01-01T05:00Z)");
  };
  if (text.size() < 16) return fail();
  const int y = parse_int_field(text, 0, 4);
  const int mo = parse_int_field(text, 5, 2);
  const int d = parse_int_field(text, 8, 2);
  const int h = parse_int_field(text, 11, 2);
  const int mi = parse_int_field(text, 14, 2);
  if (y < 0 || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 ||
      mi != 0)
    return fail();
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':')
    return fail();
  size_t pos = 16;
  if (pos < text.size() && text[pos] == ':') {
    if (parse_int_field(text, pos + 1, 2) != 0) return fail();
    pos += 3;
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) return fail();
  return {days_from_civil(y, mo, d) * 24 + h};
}

std::string Timestamp::to_string() const {
  std::int64_t days = hours / 24;
  int hour = static_cast<int>(hours % 24);
  if (hour < 0) {
    hour += 24;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00Z", y, m, d, hour);
  return buf;
}

int Timestamp::year() const {
  std::int64_t days = hours / 24;
  if (hours % 24 < 0) --days;
  int y, m, d;
  civil_from_days(days, y, m, d);
  return y;
}

std::int64_t year_start_hours(int year) {
  return days_from_civil(year, 1, 1) * 24;
}

const std::vector<double>& TimeSeriesSet::demand_for(int region) const {
  for (size_t i = 0; i < demand_regions.size(); ++i)
    if (demand_regions[i] == region) return demand[i];
  throw InputError("no demand series for region " + std::to_string(region));
}

const std::vector<double>& TimeSeriesSet::wind_for(int region) const {
  for (size_t i = 0; i < wind_regions.size(); ++i)
    if (wind_regions[i] == region) return wind_cf[i];
  throw InputError("no wind series for region " + std::to_string(region));
}

TimeSeriesSet TimeSeriesSet::slice_days(int first_day, int count) const {
  return slice_hours(static_cast<std::int64_t>(first_day) * 24,
                     static_cast<std::int64_t>(count) * 24);
}

TimeSeriesSet TimeSeriesSet::slice_hours(std::int64_t first,
                                         std::int64_t count) const {
  if (first < 0 || first + count > length())
    throw InputError("slice outside series range");
  TimeSeriesSet out;
  out.start = start.plus_hours(first);
  out.demand_regions = demand_regions;
  out.wind_regions = wind_regions;
  auto cut = [&](const std::vector<std::vector<double>>& src) {
    std::vector<std::vector<double>> dst;
    dst.reserve(src.size());
    for (const auto& s : src)
      dst.emplace_back(s.begin() + first, s.begin() + first + count);
    return dst;
  };
  out.demand = cut(demand);
  out.wind_cf = cut(wind_cf);
  return out;
}

double TimeSeriesSet::total_demand() const {
  double acc = 0.0;
  for (const auto& s : demand)
    for (double v : s) acc += v;
  return acc;
}

void TimeSeriesSet::validate() const {
  if (demand_regions.size() != demand.size() ||
      wind_regions.size() != wind_cf.size())
    throw ValidationError("series container sizes disagree with region lists");
  const std::int64_t len = length();
  if (len == 0) throw ValidationError("empty time series");
  if (len % 24 != 0)
    throw ValidationError("series length " + std::to_string(len) +
                          " is not a multiple of 24");
  for (size_t i = 0; i < demand.size(); ++i) {
    if (static_cast<std::int64_t>(demand[i].size()) != len)
      throw ValidationError("demand series lengths differ");
    for (double v : demand[i])
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("negative or non-finite demand value");
  }
  for (size_t i = 0; i < wind_cf.size(); ++i) {
    if (static_cast<std::int64_t>(wind_cf[i].size()) != len)
      throw ValidationError("wind series lengths differ");
    for (double v : wind_cf[i])
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("capacity factor outside [0,1]");
  }
  if (!std::is_sorted(demand_regions.begin(), demand_regions.end()) ||
      !std::is_sorted(wind_regions.begin(), wind_regions.end()))
    throw ValidationError("region lists must be ascending");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

double parse_double_field(const std::string& s, int line_no) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e)
    throw ValidationError("line " + std::to_string(line_no) +
                          ": cannot parse number '" + s + "'");
  return v;
}

}  // namespace

TimeSeriesSet load_time_series(const std::string& path,
                               const SystemConfig& config) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open time series file '" + path + "'");

  std::string header;
  if (!std::getline(in, header))
    throw FormatError("'" + path + "' is empty");
  const auto cols = split_csv_line(header);
  if (cols.empty() || cols[0] != "timestamp")
    throw SchemaError("first column must be 'timestamp'");

  TimeSeriesSet ts;
  ts.demand_regions = config.demand_regions;
  ts.wind_regions = config.wind_regions;
  ts.demand.resize(ts.demand_regions.size());
  ts.wind_cf.resize(ts.wind_regions.size());

  // map csv column -> (series kind, series index)
  enum class Kind { Demand, Wind };
  std::vector<std::pair<Kind, int>> slot(cols.size(), {Kind::Demand, -1});
  std::vector<bool> found_demand(ts.demand_regions.size(), false);
  std::vector<bool> found_wind(ts.wind_regions.size(), false);
  for (size_t c = 1; c < cols.size(); ++c) {
    const std::string& name = cols[c];
    bool matched = false;
    for (size_t i = 0; i < ts.demand_regions.size(); ++i) {
      if (name == "demand_r" + std::to_string(ts.demand_regions[i])) {
        slot[c] = {Kind::Demand, static_cast<int>(i)};
        found_demand[i] = true;
        matched = true;
      }
    }
    for (size_t i = 0; i < ts.wind_regions.size(); ++i) {
      if (name == "wind_r" + std::to_string(ts.wind_regions[i])) {
        slot[c] = {Kind::Wind, static_cast<int>(i)};
        found_wind[i] = true;
        matched = true;
      }
    }
    if (!matched)
      throw SchemaError("unexpected column '" + name + "' in '" + path + "'");
  }
  for (size_t i = 0; i < found_demand.size(); ++i)
    if (!found_demand[i])
      throw SchemaError("missing column 'demand_r" +
                        std::to_string(ts.demand_regions[i]) + "'");
  for (size_t i = 0; i < found_wind.size(); ++i)
    if (!found_wind[i])
      throw SchemaError("missing column 'wind_r" +
                        std::to_string(ts.wind_regions[i]) + "'");

  std::string line;
  int line_no = 1;
  bool first_row = true;
  Timestamp expected{};
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != cols.size())
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(cols.size()) + " fields, got " +
                        std::to_string(fields.size()));
    Timestamp t;
    try {
      t = Timestamp::parse(fields[0]);
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (first_row) {
      ts.start = t;
      first_row = false;
    } else if (t.hours != expected.hours) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": timestamps not contiguous hourly (expected " +
                        expected.to_string() + ", got " + t.to_string() + ")");
    }
    expected = t.plus_hours(1);

    for (size_t c = 1; c < fields.size(); ++c) {
      const double v = parse_double_field(fields[c], line_no);
      if (slot[c].first == Kind::Demand) {
        if (!std::isfinite(v) || v < 0.0)
          throw ValidationError("line " + std::to_string(line_no) +
                                ": demand must be finite and >= 0, got '" +
                                fields[c] + "'");
        ts.demand[slot[c].second].push_back(v);
      } else {
        if (!(v >= 0.0 && v <= 1.0))
          throw ValidationError("line " + std::to_string(line_no) +
                                ": capacity factor outside [0,1]: '" +
                                fields[c] + "'");
        ts.wind_cf[slot[c].second].push_back(v);
      }
    }
  }
  if (ts.length() == 0) throw FormatError("'" + path + "' has no data rows");
  if (ts.length() % 24 != 0)
    throw FormatError("'" + path + "' has " + std::to_string(ts.length()) +
                      " rows, not a multiple of 24");
  ts.validate();
  return ts;
}

void save_time_series(const TimeSeriesSet& ts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << "timestamp";
  for (int r : ts.demand_regions) out << ",demand_r" << r;
  for (int r : ts.wind_regions) out << ",wind_r" << r;
  out << "\n";
  char buf[32];
  const std::int64_t len = ts.length();
  for (std::int64_t h = 0; h < len; ++h) {
    out << ts.start.plus_hours(h).to_string();
    auto emit = [&](double v) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ',';
      out.write(buf, p - buf);
      (void)ec;
    };
    for (const auto& s : ts.demand) emit(s[h]);
    for (const auto& s : ts.wind_cf) emit(s[h]);
    out << "\n";
  }
  if (!out) throw InputError("write to '" + path + "' failed");
}

TimeSeriesSet resample_years(const TimeSeriesSet& ts, int n_years,
                             std::uint64_t seed) {
  if (n_years < 1) throw InputError("n_years must be >= 1");
  ts.validate();

  // whole calendar years fully contained in the series
  struct YearBlock {
    int year;
    std::int64_t offset, hours;
  };
  std::vector<YearBlock> pool;
  const std::int64_t end = ts.start.hours + ts.length();
  for (int y = ts.start.year(); year_start_hours(y) < end; ++y) {
    const std::int64_t ys = year_start_hours(y);
    const std::int64_t ye = year_start_hours(y + 1);
    if (ys >= ts.start.hours && ye <= end)
      pool.push_back({y, ys - ts.start.hours, ye - ys});
  }
  if (pool.empty())
    throw InputError("series does not contain a whole calendar year");

  Rng rng(seed);
  TimeSeriesSet out;
  out.demand_regions = ts.demand_regions;
  out.wind_regions = ts.wind_regions;
  out.demand.resize(ts.demand.size());
  out.wind_cf.resize(ts.wind_cf.size());
  bool first = true;
  for (int k = 0; k < n_years; ++k) {
    const YearBlock& pick =
        pool[static_cast<size_t>(rng.next_below(pool.size()))];
    if (first) {
      out.start = {year_start_hours(pick.year)};
      first = false;
    }
    for (size_t i = 0; i < ts.demand.size(); ++i)
      out.demand[i].insert(out.demand[i].end(),
                           ts.demand[i].begin() + pick.offset,
                           ts.demand[i].begin() + pick.offset + pick.hours);
    for (size_t i = 0; i < ts.wind_cf.size(); ++i)
      out.wind_cf[i].insert(out.wind_cf[i].end(),
                            ts.wind_cf[i].begin() + pick.offset,
                            ts.wind_cf[i].begin() + pick.offset + pick.hours);
  }
  return out;
}

PeriodMatrix to_period_matrix(const TimeSeriesSet& ts) {
  if (ts.length() % 24 != 0)
    throw InputError("series length is not a multiple of 24");
  PeriodMatrix pm;
  pm.start = ts.start;
  pm.demand_regions = ts.demand_regions;
  pm.wind_regions = ts.wind_regions;
  for (int r : ts.demand_regions)
    pm.series_names.push_back("demand_r" + std::to_string(r));
  for (int r : ts.wind_regions)
    pm.series_names.push_back("wind_r" + std::to_string(r));

  const int days = ts.n_days();
  const int ns = pm.n_series();
  pm.features.resize(days, ns * 24);
  for (int t = 0; t < days; ++t) {
    int s = 0;
    for (const auto& series : ts.demand) {
      for (int h = 0; h < 24; ++h)
        pm.features(t, s * 24 + h) = series[t * 24 + h];
      ++s;
    }
    for (const auto& series : ts.wind_cf) {
      for (int h = 0; h < 24; ++h)
        pm.features(t, s * 24 + h) = series[t * 24 + h];
      ++s;
    }
  }
  pm.day_index.resize(days);
  for (int t = 0; t < days; ++t) pm.day_index[t] = t;
  return pm;
}

TimeSeriesSet from_period_matrix(const PeriodMatrix& pm) {
  TimeSeriesSet ts;
  ts.start = pm.start;
  ts.demand_regions = pm.demand_regions;
  ts.wind_regions = pm.wind_regions;
  const int days = pm.n_periods();
  const size_t nd = pm.demand_regions.size();
  const size_t nw = pm.wind_regions.size();
  ts.demand.assign(nd, std::vector<double>(days * 24));
  ts.wind_cf.assign(nw, std::vector<double>(days * 24));
  for (int t = 0; t < days; ++t) {
    for (size_t i = 0; i < nd; ++i)
      for (int h = 0; h < 24; ++h)
        ts.demand[i][t * 24 + h] = pm.features(t, static_cast<int>(i) * 24 + h);
    for (size_t i = 0; i < nw; ++i)
      for (int h = 0; h < 24; ++h)
        ts.wind_cf[i][t * 24 + h] =
            pm.features(t, static_cast<int>(nd + i) * 24 + h);
  }
  return ts;
}

std::string PeriodMatrix::column_label(int col) const {
  const int s = col / 24;
  const int h = col % 24 + 1;
  return series_names[s] + "_h" + std::to_string(h);
}

PeriodMatrix normalize_features(const PeriodMatrix& m, Normalization mode) {
  PeriodMatrix out = m;
  const int days = m.n_periods();
  const int ns = m.n_series();
  if (days == 0) return out;

  auto normalize_block = [&](int col0, int ncols) {
    // pooled mean/variance over all days and the given columns
    double mean = 0.0;
    const double count = static_cast<double>(days) * ncols;
    for (int c = col0; c < col0 + ncols; ++c) mean += m.features.col(c).sum();
    mean /= count;
    double var = 0.0;
    for (int c = col0; c < col0 + ncols; ++c)
      var += (m.features.col(c).array() - mean).square().sum();
    var /= count;
    if (var <= 1e-24) {
      for (int c = col0; c < col0 + ncols; ++c) out.features.col(c).setZero();
    } else {
      const double inv = 1.0 / std::sqrt(var);
      for (int c = col0; c < col0 + ncols; ++c)
        out.features.col(c) = (m.features.col(c).array() - mean) * inv;
    }
  };
  auto minmax_block = [&](int col0, int ncols) {
    double lo = m.features.col(col0).minCoeff();
    double hi = m.features.col(col0).maxCoeff();
    for (int c = col0 + 1; c < col0 + ncols; ++c) {
      lo = std::min(lo, m.features.col(c).minCoeff());
      hi = std::max(hi, m.features.col(c).maxCoeff());
    }
    if (hi - lo <= 1e-24) {
      for (int c = col0; c < col0 + ncols; ++c) out.features.col(c).setZero();
    } else {
      const double inv = 1.0 / (hi - lo);
      for (int c = col0; c < col0 + ncols; ++c)
        out.features.col(c) = (m.features.col(c).array() - lo) * inv;
    }
  };

  switch (mode) {
    case Normalization::Series:
      for (int s = 0; s < ns; ++s) normalize_block(s * 24, 24);
      break;
    case Normalization::HourOfDay:
      for (int c = 0; c < ns * 24; ++c) normalize_block(c, 1);
      break;
    case Normalization::MinMax:
      for (int s = 0; s < ns; ++s) minmax_block(s * 24, 24);
      break;
  }
  return out;
}

}  // namespace gridplan
