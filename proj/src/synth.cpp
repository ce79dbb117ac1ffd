#include "gridplan/synth.hpp"

#include <algorithm>
#include <cmath>

#include "gridplan/errors.hpp"
#include "gridplan/rng.hpp"

namespace gridplan {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Independent, reproducible stream per (seed, series kind, region).
Rng region_stream(std::uint64_t seed, std::uint64_t kind, int region) {
  return Rng(seed * 0x9E3779B97F4A7C15ull + kind * 0x100000001B3ull +
             static_cast<std::uint64_t>(region));
}

}  // namespace

std::vector<int> scarcity_event_days(const SynthSpec& spec) {
  std::vector<int> days;
  if (spec.scarcity_events <= 0) return days;
  if (spec.scarcity_days < 1)
    throw InputError("scarcity events need at least one day each");

  int prev_end = 0;
  for (int i = 0; i < spec.scarcity_events; ++i) {
    const double center = static_cast<double>(i + 1) * spec.days /
                          (spec.scarcity_events + 1);
    int start = static_cast<int>(std::lround(center)) - spec.scarcity_days / 2;
    start = std::clamp(start, 0, spec.days - spec.scarcity_days);
    if (start < prev_end)
      throw InputError("series too short for " +
                       std::to_string(spec.scarcity_events) +
                       " scarcity events of " +
                       std::to_string(spec.scarcity_days) + " days");
    for (int d = 0; d < spec.scarcity_days; ++d) days.push_back(start + d);
    prev_end = start + spec.scarcity_days;
  }
  return days;
}

TimeSeriesSet synthesize_series(const SystemConfig& config,
                                const SynthSpec& spec) {
  if (spec.days < 1)
    throw InputError("synthetic series needs at least one day");
  if (spec.demand_base <= 0.0)
    throw InputError("demand_base must be positive");
  config.validate();

  const std::vector<int> event_days = scarcity_event_days(spec);
  std::vector<char> in_event(static_cast<size_t>(spec.days), 0);
  for (int d : event_days) in_event[static_cast<size_t>(d)] = 1;

  TimeSeriesSet ts;
  ts.start = spec.start;
  ts.demand_regions = config.demand_regions;
  ts.wind_regions = config.wind_regions;

  const std::int64_t hours = static_cast<std::int64_t>(spec.days) * 24;

  for (size_t i = 0; i < config.demand_regions.size(); ++i) {
    const int region = config.demand_regions[i];
    Rng rng = region_stream(spec.seed, 1, region);
    const double scale =
        spec.demand_base * (0.9 + 0.05 * static_cast<double>(i));
    std::vector<double> series;
    series.reserve(static_cast<size_t>(hours));
    for (std::int64_t t = 0; t < hours; ++t) {
      const int day = static_cast<int>(t / 24);
      const int h = static_cast<int>(t % 24);
      const double season = std::cos(kTwoPi * (day % 365) / 365.0);
      const double diurnal = std::sin(kTwoPi * (h - 12) / 24.0);
      double v = scale * (1.0 + 0.22 * season + 0.15 * diurnal +
                          0.05 * rng.normal());
      if (in_event[static_cast<size_t>(day)]) v *= spec.scarcity_demand_factor;
      series.push_back(std::max(v, 0.0));
    }
    ts.demand.push_back(std::move(series));
  }

  for (size_t i = 0; i < config.wind_regions.size(); ++i) {
    const int region = config.wind_regions[i];
    Rng rng = region_stream(spec.seed, 2, region);
    const double rho = 0.96;  // multi-day weather persistence
    const double innovation = std::sqrt(1.0 - rho * rho);
    const double offset = -0.35 + 0.1 * static_cast<double>(i);
    double x = rng.normal();
    std::vector<double> series;
    series.reserve(static_cast<size_t>(hours));
    for (std::int64_t t = 0; t < hours; ++t) {
      const int day = static_cast<int>(t / 24);
      const double season = std::cos(kTwoPi * (day % 365) / 365.0);
      double cf = logistic(offset + 0.9 * x + 0.5 * season);
      if (in_event[static_cast<size_t>(day)]) cf *= spec.scarcity_wind_factor;
      series.push_back(std::clamp(cf, 0.0, 1.0));
      x = rho * x + innovation * rng.normal();
    }
    ts.wind_cf.push_back(std::move(series));
  }

  ts.validate();
  return ts;
}

}  // namespace gridplan
