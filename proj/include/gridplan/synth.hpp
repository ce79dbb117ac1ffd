#pragma once

#include <cstdint>

#include "gridplan/timeseries.hpp"

namespace gridplan {

// Controls for the synthetic demand/wind generator. Output is deterministic
// per seed: demand is a seasonal + diurnal profile with noise, wind is a
// persistent AR(1) process squashed into [0,1] with windier winters, and the
// optional scarcity events overlay calm-and-cold stretches (wind collapsed,
// demand raised) that stress peak capacity and storage.
struct SynthSpec {
  int days = 365;
  std::uint64_t seed = 1;
  Timestamp start = Timestamp{year_start_hours(2019)};
  double demand_base = 50.0;   // mean demand level (MW) per region
  int scarcity_events = 0;     // number of engineered events
  int scarcity_days = 3;       // consecutive days per event
  double scarcity_wind_factor = 0.08;  // wind multiplier inside events
  double scarcity_demand_factor = 1.25;  // demand multiplier inside events
};

// Series for every demand/wind region of the config. Throws InputError on a
// nonpositive day count or events that cannot fit the series.
TimeSeriesSet synthesize_series(const SystemConfig& config,
                                const SynthSpec& spec);

// Day indices the events cover for a given spec (ascending); exposed so
// tests and experiments can assert against the engineered stress days.
std::vector<int> scarcity_event_days(const SynthSpec& spec);

}  // namespace gridplan
