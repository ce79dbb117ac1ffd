#include "gridplan/system_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string_view>
#include <utility>

#include "gridplan/errors.hpp"
#include "gridplan/lp.hpp"
#include "json.hpp"

namespace gridplan {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

// ---------------------------------------------------------------------------
// SystemDesign

SystemDesign SystemDesign::zeros(const SystemConfig& config) {
  SystemDesign d;
  d.cap_gen = MatrixXd::Zero(static_cast<int>(config.techs.size()),
                             static_cast<int>(config.regions.size()));
  d.cap_tr.assign(config.edges.size(), 0.0);
  d.cap_sto.assign(config.regions.size(), 0.0);
  return d;
}

double SystemDesign::total_gen(const SystemConfig& config,
                               const std::string& tech) const {
  for (size_t i = 0; i < config.techs.size(); ++i)
    if (config.techs[i].name == tech)
      return cap_gen.row(static_cast<int>(i)).sum();
  throw ConfigError("no generation technology named '" + tech + "'");
}

double SystemDesign::total_tr() const {
  double s = 0.0;
  for (double v : cap_tr) s += v;
  return s;
}

double SystemDesign::total_sto() const {
  double s = 0.0;
  for (double v : cap_sto) s += v;
  return s;
}

void SystemDesign::validate(const SystemConfig& config) const {
  const int nt = static_cast<int>(config.techs.size());
  const int nr = static_cast<int>(config.regions.size());
  if (cap_gen.rows() != nt || cap_gen.cols() != nr)
    throw ValidationError("generation capacity matrix has the wrong shape");
  if (cap_tr.size() != config.edges.size())
    throw ValidationError("transmission capacity count != edge count");
  if (cap_sto.size() != config.regions.size())
    throw ValidationError("storage capacity count != region count");
  for (int i = 0; i < nt; ++i) {
    for (int r = 0; r < nr; ++r) {
      const double v = cap_gen(i, r);
      if (v < 0.0)
        throw ValidationError("negative " + config.techs[i].name +
                              " capacity in region " +
                              std::to_string(config.regions[r]));
      if (v > 0.0 && !config.tech_allowed_in(config.techs[i],
                                             config.regions[r]))
        throw ValidationError(config.techs[i].name +
                              " capacity installed in disallowed region " +
                              std::to_string(config.regions[r]));
    }
  }
  for (double v : cap_tr)
    if (v < 0.0) throw ValidationError("negative transmission capacity");
  for (int r = 0; r < nr; ++r) {
    if (cap_sto[r] < 0.0)
      throw ValidationError("negative storage capacity in region " +
                            std::to_string(config.regions[r]));
    if (cap_sto[r] > 0.0 && !config.has_storage(config.regions[r]))
      throw ValidationError("storage installed in disallowed region " +
                            std::to_string(config.regions[r]));
  }
}

std::string SystemDesign::to_json_text(const SystemConfig& config) const {
  validate(config);
  json gen = json::object();
  for (size_t i = 0; i < config.techs.size(); ++i) {
    json per_region = json::object();
    for (int region : config.techs[i].regions)
      per_region[std::to_string(region)] =
          cap_gen(static_cast<int>(i), config.region_position(region));
    gen[config.techs[i].name] = std::move(per_region);
  }
  json tr = json::object();
  for (size_t e = 0; e < config.edges.size(); ++e)
    tr[std::to_string(config.edges[e].a) + "-" +
       std::to_string(config.edges[e].b)] = cap_tr[e];
  json sto = json::object();
  for (int region : config.storage_regions)
    sto[std::to_string(region)] = cap_sto[config.region_position(region)];
  json j;
  j["generation"] = std::move(gen);
  j["storage"] = std::move(sto);
  j["transmission"] = std::move(tr);
  return j.dump(2) + "\n";
}

SystemDesign SystemDesign::from_json_text(const std::string& text,
                                          const SystemConfig& config) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("design file is not valid JSON: ") + e.what());
  }
  auto number = [](const json& obj, const std::string& key) {
    if (!obj.contains(key))
      throw SchemaError("design file is missing '" + key + "'");
    if (!obj.at(key).is_number())
      throw SchemaError("design entry '" + key + "' is not a number");
    return obj.at(key).get<double>();
  };
  if (!j.is_object() || !j.contains("generation") || !j.contains("storage") ||
      !j.contains("transmission"))
    throw SchemaError(
        "design file needs 'generation', 'storage' and 'transmission'");

  SystemDesign d = zeros(config);
  const json& gen = j.at("generation");
  for (size_t i = 0; i < config.techs.size(); ++i) {
    if (!gen.contains(config.techs[i].name))
      throw SchemaError("design file is missing generation entry '" +
                        config.techs[i].name + "'");
    const json& per_region = gen.at(config.techs[i].name);
    for (int region : config.techs[i].regions)
      d.cap_gen(static_cast<int>(i), config.region_position(region)) =
          number(per_region, std::to_string(region));
  }
  for (size_t e = 0; e < config.edges.size(); ++e)
    d.cap_tr[e] = number(j.at("transmission"),
                         std::to_string(config.edges[e].a) + "-" +
                             std::to_string(config.edges[e].b));
  for (int region : config.storage_regions)
    d.cap_sto[config.region_position(region)] =
        number(j.at("storage"), std::to_string(region));
  d.validate(config);
  return d;
}

// ---------------------------------------------------------------------------
// OperationSchedule

double OperationSchedule::total_unserved() const {
  double s = 0.0;
  for (std::int64_t t = 0; t < horizon; ++t)
    s += weight_of_hour(t) * unserved.col(static_cast<int>(t)).sum();
  return s;
}

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Optimal:
      return "optimal";
    case PlanStatus::Infeasible:
      return "infeasible";
    default:
      return "error";
  }
}

// ---------------------------------------------------------------------------
// Shared model scaffolding

namespace {

constexpr double kInf = lp::kInf;

// Positional view of the config plus the series each model row needs.
struct Topo {
  const SystemConfig& config;
  int n_regions;
  int n_techs;
  // allowed (tech index, region position), tech-major
  std::vector<std::pair<int, int>> gen_pairs;
  // capacity-factor series per gen pair (nullptr for thermal techs)
  std::vector<const std::vector<double>*> pair_wind;
  // demand series per region position (nullptr where no demand)
  std::vector<const std::vector<double>*> demand;
  // incident edges per region position: (edge index, +1 into higher id)
  std::vector<std::vector<std::pair<int, int>>> incident;
  std::vector<int> storage_pos;  // region positions allowed to store

  Topo(const SystemConfig& cfg, const TimeSeriesSet& ts) : config(cfg) {
    n_regions = static_cast<int>(cfg.regions.size());
    n_techs = static_cast<int>(cfg.techs.size());
    for (int i = 0; i < n_techs; ++i) {
      for (int region : cfg.techs[i].regions) {
        const int pos = cfg.region_position(region);
        gen_pairs.push_back({i, pos});
        pair_wind.push_back(cfg.techs[i].is_wind ? &ts.wind_for(region)
                                                 : nullptr);
      }
    }
    demand.assign(n_regions, nullptr);
    for (int region : cfg.demand_regions)
      demand[cfg.region_position(region)] = &ts.demand_for(region);
    incident.resize(n_regions);
    for (size_t e = 0; e < cfg.edges.size(); ++e) {
      incident[cfg.region_position(cfg.edges[e].a)].push_back(
          {static_cast<int>(e), -1});
      incident[cfg.region_position(cfg.edges[e].b)].push_back(
          {static_cast<int>(e), +1});
    }
    for (int region : cfg.storage_regions)
      storage_pos.push_back(cfg.region_position(region));
  }

  int ng() const { return static_cast<int>(gen_pairs.size()); }
  int ne() const { return static_cast<int>(config.edges.size()); }
  int ns() const { return static_cast<int>(storage_pos.size()); }
  double demand_at(int rpos, std::int64_t t) const {
    return demand[rpos] ? (*demand[rpos])[static_cast<size_t>(t)] : 0.0;
  }
  double wind_factor(int pair, std::int64_t t) const {
    return (*pair_wind[pair])[static_cast<size_t>(t)];
  }
};

lp::Solution run_lp(const lp::Problem& p, const SolveSettings& settings) {
  lp::SolverOptions opts;
  opts.tolerance = settings.tolerance;
  if (const char* v = std::getenv("GRIDPLAN_LP_VERBOSE"); v && *v && *v != '0')
    opts.verbose = true;
  if (settings.time_limit_seconds > 0.0)
    opts.time_limit_seconds = settings.time_limit_seconds;
  switch (settings.engine) {
    case SolveSettings::Engine::Simplex:
      return lp::solve_simplex(p, opts);
    case SolveSettings::Engine::InteriorPoint:
      return lp::solve_interior_point(p, opts);
    case SolveSettings::Engine::Auto: {
      lp::Solution sol = lp::solve_interior_point(p, opts);
      // a vertex method rescues small degenerate instances cheaply
      if (sol.status != lp::SolveStatus::Optimal &&
          p.num_vars() + p.num_rows() <= 5000)
        return lp::solve_simplex(p, opts);
      return sol;
    }
  }
  throw InternalError("unknown solver engine");
}

double nonneg(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Full-resolution planning

PlanResult solve_planning(const TimeSeriesSet& ts, const SystemConfig& config,
                          const SolveSettings& settings) {
  config.validate();
  ts.validate();
  const std::int64_t T = ts.length();
  if (T == 0) throw InputError("cannot plan over an empty time series");
  const Topo topo(config, ts);
  const int NG = topo.ng(), NE = topo.ne(), NS = topo.ns();
  const int R = topo.n_regions;
  const double scale = static_cast<double>(T) / 8760.0;
  const double eff = config.storage.efficiency;
  const double keep = 1.0 - config.storage.self_loss;

  lp::Problem p;
  // capacity variables, install costs perturbed per region then scaled
  for (const auto& [i, rpos] : topo.gen_pairs)
    p.add_var(0.0, kInf,
              scale * config.perturbed(config.techs[i].install_cost,
                                       config.regions[rpos]));
  for (const auto& e : config.edges)
    p.add_var(0.0, kInf,
              scale * config.perturbed(e.install_cost,
                                       config.edge_perturbation_index(e)));
  for (int s = 0; s < NS; ++s)
    p.add_var(0.0, kInf,
              scale * config.perturbed(config.storage.install_cost,
                                       config.regions[topo.storage_pos[s]]));

  // hourly dispatch: [gen, flow, charge+, charge-] per hour, levels at the end
  const int base = NG + NE + NS;
  const int block = NG + NE + 2 * NS;
  auto gen_var = [&](std::int64_t t, int g) {
    return base + static_cast<int>(t) * block + g;
  };
  auto flow_var = [&](std::int64_t t, int e) {
    return base + static_cast<int>(t) * block + NG + e;
  };
  auto chp_var = [&](std::int64_t t, int s) {
    return base + static_cast<int>(t) * block + NG + NE + s;
  };
  auto chm_var = [&](std::int64_t t, int s) {
    return base + static_cast<int>(t) * block + NG + NE + NS + s;
  };
  const int level0 = base + static_cast<int>(T) * block;
  auto level_var = [&](std::int64_t t, int s) {
    return level0 + static_cast<int>(t) * NS + s;
  };

  for (std::int64_t t = 0; t < T; ++t) {
    for (const auto& [i, rpos] : topo.gen_pairs)
      p.add_var(0.0, kInf, config.techs[i].gen_cost);
    for (int e = 0; e < NE; ++e) p.add_var(-kInf, kInf, 0.0);
    for (int s = 0; s < 2 * NS; ++s)
      p.add_var(0.0, kInf, config.charge_cost_epsilon);
  }
  for (std::int64_t t = 0; t <= T; ++t)
    for (int s = 0; s < NS; ++s)
      p.add_var(0.0, t == 0 ? 0.0 : kInf, 0.0);  // level, empty at start

  std::vector<std::pair<int, double>> row;
  for (std::int64_t t = 0; t < T; ++t) {
    // hourly balance per region: generation + net inflow = demand + charge
    for (int r = 0; r < R; ++r) {
      row.clear();
      for (int g = 0; g < NG; ++g)
        if (topo.gen_pairs[g].second == r) row.push_back({gen_var(t, g), 1.0});
      for (const auto& [e, sign] : topo.incident[r])
        row.push_back({flow_var(t, e), static_cast<double>(sign)});
      for (int s = 0; s < NS; ++s) {
        if (topo.storage_pos[s] != r) continue;
        row.push_back({chp_var(t, s), -1.0});
        row.push_back({chm_var(t, s), 1.0});
      }
      const double d = topo.demand_at(r, t);
      p.add_row(d, d, row);
    }
    // generation below installed capacity (times the hourly factor for wind)
    for (int g = 0; g < NG; ++g) {
      const double mult =
          topo.pair_wind[g] ? topo.wind_factor(g, t) : 1.0;
      row.assign({{gen_var(t, g), 1.0}, {g, -mult}});
      p.add_row(-kInf, 0.0, row);
    }
    // transmission within +-capacity
    for (int e = 0; e < NE; ++e) {
      row.assign({{flow_var(t, e), 1.0}, {NG + e, -1.0}});
      p.add_row(-kInf, 0.0, row);
      row.assign({{flow_var(t, e), 1.0}, {NG + e, 1.0}});
      p.add_row(0.0, kInf, row);
    }
    // storage continuity and level-below-capacity for the reached level
    for (int s = 0; s < NS; ++s) {
      row.assign({{level_var(t + 1, s), 1.0},
                  {level_var(t, s), -keep},
                  {chp_var(t, s), -eff},
                  {chm_var(t, s), 1.0 / eff}});
      p.add_row(0.0, 0.0, row);
      row.assign({{level_var(t + 1, s), 1.0}, {NG + NE + s, -1.0}});
      p.add_row(-kInf, 0.0, row);
    }
  }

  const lp::Solution sol = run_lp(p, settings);

  PlanResult out;
  out.iterations = sol.iterations;
  out.lp_objective = sol.objective;
  switch (sol.status) {
    case lp::SolveStatus::Optimal:
      out.status = PlanStatus::Optimal;
      break;
    case lp::SolveStatus::Infeasible:
      out.status = PlanStatus::Infeasible;
      out.message = sol.message.empty() ? "planning problem is infeasible"
                                        : sol.message;
      break;
    default:
      out.status = PlanStatus::Error;
      out.message = sol.message.empty() ? to_string(sol.status) : sol.message;
      break;
  }

  out.design = SystemDesign::zeros(config);
  for (int g = 0; g < NG; ++g)
    out.design.cap_gen(topo.gen_pairs[g].first, topo.gen_pairs[g].second) =
        nonneg(sol.x[static_cast<size_t>(g)]);
  for (int e = 0; e < NE; ++e)
    out.design.cap_tr[e] = nonneg(sol.x[static_cast<size_t>(NG + e)]);
  for (int s = 0; s < NS; ++s)
    out.design.cap_sto[topo.storage_pos[s]] =
        nonneg(sol.x[static_cast<size_t>(NG + NE + s)]);

  OperationSchedule& sch = out.schedule;
  sch.horizon = T;
  sch.start = ts.start;
  sch.gen.assign(topo.n_techs, MatrixXd::Zero(R, static_cast<int>(T)));
  sch.flow = MatrixXd::Zero(NE, static_cast<int>(T));
  sch.charge = MatrixXd::Zero(R, static_cast<int>(T));
  sch.storage_level = MatrixXd::Zero(R, static_cast<int>(T) + 1);
  sch.unserved = MatrixXd::Zero(R, static_cast<int>(T));
  for (std::int64_t t = 0; t < T; ++t) {
    const int tc = static_cast<int>(t);
    for (int g = 0; g < NG; ++g)
      sch.gen[topo.gen_pairs[g].first](topo.gen_pairs[g].second, tc) =
          nonneg(sol.x[static_cast<size_t>(gen_var(t, g))]);
    for (int e = 0; e < NE; ++e)
      sch.flow(e, tc) = sol.x[static_cast<size_t>(flow_var(t, e))];
    for (int s = 0; s < NS; ++s)
      sch.charge(topo.storage_pos[s], tc) =
          nonneg(sol.x[static_cast<size_t>(chp_var(t, s))]) -
          nonneg(sol.x[static_cast<size_t>(chm_var(t, s))]);
  }
  for (std::int64_t t = 0; t <= T; ++t)
    for (int s = 0; s < NS; ++s)
      sch.storage_level(topo.storage_pos[s], static_cast<int>(t)) =
          nonneg(sol.x[static_cast<size_t>(level_var(t, s))]);
  out.objective = system_cost(out.design, out.schedule, config);
  return out;
}

// ---------------------------------------------------------------------------
// Fixed-design operation

OperationSchedule solve_operation(const TimeSeriesSet& ts,
                                  const SystemDesign& design,
                                  const SystemConfig& config,
                                  const SolveSettings& settings,
                                  const VectorXd& initial_level) {
  config.validate();
  ts.validate();
  design.validate(config);
  const std::int64_t T = ts.length();
  if (T == 0) throw InputError("cannot operate over an empty time series");
  const Topo topo(config, ts);
  const int NG = topo.ng(), NE = topo.ne(), NS = topo.ns();
  const int R = topo.n_regions;
  const double eff = config.storage.efficiency;
  const double keep = 1.0 - config.storage.self_loss;

  VectorXd init = VectorXd::Zero(R);
  if (initial_level.size() != 0) {
    if (initial_level.size() != R)
      throw InputError("initial storage level needs one entry per region");
    init = initial_level;
  }

  lp::Problem p;
  const int block = NG + NE + 2 * NS + R;
  auto gen_var = [&](std::int64_t t, int g) {
    return static_cast<int>(t) * block + g;
  };
  auto flow_var = [&](std::int64_t t, int e) {
    return static_cast<int>(t) * block + NG + e;
  };
  auto chp_var = [&](std::int64_t t, int s) {
    return static_cast<int>(t) * block + NG + NE + s;
  };
  auto chm_var = [&](std::int64_t t, int s) {
    return static_cast<int>(t) * block + NG + NE + NS + s;
  };
  auto uns_var = [&](std::int64_t t, int r) {
    return static_cast<int>(t) * block + NG + NE + 2 * NS + r;
  };
  const int level0 = static_cast<int>(T) * block;
  auto level_var = [&](std::int64_t t, int s) {
    return level0 + static_cast<int>(t) * NS + s;
  };

  for (std::int64_t t = 0; t < T; ++t) {
    for (int g = 0; g < NG; ++g) {
      const auto& [i, rpos] = topo.gen_pairs[g];
      const double cap = design.cap_gen(i, rpos);
      const double up = topo.pair_wind[g] ? cap * topo.wind_factor(g, t) : cap;
      p.add_var(0.0, up, config.techs[i].gen_cost);
    }
    for (int e = 0; e < NE; ++e)
      p.add_var(-design.cap_tr[e], design.cap_tr[e], 0.0);
    for (int s = 0; s < 2 * NS; ++s)
      p.add_var(0.0, kInf, config.charge_cost_epsilon);
    for (int r = 0; r < R; ++r) p.add_var(0.0, kInf, config.voll);
  }
  for (std::int64_t t = 0; t <= T; ++t) {
    for (int s = 0; s < NS; ++s) {
      const double cap = design.cap_sto[topo.storage_pos[s]];
      if (t == 0) {
        const double v = std::clamp(init[topo.storage_pos[s]], 0.0, cap);
        p.add_var(v, v, 0.0);
      } else {
        p.add_var(0.0, cap, 0.0);
      }
    }
  }

  std::vector<std::pair<int, double>> row;
  for (std::int64_t t = 0; t < T; ++t) {
    for (int r = 0; r < R; ++r) {
      row.clear();
      for (int g = 0; g < NG; ++g)
        if (topo.gen_pairs[g].second == r) row.push_back({gen_var(t, g), 1.0});
      for (const auto& [e, sign] : topo.incident[r])
        row.push_back({flow_var(t, e), static_cast<double>(sign)});
      for (int s = 0; s < NS; ++s) {
        if (topo.storage_pos[s] != r) continue;
        row.push_back({chp_var(t, s), -1.0});
        row.push_back({chm_var(t, s), 1.0});
      }
      row.push_back({uns_var(t, r), 1.0});
      const double d = topo.demand_at(r, t);
      p.add_row(d, d, row);
    }
    for (int s = 0; s < NS; ++s) {
      row.assign({{level_var(t + 1, s), 1.0},
                  {level_var(t, s), -keep},
                  {chp_var(t, s), -eff},
                  {chm_var(t, s), 1.0 / eff}});
      p.add_row(0.0, 0.0, row);
    }
  }

  const lp::Solution sol = run_lp(p, settings);
  if (sol.status != lp::SolveStatus::Optimal)
    throw SolverError("operation solve failed: " +
                      (sol.message.empty() ? std::string(to_string(sol.status))
                                           : sol.message));

  OperationSchedule sch;
  sch.horizon = T;
  sch.start = ts.start;
  sch.gen.assign(topo.n_techs, MatrixXd::Zero(R, static_cast<int>(T)));
  sch.flow = MatrixXd::Zero(NE, static_cast<int>(T));
  sch.charge = MatrixXd::Zero(R, static_cast<int>(T));
  sch.storage_level = MatrixXd::Zero(R, static_cast<int>(T) + 1);
  sch.unserved = MatrixXd::Zero(R, static_cast<int>(T));
  for (std::int64_t t = 0; t < T; ++t) {
    const int tc = static_cast<int>(t);
    for (int g = 0; g < NG; ++g)
      sch.gen[topo.gen_pairs[g].first](topo.gen_pairs[g].second, tc) =
          nonneg(sol.x[static_cast<size_t>(gen_var(t, g))]);
    for (int e = 0; e < NE; ++e)
      sch.flow(e, tc) = sol.x[static_cast<size_t>(flow_var(t, e))];
    for (int s = 0; s < NS; ++s)
      sch.charge(topo.storage_pos[s], tc) =
          nonneg(sol.x[static_cast<size_t>(chp_var(t, s))]) -
          nonneg(sol.x[static_cast<size_t>(chm_var(t, s))]);
    for (int r = 0; r < R; ++r)
      sch.unserved(r, tc) = nonneg(sol.x[static_cast<size_t>(uns_var(t, r))]);
  }
  for (std::int64_t t = 0; t <= T; ++t)
    for (int s = 0; s < NS; ++s)
      sch.storage_level(topo.storage_pos[s], static_cast<int>(t)) =
          nonneg(sol.x[static_cast<size_t>(level_var(t, s))]);
  return sch;
}

// ---------------------------------------------------------------------------
// Rolling-horizon operation

int rolling_solve_count(std::int64_t ts_hours, std::int64_t horizon_hours,
                        std::int64_t window_hours) {
  if (window_hours < 1 || horizon_hours < window_hours ||
      ts_hours < horizon_hours)
    throw InputError(
        "rolling horizon needs 1 <= window <= horizon <= series length");
  if (ts_hours == horizon_hours) return 1;
  const std::int64_t rest = ts_hours - horizon_hours;
  return 1 + static_cast<int>((rest + window_hours - 1) / window_hours);
}

OperationSchedule solve_operation_rolling(const TimeSeriesSet& ts,
                                          const SystemDesign& design,
                                          const SystemConfig& config,
                                          std::int64_t horizon_hours,
                                          std::int64_t window_hours,
                                          const SolveSettings& settings) {
  const std::int64_t L = ts.length();
  rolling_solve_count(L, horizon_hours, window_hours);  // argument check
  const int R = static_cast<int>(config.regions.size());

  OperationSchedule out;
  out.horizon = L;
  out.start = ts.start;
  out.gen.assign(config.techs.size(), MatrixXd::Zero(R, static_cast<int>(L)));
  out.flow = MatrixXd::Zero(static_cast<int>(config.edges.size()),
                            static_cast<int>(L));
  out.charge = MatrixXd::Zero(R, static_cast<int>(L));
  out.storage_level = MatrixXd::Zero(R, static_cast<int>(L) + 1);
  out.unserved = MatrixXd::Zero(R, static_cast<int>(L));

  VectorXd init = VectorXd::Zero(R);
  std::int64_t s = 0;
  while (true) {
    const bool last = s + horizon_hours >= L;
    const std::int64_t solve_len = last ? L - s : horizon_hours;
    const TimeSeriesSet window = ts.slice_hours(s, solve_len);
    const OperationSchedule part =
        solve_operation(window, design, config, settings, init);
    const std::int64_t kept = last ? solve_len : window_hours;
    const int sc = static_cast<int>(s), kc = static_cast<int>(kept);
    for (size_t i = 0; i < out.gen.size(); ++i)
      out.gen[i].middleCols(sc, kc) = part.gen[i].leftCols(kc);
    out.flow.middleCols(sc, kc) = part.flow.leftCols(kc);
    out.charge.middleCols(sc, kc) = part.charge.leftCols(kc);
    out.unserved.middleCols(sc, kc) = part.unserved.leftCols(kc);
    out.storage_level.middleCols(sc, kc + 1) =
        part.storage_level.leftCols(kc + 1);
    if (last) break;
    init = part.storage_level.col(kc);
    s += window_hours;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregated planning with linked storage

PlanResult solve_planning_aggregated(const Aggregation& agg,
                                     const SystemConfig& config,
                                     const SolveSettings& settings) {
  config.validate();
  agg.validate();
  const TimeSeriesSet rep = agg.representative_series();
  const Topo topo(config, rep);
  const int NG = topo.ng(), NE = topo.ne(), NS = topo.ns();
  const int R = topo.n_regions;
  const int K = agg.n_reps();
  const int nT = agg.n_days();
  if (NS > 0 && !agg.ordered)
    throw ConfigError(
        "storage regions need an order-preserving aggregation; this one "
        "does not track original-day order");
  const double scale = static_cast<double>(nT) * 24.0 / 8760.0;
  const double eff = config.storage.efficiency;
  const double keep = 1.0 - config.storage.self_loss;
  const double keep_day = std::pow(keep, 24);

  lp::Problem p;
  for (const auto& [i, rpos] : topo.gen_pairs)
    p.add_var(0.0, kInf,
              scale * config.perturbed(config.techs[i].install_cost,
                                       config.regions[rpos]));
  for (const auto& e : config.edges)
    p.add_var(0.0, kInf,
              scale * config.perturbed(e.install_cost,
                                       config.edge_perturbation_index(e)));
  for (int s = 0; s < NS; ++s)
    p.add_var(0.0, kInf,
              scale * config.perturbed(config.storage.install_cost,
                                       config.regions[topo.storage_pos[s]]));

  // dispatch per representative-day hour, then the two storage layers:
  // sign-free intra profiles per representative day and the inter-day
  // trajectory over original days
  const int base = NG + NE + NS;
  const int block = NG + NE + 2 * NS;
  auto hour_of = [&](int k, int h) { return k * 24 + h; };
  auto gen_var = [&](int k, int h, int g) {
    return base + hour_of(k, h) * block + g;
  };
  auto flow_var = [&](int k, int h, int e) {
    return base + hour_of(k, h) * block + NG + e;
  };
  auto chp_var = [&](int k, int h, int s) {
    return base + hour_of(k, h) * block + NG + NE + s;
  };
  auto chm_var = [&](int k, int h, int s) {
    return base + hour_of(k, h) * block + NG + NE + NS + s;
  };
  const int intra0 = base + K * 24 * block;
  auto intra_var = [&](int k, int h, int s) {  // h in [0, 24]
    return intra0 + (k * 25 + h) * NS + s;
  };
  const int inter0 = intra0 + K * 25 * NS;
  auto inter_var = [&](int t, int s) { return inter0 + t * NS + s; };

  for (int k = 0; k < K; ++k) {
    const double w = static_cast<double>(agg.weights[k]);
    for (int h = 0; h < 24; ++h) {
      for (const auto& [i, rpos] : topo.gen_pairs)
        p.add_var(0.0, kInf, w * config.techs[i].gen_cost);
      for (int e = 0; e < NE; ++e) p.add_var(-kInf, kInf, 0.0);
      for (int s = 0; s < 2 * NS; ++s)
        p.add_var(0.0, kInf, w * config.charge_cost_epsilon);
    }
  }
  for (int k = 0; k < K; ++k)
    for (int h = 0; h <= 24; ++h)
      for (int s = 0; s < NS; ++s)
        p.add_var(h == 0 ? 0.0 : -kInf, h == 0 ? 0.0 : kInf, 0.0);
  for (int t = 0; t <= nT; ++t)
    for (int s = 0; s < NS; ++s)
      p.add_var(0.0, t == 0 ? 0.0 : kInf, 0.0);  // inter, starts empty

  std::vector<std::pair<int, double>> row;
  for (int k = 0; k < K; ++k) {
    for (int h = 0; h < 24; ++h) {
      const std::int64_t t = hour_of(k, h);
      for (int r = 0; r < R; ++r) {
        row.clear();
        for (int g = 0; g < NG; ++g)
          if (topo.gen_pairs[g].second == r)
            row.push_back({gen_var(k, h, g), 1.0});
        for (const auto& [e, sign] : topo.incident[r])
          row.push_back({flow_var(k, h, e), static_cast<double>(sign)});
        for (int s = 0; s < NS; ++s) {
          if (topo.storage_pos[s] != r) continue;
          row.push_back({chp_var(k, h, s), -1.0});
          row.push_back({chm_var(k, h, s), 1.0});
        }
        const double d = topo.demand_at(r, t);
        p.add_row(d, d, row);
      }
      for (int g = 0; g < NG; ++g) {
        const double mult =
            topo.pair_wind[g] ? topo.wind_factor(g, t) : 1.0;
        row.assign({{gen_var(k, h, g), 1.0}, {g, -mult}});
        p.add_row(-kInf, 0.0, row);
      }
      for (int e = 0; e < NE; ++e) {
        row.assign({{flow_var(k, h, e), 1.0}, {NG + e, -1.0}});
        p.add_row(-kInf, 0.0, row);
        row.assign({{flow_var(k, h, e), 1.0}, {NG + e, 1.0}});
        p.add_row(0.0, kInf, row);
      }
      for (int s = 0; s < NS; ++s) {
        row.assign({{intra_var(k, h + 1, s), 1.0},
                    {intra_var(k, h, s), -keep},
                    {chp_var(k, h, s), -eff},
                    {chm_var(k, h, s), 1.0 / eff}});
        p.add_row(0.0, 0.0, row);
      }
    }
  }
  if (NS > 0) {
    // inter-day continuity: decayed carry plus the day's net stored energy
    for (int t = 0; t < nT; ++t) {
      const int k = agg.mapping[t];
      for (int s = 0; s < NS; ++s) {
        row.assign({{inter_var(t + 1, s), 1.0},
                    {inter_var(t, s), -keep_day},
                    {intra_var(k, 24, s), -1.0}});
        p.add_row(0.0, 0.0, row);
      }
    }
    // combined level inside [0, capacity] at every original hour
    for (int t = 0; t < nT; ++t) {
      const int k = agg.mapping[t];
      for (int h = 1; h < 24; ++h) {
        const double decay = std::pow(keep, h);
        for (int s = 0; s < NS; ++s) {
          row.assign(
              {{inter_var(t, s), decay}, {intra_var(k, h, s), 1.0}});
          p.add_row(0.0, kInf, row);
          row.assign({{inter_var(t, s), decay},
                      {intra_var(k, h, s), 1.0},
                      {NG + NE + s, -1.0}});
          p.add_row(-kInf, 0.0, row);
        }
      }
    }
    for (int t = 1; t <= nT; ++t) {
      for (int s = 0; s < NS; ++s) {
        row.assign({{inter_var(t, s), 1.0}, {NG + NE + s, -1.0}});
        p.add_row(-kInf, 0.0, row);
      }
    }
  }

  const lp::Solution sol = run_lp(p, settings);

  PlanResult out;
  out.iterations = sol.iterations;
  out.lp_objective = sol.objective;
  switch (sol.status) {
    case lp::SolveStatus::Optimal:
      out.status = PlanStatus::Optimal;
      break;
    case lp::SolveStatus::Infeasible:
      out.status = PlanStatus::Infeasible;
      out.message = sol.message.empty() ? "aggregated planning is infeasible"
                                        : sol.message;
      break;
    default:
      out.status = PlanStatus::Error;
      out.message = sol.message.empty() ? to_string(sol.status) : sol.message;
      break;
  }

  out.design = SystemDesign::zeros(config);
  for (int g = 0; g < NG; ++g)
    out.design.cap_gen(topo.gen_pairs[g].first, topo.gen_pairs[g].second) =
        nonneg(sol.x[static_cast<size_t>(g)]);
  for (int e = 0; e < NE; ++e)
    out.design.cap_tr[e] = nonneg(sol.x[static_cast<size_t>(NG + e)]);
  for (int s = 0; s < NS; ++s)
    out.design.cap_sto[topo.storage_pos[s]] =
        nonneg(sol.x[static_cast<size_t>(NG + NE + s)]);

  OperationSchedule& sch = out.schedule;
  sch.horizon = static_cast<std::int64_t>(K) * 24;
  sch.start = agg.start;
  sch.representative = true;
  sch.day_weights = agg.weights;
  sch.gen.assign(topo.n_techs, MatrixXd::Zero(R, K * 24));
  sch.flow = MatrixXd::Zero(NE, K * 24);
  sch.charge = MatrixXd::Zero(R, K * 24);
  sch.storage_level = MatrixXd::Zero(R, K * 24 + 1);
  sch.unserved = MatrixXd::Zero(R, K * 24);
  for (int k = 0; k < K; ++k) {
    for (int h = 0; h < 24; ++h) {
      const int tc = hour_of(k, h);
      for (int g = 0; g < NG; ++g)
        sch.gen[topo.gen_pairs[g].first](topo.gen_pairs[g].second, tc) =
            nonneg(sol.x[static_cast<size_t>(gen_var(k, h, g))]);
      for (int e = 0; e < NE; ++e)
        sch.flow(e, tc) = sol.x[static_cast<size_t>(flow_var(k, h, e))];
      for (int s = 0; s < NS; ++s)
        sch.charge(topo.storage_pos[s], tc) =
            nonneg(sol.x[static_cast<size_t>(chp_var(k, h, s))]) -
            nonneg(sol.x[static_cast<size_t>(chm_var(k, h, s))]);
      for (int s = 0; s < NS; ++s)
        sch.storage_level(topo.storage_pos[s], tc) =
            sol.x[static_cast<size_t>(intra_var(k, h, s))];
    }
  }
  out.intra_end = MatrixXd::Zero(R, K);
  out.inter_level = MatrixXd::Zero(R, nT + 1);
  for (int s = 0; s < NS; ++s) {
    const int rpos = topo.storage_pos[s];
    sch.storage_level(rpos, K * 24) =
        K > 0 ? sol.x[static_cast<size_t>(intra_var(K - 1, 24, s))] : 0.0;
    for (int k = 0; k < K; ++k)
      out.intra_end(rpos, k) = sol.x[static_cast<size_t>(intra_var(k, 24, s))];
    for (int t = 0; t <= nT; ++t)
      out.inter_level(rpos, t) =
          nonneg(sol.x[static_cast<size_t>(inter_var(t, s))]);
  }
  out.objective = system_cost(out.design, out.schedule, config);
  return out;
}

// ---------------------------------------------------------------------------
// Costs

double system_cost(const SystemDesign& design, const OperationSchedule& s,
                   const SystemConfig& config) {
  double hours = 0.0;
  for (int d = 0; d < s.n_days(); ++d) hours += 24.0 * s.weight_of_day(d);

  double install = 0.0;
  for (size_t i = 0; i < config.techs.size(); ++i)
    for (int region : config.techs[i].regions)
      install += config.perturbed(config.techs[i].install_cost, region) *
                 design.cap_gen(static_cast<int>(i),
                                config.region_position(region));
  for (size_t e = 0; e < config.edges.size(); ++e)
    install +=
        config.perturbed(config.edges[e].install_cost,
                         config.edge_perturbation_index(config.edges[e])) *
        design.cap_tr[e];
  for (int region : config.storage_regions)
    install += config.perturbed(config.storage.install_cost, region) *
               design.cap_sto[config.region_position(region)];

  return hours / 8760.0 * install + operation_cost(s, config);
}

double operation_cost(const OperationSchedule& s, const SystemConfig& config) {
  double cost = 0.0;
  for (std::int64_t t = 0; t < s.horizon; ++t) {
    const int tc = static_cast<int>(t);
    double hourly = 0.0;
    for (size_t i = 0; i < config.techs.size(); ++i)
      hourly += config.techs[i].gen_cost * s.gen[i].col(tc).sum();
    hourly += config.voll * s.unserved.col(tc).sum();
    cost += s.weight_of_hour(t) * hourly;
  }
  return cost;
}

// ---------------------------------------------------------------------------
// Invariant checks

void OperationSchedule::validate(const SystemDesign& design,
                                 const SystemConfig& config,
                                 const TimeSeriesSet& ts, double tol) const {
  const int R = static_cast<int>(config.regions.size());
  const int NE = static_cast<int>(config.edges.size());
  if (horizon != ts.length())
    throw ValidationError("schedule horizon != series length");
  if (static_cast<int>(gen.size()) != static_cast<int>(config.techs.size()))
    throw ValidationError("schedule has the wrong technology count");
  for (const auto& m : gen)
    if (m.rows() != R || m.cols() != horizon)
      throw ValidationError("generation matrix has the wrong shape");
  if (flow.rows() != NE || flow.cols() != horizon)
    throw ValidationError("flow matrix has the wrong shape");
  if (charge.rows() != R || charge.cols() != horizon ||
      unserved.rows() != R || unserved.cols() != horizon ||
      storage_level.rows() != R || storage_level.cols() != horizon + 1)
    throw ValidationError("storage/unserved matrices have the wrong shape");
  if (!day_weights.empty() &&
      static_cast<int>(day_weights.size()) != n_days())
    throw ValidationError("day weight count != day count");

  const Topo topo(config, ts);
  const double eff = config.storage.efficiency;
  const double keep = 1.0 - config.storage.self_loss;
  auto fail = [](const std::string& what, int r, std::int64_t t) {
    throw ValidationError(what + " violated at region index " +
                          std::to_string(r) + ", hour " + std::to_string(t));
  };

  for (std::int64_t t = 0; t < horizon; ++t) {
    const int tc = static_cast<int>(t);
    for (int g = 0; g < topo.ng(); ++g) {
      const auto& [i, rpos] = topo.gen_pairs[g];
      const double cap = design.cap_gen(i, rpos);
      const double up = topo.pair_wind[g] ? cap * topo.wind_factor(g, t) : cap;
      const double v = gen[i](rpos, tc);
      if (v < -tol || v > up + tol * std::max(1.0, cap))
        fail("generation capacity bound", rpos, t);
    }
    for (int e = 0; e < NE; ++e) {
      const double cap = design.cap_tr[e];
      if (std::abs(flow(e, tc)) > cap + tol * std::max(1.0, cap))
        fail("transmission capacity bound", e, t);
    }
    for (int r = 0; r < R; ++r) {
      if (unserved(r, tc) < -tol) fail("unserved nonnegativity", r, t);
      double lhs = unserved(r, tc) - charge(r, tc);
      for (const auto& m : gen) lhs += m(r, tc);
      for (const auto& [e, sign] : topo.incident[r])
        lhs += sign * flow(e, tc);
      const double d = topo.demand_at(r, t);
      if (std::abs(lhs - d) > tol * std::max(1.0, d))
        fail("hourly demand balance", r, t);
      if (!config.has_storage(config.regions[r]) &&
          (charge(r, tc) != 0.0 || storage_level(r, tc) != 0.0))
        fail("storage activity outside storage regions", r, t);
    }
    // A representative schedule stores per-day level offsets that restart at
    // zero each day; continuity across day boundaries is carried by the
    // separate inter-day trajectory, so only within-day continuity (and the
    // final stored column, which is the last day's end level) is checked here.
    const bool day_boundary =
        representative && (t + 1) % 24 == 0 && t + 1 != horizon;
    for (int s = 0; s < topo.ns(); ++s) {
      const int r = topo.storage_pos[s];
      const double cap = design.cap_sto[r];
      const double cap_tol = tol * std::max(1.0, cap);
      const double lvl = storage_level(r, tc);
      const double chp = std::max(charge(r, tc), 0.0);
      const double chm = std::max(-charge(r, tc), 0.0);
      const double next = keep * lvl + eff * chp - chm / eff;
      if (!day_boundary && std::abs(storage_level(r, tc + 1) - next) > cap_tol)
        fail("storage continuity", r, t);
      if (!representative && (lvl < -cap_tol || lvl > cap + cap_tol))
        fail("storage level bound", r, t);
    }
  }
  if (!representative) {
    for (int s = 0; s < topo.ns(); ++s) {
      const int r = topo.storage_pos[s];
      const double cap = design.cap_sto[r];
      const double lvl = storage_level(r, static_cast<int>(horizon));
      if (lvl < -tol * std::max(1.0, cap) ||
          lvl > cap + tol * std::max(1.0, cap))
        fail("final storage level bound", r, horizon);
    }
  }
}

void validate_aggregated_storage(const PlanResult& result,
                                 const Aggregation& agg,
                                 const SystemConfig& config, double tol) {
  const int nT = agg.n_days();
  const int K = agg.n_reps();
  const int R = static_cast<int>(config.regions.size());
  if (result.inter_level.rows() != R || result.inter_level.cols() != nT + 1)
    throw ValidationError("inter-day storage trajectory has the wrong shape");
  if (result.intra_end.rows() != R || result.intra_end.cols() != K)
    throw ValidationError("intra-day end levels have the wrong shape");
  const double keep = 1.0 - config.storage.self_loss;
  const double keep_day = std::pow(keep, 24);

  for (int region : config.storage_regions) {
    const int r = config.region_position(region);
    const double cap = result.design.cap_sto[r];
    const double cap_tol = tol * std::max(1.0, cap);
    if (std::abs(result.inter_level(r, 0)) > cap_tol)
      throw ValidationError("inter-day storage does not start empty in region " +
                            std::to_string(region));
    for (int t = 0; t < nT; ++t) {
      const int k = agg.mapping[t];
      const double carried = result.inter_level(r, t);
      const double next = keep_day * carried + result.intra_end(r, k);
      if (std::abs(result.inter_level(r, t + 1) - next) > cap_tol)
        throw ValidationError("inter-day storage continuity violated at day " +
                              std::to_string(t) + " in region " +
                              std::to_string(region));
      for (int h = 0; h < 24; ++h) {
        const double combined =
            std::pow(keep, h) * carried +
            result.schedule.storage_level(r, k * 24 + h);
        if (combined < -cap_tol || combined > cap + cap_tol)
          throw ValidationError(
              "combined storage level outside [0, capacity] at day " +
              std::to_string(t) + ", hour " + std::to_string(h) +
              " in region " + std::to_string(region));
      }
    }
    const double final_level = result.inter_level(r, nT);
    if (final_level < -cap_tol || final_level > cap + cap_tol)
      throw ValidationError("final inter-day storage level out of bounds");
  }
}

// ---------------------------------------------------------------------------
// CSV export

std::string schedule_csv(const OperationSchedule& s,
                         const SystemConfig& config) {
  if (s.representative)
    throw InputError(
        "representative schedules have no chronological CSV form; "
        "export the aggregation instead");
  std::ostringstream os;
  os << "timestamp";
  for (const auto& tech : config.techs)
    for (int region : tech.regions) os << ",gen_" << tech.name << "_r" << region;
  for (const auto& e : config.edges) os << ",flow_r" << e.a << "_r" << e.b;
  for (int region : config.storage_regions)
    os << ",charge_r" << region << ",level_r" << region;
  for (int region : config.demand_regions) os << ",unserved_r" << region;
  os << '\n';

  char buf[32];
  auto emit = [&](double v) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    os << ',' << std::string_view(buf, p);
  };
  for (std::int64_t t = 0; t < s.horizon; ++t) {
    const int tc = static_cast<int>(t);
    os << s.start.plus_hours(t).to_string();
    for (size_t i = 0; i < config.techs.size(); ++i)
      for (int region : config.techs[i].regions)
        emit(s.gen[i](config.region_position(region), tc));
    for (size_t e = 0; e < config.edges.size(); ++e)
      emit(s.flow(static_cast<int>(e), tc));
    for (int region : config.storage_regions) {
      const int r = config.region_position(region);
      emit(s.charge(r, tc));
      emit(s.storage_level(r, tc + 1));  // state at the end of the hour
    }
    for (int region : config.demand_regions)
      emit(s.unserved(config.region_position(region), tc));
    os << '\n';
  }
  return os.str();
}

}  // namespace gridplan
