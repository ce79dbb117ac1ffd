#include "gridplan/system_config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gridplan/errors.hpp"
#include "json.hpp"

namespace gridplan {

using nlohmann::json;

Normalization normalization_from_string(const std::string& s) {
  if (s == "series") return Normalization::Series;
  if (s == "hour_of_day") return Normalization::HourOfDay;
  if (s == "minmax") return Normalization::MinMax;
  throw ConfigError("unknown normalization '" + s +
                    "' (expected series, hour_of_day or minmax)");
}

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::Series: return "series";
    case Normalization::HourOfDay: return "hour_of_day";
    case Normalization::MinMax: return "minmax";
  }
  return "series";
}

SystemConfig SystemConfig::six_bus() {
  SystemConfig c;
  c.regions = {1, 2, 3, 4, 5, 6};
  c.techs = {
      {"baseload", 300000.0, 5.0, false, {1, 3, 6}},
      {"peaking", 100000.0, 35.0, false, {1, 3, 6}},
      {"wind", 100000.0, 0.0, true, {2, 5, 6}},
  };
  c.demand_regions = {2, 4, 5};
  c.wind_regions = {2, 5, 6};
  c.storage_regions = {2, 5, 6};
  c.edges = {
      {1, 2, 100000.0}, {1, 5, 150000.0}, {1, 6, 100000.0},
      {2, 3, 100000.0}, {3, 4, 100000.0}, {4, 5, 100000.0},
      {5, 6, 100000.0},
  };
  c.storage = {1000.0, 0.95, 1e-5};
  c.voll = 6000.0;
  return c;
}

double SystemConfig::edge_perturbation_index(const TransmissionEdge& e) const {
  const int span = static_cast<int>(regions.size()) + 1;
  return e.a + static_cast<double>(e.b) / span;
}

bool SystemConfig::tech_allowed_in(const GenTech& t, int region) const {
  return std::find(t.regions.begin(), t.regions.end(), region) !=
         t.regions.end();
}

bool SystemConfig::has_storage(int region) const {
  return std::find(storage_regions.begin(), storage_regions.end(), region) !=
         storage_regions.end();
}

const GenTech& SystemConfig::tech(const std::string& name) const {
  for (const auto& t : techs)
    if (t.name == name) return t;
  throw ConfigError("no generation technology named '" + name + "'");
}

int SystemConfig::region_position(int region_id) const {
  const auto it = std::find(regions.begin(), regions.end(), region_id);
  if (it == regions.end())
    throw InputError("region " + std::to_string(region_id) +
                     " is not part of this system");
  return static_cast<int>(it - regions.begin());
}

void SystemConfig::validate() const {
  if (regions.empty()) throw ConfigError("config has no regions");
  if (!std::is_sorted(regions.begin(), regions.end()))
    throw ConfigError("regions must be listed in ascending order");
  std::set<int> region_set(regions.begin(), regions.end());
  if (region_set.size() != regions.size())
    throw ConfigError("duplicate region id");

  auto check_subset = [&](const std::vector<int>& sub, const char* what) {
    for (int r : sub)
      if (!region_set.count(r))
        throw ConfigError(std::string(what) + " references unknown region " +
                          std::to_string(r));
    if (!std::is_sorted(sub.begin(), sub.end()))
      throw ConfigError(std::string(what) + " must be ascending");
  };
  check_subset(demand_regions, "demand_regions");
  check_subset(wind_regions, "wind_regions");
  check_subset(storage_regions, "storage_regions");

  std::set<std::string> names;
  for (const auto& t : techs) {
    if (!names.insert(t.name).second)
      throw ConfigError("duplicate technology name '" + t.name + "'");
    if (t.install_cost < 0 || t.gen_cost < 0)
      throw ConfigError("negative cost for technology '" + t.name + "'");
    check_subset(t.regions, t.name.c_str());
    if (t.is_wind) {
      for (int r : t.regions)
        if (std::find(wind_regions.begin(), wind_regions.end(), r) ==
            wind_regions.end())
          throw ConfigError("wind technology '" + t.name +
                            "' allowed in region " + std::to_string(r) +
                            " which has no capacity-factor series");
    }
  }

  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (e.a == e.b)
      throw ConfigError("self-edge on region " + std::to_string(e.a));
    if (e.a > e.b)
      throw ConfigError("edge endpoints must satisfy a < b");
    if (!region_set.count(e.a) || !region_set.count(e.b))
      throw ConfigError("edge (" + std::to_string(e.a) + "," +
                        std::to_string(e.b) + ") references unknown region");
    if (!seen.insert({e.a, e.b}).second)
      throw ConfigError("duplicate edge (" + std::to_string(e.a) + "," +
                        std::to_string(e.b) + ")");
    if (e.install_cost < 0) throw ConfigError("negative transmission cost");
  }

  if (storage.install_cost < 0) throw ConfigError("negative storage cost");
  if (!(storage.efficiency > 0.0) || storage.efficiency > 1.0)
    throw ConfigError("storage efficiency must be in (0,1]");
  if (storage.self_loss < 0.0 || storage.self_loss >= 1.0)
    throw ConfigError("storage self-loss must be in [0,1)");
  if (voll < 0) throw ConfigError("negative value of lost load");
  if (perturbation_epsilon < 0) throw ConfigError("negative perturbation");
  if (charge_cost_epsilon < 0) throw ConfigError("negative charge cost");
}

namespace {

json require(const json& j, const char* key) {
  if (!j.contains(key))
    throw ConfigError(std::string("config missing key '") + key + "'");
  return j.at(key);
}

std::vector<int> int_list(const json& j, const char* key) {
  std::vector<int> out;
  for (const auto& v : require(j, key)) out.push_back(v.get<int>());
  return out;
}

}  // namespace

SystemConfig SystemConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    SystemConfig c;
    c.regions = int_list(j, "regions");
    for (const auto& t : require(j, "generation_techs")) {
      GenTech g;
      g.name = require(t, "name").get<std::string>();
      g.install_cost = require(t, "install_cost").get<double>();
      g.gen_cost = require(t, "gen_cost").get<double>();
      g.is_wind = t.value("is_wind", false);
      for (const auto& r : require(t, "regions")) g.regions.push_back(r.get<int>());
      c.techs.push_back(std::move(g));
    }
    c.demand_regions = int_list(j, "demand_regions");
    c.wind_regions = int_list(j, "wind_regions");
    c.storage_regions = int_list(j, "storage_regions");
    for (const auto& e : require(j, "transmission_edges")) {
      TransmissionEdge edge;
      const auto pair = require(e, "regions");
      if (pair.size() != 2)
        throw ConfigError("transmission edge needs exactly two regions");
      edge.a = pair[0].get<int>();
      edge.b = pair[1].get<int>();
      edge.install_cost = require(e, "install_cost").get<double>();
      c.edges.push_back(edge);
    }
    const auto sto = require(j, "storage");
    c.storage.install_cost = require(sto, "install_cost").get<double>();
    c.storage.efficiency = require(sto, "efficiency").get<double>();
    c.storage.self_loss = require(sto, "self_loss").get<double>();
    c.voll = require(j, "voll").get<double>();
    c.perturbation_epsilon = j.value("perturbation_epsilon", 1e-4);
    c.charge_cost_epsilon = j.value("charge_cost_epsilon", 0.01);
    c.normalization =
        normalization_from_string(j.value("normalization", "series"));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
}

std::string SystemConfig::to_json_text() const {
  json j;
  j["regions"] = regions;
  json techs_j = json::array();
  for (const auto& t : techs) {
    techs_j.push_back({{"name", t.name},
                       {"install_cost", t.install_cost},
                       {"gen_cost", t.gen_cost},
                       {"is_wind", t.is_wind},
                       {"regions", t.regions}});
  }
  j["generation_techs"] = techs_j;
  j["demand_regions"] = demand_regions;
  j["wind_regions"] = wind_regions;
  j["storage_regions"] = storage_regions;
  json edges_j = json::array();
  for (const auto& e : edges)
    edges_j.push_back({{"regions", {e.a, e.b}}, {"install_cost", e.install_cost}});
  j["transmission_edges"] = edges_j;
  j["storage"] = {{"install_cost", storage.install_cost},
                  {"efficiency", storage.efficiency},
                  {"self_loss", storage.self_loss}};
  j["voll"] = voll;
  j["perturbation_epsilon"] = perturbation_epsilon;
  j["charge_cost_epsilon"] = charge_cost_epsilon;
  j["normalization"] = to_string(normalization);
  return j.dump(2) + "\n";
}

}  // namespace gridplan
