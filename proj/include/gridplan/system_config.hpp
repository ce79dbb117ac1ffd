#pragma once

#include <string>
#include <vector>

namespace gridplan {

// One generation technology and the regions it may be installed in.
struct GenTech {
  std::string name;
  double install_cost = 0.0;  // £/MW per year
  double gen_cost = 0.0;      // £/MWh
  bool is_wind = false;       // output limited by capacity factor, not 1
  std::vector<int> regions;   // ascending region ids
};

// Undirected transmission corridor between two regions (a < b).
struct TransmissionEdge {
  int a = 0;
  int b = 0;
  double install_cost = 0.0;  // £/MW per year
};

struct StorageParams {
  double install_cost = 0.0;  // £/MWh per year
  double efficiency = 1.0;    // charge/discharge efficiency in (0,1]
  double self_loss = 0.0;     // fraction of level lost per hour, in [0,1)
};

enum class Normalization { Series, HourOfDay, MinMax };

Normalization normalization_from_string(const std::string& s);
const char* to_string(Normalization n);

// Full description of the planning problem's fixed parameters: topology,
// technology costs, storage physics, and the tie-breaking knobs.
struct SystemConfig {
  std::vector<int> regions;  // ascending
  std::vector<GenTech> techs;
  std::vector<int> demand_regions;   // regions with a demand series
  std::vector<int> wind_regions;     // regions with a capacity-factor series
  std::vector<int> storage_regions;  // regions allowed to install storage
  std::vector<TransmissionEdge> edges;
  StorageParams storage;
  double voll = 6000.0;                 // £/MWh of unserved energy
  double perturbation_epsilon = 1e-4;   // relative install-cost spread
  // Small dispatch cost (£/MWh) on storage charge magnitude. Breaks the
  // zero-cost simultaneous charge/discharge degeneracy so interior-point
  // solutions resolve the charge split cleanly; orders of magnitude below
  // every generation cost, and excluded from reported system costs.
  double charge_cost_epsilon = 0.01;
  Normalization normalization = Normalization::Series;

  // Six-region benchmark system: thermal generation in regions 1/3/6, wind
  // and storage in 2/5/6, demand in 2/4/5, seven corridors, the (1,5)
  // corridor costlier than the rest.
  static SystemConfig six_bus();

  // Throws ConfigError with a description of the first violated invariant.
  void validate() const;

  // Install cost multiplied by (1 + index * perturbation_epsilon); the index
  // is the region id for generation/storage and a fractional combination of
  // both endpoints for edges, so that no two install costs are exactly tied.
  double perturbed(double base_cost, double index) const {
    return base_cost * (1.0 + index * perturbation_epsilon);
  }
  double edge_perturbation_index(const TransmissionEdge& e) const;

  bool tech_allowed_in(const GenTech& t, int region) const;
  bool has_storage(int region) const;
  const GenTech& tech(const std::string& name) const;
  // Index of a region id within the ascending regions list.
  int region_position(int region_id) const;

  // JSON round trip (used by the CLI's config file and artifact echo).
  static SystemConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

}  // namespace gridplan
