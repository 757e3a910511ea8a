#pragma once

#include <filesystem>
#include <string>

#include "sasalign/config.hpp"
#include "sasalign/dataset.hpp"
#include "sasalign/lyapunov.hpp"
#include "sasalign/occupancy.hpp"
#include "sasalign/world_model.hpp"

namespace sas {

// Everything the downstream stages need, fitted once from a dataset:
// transition model, context policy, occupancy/energy tables, both G tables
// and the concentrability coefficient. Self-contained and serializable; a
// digest of the source dataset is embedded for provenance.
struct ModelBundle {
  LayoutConfig layout;
  std::string dataset_digest;
  LearnedKernel kernel;
  ContextPolicy policy;
  OccupancyTable data_occupancy;   // dataset visitation, dataset horizon
  OccupancyTable model_occupancy;  // imagined rollouts, imagination horizon
  EnergyTable energy;              // -log model_occupancy
  double center_offset = 0;        // energy at the (goal, stay) equilibrium
  EnergyTable energy_centered;     // energy - center_offset
  LyapunovTable g_literal;         // baseline - E, from the start state
  LyapunovTable g_ldm;             // fixed point on the centered energy
  double d_conc = 1;
  double budget = 0;
  std::string resolved_config;

  TabularMdp make_mdp() const { return TabularMdp(layout); }
  const LyapunovTable& g_table(const std::string& source) const;

  // Invariant-set level matching the occupancy threshold d/(c_max * d_conc),
  // expressed on the centered-energy scale the LDM table lives on.
  double ldm_level_for_budget(double d) const;
};

ModelBundle fit_bundle(const TabularMdp& mdp, const OfflineDataset& dataset,
                       const RunConfig& cfg, int threads = 1);

std::string bundle_to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const std::string& text);
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

// Content digest (FNV-1a over the serialized dataset). Not cryptographic.
std::string dataset_digest(const OfflineDataset& dataset);

struct BoundAutoParams {
  double c1 = 0;      // low percentile of per-step dataset energies
  double c2 = 0;      // high percentile
  double l = 0;       // max one-step |delta G| over dataset transitions
  double e_mean = 0;  // mean per-step dataset energy
};

// Data-derived defaults for the escape bound: band edges from the 5th/95th
// percentiles of per-step dataset energies, L from the largest observed
// one-step G difference under the given table.
BoundAutoParams bound_auto_params(const ModelBundle& bundle, const OfflineDataset& dataset,
                                  const LyapunovTable& g, double low_pct = 5,
                                  double high_pct = 95);

}  // namespace sas
