#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sasalign/dataset.hpp"
#include "sasalign/grid.hpp"

namespace sas {

// Resolved run configuration. The on-disk format is a strict key-value
// document with [section] headers; unknown sections or keys are rejected
// (silent hyperparameter typos are the main reproducibility hazard).
struct RunConfig {
  // environment
  std::string layout_name = "two-paths";
  std::optional<LayoutConfig> inline_layout;  // overrides layout_name when present
  double slip_prob = 0.1;
  double gamma = 0.99;
  double c_max = 1.0;
  double budget = 5.0;  // CMDP budget d, discounted-cost units

  // dataset
  std::vector<MixComponent> mix = {{"expert", 0.6}, {"medium", 0.3}, {"random", 0.1}};
  int n_traj = 300;
  int data_horizon = 40;
  std::uint64_t data_seed = 1;

  // model
  int order = 4;
  double kernel_smoothing = 1e-3;
  int occupancy_rollouts = 4000;
  double occupancy_smoothing = 1e-6;
  std::uint64_t occupancy_seed = 99;
  double ldm_tol = 1e-9;

  // sas
  int sas_n = 5;
  int sas_m = 5;
  int sas_k = 5;
  int sas_horizon = 10;
  std::uint64_t sas_seed = 7;
  std::string g_source = "ldm_fixed_point";  // or "literal_eq6"

  // bound
  std::string bound_c1 = "auto";  // "auto" = 5th percentile of dataset energies
  std::string bound_c2 = "auto";  // "auto" = 95th percentile
  double bound_kappa = 1.0;
  std::string bound_l = "auto";   // "auto" = max observed one-step |delta G|
  int bound_runs = 500;
  std::vector<int> bound_grid = {1, 3, 5};
  std::uint64_t bound_seed = 5;

  // eval
  std::vector<std::uint64_t> eval_seeds = {1, 2, 3};
  int episodes_per_seed = 1;
  std::vector<double> cost_thresholds = {20, 40, 80};
  double cost_epsilon = 1e-3;
  int eval_horizon = 30;

  // skills
  std::vector<int> skill_ks = {1, 5, 10, 50};
  int skill_prompts = 100;
  std::uint64_t skill_seed = 11;

  // output
  std::string output_dir = "out";

  TabularMdp make_mdp() const;

  // Canonical dump of every resolved value; re-parsing it reproduces the
  // config. Embedded in JSON outputs for provenance.
  std::string canonical_toml() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace sas
