#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sasalign/sas_align.hpp"

namespace sas {

struct BoundParams {
  double c1 = 0;      // lower band edge (energy units)
  double c2 = 0;      // upper band edge
  double kappa = 1;   // Hoeffding scaling constant
  double l = 0;       // bound on one-step |delta G|
  int n = 1;          // loop-1 rollouts
  int m = 1;          // loop-2 rollouts
  int t = 1;          // horizon
  double e_mean = 0;  // dataset mean energy

  void validate() const;
};

struct BoundTerms {
  double term1 = 0;  // (e_mean / c2)^(n*t)
  double term2 = 0;  // exp(-2 m kappa^2 (c2-c1)^2 / (t l^2))
  double total = 0;
  bool vacuous_first_term = false;  // e_mean / c2 >= 1
};

BoundTerms thm2_rhs(const BoundParams& p);

struct EscapeFrequency {
  int n = 0;
  int m = 0;
  double imagined = 0;  // fraction of runs where the selected imagined rollout
                        // has a step energy outside [c1, c2]
  double deployed = 0;  // same check on the deployed real-environment episode
};

// Runs the two-loop selection n_runs times per (n, m) grid point and counts
// band escapes of the selected trajectory. Run r at grid point g draws its
// seeds from streams derived from (seed, g, r).
std::vector<EscapeFrequency> empirical_escape(
    const LearnedKernel& kernel, const ContextPolicy& policy, const EnergyTable& energy,
    const LyapunovTable& g, const TabularMdp& mdp, StateId s1, double c1, double c2,
    int horizon, int k, std::span<const int> ns, std::span<const int> ms, int n_runs,
    std::uint64_t seed, int threads = 1);

bool trajectory_escapes_band(const Trajectory& traj, const EnergyTable& energy, double c1,
                             double c2);

// (raw - r_min) / (r_max - r_min). Throws std::domain_error when the range is
// degenerate.
double normalized_reward(double raw, double r_min, double r_max);

// (raw + epsilon) / (kappa_threshold + epsilon).
double normalized_cost(double raw, double kappa_threshold, double epsilon);

struct MetricReport {
  double normalized_reward = 0;
  double normalized_cost = 0;
  double failure_rate = 0;
  double raw_reward_mean = 0;
  double raw_cost_mean = 0;
  int episodes = 0;
};

struct AblationConfig {
  SasConfig sas;
  int eval_horizon = 30;
  int episodes_per_seed = 1;
  std::vector<double> cost_thresholds = {20, 40, 80};
  double epsilon = 1e-3;
  std::vector<std::uint64_t> seeds;
};

struct AblationRow {
  std::string method;  // backbone | rand | maxmax | sas
  double reward_mean = 0, reward_std = 0;
  double cost_mean = 0, cost_std = 0;
  double failure_mean = 0, failure_std = 0;
};

// Runs the four prompt sources under identical budgets and reports
// normalized metrics averaged over seeds, episodes and cost thresholds, with
// the standard deviation taken across those samples. r_min/r_max for reward
// normalization come from the dataset returns. Deterministic for a fixed
// seed list.
std::vector<AblationRow> ablation_harness(const TabularMdp& mdp, const OfflineDataset& dataset,
                                          const LearnedKernel& kernel,
                                          const ContextPolicy& policy,
                                          const EnergyTable& energy, const LyapunovTable& g,
                                          const AblationConfig& cfg, int threads = 1);

// Per-method metric summaries from the same episodes the harness scored.
std::vector<std::pair<std::string, MetricReport>> metric_reports(
    const TabularMdp& mdp, const OfflineDataset& dataset, const LearnedKernel& kernel,
    const ContextPolicy& policy, const EnergyTable& energy, const LyapunovTable& g,
    const AblationConfig& cfg, int threads = 1);

struct PercentileRegions {
  std::vector<StateId> invalid;  // action-averaged G above the high percentile
  std::vector<StateId> roa;      // action-averaged G below the low percentile
  double low_value = 0;
  double high_value = 0;
};

// Nearest-rank percentiles of the per-state action-averaged G values
// (movement actions only). Membership uses strict comparisons, so a constant
// table yields empty sets.
PercentileRegions percentile_regions(const LyapunovTable& g, double low_pct, double high_pct);

double nearest_rank_percentile(std::vector<double> values, double pct);

// CSV renderings (fixed column order, '\n' line endings).
std::string ablation_csv(std::span<const AblationRow> rows);
std::string bound_check_csv(std::span<const EscapeFrequency> points, const BoundParams& base);

}  // namespace sas
