#pragma once

#include <span>
#include <vector>

#include "sasalign/dataset.hpp"
#include "sasalign/kernel.hpp"
#include "sasalign/policies.hpp"

namespace sas {

enum class Normalization { kUnnormalized, kNormalized };

// Discounted visitation weight per (state, action), truncated at a horizon.
// In the unnormalized convention the total mass is (1 - gamma^T)/(1 - gamma).
struct OccupancyTable {
  std::vector<double> values;  // [s * kNumActions + a]
  double gamma = 0;
  int horizon = 0;
  Normalization normalization = Normalization::kUnnormalized;
  int num_states = 0;

  double at(StateId s, int a) const {
    return values[static_cast<std::size_t>(s) * kNumActions + a];
  }
  double total() const;
  // Rescales values to sum to 1 (returns a copy).
  OccupancyTable normalized() const;
};

struct EnergyTable {
  std::vector<double> values;  // [s * kNumActions + a]
  double smoothing_epsilon = 0;
  int num_states = 0;

  double at(StateId s, int a) const {
    return values[static_cast<std::size_t>(s) * kNumActions + a];
  }
  double at_pair(std::size_t flat) const { return values[flat]; }
};

struct FeasibleRegion {
  std::vector<char> members;  // [s * kNumActions + a]
  double threshold = 0;

  bool contains(StateId s, int a) const {
    return members[static_cast<std::size_t>(s) * kNumActions + a] != 0;
  }
  int size() const;
};

// Exact discounted occupancy of a Markov policy by forward DP on the kernel:
// value(s,a) = sum_{t=1..T} gamma^{t-1} P(s_t = s, a_t = a | s_1 ~ p1).
// Throws std::invalid_argument for non-stochastic policy rows or T < 1.
OccupancyTable exact_occupancy(const DenseKernel& kernel, const DensePolicy& policy,
                               double gamma, int horizon);

// Monte Carlo estimate from rollouts of one common horizon, plus an additive
// smoothing term on every entry. Throws std::invalid_argument for an empty
// rollout list or mixed horizons.
OccupancyTable empirical_occupancy(std::span<const Trajectory> rollouts, double gamma,
                                   double smoothing_epsilon, int num_states);

// E = -log(occupancy), elementwise. Throws std::domain_error if any entry is
// zero (the table must be smoothed first).
EnergyTable energy(const OccupancyTable& occ);

// Max ratio of the two tables after normalizing both to distributions,
// floored at 1. Throws std::invalid_argument on mismatched supports or a
// zero entry in data_occ.
double concentrability(const OccupancyTable& target_occ, const OccupancyTable& data_occ);

// Membership: occ(s,a) >= d / (c_max * d_conc).
FeasibleRegion feasible_region(const OccupancyTable& occ, double d, double c_max,
                               double d_conc);

struct CmdpSufficiency {
  bool antecedent = false;  // occupancy <= d / c_max on every high-cost pair
  bool conclusion = false;  // J_C <= d
  bool holds = false;       // antecedent implies conclusion
  double j_c = 0;
  double margin = 0;        // d - j_c
  double cost_threshold = 0;
};

// Checks the density-to-cost sufficiency argument: with high-cost pairs
// defined by cost >= d * (1 - gamma), if the policy's occupancy is at most
// d / c_max on all of them, its discounted cost J_C = sum occ * cost should
// not exceed d. occ must be the exact occupancy of `policy` on `mdp`.
CmdpSufficiency verify_cmdp_sufficiency(const TabularMdp& mdp, const DensePolicy& policy,
                                        const OccupancyTable& occ, double d);

// Per-state mean of the four movement actions (stay excluded).
std::vector<double> action_averaged_occupancy(const OccupancyTable& occ);

}  // namespace sas
