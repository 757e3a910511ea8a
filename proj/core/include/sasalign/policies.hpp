#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sasalign/grid.hpp"

namespace sas {

// State-feedback stochastic policy stored densely: rows[s * kNumActions + a].
// Every row must be a probability distribution.
struct DensePolicy {
  std::vector<double> rows;
  int num_states = 0;

  std::span<const double> row(StateId s) const {
    return {rows.data() + static_cast<std::size_t>(s) * kNumActions, kNumActions};
  }
  double prob(StateId s, int a) const {
    return rows[static_cast<std::size_t>(s) * kNumActions + a];
  }
  // Throws std::invalid_argument if any row fails to sum to 1 within tol.
  void validate(double tol = 1e-9) const;
};

DensePolicy uniform_policy(int num_states);

// Greedy route toward the goal along shortest paths of a hazard-penalized
// grid metric (entering a hazard cell costs hazard_weight instead of 1),
// mixed with epsilon-uniform exploration. The goal row is epsilon-greedy
// around "stay". Ties between equally good actions go to the lowest id.
DensePolicy shortest_safe_path_policy(const TabularMdp& mdp, double epsilon,
                                      double hazard_weight = 100.0);

// Same construction, but the route is forced through a waypoint cell and the
// metric ignores hazards. Used to build distinguishable behavior families.
DensePolicy route_via_policy(const TabularMdp& mdp, StateId waypoint, double epsilon);

// Named mixture components accepted by dataset generation.
//   "expert": shortest safe path, epsilon = 0.05
//   "medium": shortest safe path, epsilon = 0.3
//   "random": uniform
DensePolicy behavior_policy(const TabularMdp& mdp, const std::string& name);

// Expected distance-to-goal table of the hazard-penalized metric (Dijkstra
// from the goal). Exposed for tests.
std::vector<double> safe_distance_field(const TabularMdp& mdp, double hazard_weight = 100.0);

}  // namespace sas
