#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sasalign/dataset.hpp"
#include "sasalign/kernel.hpp"
#include "sasalign/occupancy.hpp"

namespace sas {

enum class GVariant { kLiteralEq6, kLdmFixedPoint };

const char* g_variant_name(GVariant v);
GVariant g_variant_from_name(const std::string& name);

// Per-(state, action) Lyapunov values. Two constructions are supported:
//  - kLiteralEq6: value = baseline - E(s,a), where baseline is the best
//    achievable worst-case energy over a horizon from the start set.
//  - kLdmFixedPoint: the fixed point of G = max{E, gamma * E[min_a' G]}.
struct LyapunovTable {
  std::vector<double> values;  // [s * kNumActions + a]
  GVariant variant = GVariant::kLiteralEq6;
  double baseline = 0;  // min-over-policies max-over-time energy (literal variant)
  int num_states = 0;

  double at(StateId s, int a) const {
    return values[static_cast<std::size_t>(s) * kNumActions + a];
  }
};

struct InvariantSet {
  std::vector<char> members;  // [s * kNumActions + a]
  double level = 0;

  bool contains(StateId s, int a) const {
    return members[static_cast<std::size_t>(s) * kNumActions + a] != 0;
  }
  int size() const;
};

// Indicators along a trajectory: u[t] = G(s_t,a_t) > 0,
// v[t] = G(s_t,a_t) - G(s_{t+1},a_{t+1}) >= 0.
struct ObservableSequence {
  std::vector<bool> u;  // length T
  std::vector<bool> v;  // length T-1
};

// Value iteration for G = max{E(s,a), gamma * E_{s'~P}[min_a' G(s',a')]}
// starting from G_0 = E. Stops when the sup-norm change drops below tol;
// throws NumericalError (with the residual) if max_iters is exhausted.
LyapunovTable ldm_fixed_point(const EnergyTable& energy, const DenseKernel& kernel,
                              double gamma, double tol, int max_iters = 200000);

// Finite-horizon backward induction for the same backup; the horizon-H table
// is the oracle the fixed point is checked against.
LyapunovTable ldm_backward_induction(const EnergyTable& energy, const DenseKernel& kernel,
                                     double gamma, int horizon);

// One application of the backup operator (exposed for residual/monotonicity
// checks).
std::vector<double> ldm_backup(std::span<const double> g, const EnergyTable& energy,
                               const DenseKernel& kernel, double gamma);

// Baseline: best achievable worst-case step energy over `horizon` steps from
// the start set, minimized over deterministic state-feedback policies and
// maximized over kernel-support outcomes (for deterministic kernels this is
// the max energy along the induced path). Values are baseline - E.
LyapunovTable g_sas_exact(const EnergyTable& energy, const DenseKernel& kernel,
                          std::span<const StateId> starts, int horizon);

// The minimax cost-to-go field behind g_sas_exact: W[s] = best worst-case
// energy over `horizon` steps starting at s. Exposed for oracles.
std::vector<double> minimax_energy_to_go(const EnergyTable& energy, const DenseKernel& kernel,
                                         int horizon);

// Sampled baseline: min over sampled rollouts of the max step energy.
// `sampler(i)` must return the i-th imagined trajectory.
double g_sas_sampled(const EnergyTable& energy,
                     const std::function<Trajectory(int)>& sampler, int n_rollouts);

double max_step_energy(const Trajectory& traj, const EnergyTable& energy);

// Sub-level set {(s,a) : G(s,a) <= level}.
InvariantSet invariant_set(const LyapunovTable& g, double level);

// Deterministic argmin_a G(s,a) policy, ties to the lowest action id.
// Requires the kLdmFixedPoint variant.
DensePolicy greedy_policy(const LyapunovTable& g);

// Throws std::out_of_range if the trajectory leaves the table's support.
ObservableSequence observables(const Trajectory& traj, const LyapunovTable& g);

// (1/T) * [sum_t u_t + sum_t v_t].
double trajectory_score(const ObservableSequence& obs);

}  // namespace sas
