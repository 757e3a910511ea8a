#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sasalign/dataset.hpp"
#include "sasalign/lyapunov.hpp"
#include "sasalign/world_model.hpp"

namespace sas {

struct SasConfig {
  int n = 5;        // loop-1 rollouts
  int m = 5;        // loop-2 rollouts
  int k = 5;        // prompt length
  int horizon = 10; // imagination horizon T
  std::uint64_t seed = 0;

  void validate() const;
};

struct Loop1Record {
  Trajectory rollout;
  double max_energy = 0;  // max_t E(s_t, a_t)
  int t_max = 0;          // 0-based argmax step
};

struct Loop2Record {
  Trajectory rollout;
  double max_energy = 0;
  int t_max = 0;
  int v_count = 0;  // sum of descent indicators V_t over t = 1..T-1
};

// Full two-loop selection trace. Rollouts are stored so the selection can be
// recomputed and audited; window indices are 0-based and inclusive.
struct SasReport {
  SasConfig cfg;
  StateId s1 = 0;
  std::vector<Loop1Record> loop1;
  int i_star = 0;
  Prompt initial_prompt;
  int initial_window_begin = 0;
  int initial_window_end = 0;
  std::vector<Loop2Record> loop2;
  int j_star = 0;
  Prompt final_prompt;
  int final_window_begin = 0;
  int final_window_end = 0;
  std::vector<double> final_rollout_energies;  // per-step energies of loop2[j_star]
};

// Two-loop prompt selection. Loop 1 imagines n unconditioned rollouts from
// s1, records each rollout's max step energy and its time, picks
// i* = argmin of the maxima and cuts the K-pair window ending at that time
// (clamped to the available history). Loop 2 imagines m rollouts conditioned
// on that window, scores each by its count of G-descent steps, picks
// j* = argmax and cuts the final window at that rollout's max-energy time.
// Ties resolve to the lowest rollout index. Rollout i of loop L draws from
// the stream derived from (seed, L, i), so runs are schedule-independent.
SasReport run_sas(const LearnedKernel& kernel, const ContextPolicy& policy,
                  const EnergyTable& energy, const LyapunovTable& g, StateId s1,
                  const SasConfig& cfg);

// Uniformly random contiguous k-pair segment from a uniformly random
// trajectory among those long enough. Throws std::invalid_argument when all
// trajectories are shorter than k.
Prompt baseline_random_prompt(const OfflineDataset& dataset, int k, RngStream& rng);

// Loop 1 of run_sas with the selection flipped to argmax (adversarial); no
// second loop.
Prompt baseline_maxmax(const LearnedKernel& kernel, const ContextPolicy& policy,
                       const EnergyTable& energy, StateId s1, int n, int k, int horizon,
                       RngStream& rng);

struct EpisodeResult {
  Trajectory trajectory;
  double reward_return = 0;  // undiscounted sums
  double cost_return = 0;
  bool failed = false;       // any positive cost during the episode
};

// Rolls the prompt-conditioned policy out in the true environment.
EpisodeResult deploy(const ContextPolicy& policy, const Prompt& prompt, const TabularMdp& mdp,
                     StateId s1, int horizon, RngStream& rng);

// Recomputes the selections of a report from its stored rollouts and checks
// that i*, j* and both windows match. Returns an empty string on success, a
// description of the first mismatch otherwise.
std::string audit_report(const SasReport& report, const EnergyTable& energy,
                         const LyapunovTable& g);

// JSON (de)serialization of reports.
std::string report_to_json(const SasReport& report);
SasReport report_from_json(const std::string& text);

}  // namespace sas
