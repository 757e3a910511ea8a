#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sasalign/rng.hpp"

namespace sas {

using StateId = int;

// Action ids are fixed; tie-breaking rules elsewhere rely on this order.
enum Action : int { kPosX = 0, kNegX = 1, kPosY = 2, kNegY = 3, kStay = 4 };
inline constexpr int kNumActions = 5;

const char* action_name(int action);

struct Transition {
  StateId state;
  int action;
  StateId next_state;
  double reward;
  double cost;
};

struct LayoutConfig {
  int width = 0;
  int height = 0;
  StateId start = 0;
  StateId goal = 0;
  std::vector<StateId> hazards;
  double slip_prob = 0.0;
  double gamma = 0.99;
  double c_max = 1.0;
  std::string name;  // informational
};

// Discrete CMDP test-bed: a 2-D gridworld with hazard cells, one absorbing
// goal cell, bounded per-step cost and a slip kernel. Immutable after
// construction; safe to share across threads.
//
// Dynamics: the intended move keeps probability 1 - slip_prob, each of the
// other four actions receives slip_prob / 4. Moves off the grid clamp to the
// current cell (mass from clamped outcomes aggregates). The goal cell is
// absorbing under every action.
//
// Reward is 1 per step spent at the goal, 0 elsewhere. Cost is c_max on
// hazard cells, 0 elsewhere, so per-step cost is bounded by c_max.
class TabularMdp {
 public:
  explicit TabularMdp(const LayoutConfig& cfg);

  int width() const { return cfg_.width; }
  int height() const { return cfg_.height; }
  int num_states() const { return cfg_.width * cfg_.height; }
  StateId start() const { return cfg_.start; }
  StateId goal() const { return cfg_.goal; }
  double slip_prob() const { return cfg_.slip_prob; }
  double gamma() const { return cfg_.gamma; }
  double c_max() const { return cfg_.c_max; }
  const std::string& name() const { return cfg_.name; }
  const LayoutConfig& layout() const { return cfg_; }

  bool is_hazard(StateId s) const { return hazard_mask_[static_cast<std::size_t>(s)]; }
  bool in_grid(StateId s) const { return s >= 0 && s < num_states(); }

  int x_of(StateId s) const { return s % cfg_.width; }
  int y_of(StateId s) const { return s / cfg_.width; }
  StateId state_at(int x, int y) const { return y * cfg_.width + x; }

  double reward(StateId s, int action) const;
  double cost(StateId s, int action) const;

  // Exact kernel row over all states; entries are non-negative and sum to 1.
  std::span<const double> kernel_row(StateId s, int action) const;

  // Samples one transition. Throws std::invalid_argument on an out-of-grid
  // state or unknown action.
  Transition step(StateId s, int action, RngStream& rng) const;

  // Deterministic destination of `action` from `s` ignoring slip (wall moves
  // clamp, goal absorbs).
  StateId intended_next(StateId s, int action) const;

  // Stable digest of the layout, embedded in datasets and model bundles.
  std::string digest() const;

 private:
  void check_state_action(StateId s, int action) const;

  LayoutConfig cfg_;
  std::vector<char> hazard_mask_;
  std::vector<double> kernel_;  // [s * kNumActions + a] * num_states row-major
};

// Built-in layouts: "corridor" (8x1 chain, hazard mid-way), "two-paths"
// (7x5, two equal-length routes, hazards lining the lower one) and "ring"
// (5x5 loop with one hazard arc). Unknown names raise ConfigError listing
// the valid choices.
TabularMdp make_layout(const std::string& name, double slip_prob = 0.1, double gamma = 0.99,
                       double c_max = 1.0);

LayoutConfig builtin_layout_config(const std::string& name);

}  // namespace sas
