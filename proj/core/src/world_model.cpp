#include "sasalign/world_model.hpp"

#include <algorithm>
#include <stdexcept>

#include "sasalign/errors.hpp"

namespace sas {

LearnedKernel LearnedKernel::fit(const OfflineDataset& dataset, int num_states,
                                 double smoothing) {
  if (dataset.trajectories.empty()) throw std::invalid_argument("dataset is empty");
  if (smoothing < 0) throw std::invalid_argument("smoothing must be non-negative");
  LearnedKernel k;
  k.num_states_ = num_states;
  k.smoothing_ = smoothing;
  k.counts_.assign(static_cast<std::size_t>(num_states) * kNumActions * num_states, 0);
  for (const auto& t : dataset.trajectories) {
    for (int i = 0; i < t.length(); ++i) {
      const StateId s = t.states[static_cast<std::size_t>(i)];
      const int a = t.actions[static_cast<std::size_t>(i)];
      const StateId sp = t.states[static_cast<std::size_t>(i) + 1];
      if (s < 0 || s >= num_states || sp < 0 || sp >= num_states || a < 0 || a >= kNumActions)
        throw std::invalid_argument("dataset transition outside the state/action space");
      k.counts_[(static_cast<std::size_t>(s) * kNumActions + a) *
                    static_cast<std::size_t>(num_states) +
                static_cast<std::size_t>(sp)]++;
    }
  }
  k.finalize();
  return k;
}

LearnedKernel LearnedKernel::from_counts(std::vector<std::int64_t> counts, int num_states,
                                         double smoothing) {
  LearnedKernel k;
  k.num_states_ = num_states;
  k.smoothing_ = smoothing;
  k.counts_ = std::move(counts);
  if (k.counts_.size() !=
      static_cast<std::size_t>(num_states) * kNumActions * static_cast<std::size_t>(num_states))
    throw std::invalid_argument("kernel count table has wrong size");
  k.finalize();
  return k;
}

void LearnedKernel::finalize() {
  const int n = num_states_;
  probs_.assign(counts_.size(), 0.0);
  for (StateId s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const std::size_t base =
          (static_cast<std::size_t>(s) * kNumActions + a) * static_cast<std::size_t>(n);
      std::int64_t total = 0;
      for (StateId sp = 0; sp < n; ++sp) total += counts_[base + static_cast<std::size_t>(sp)];
      const double denom = static_cast<double>(total) + smoothing_ * n;
      if (denom <= 0) {
        // Unseen pair with zero smoothing: uniform fallback keeps every row a
        // distribution.
        for (StateId sp = 0; sp < n; ++sp) probs_[base + static_cast<std::size_t>(sp)] = 1.0 / n;
        continue;
      }
      for (StateId sp = 0; sp < n; ++sp)
        probs_[base + static_cast<std::size_t>(sp)] =
            (static_cast<double>(counts_[base + static_cast<std::size_t>(sp)]) + smoothing_) /
            denom;
    }
  }
}

std::int64_t LearnedKernel::count(StateId s, int a, StateId next) const {
  return counts_[(static_cast<std::size_t>(s) * kNumActions + a) *
                     static_cast<std::size_t>(num_states_) +
                 static_cast<std::size_t>(next)];
}

DenseKernel LearnedKernel::to_dense(StateId start) const {
  DenseKernel k;
  k.num_states = num_states_;
  k.probs = probs_;
  k.p1.assign(static_cast<std::size_t>(num_states_), 0.0);
  k.p1[static_cast<std::size_t>(start)] = 1.0;
  return k;
}

const char* prompt_source_name(PromptSource source) {
  switch (source) {
    case PromptSource::kSas: return "sas";
    case PromptSource::kRandom: return "random";
    case PromptSource::kMaxmax: return "maxmax";
    case PromptSource::kNone: return "none";
  }
  return "none";
}

PromptSource prompt_source_from_name(const std::string& name) {
  if (name == "sas") return PromptSource::kSas;
  if (name == "random") return PromptSource::kRandom;
  if (name == "maxmax") return PromptSource::kMaxmax;
  if (name == "none") return PromptSource::kNone;
  throw ParseError("unknown prompt source \"" + name + "\"");
}

std::uint64_t ContextPolicy::encode_context(std::span<const std::pair<StateId, int>> window,
                                            int depth, StateId current) const {
  // Positional encoding: `depth` most recent pairs, oldest first, then the
  // current state. Tables are per-order, so keys cannot collide across
  // depths.
  const std::uint64_t pair_base = static_cast<std::uint64_t>(num_states_) * kNumActions;
  std::uint64_t key = 0;
  const std::size_t n = window.size();
  for (int i = depth; i >= 1; --i) {
    const auto& [s, a] = window[n - static_cast<std::size_t>(i)];
    key = key * pair_base + (static_cast<std::uint64_t>(s) * kNumActions + static_cast<std::uint64_t>(a));
  }
  return key * static_cast<std::uint64_t>(num_states_) + static_cast<std::uint64_t>(current);
}

ContextPolicy ContextPolicy::fit(const OfflineDataset& dataset, int order, int num_states) {
  if (order < 0) throw std::invalid_argument("context order must be non-negative");
  ContextPolicy pi;
  pi.order_ = order;
  pi.num_states_ = num_states;
  pi.tables_.resize(static_cast<std::size_t>(order) + 1);
  std::vector<std::pair<StateId, int>> window;
  for (const auto& t : dataset.trajectories) {
    window.clear();
    for (int i = 0; i < t.length(); ++i) {
      const StateId s = t.states[static_cast<std::size_t>(i)];
      const int a = t.actions[static_cast<std::size_t>(i)];
      const int max_depth = std::min<int>(order, static_cast<int>(window.size()));
      for (int depth = 0; depth <= max_depth; ++depth) {
        const std::uint64_t key = pi.encode_context(window, depth, s);
        auto& row = pi.tables_[static_cast<std::size_t>(depth)][key];
        row[static_cast<std::size_t>(a)]++;
      }
      window.emplace_back(s, a);
      if (static_cast<int>(window.size()) > order && order > 0) window.erase(window.begin());
      if (order == 0) window.clear();
    }
  }
  return pi;
}

ContextPolicy ContextPolicy::from_tables(std::vector<std::map<std::uint64_t, CountRow>> tables,
                                         int order, int num_states) {
  if (static_cast<int>(tables.size()) != order + 1)
    throw std::invalid_argument("context policy needs one table per order");
  ContextPolicy pi;
  pi.order_ = order;
  pi.num_states_ = num_states;
  pi.tables_ = std::move(tables);
  return pi;
}

int ContextPolicy::matched_order(std::span<const std::pair<StateId, int>> window,
                                 StateId current) const {
  const int max_depth = std::min<int>(order_, static_cast<int>(window.size()));
  for (int depth = max_depth; depth >= 0; --depth) {
    const std::uint64_t key = encode_context(window, depth, current);
    if (tables_[static_cast<std::size_t>(depth)].contains(key)) return depth;
  }
  return -1;
}

std::array<double, kNumActions> ContextPolicy::action_probs(
    std::span<const std::pair<StateId, int>> window, StateId current) const {
  std::array<double, kNumActions> probs{};
  const int depth = matched_order(window, current);
  if (depth < 0) {
    probs.fill(1.0 / kNumActions);
    return probs;
  }
  const std::uint64_t key = encode_context(window, depth, current);
  const CountRow& row = tables_[static_cast<std::size_t>(depth)].at(key);
  double total = 0;
  for (std::int64_t c : row) total += static_cast<double>(c);
  for (int a = 0; a < kNumActions; ++a)
    probs[static_cast<std::size_t>(a)] = static_cast<double>(row[static_cast<std::size_t>(a)]) / total;
  return probs;
}

Trajectory imagine(const LearnedKernel& kernel, const ContextPolicy& policy, StateId s1,
                   int horizon, const Prompt* prompt, RngStream& rng) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (s1 < 0 || s1 >= kernel.num_states()) throw std::invalid_argument("s1 out of range");
  std::vector<std::pair<StateId, int>> window;
  if (prompt != nullptr) {
    const int k = policy.order();
    const int take = std::min<int>(k, prompt->length());
    window.assign(prompt->pairs.end() - take, prompt->pairs.end());
  }
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
  StateId s = s1;
  traj.states.push_back(s);
  for (int t = 0; t < horizon; ++t) {
    const auto probs = policy.action_probs(window, s);
    const int a = rng.discrete(probs);
    const StateId sp = rng.discrete(kernel.row(s, a));
    traj.actions.push_back(a);
    traj.rewards.push_back(0.0);
    traj.costs.push_back(0.0);
    traj.states.push_back(sp);
    window.emplace_back(s, a);
    if (static_cast<int>(window.size()) > policy.order()) window.erase(window.begin());
    s = sp;
  }
  return traj;
}

}  // namespace sas
