#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sasalign/dataset.hpp"
#include "sasalign/kernel.hpp"

namespace sas {

// Count-based transition model fitted from an offline dataset:
// P(s'|s,a) = (count(s,a,s') + smoothing) / (count(s,a) + smoothing * S).
// Pairs never observed fall back to a uniform row when smoothing is 0.
class LearnedKernel {
 public:
  LearnedKernel() = default;

  static LearnedKernel fit(const OfflineDataset& dataset, int num_states, double smoothing);

  int num_states() const { return num_states_; }
  double smoothing() const { return smoothing_; }
  std::span<const double> row(StateId s, int a) const {
    return {probs_.data() + (static_cast<std::size_t>(s) * kNumActions + a) *
                                static_cast<std::size_t>(num_states_),
            static_cast<std::size_t>(num_states_)};
  }
  double prob(StateId s, int a, StateId next) const {
    return row(s, a)[static_cast<std::size_t>(next)];
  }
  std::int64_t count(StateId s, int a, StateId next) const;

  DenseKernel to_dense(StateId start) const;

  // Restores a kernel from raw counts (used by bundle deserialization).
  static LearnedKernel from_counts(std::vector<std::int64_t> counts, int num_states,
                                   double smoothing);
  const std::vector<std::int64_t>& counts() const { return counts_; }

 private:
  void finalize();

  int num_states_ = 0;
  double smoothing_ = 0;
  std::vector<std::int64_t> counts_;  // [(s * kNumActions + a) * S + s']
  std::vector<double> probs_;
};

enum class PromptSource { kSas, kRandom, kMaxmax, kNone };

const char* prompt_source_name(PromptSource source);
PromptSource prompt_source_from_name(const std::string& name);

// A contiguous demonstration segment of (state, action) pairs used as
// in-context conditioning.
struct Prompt {
  std::vector<std::pair<StateId, int>> pairs;
  PromptSource source = PromptSource::kNone;

  int length() const { return static_cast<int>(pairs.size()); }
  bool empty() const { return pairs.empty(); }
  bool operator==(const Prompt&) const = default;
};

// k-order back-off sequence policy. The order-j table conditions the next
// action on the current state plus the j most recent (state, action) pairs;
// unseen contexts back off to order j-1 and ultimately to the per-state
// action frequencies (order 0). States absent from the data act uniformly.
class ContextPolicy {
 public:
  ContextPolicy() = default;

  static ContextPolicy fit(const OfflineDataset& dataset, int order, int num_states);

  int order() const { return order_; }
  int num_states() const { return num_states_; }

  // Action distribution given the sliding window of previous pairs (oldest
  // first; only the most recent `order` entries are consulted) and the
  // current state.
  std::array<double, kNumActions> action_probs(
      std::span<const std::pair<StateId, int>> window, StateId current) const;

  // Deepest order whose table contains the given context. -1 means even the
  // current state is unseen. Exposed for tests.
  int matched_order(std::span<const std::pair<StateId, int>> window, StateId current) const;

  using CountRow = std::array<std::int64_t, kNumActions>;
  const std::map<std::uint64_t, CountRow>& table(int order) const {
    return tables_[static_cast<std::size_t>(order)];
  }
  // Restores a policy from serialized tables (bundle deserialization).
  static ContextPolicy from_tables(std::vector<std::map<std::uint64_t, CountRow>> tables,
                                   int order, int num_states);

  std::uint64_t encode_context(std::span<const std::pair<StateId, int>> window, int depth,
                               StateId current) const;

 private:
  int order_ = 0;
  int num_states_ = 0;
  std::vector<std::map<std::uint64_t, CountRow>> tables_;  // index = order
};

// Autoregressive rollout under the learned kernel and context policy. The
// context window starts from the prompt (most recent pairs first to go) and
// slides with generated pairs. Rewards and costs are zero-filled: imagination
// predicts dynamics only.
Trajectory imagine(const LearnedKernel& kernel, const ContextPolicy& policy, StateId s1,
                   int horizon, const Prompt* prompt, RngStream& rng);

}  // namespace sas
