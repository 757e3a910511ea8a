#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sasalign/grid.hpp"
#include "sasalign/policies.hpp"

namespace sas {

// One episode. states has T+1 entries, actions/rewards/costs have T.
struct Trajectory {
  std::vector<StateId> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> costs;

  int length() const { return static_cast<int>(actions.size()); }
  double reward_return() const;
  double cost_return() const;  // undiscounted, the dataset-statistic convention
  bool operator==(const Trajectory&) const = default;
};

struct DatasetMeta {
  std::string mdp_digest;
  std::string mix;  // human-readable behavior mix, e.g. "expert:0.5,medium:0.5"
  std::uint64_t seed = 0;
  bool operator==(const DatasetMeta&) const = default;
};

struct OfflineDataset {
  DatasetMeta meta;
  std::vector<Trajectory> trajectories;
  bool operator==(const OfflineDataset&) const = default;
};

struct MixComponent {
  std::string policy;
  double fraction;
};

// Rolls out n_traj episodes of fixed horizon from the layout start under the
// named scripted policies. Per-policy counts follow the largest-remainder
// rounding of the fractions; trajectory i uses an RNG stream derived from
// (seed, i), so the result is independent of thread scheduling.
// Throws ConfigError if the fractions do not sum to 1 within 1e-9.
OfflineDataset generate_dataset(const TabularMdp& mdp, const std::vector<MixComponent>& mix,
                                int n_traj, int horizon, std::uint64_t seed, int threads = 1);

// Largest-remainder apportionment of n items to the given fractions.
// Remainder ties resolve to the earlier component.
std::vector<int> apportion_counts(const std::vector<double>& fractions, int n);

// Line-delimited JSON: a {"meta":{...}} header record, then one trajectory
// object {"states":[...],"actions":[...],"rewards":[...],"costs":[...]} per
// line. save/load round-trip bit-exactly.
void save_dataset(const OfflineDataset& dataset, const std::filesystem::path& path);
OfflineDataset load_dataset(const std::filesystem::path& path);

std::string serialize_dataset(const OfflineDataset& dataset);
OfflineDataset parse_dataset(const std::string& text);

struct DatasetStats {
  int n_traj = 0;
  double max_cost_return = 0;
  double mean_return = 0;
  std::vector<std::int64_t> visit_counts;  // [s * kNumActions + a]
};

DatasetStats dataset_stats(const OfflineDataset& dataset, int num_states);

}  // namespace sas
