#include "sasalign/dataset.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sasalign/errors.hpp"
#include "sasalign/parallel.hpp"

namespace sas {

using ordered_json = nlohmann::ordered_json;

double Trajectory::reward_return() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

double Trajectory::cost_return() const {
  return std::accumulate(costs.begin(), costs.end(), 0.0);
}

std::vector<int> apportion_counts(const std::vector<double>& fractions, int n) {
  std::vector<int> counts(fractions.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double exact = fractions[i] * n;
    counts[i] = static_cast<int>(exact);
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < n - assigned; ++k) counts[remainders[static_cast<std::size_t>(k)].second]++;
  return counts;
}

OfflineDataset generate_dataset(const TabularMdp& mdp, const std::vector<MixComponent>& mix,
                                int n_traj, int horizon, std::uint64_t seed, int threads) {
  if (mix.empty()) throw ConfigError("dataset mix must not be empty");
  if (n_traj <= 0) throw ConfigError("n_traj must be positive");
  if (horizon <= 0) throw ConfigError("horizon must be positive");
  double total = 0;
  for (const auto& c : mix) total += c.fraction;
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("dataset mix fractions sum to " + std::to_string(total) + ", expected 1");

  std::vector<double> fractions;
  std::vector<DensePolicy> policies;
  std::string mix_desc;
  for (const auto& c : mix) {
    fractions.push_back(c.fraction);
    policies.push_back(behavior_policy(mdp, c.policy));
    if (!mix_desc.empty()) mix_desc += ',';
    mix_desc += c.policy + ':' + std::to_string(c.fraction);
  }
  const std::vector<int> counts = apportion_counts(fractions, n_traj);

  std::vector<int> policy_of(static_cast<std::size_t>(n_traj));
  {
    int idx = 0;
    for (std::size_t c = 0; c < counts.size(); ++c)
      for (int k = 0; k < counts[c]; ++k) policy_of[static_cast<std::size_t>(idx++)] = static_cast<int>(c);
  }

  OfflineDataset out;
  out.meta = DatasetMeta{mdp.digest(), mix_desc, seed};
  out.trajectories.resize(static_cast<std::size_t>(n_traj));
  parallel_for_index(static_cast<std::size_t>(n_traj), threads, [&](std::size_t i) {
    RngStream rng = RngStream::derive(seed, i);
    const DensePolicy& pi = policies[static_cast<std::size_t>(policy_of[i])];
    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
    StateId s = mdp.start();
    traj.states.push_back(s);
    for (int t = 0; t < horizon; ++t) {
      const int a = rng.discrete(pi.row(s));
      const Transition tr = mdp.step(s, a, rng);
      traj.actions.push_back(a);
      traj.rewards.push_back(tr.reward);
      traj.costs.push_back(tr.cost);
      traj.states.push_back(tr.next_state);
      s = tr.next_state;
    }
    out.trajectories[i] = std::move(traj);
  });
  return out;
}

namespace {

ordered_json trajectory_to_json(const Trajectory& t) {
  ordered_json j;
  j["states"] = t.states;
  j["actions"] = t.actions;
  j["rewards"] = t.rewards;
  j["costs"] = t.costs;
  return j;
}

Trajectory trajectory_from_json(const ordered_json& j, int line) {
  auto fail = [line](const std::string& msg) {
    throw ParseError("dataset line " + std::to_string(line) + ": " + msg);
  };
  if (!j.is_object() || !j.contains("states") || !j.contains("actions") ||
      !j.contains("rewards") || !j.contains("costs"))
    fail("expected object with states/actions/rewards/costs");
  Trajectory t;
  try {
    t.states = j.at("states").get<std::vector<StateId>>();
    t.actions = j.at("actions").get<std::vector<int>>();
    t.rewards = j.at("rewards").get<std::vector<double>>();
    t.costs = j.at("costs").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  }
  if (t.actions.empty()) fail("empty trajectory");
  if (t.states.size() != t.actions.size() + 1)
    fail("|states| must equal |actions| + 1");
  if (t.rewards.size() != t.actions.size() || t.costs.size() != t.actions.size())
    fail("rewards/costs length must equal |actions|");
  return t;
}

}  // namespace

std::string serialize_dataset(const OfflineDataset& dataset) {
  std::ostringstream os;
  ordered_json meta;
  meta["meta"] = {{"mdp_digest", dataset.meta.mdp_digest},
                  {"mix", dataset.meta.mix},
                  {"seed", dataset.meta.seed}};
  os << meta.dump() << '\n';
  for (const auto& t : dataset.trajectories) os << trajectory_to_json(t).dump() << '\n';
  return os.str();
}

OfflineDataset parse_dataset(const std::string& text) {
  OfflineDataset out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  bool have_meta = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_meta) {
      if (!j.is_object() || !j.contains("meta"))
        throw ParseError("dataset line 1: expected {\"meta\": ...} header record");
      const auto& m = j.at("meta");
      try {
        out.meta.mdp_digest = m.value("mdp_digest", std::string{});
        out.meta.mix = m.value("mix", std::string{});
        out.meta.seed = m.value("seed", std::uint64_t{0});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("dataset line 1: ") + e.what());
      }
      have_meta = true;
      continue;
    }
    out.trajectories.push_back(trajectory_from_json(j, line_no));
  }
  if (!have_meta) throw ParseError("dataset is empty: missing meta header");
  if (out.trajectories.empty()) throw ParseError("dataset contains no trajectories");
  return out;
}

void save_dataset(const OfflineDataset& dataset, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << serialize_dataset(dataset);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

OfflineDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_dataset(buf.str());
}

DatasetStats dataset_stats(const OfflineDataset& dataset, int num_states) {
  if (dataset.trajectories.empty()) throw std::invalid_argument("dataset is empty");
  DatasetStats st;
  st.n_traj = static_cast<int>(dataset.trajectories.size());
  st.visit_counts.assign(static_cast<std::size_t>(num_states) * kNumActions, 0);
  double total_return = 0;
  for (const auto& t : dataset.trajectories) {
    st.max_cost_return = std::max(st.max_cost_return, t.cost_return());
    total_return += t.reward_return();
    for (int i = 0; i < t.length(); ++i)
      st.visit_counts[static_cast<std::size_t>(t.states[static_cast<std::size_t>(i)]) *
                          kNumActions +
                      t.actions[static_cast<std::size_t>(i)]]++;
  }
  st.mean_return = total_return / st.n_traj;
  return st;
}

}  // namespace sas
