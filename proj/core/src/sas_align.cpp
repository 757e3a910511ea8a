#include "sasalign/sas_align.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sasalign/errors.hpp"

namespace sas {

using ordered_json = nlohmann::ordered_json;

void SasConfig::validate() const {
  if (n < 1 || m < 1) throw std::invalid_argument("sas: n and m must be at least 1");
  if (k < 1 || k > horizon)
    throw std::invalid_argument("sas: prompt length k must lie in [1, horizon]");
  if (horizon < 1) throw std::invalid_argument("sas: horizon must be at least 1");
}

namespace {

// Index of the max step energy, first occurrence on ties.
std::pair<double, int> max_energy_step(const Trajectory& traj, const EnergyTable& energy) {
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int t = 0; t < traj.length(); ++t) {
    const double e = energy.at(traj.states[static_cast<std::size_t>(t)],
                               traj.actions[static_cast<std::size_t>(t)]);
    if (e > best) {
      best = e;
      arg = t;
    }
  }
  return {best, arg};
}

Prompt cut_window(const Trajectory& traj, int t_end, int k, PromptSource source, int* begin_out,
                  int* end_out) {
  const int begin = std::max(0, t_end - k + 1);  // clamp: short history gives a short prompt
  Prompt p;
  p.source = source;
  for (int t = begin; t <= t_end; ++t)
    p.pairs.emplace_back(traj.states[static_cast<std::size_t>(t)],
                         traj.actions[static_cast<std::size_t>(t)]);
  if (begin_out != nullptr) *begin_out = begin;
  if (end_out != nullptr) *end_out = t_end;
  return p;
}

int descent_count(const Trajectory& traj, const LyapunovTable& g) {
  const ObservableSequence obs = observables(traj, g);
  int count = 0;
  for (bool b : obs.v) count += b ? 1 : 0;
  return count;
}

}  // namespace

SasReport run_sas(const LearnedKernel& kernel, const ContextPolicy& policy,
                  const EnergyTable& energy, const LyapunovTable& g, StateId s1,
                  const SasConfig& cfg) {
  cfg.validate();
  SasReport report;
  report.cfg = cfg;
  report.s1 = s1;

  report.loop1.resize(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    RngStream rng = RngStream::derive(cfg.seed, 1, static_cast<std::uint64_t>(i));
    Loop1Record rec;
    rec.rollout = imagine(kernel, policy, s1, cfg.horizon, nullptr, rng);
    std::tie(rec.max_energy, rec.t_max) = max_energy_step(rec.rollout, energy);
    report.loop1[static_cast<std::size_t>(i)] = std::move(rec);
  }
  report.i_star = 0;
  for (int i = 1; i < cfg.n; ++i)
    if (report.loop1[static_cast<std::size_t>(i)].max_energy <
        report.loop1[static_cast<std::size_t>(report.i_star)].max_energy)
      report.i_star = i;
  const Loop1Record& chosen1 = report.loop1[static_cast<std::size_t>(report.i_star)];
  report.initial_prompt =
      cut_window(chosen1.rollout, chosen1.t_max, cfg.k, PromptSource::kSas,
                 &report.initial_window_begin, &report.initial_window_end);

  report.loop2.resize(static_cast<std::size_t>(cfg.m));
  for (int j = 0; j < cfg.m; ++j) {
    RngStream rng = RngStream::derive(cfg.seed, 2, static_cast<std::uint64_t>(j));
    Loop2Record rec;
    rec.rollout = imagine(kernel, policy, s1, cfg.horizon, &report.initial_prompt, rng);
    std::tie(rec.max_energy, rec.t_max) = max_energy_step(rec.rollout, energy);
    rec.v_count = descent_count(rec.rollout, g);
    report.loop2[static_cast<std::size_t>(j)] = std::move(rec);
  }
  report.j_star = 0;
  for (int j = 1; j < cfg.m; ++j)
    if (report.loop2[static_cast<std::size_t>(j)].v_count >
        report.loop2[static_cast<std::size_t>(report.j_star)].v_count)
      report.j_star = j;
  const Loop2Record& chosen2 = report.loop2[static_cast<std::size_t>(report.j_star)];
  report.final_prompt =
      cut_window(chosen2.rollout, chosen2.t_max, cfg.k, PromptSource::kSas,
                 &report.final_window_begin, &report.final_window_end);

  report.final_rollout_energies.clear();
  for (int t = 0; t < chosen2.rollout.length(); ++t)
    report.final_rollout_energies.push_back(
        energy.at(chosen2.rollout.states[static_cast<std::size_t>(t)],
                  chosen2.rollout.actions[static_cast<std::size_t>(t)]));
  return report;
}

Prompt baseline_random_prompt(const OfflineDataset& dataset, int k, RngStream& rng) {
  if (k < 1) throw std::invalid_argument("prompt length must be at least 1");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i)
    if (dataset.trajectories[i].length() >= k) eligible.push_back(i);
  if (eligible.empty())
    throw std::invalid_argument("no trajectory of length >= " + std::to_string(k));
  const Trajectory& traj =
      dataset.trajectories[eligible[rng.below(eligible.size())]];
  const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(traj.length() - k + 1)));
  Prompt p;
  p.source = PromptSource::kRandom;
  for (int t = start; t < start + k; ++t)
    p.pairs.emplace_back(traj.states[static_cast<std::size_t>(t)],
                         traj.actions[static_cast<std::size_t>(t)]);
  return p;
}

Prompt baseline_maxmax(const LearnedKernel& kernel, const ContextPolicy& policy,
                       const EnergyTable& energy, StateId s1, int n, int k, int horizon,
                       RngStream& rng) {
  if (n < 1) throw std::invalid_argument("need at least one rollout");
  double worst = -std::numeric_limits<double>::infinity();
  Trajectory chosen;
  int chosen_t = 0;
  for (int i = 0; i < n; ++i) {
    Trajectory traj = imagine(kernel, policy, s1, horizon, nullptr, rng);
    const auto [max_e, t_max] = max_energy_step(traj, energy);
    if (max_e > worst) {
      worst = max_e;
      chosen = std::move(traj);
      chosen_t = t_max;
    }
  }
  return cut_window(chosen, chosen_t, k, PromptSource::kMaxmax, nullptr, nullptr);
}

EpisodeResult deploy(const ContextPolicy& policy, const Prompt& prompt, const TabularMdp& mdp,
                     StateId s1, int horizon, RngStream& rng) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  std::vector<std::pair<StateId, int>> window;
  const int take = std::min<int>(policy.order(), prompt.length());
  window.assign(prompt.pairs.end() - take, prompt.pairs.end());

  EpisodeResult out;
  StateId s = s1;
  out.trajectory.states.push_back(s);
  for (int t = 0; t < horizon; ++t) {
    const auto probs = policy.action_probs(window, s);
    const int a = rng.discrete(probs);
    const Transition tr = mdp.step(s, a, rng);
    out.trajectory.actions.push_back(a);
    out.trajectory.rewards.push_back(tr.reward);
    out.trajectory.costs.push_back(tr.cost);
    out.trajectory.states.push_back(tr.next_state);
    window.emplace_back(s, a);
    if (static_cast<int>(window.size()) > policy.order()) window.erase(window.begin());
    s = tr.next_state;
  }
  out.reward_return = out.trajectory.reward_return();
  out.cost_return = out.trajectory.cost_return();
  out.failed = out.cost_return > 0;
  return out;
}

std::string audit_report(const SasReport& report, const EnergyTable& energy,
                         const LyapunovTable& g) {
  std::ostringstream problems;
  auto mismatch = [&](const std::string& what) { problems << what << "; "; };

  int i_star = 0;
  for (int i = 0; i < static_cast<int>(report.loop1.size()); ++i) {
    const auto& rec = report.loop1[static_cast<std::size_t>(i)];
    const auto [max_e, t_max] = max_energy_step(rec.rollout, energy);
    if (max_e != rec.max_energy) mismatch("loop1 max_energy differs at rollout " + std::to_string(i));
    if (t_max != rec.t_max) mismatch("loop1 t_max differs at rollout " + std::to_string(i));
    if (max_e < report.loop1[static_cast<std::size_t>(i_star)].max_energy) i_star = i;
  }
  if (i_star != report.i_star) mismatch("i_star differs");

  const auto& chosen1 = report.loop1[static_cast<std::size_t>(report.i_star)];
  int begin = 0, end = 0;
  const Prompt p1 = cut_window(chosen1.rollout, chosen1.t_max, report.cfg.k, PromptSource::kSas,
                               &begin, &end);
  if (p1.pairs != report.initial_prompt.pairs) mismatch("initial prompt window differs");
  if (begin != report.initial_window_begin || end != report.initial_window_end)
    mismatch("initial window indices differ");

  int j_star = 0;
  for (int j = 0; j < static_cast<int>(report.loop2.size()); ++j) {
    const auto& rec = report.loop2[static_cast<std::size_t>(j)];
    const auto [max_e, t_max] = max_energy_step(rec.rollout, energy);
    const int v = descent_count(rec.rollout, g);
    if (max_e != rec.max_energy) mismatch("loop2 max_energy differs at rollout " + std::to_string(j));
    if (t_max != rec.t_max) mismatch("loop2 t_max differs at rollout " + std::to_string(j));
    if (v != rec.v_count) mismatch("loop2 v_count differs at rollout " + std::to_string(j));
    if (v > report.loop2[static_cast<std::size_t>(j_star)].v_count) j_star = j;
  }
  if (j_star != report.j_star) mismatch("j_star differs");

  const auto& chosen2 = report.loop2[static_cast<std::size_t>(report.j_star)];
  const Prompt p2 = cut_window(chosen2.rollout, chosen2.t_max, report.cfg.k, PromptSource::kSas,
                               &begin, &end);
  if (p2.pairs != report.final_prompt.pairs) mismatch("final prompt window differs");
  if (begin != report.final_window_begin || end != report.final_window_end)
    mismatch("final window indices differ");

  return problems.str();
}

namespace {

ordered_json trajectory_json(const Trajectory& t) {
  return ordered_json{{"states", t.states}, {"actions", t.actions}};
}

Trajectory trajectory_from(const ordered_json& j) {
  Trajectory t;
  t.states = j.at("states").get<std::vector<StateId>>();
  t.actions = j.at("actions").get<std::vector<int>>();
  t.rewards.assign(t.actions.size(), 0.0);
  t.costs.assign(t.actions.size(), 0.0);
  return t;
}

ordered_json prompt_json(const Prompt& p) {
  ordered_json pairs = ordered_json::array();
  for (const auto& [s, a] : p.pairs) pairs.push_back(ordered_json::array({s, a}));
  return ordered_json{{"source", prompt_source_name(p.source)}, {"pairs", pairs}};
}

Prompt prompt_from(const ordered_json& j) {
  Prompt p;
  p.source = prompt_source_from_name(j.at("source").get<std::string>());
  for (const auto& pair : j.at("pairs"))
    p.pairs.emplace_back(pair.at(0).get<StateId>(), pair.at(1).get<int>());
  return p;
}

}  // namespace

std::string report_to_json(const SasReport& r) {
  ordered_json j;
  j["config"] = {{"n", r.cfg.n},         {"m", r.cfg.m},
                 {"k", r.cfg.k},         {"horizon", r.cfg.horizon},
                 {"seed", r.cfg.seed}};
  j["s1"] = r.s1;
  ordered_json loop1 = ordered_json::array();
  for (const auto& rec : r.loop1)
    loop1.push_back(ordered_json{{"rollout", trajectory_json(rec.rollout)},
                                 {"max_energy", rec.max_energy},
                                 {"t_max", rec.t_max}});
  j["loop1"] = std::move(loop1);
  j["i_star"] = r.i_star;
  j["initial_prompt"] = prompt_json(r.initial_prompt);
  j["initial_window"] = ordered_json::array({r.initial_window_begin, r.initial_window_end});
  ordered_json loop2 = ordered_json::array();
  for (const auto& rec : r.loop2)
    loop2.push_back(ordered_json{{"rollout", trajectory_json(rec.rollout)},
                                 {"max_energy", rec.max_energy},
                                 {"t_max", rec.t_max},
                                 {"v_count", rec.v_count}});
  j["loop2"] = std::move(loop2);
  j["j_star"] = r.j_star;
  j["final_prompt"] = prompt_json(r.final_prompt);
  j["final_window"] = ordered_json::array({r.final_window_begin, r.final_window_end});
  j["final_rollout_energies"] = r.final_rollout_energies;
  return j.dump(2) + "\n";
}

SasReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  try {
    SasReport r;
    const auto& c = j.at("config");
    r.cfg.n = c.at("n").get<int>();
    r.cfg.m = c.at("m").get<int>();
    r.cfg.k = c.at("k").get<int>();
    r.cfg.horizon = c.at("horizon").get<int>();
    r.cfg.seed = c.at("seed").get<std::uint64_t>();
    r.s1 = j.at("s1").get<StateId>();
    for (const auto& rec : j.at("loop1")) {
      Loop1Record l;
      l.rollout = trajectory_from(rec.at("rollout"));
      l.max_energy = rec.at("max_energy").get<double>();
      l.t_max = rec.at("t_max").get<int>();
      r.loop1.push_back(std::move(l));
    }
    r.i_star = j.at("i_star").get<int>();
    r.initial_prompt = prompt_from(j.at("initial_prompt"));
    r.initial_window_begin = j.at("initial_window").at(0).get<int>();
    r.initial_window_end = j.at("initial_window").at(1).get<int>();
    for (const auto& rec : j.at("loop2")) {
      Loop2Record l;
      l.rollout = trajectory_from(rec.at("rollout"));
      l.max_energy = rec.at("max_energy").get<double>();
      l.t_max = rec.at("t_max").get<int>();
      l.v_count = rec.at("v_count").get<int>();
      r.loop2.push_back(std::move(l));
    }
    r.j_star = j.at("j_star").get<int>();
    r.final_prompt = prompt_from(j.at("final_prompt"));
    r.final_window_begin = j.at("final_window").at(0).get<int>();
    r.final_window_end = j.at("final_window").at(1).get<int>();
    r.final_rollout_energies = j.at("final_rollout_energies").get<std::vector<double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

}  // namespace sas
