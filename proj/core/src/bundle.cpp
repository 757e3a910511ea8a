#include "sasalign/bundle.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sasalign/bounds_metrics.hpp"
#include "sasalign/errors.hpp"
#include "sasalign/parallel.hpp"

namespace sas {

using ordered_json = nlohmann::ordered_json;

const LyapunovTable& ModelBundle::g_table(const std::string& source) const {
  if (source == "ldm_fixed_point") return g_ldm;
  if (source == "literal_eq6") return g_literal;
  throw ConfigError("unknown G source \"" + source + "\"");
}

double ModelBundle::ldm_level_for_budget(double d) const {
  if (d <= 0) throw std::invalid_argument("budget d must be positive");
  return -std::log(d / (layout.c_max * d_conc)) - center_offset;
}

std::string dataset_digest(const OfflineDataset& dataset) {
  const std::string text = serialize_dataset(dataset);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ModelBundle fit_bundle(const TabularMdp& mdp, const OfflineDataset& dataset,
                       const RunConfig& cfg, int threads) {
  const int n = mdp.num_states();
  ModelBundle b;
  b.layout = mdp.layout();
  b.dataset_digest = dataset_digest(dataset);
  b.budget = cfg.budget;
  b.resolved_config = cfg.canonical_toml();

  b.kernel = LearnedKernel::fit(dataset, n, cfg.kernel_smoothing);
  b.policy = ContextPolicy::fit(dataset, cfg.order, n);
  b.data_occupancy =
      empirical_occupancy(dataset.trajectories, mdp.gamma(), cfg.occupancy_smoothing, n);

  // Model-based occupancy: imagined rollouts at the imagination horizon.
  std::vector<Trajectory> rollouts(static_cast<std::size_t>(cfg.occupancy_rollouts));
  parallel_for_index(rollouts.size(), threads, [&](std::size_t i) {
    RngStream rng = RngStream::derive(cfg.occupancy_seed, i);
    rollouts[i] = imagine(b.kernel, b.policy, mdp.start(), cfg.sas_horizon, nullptr, rng);
  });
  b.model_occupancy = empirical_occupancy(rollouts, mdp.gamma(), cfg.occupancy_smoothing, n);

  b.energy = energy(b.model_occupancy);
  b.center_offset = b.energy.at(mdp.goal(), kStay);
  b.energy_centered = b.energy;
  for (double& e : b.energy_centered.values) e -= b.center_offset;

  b.g_ldm = ldm_fixed_point(b.energy_centered, b.kernel.to_dense(mdp.start()), mdp.gamma(),
                            cfg.ldm_tol);
  const StateId starts[] = {mdp.start()};
  b.g_literal = g_sas_exact(b.energy, b.kernel.to_dense(mdp.start()), starts, cfg.sas_horizon);
  b.d_conc = concentrability(b.model_occupancy, b.data_occupancy);
  return b;
}

BoundAutoParams bound_auto_params(const ModelBundle& bundle, const OfflineDataset& dataset,
                                  const LyapunovTable& g, double low_pct, double high_pct) {
  std::vector<double> step_energies;
  double l = 0;
  for (const auto& traj : dataset.trajectories) {
    for (int t = 0; t < traj.length(); ++t) {
      const StateId s = traj.states[static_cast<std::size_t>(t)];
      const int a = traj.actions[static_cast<std::size_t>(t)];
      step_energies.push_back(bundle.energy.at(s, a));
      if (t + 1 < traj.length()) {
        const StateId s2 = traj.states[static_cast<std::size_t>(t) + 1];
        const int a2 = traj.actions[static_cast<std::size_t>(t) + 1];
        l = std::max(l, std::abs(g.at(s, a) - g.at(s2, a2)));
      }
    }
  }
  BoundAutoParams p;
  p.c1 = nearest_rank_percentile(step_energies, low_pct);
  p.c2 = nearest_rank_percentile(step_energies, high_pct);
  p.l = l;
  double total = 0;
  for (double e : step_energies) total += e;
  p.e_mean = total / static_cast<double>(step_energies.size());
  return p;
}

namespace {

ordered_json occupancy_json(const OccupancyTable& occ) {
  return ordered_json{{"values", occ.values},
                      {"gamma", occ.gamma},
                      {"horizon", occ.horizon},
                      {"normalized", occ.normalization == Normalization::kNormalized},
                      {"num_states", occ.num_states}};
}

OccupancyTable occupancy_from(const ordered_json& j) {
  OccupancyTable occ;
  occ.values = j.at("values").get<std::vector<double>>();
  occ.gamma = j.at("gamma").get<double>();
  occ.horizon = j.at("horizon").get<int>();
  occ.normalization = j.at("normalized").get<bool>() ? Normalization::kNormalized
                                                     : Normalization::kUnnormalized;
  occ.num_states = j.at("num_states").get<int>();
  return occ;
}

ordered_json energy_json(const EnergyTable& e) {
  return ordered_json{{"values", e.values},
                      {"smoothing_epsilon", e.smoothing_epsilon},
                      {"num_states", e.num_states}};
}

EnergyTable energy_from(const ordered_json& j) {
  EnergyTable e;
  e.values = j.at("values").get<std::vector<double>>();
  e.smoothing_epsilon = j.at("smoothing_epsilon").get<double>();
  e.num_states = j.at("num_states").get<int>();
  return e;
}

ordered_json g_json(const LyapunovTable& g) {
  return ordered_json{{"values", g.values},
                      {"variant", g_variant_name(g.variant)},
                      {"baseline", g.baseline},
                      {"num_states", g.num_states}};
}

LyapunovTable g_from(const ordered_json& j) {
  LyapunovTable g;
  g.values = j.at("values").get<std::vector<double>>();
  g.variant = g_variant_from_name(j.at("variant").get<std::string>());
  g.baseline = j.at("baseline").get<double>();
  g.num_states = j.at("num_states").get<int>();
  return g;
}

}  // namespace

std::string bundle_to_json(const ModelBundle& b) {
  ordered_json j;
  j["layout"] = {{"name", b.layout.name},   {"width", b.layout.width},
                 {"height", b.layout.height}, {"start", b.layout.start},
                 {"goal", b.layout.goal},   {"hazards", b.layout.hazards},
                 {"slip_prob", b.layout.slip_prob}, {"gamma", b.layout.gamma},
                 {"c_max", b.layout.c_max}};
  j["dataset_digest"] = b.dataset_digest;
  j["budget"] = b.budget;
  j["d_conc"] = b.d_conc;
  j["center_offset"] = b.center_offset;

  // Kernel counts, sparse.
  ordered_json kernel_counts = ordered_json::array();
  const auto& counts = b.kernel.counts();
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] != 0) kernel_counts.push_back(ordered_json::array({i, counts[i]}));
  j["kernel"] = {{"num_states", b.kernel.num_states()},
                 {"smoothing", b.kernel.smoothing()},
                 {"counts", std::move(kernel_counts)}};

  ordered_json tables = ordered_json::array();
  for (int depth = 0; depth <= b.policy.order(); ++depth) {
    ordered_json table = ordered_json::array();
    for (const auto& [key, row] : b.policy.table(depth))
      table.push_back(ordered_json::array(
          {key, ordered_json::array({row[0], row[1], row[2], row[3], row[4]})}));
    tables.push_back(std::move(table));
  }
  j["policy"] = {{"order", b.policy.order()},
                 {"num_states", b.policy.num_states()},
                 {"tables", std::move(tables)}};

  j["data_occupancy"] = occupancy_json(b.data_occupancy);
  j["model_occupancy"] = occupancy_json(b.model_occupancy);
  j["energy"] = energy_json(b.energy);
  j["energy_centered"] = energy_json(b.energy_centered);
  j["g_literal"] = g_json(b.g_literal);
  j["g_ldm"] = g_json(b.g_ldm);
  j["resolved_config"] = b.resolved_config;
  return j.dump(2) + "\n";
}

ModelBundle bundle_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bundle: ") + e.what());
  }
  try {
    ModelBundle b;
    const auto& l = j.at("layout");
    b.layout.name = l.at("name").get<std::string>();
    b.layout.width = l.at("width").get<int>();
    b.layout.height = l.at("height").get<int>();
    b.layout.start = l.at("start").get<StateId>();
    b.layout.goal = l.at("goal").get<StateId>();
    b.layout.hazards = l.at("hazards").get<std::vector<StateId>>();
    b.layout.slip_prob = l.at("slip_prob").get<double>();
    b.layout.gamma = l.at("gamma").get<double>();
    b.layout.c_max = l.at("c_max").get<double>();
    b.dataset_digest = j.at("dataset_digest").get<std::string>();
    b.budget = j.at("budget").get<double>();
    b.d_conc = j.at("d_conc").get<double>();
    b.center_offset = j.at("center_offset").get<double>();

    const auto& k = j.at("kernel");
    const int n = k.at("num_states").get<int>();
    std::vector<std::int64_t> counts(
        static_cast<std::size_t>(n) * kNumActions * static_cast<std::size_t>(n), 0);
    for (const auto& entry : k.at("counts"))
      counts[entry.at(0).get<std::size_t>()] = entry.at(1).get<std::int64_t>();
    b.kernel = LearnedKernel::from_counts(std::move(counts), n, k.at("smoothing").get<double>());

    const auto& p = j.at("policy");
    const int order = p.at("order").get<int>();
    std::vector<std::map<std::uint64_t, ContextPolicy::CountRow>> tables(
        static_cast<std::size_t>(order) + 1);
    for (int depth = 0; depth <= order; ++depth) {
      for (const auto& entry : p.at("tables").at(static_cast<std::size_t>(depth))) {
        ContextPolicy::CountRow row{};
        for (int a = 0; a < kNumActions; ++a)
          row[static_cast<std::size_t>(a)] = entry.at(1).at(static_cast<std::size_t>(a)).get<std::int64_t>();
        tables[static_cast<std::size_t>(depth)][entry.at(0).get<std::uint64_t>()] = row;
      }
    }
    b.policy = ContextPolicy::from_tables(std::move(tables), order, p.at("num_states").get<int>());

    b.data_occupancy = occupancy_from(j.at("data_occupancy"));
    b.model_occupancy = occupancy_from(j.at("model_occupancy"));
    b.energy = energy_from(j.at("energy"));
    b.energy_centered = energy_from(j.at("energy_centered"));
    b.g_literal = g_from(j.at("g_literal"));
    b.g_ldm = g_from(j.at("g_ldm"));
    b.resolved_config = j.at("resolved_config").get<std::string>();
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bundle: ") + e.what());
  }
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << bundle_to_json(bundle);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return bundle_from_json(buf.str());
}

}  // namespace sas
