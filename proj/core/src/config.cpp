#include "sasalign/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sasalign/errors.hpp"

namespace sas {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

struct RawConfig {
  // section -> key -> value (section "" is the top level)
  std::map<std::string, std::map<std::string, std::string>> entries;

  bool has(const std::string& section, const std::string& key) const {
    const auto s = entries.find(section);
    return s != entries.end() && s->second.count(key) > 0;
  }
  const std::string& get(const std::string& section, const std::string& key) const {
    return entries.at(section).at(key);
  }
};

RawConfig parse_raw(const std::string& text) {
  RawConfig raw;
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      raw.entries[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (raw.entries[section].count(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key \"" + key +
                        "\"");
    raw.entries[section][key] = value;
  }
  return raw;
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + (section.empty() ? key : section + "." + key) +
                      " expects a number, got \"" + v + "\"");
  }
}

int to_int(const std::string& section, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw ConfigError("config: " + (section.empty() ? key : section + "." + key) +
                      " expects an integer, got \"" + v + "\"");
  }
}

std::uint64_t to_u64(const std::string& section, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + (section.empty() ? key : section + "." + key) +
                      " expects an unsigned integer, got \"" + v + "\"");
  }
}

StateId parse_cell(const std::string& text, int width, const std::string& what) {
  const auto parts = split(text, ',');
  if (parts.size() != 2)
    throw ConfigError("config: " + what + " expects \"x,y\", got \"" + text + "\"");
  const int x = to_int("layout", what, parts[0]);
  const int y = to_int("layout", what, parts[1]);
  return y * width + x;
}

const std::map<std::string, std::set<std::string>> kSchema = {
    {"", {"layout", "slip_prob", "gamma", "c_max", "budget"}},
    {"layout", {"width", "height", "start", "goal", "hazards"}},
    {"dataset", {"mix", "n_traj", "horizon", "seed"}},
    {"model",
     {"order", "smoothing", "occupancy_rollouts", "occupancy_smoothing", "occupancy_seed",
      "ldm_tol"}},
    {"sas", {"n", "m", "k", "horizon", "seed", "g_source"}},
    {"bound", {"c1", "c2", "kappa", "l", "runs", "grid", "seed"}},
    {"eval", {"seeds", "episodes_per_seed", "cost_thresholds", "epsilon", "horizon"}},
    {"skills", {"ks", "n_prompts", "seed"}},
    {"output", {"dir"}},
};

void reject_unknown(const RawConfig& raw) {
  for (const auto& [section, keys] : raw.entries) {
    const auto schema = kSchema.find(section);
    if (schema == kSchema.end())
      throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : keys)
      if (!schema->second.count(key))
        throw ConfigError("config: unknown key \"" + key + "\" in section [" +
                          (section.empty() ? "top level" : section) + "]");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  const RawConfig raw = parse_raw(text);
  reject_unknown(raw);
  RunConfig cfg;

  auto get_d = [&](const std::string& s, const std::string& k, double& out) {
    if (raw.has(s, k)) out = to_double(s, k, raw.get(s, k));
  };
  auto get_i = [&](const std::string& s, const std::string& k, int& out) {
    if (raw.has(s, k)) out = to_int(s, k, raw.get(s, k));
  };
  auto get_u = [&](const std::string& s, const std::string& k, std::uint64_t& out) {
    if (raw.has(s, k)) out = to_u64(s, k, raw.get(s, k));
  };
  auto get_s = [&](const std::string& s, const std::string& k, std::string& out) {
    if (raw.has(s, k)) out = raw.get(s, k);
  };

  get_s("", "layout", cfg.layout_name);
  get_d("", "slip_prob", cfg.slip_prob);
  get_d("", "gamma", cfg.gamma);
  get_d("", "c_max", cfg.c_max);
  get_d("", "budget", cfg.budget);

  if (raw.entries.count("layout")) {
    LayoutConfig layout;
    layout.name = "custom";
    if (!raw.has("layout", "width") || !raw.has("layout", "height") ||
        !raw.has("layout", "start") || !raw.has("layout", "goal"))
      throw ConfigError("config: [layout] needs width, height, start and goal");
    layout.width = to_int("layout", "width", raw.get("layout", "width"));
    layout.height = to_int("layout", "height", raw.get("layout", "height"));
    layout.start = parse_cell(raw.get("layout", "start"), layout.width, "start");
    layout.goal = parse_cell(raw.get("layout", "goal"), layout.width, "goal");
    if (raw.has("layout", "hazards") && !trim(raw.get("layout", "hazards")).empty())
      for (const auto& cell : split(raw.get("layout", "hazards"), ';'))
        layout.hazards.push_back(parse_cell(cell, layout.width, "hazards"));
    cfg.inline_layout = layout;
  }

  if (raw.has("dataset", "mix")) {
    cfg.mix.clear();
    for (const auto& part : split(raw.get("dataset", "mix"), ',')) {
      const auto colon = part.find(':');
      if (colon == std::string::npos)
        throw ConfigError("config: dataset.mix entries look like \"name:fraction\"");
      cfg.mix.push_back(
          {trim(part.substr(0, colon)), to_double("dataset", "mix", trim(part.substr(colon + 1)))});
    }
  }
  get_i("dataset", "n_traj", cfg.n_traj);
  get_i("dataset", "horizon", cfg.data_horizon);
  get_u("dataset", "seed", cfg.data_seed);

  get_i("model", "order", cfg.order);
  get_d("model", "smoothing", cfg.kernel_smoothing);
  get_i("model", "occupancy_rollouts", cfg.occupancy_rollouts);
  get_d("model", "occupancy_smoothing", cfg.occupancy_smoothing);
  get_u("model", "occupancy_seed", cfg.occupancy_seed);
  get_d("model", "ldm_tol", cfg.ldm_tol);

  get_i("sas", "n", cfg.sas_n);
  get_i("sas", "m", cfg.sas_m);
  get_i("sas", "k", cfg.sas_k);
  get_i("sas", "horizon", cfg.sas_horizon);
  get_u("sas", "seed", cfg.sas_seed);
  get_s("sas", "g_source", cfg.g_source);
  if (cfg.g_source != "ldm_fixed_point" && cfg.g_source != "literal_eq6")
    throw ConfigError("config: sas.g_source must be ldm_fixed_point or literal_eq6");

  get_s("bound", "c1", cfg.bound_c1);
  get_s("bound", "c2", cfg.bound_c2);
  get_d("bound", "kappa", cfg.bound_kappa);
  get_s("bound", "l", cfg.bound_l);
  get_i("bound", "runs", cfg.bound_runs);
  get_u("bound", "seed", cfg.bound_seed);
  if (raw.has("bound", "grid")) {
    cfg.bound_grid.clear();
    for (const auto& v : split(raw.get("bound", "grid"), ','))
      cfg.bound_grid.push_back(to_int("bound", "grid", v));
  }

  if (raw.has("eval", "seeds")) {
    cfg.eval_seeds.clear();
    for (const auto& v : split(raw.get("eval", "seeds"), ','))
      cfg.eval_seeds.push_back(to_u64("eval", "seeds", v));
  }
  get_i("eval", "episodes_per_seed", cfg.episodes_per_seed);
  if (raw.has("eval", "cost_thresholds")) {
    cfg.cost_thresholds.clear();
    for (const auto& v : split(raw.get("eval", "cost_thresholds"), ','))
      cfg.cost_thresholds.push_back(to_double("eval", "cost_thresholds", v));
  }
  get_d("eval", "epsilon", cfg.cost_epsilon);
  get_i("eval", "horizon", cfg.eval_horizon);

  if (raw.has("skills", "ks")) {
    cfg.skill_ks.clear();
    for (const auto& v : split(raw.get("skills", "ks"), ','))
      cfg.skill_ks.push_back(to_int("skills", "ks", v));
  }
  get_i("skills", "n_prompts", cfg.skill_prompts);
  get_u("skills", "seed", cfg.skill_seed);

  get_s("output", "dir", cfg.output_dir);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

TabularMdp RunConfig::make_mdp() const {
  LayoutConfig layout =
      inline_layout.has_value() ? *inline_layout : builtin_layout_config(layout_name);
  layout.slip_prob = slip_prob;
  layout.gamma = gamma;
  layout.c_max = c_max;
  return TabularMdp(layout);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string RunConfig::canonical_toml() const {
  std::ostringstream os;
  os << "layout = \"" << layout_name << "\"\n";
  os << "slip_prob = " << fmt(slip_prob) << "\n";
  os << "gamma = " << fmt(gamma) << "\n";
  os << "c_max = " << fmt(c_max) << "\n";
  os << "budget = " << fmt(budget) << "\n";
  if (inline_layout) {
    const LayoutConfig& l = *inline_layout;
    os << "[layout]\n";
    os << "width = " << l.width << "\nheight = " << l.height << "\n";
    os << "start = \"" << l.start % l.width << ',' << l.start / l.width << "\"\n";
    os << "goal = \"" << l.goal % l.width << ',' << l.goal / l.width << "\"\n";
    os << "hazards = \"";
    for (std::size_t i = 0; i < l.hazards.size(); ++i) {
      if (i) os << ';';
      os << l.hazards[i] % l.width << ',' << l.hazards[i] / l.width;
    }
    os << "\"\n";
  }
  os << "[dataset]\nmix = \"";
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (i) os << ',';
    os << mix[i].policy << ':' << fmt(mix[i].fraction);
  }
  os << "\"\nn_traj = " << n_traj << "\nhorizon = " << data_horizon << "\nseed = " << data_seed
     << "\n";
  os << "[model]\norder = " << order << "\nsmoothing = " << fmt(kernel_smoothing)
     << "\noccupancy_rollouts = " << occupancy_rollouts
     << "\noccupancy_smoothing = " << fmt(occupancy_smoothing)
     << "\noccupancy_seed = " << occupancy_seed << "\nldm_tol = " << fmt(ldm_tol) << "\n";
  os << "[sas]\nn = " << sas_n << "\nm = " << sas_m << "\nk = " << sas_k
     << "\nhorizon = " << sas_horizon << "\nseed = " << sas_seed << "\ng_source = \"" << g_source
     << "\"\n";
  os << "[bound]\nc1 = \"" << bound_c1 << "\"\nc2 = \"" << bound_c2
     << "\"\nkappa = " << fmt(bound_kappa) << "\nl = \"" << bound_l << "\"\nruns = " << bound_runs
     << "\ngrid = \"";
  for (std::size_t i = 0; i < bound_grid.size(); ++i) {
    if (i) os << ',';
    os << bound_grid[i];
  }
  os << "\"\nseed = " << bound_seed << "\n";
  os << "[eval]\nseeds = \"";
  for (std::size_t i = 0; i < eval_seeds.size(); ++i) {
    if (i) os << ',';
    os << eval_seeds[i];
  }
  os << "\"\nepisodes_per_seed = " << episodes_per_seed << "\ncost_thresholds = \"";
  for (std::size_t i = 0; i < cost_thresholds.size(); ++i) {
    if (i) os << ',';
    os << fmt(cost_thresholds[i]);
  }
  os << "\"\nepsilon = " << fmt(cost_epsilon) << "\nhorizon = " << eval_horizon << "\n";
  os << "[skills]\nks = \"";
  for (std::size_t i = 0; i < skill_ks.size(); ++i) {
    if (i) os << ',';
    os << skill_ks[i];
  }
  os << "\"\nn_prompts = " << skill_prompts << "\nseed = " << skill_seed << "\n";
  os << "[output]\ndir = \"" << output_dir << "\"\n";
  return os.str();
}

}  // namespace sas
