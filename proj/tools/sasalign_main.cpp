// Command-line front end: wires dataset generation, model fitting, prompt
// alignment, evaluation, landscape export, bound checking and skill
// inference into file-based pipelines.
//
// Exit codes: 0 success, 1 runtime/I-O failure, 2 configuration error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sasalign/bounds_metrics.hpp"
#include "sasalign/bundle.hpp"
#include "sasalign/config.hpp"
#include "sasalign/errors.hpp"
#include "sasalign/landscape.hpp"
#include "sasalign/sas_align.hpp"
#include "sasalign/skill_family.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonArgs {
  std::string config_path;
  int threads = 1;
};

sas::RunConfig load_run_config(const CommonArgs& args) {
  return sas::load_config(args.config_path);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

fs::path resolve_out_dir(const sas::RunConfig& cfg, const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SASALIGN_OUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return cfg.output_dir;
}

sas::BoundParams resolve_bound_params(const sas::RunConfig& cfg, const sas::ModelBundle& bundle,
                                      const sas::OfflineDataset& dataset) {
  const sas::LyapunovTable& g = bundle.g_table(cfg.g_source);
  const sas::BoundAutoParams autos = sas::bound_auto_params(bundle, dataset, g);
  sas::BoundParams p;
  p.c1 = cfg.bound_c1 == "auto" ? autos.c1 : std::stod(cfg.bound_c1);
  p.c2 = cfg.bound_c2 == "auto" ? autos.c2 : std::stod(cfg.bound_c2);
  p.kappa = cfg.bound_kappa;
  p.l = cfg.bound_l == "auto" ? autos.l : std::stod(cfg.bound_l);
  p.t = cfg.sas_horizon;
  p.e_mean = autos.e_mean;
  return p;
}

int run_gen_data(const CommonArgs& args, const std::string& out,
                 std::optional<std::uint64_t> seed) {
  sas::RunConfig cfg = load_run_config(args);
  if (seed.has_value()) cfg.data_seed = *seed;
  const sas::TabularMdp mdp = cfg.make_mdp();
  const sas::OfflineDataset dataset = sas::generate_dataset(
      mdp, cfg.mix, cfg.n_traj, cfg.data_horizon, cfg.data_seed, args.threads);
  sas::save_dataset(dataset, out);
  std::cout << "wrote " << dataset.trajectories.size() << " trajectories to " << out << "\n";
  return 0;
}

int run_fit(const CommonArgs& args, const std::string& data, const std::string& out) {
  const sas::RunConfig cfg = load_run_config(args);
  const sas::TabularMdp mdp = cfg.make_mdp();
  const sas::OfflineDataset dataset = sas::load_dataset(data);
  if (dataset.meta.mdp_digest != mdp.digest())
    std::cerr << "warning: dataset was generated for a different layout (digest "
              << dataset.meta.mdp_digest << ", config layout " << mdp.digest() << ")\n";
  if (fs::exists(out)) {
    try {
      const sas::ModelBundle previous = sas::load_bundle(out);
      if (previous.dataset_digest != sas::dataset_digest(dataset))
        std::cerr << "warning: refitting over a bundle built from a different dataset\n";
    } catch (const std::exception&) {
      // Unreadable previous bundle: overwrite silently.
    }
  }
  const sas::ModelBundle bundle = sas::fit_bundle(mdp, dataset, cfg, args.threads);
  sas::save_bundle(bundle, out);
  std::cout << "wrote model bundle to " << out << " (dataset digest " << bundle.dataset_digest
            << ")\n";
  return 0;
}

int run_align(const CommonArgs& args, const std::string& model, const std::string& out,
              std::optional<std::uint64_t> seed) {
  sas::RunConfig cfg = load_run_config(args);
  if (seed.has_value()) cfg.sas_seed = *seed;
  const sas::ModelBundle bundle = sas::load_bundle(model);
  const sas::TabularMdp mdp = bundle.make_mdp();
  sas::SasConfig sc{cfg.sas_n, cfg.sas_m, cfg.sas_k, cfg.sas_horizon, cfg.sas_seed};
  const sas::SasReport report = sas::run_sas(bundle.kernel, bundle.policy, bundle.energy,
                                             bundle.g_table(cfg.g_source), mdp.start(), sc);
  ordered_json doc;
  doc["resolved_config"] = cfg.canonical_toml();
  doc["report"] = ordered_json::parse(sas::report_to_json(report));
  write_file(out, doc.dump(2) + "\n");
  std::cout << "wrote alignment report to " << out << "\n";
  return 0;
}

int run_evaluate(const CommonArgs& args, const std::string& model, const std::string& data,
                 const std::string& out_dir_flag) {
  const sas::RunConfig cfg = load_run_config(args);
  const sas::ModelBundle bundle = sas::load_bundle(model);
  const sas::OfflineDataset dataset = sas::load_dataset(data);
  const sas::TabularMdp mdp = bundle.make_mdp();
  const fs::path out_dir = resolve_out_dir(cfg, out_dir_flag);

  sas::AblationConfig ac;
  ac.sas = sas::SasConfig{cfg.sas_n, cfg.sas_m, cfg.sas_k, cfg.sas_horizon, cfg.sas_seed};
  ac.eval_horizon = cfg.eval_horizon;
  ac.episodes_per_seed = cfg.episodes_per_seed;
  ac.cost_thresholds = cfg.cost_thresholds;
  ac.epsilon = cfg.cost_epsilon;
  ac.seeds = cfg.eval_seeds;

  const sas::LyapunovTable& g = bundle.g_table(cfg.g_source);
  const auto rows = sas::ablation_harness(mdp, dataset, bundle.kernel, bundle.policy,
                                          bundle.energy, g, ac, args.threads);
  write_file(out_dir / "ablation.csv", sas::ablation_csv(rows));

  const auto reports = sas::metric_reports(mdp, dataset, bundle.kernel, bundle.policy,
                                           bundle.energy, g, ac, args.threads);
  ordered_json doc;
  doc["resolved_config"] = cfg.canonical_toml();
  for (const auto& [method, rep] : reports)
    doc["methods"][method] = {{"normalized_reward", rep.normalized_reward},
                              {"normalized_cost", rep.normalized_cost},
                              {"failure_rate", rep.failure_rate},
                              {"raw_reward_mean", rep.raw_reward_mean},
                              {"raw_cost_mean", rep.raw_cost_mean},
                              {"episodes", rep.episodes}};
  write_file(out_dir / "metrics.json", doc.dump(2) + "\n");
  std::cout << "wrote " << (out_dir / "ablation.csv").string() << " and "
            << (out_dir / "metrics.json").string() << "\n";
  return 0;
}

int run_landscape(const CommonArgs& args, const std::string& model,
                  const std::string& out_dir_flag, bool svg) {
  const sas::RunConfig cfg = load_run_config(args);
  const sas::ModelBundle bundle = sas::load_bundle(model);
  const sas::TabularMdp mdp = bundle.make_mdp();
  const fs::path out_dir = resolve_out_dir(cfg, out_dir_flag);

  const std::string occ_csv = sas::occupancy_landscape_csv(mdp.width(), mdp.height(),
                                                           bundle.model_occupancy, bundle.energy);
  write_file(out_dir / "occupancy_landscape.csv", occ_csv);

  const sas::LyapunovTable& g = bundle.g_table(cfg.g_source);
  const double level = cfg.g_source == "ldm_fixed_point"
                           ? bundle.ldm_level_for_budget(bundle.budget)
                           : -std::log(bundle.budget / (mdp.c_max() * bundle.d_conc));
  const sas::InvariantSet set = sas::invariant_set(g, level);
  const std::string g_csv = sas::g_landscape_csv(mdp.width(), mdp.height(), g, set);
  write_file(out_dir / "g_landscape.csv", g_csv);
  write_file(out_dir / "resolved_config.toml", cfg.canonical_toml());

  if (svg) {
    // Deployed trajectory overlay: one aligned episode.
    sas::SasConfig sc{cfg.sas_n, cfg.sas_m, cfg.sas_k, cfg.sas_horizon, cfg.sas_seed};
    const sas::SasReport report =
        sas::run_sas(bundle.kernel, bundle.policy, bundle.energy, g, mdp.start(), sc);
    sas::RngStream rng = sas::RngStream::derive(cfg.sas_seed, 9001);
    const sas::EpisodeResult ep =
        sas::deploy(bundle.policy, report.final_prompt, mdp, mdp.start(), cfg.eval_horizon, rng);
    write_file(out_dir / "occupancy_landscape.svg",
               sas::landscape_svg_from_csv(occ_csv, "occupancy", ep.trajectory, mdp.goal(),
                                           mdp.layout().hazards));
    write_file(out_dir / "g_landscape.svg",
               sas::landscape_svg_from_csv(g_csv, "g_value", ep.trajectory, mdp.goal(),
                                           mdp.layout().hazards));
  }
  std::cout << "wrote landscape CSVs to " << out_dir.string() << "\n";
  return 0;
}

int run_bound_check(const CommonArgs& args, const std::string& model, const std::string& data,
                    const std::string& grid_flag, int runs_flag, const std::string& out) {
  sas::RunConfig cfg = load_run_config(args);
  const sas::ModelBundle bundle = sas::load_bundle(model);
  const sas::OfflineDataset dataset = sas::load_dataset(data);
  const sas::TabularMdp mdp = bundle.make_mdp();
  if (!grid_flag.empty()) {
    cfg.bound_grid.clear();
    std::istringstream is(grid_flag);
    std::string item;
    while (std::getline(is, item, ',')) cfg.bound_grid.push_back(std::stoi(item));
  }
  if (runs_flag > 0) cfg.bound_runs = runs_flag;

  const sas::LyapunovTable& g = bundle.g_table(cfg.g_source);
  const sas::BoundParams base = resolve_bound_params(cfg, bundle, dataset);
  const auto points = sas::empirical_escape(
      bundle.kernel, bundle.policy, bundle.energy, g, mdp, mdp.start(), base.c1, base.c2,
      cfg.sas_horizon, cfg.sas_k, cfg.bound_grid, cfg.bound_grid, cfg.bound_runs,
      cfg.bound_seed, args.threads);
  write_file(out, sas::bound_check_csv(points, base));

  ordered_json doc;
  doc["resolved_config"] = cfg.canonical_toml();
  doc["band"] = {{"c1", base.c1}, {"c2", base.c2}};
  doc["kappa"] = base.kappa;
  doc["l"] = base.l;
  doc["e_mean"] = base.e_mean;
  doc["runs"] = cfg.bound_runs;
  for (const auto& p : points) {
    sas::BoundParams bp = base;
    bp.n = p.n;
    bp.m = p.m;
    const sas::BoundTerms terms = sas::thm2_rhs(bp);
    doc["points"].push_back({{"n", p.n},
                             {"m", p.m},
                             {"imagined_escape", p.imagined},
                             {"deployed_escape", p.deployed},
                             {"term1", terms.term1},
                             {"term2", terms.term2},
                             {"total", terms.total}});
  }
  const fs::path sidecar = fs::path(out).replace_extension(".json");
  write_file(sidecar, doc.dump(2) + "\n");
  std::cout << "wrote bound check to " << out << " (details: " << sidecar.string() << ")\n";
  return 0;
}

int run_infer_skill(const CommonArgs& args, const std::string& model, const std::string& out) {
  const sas::RunConfig cfg = load_run_config(args);
  const sas::ModelBundle bundle = sas::load_bundle(model);
  const sas::TabularMdp mdp = bundle.make_mdp();
  const sas::SkillFamily family = sas::default_skill_family(mdp);
  const auto curve = sas::concentration_curve(family, bundle.kernel, cfg.skill_ks,
                                              cfg.skill_prompts, mdp.start(), cfg.skill_seed);
  std::ostringstream os;
  os << "K,mean_mass,std\n";
  for (const auto& pt : curve) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g\n", pt.k, pt.mean_mass, pt.std_dev);
    os << buf;
  }
  write_file(out, os.str());
  std::cout << "wrote concentration curve to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov-guided prompt alignment for tabular safe RL"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string out, data, model, out_dir, grid;
  std::optional<std::uint64_t> seed;
  bool svg = false;
  int runs = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    sub->add_option("--config", common.config_path, "run configuration file")
        ->required(needs_config);
    sub->add_option("--threads", common.threads, "worker thread count (default 1)");
  };

  auto* gen = app.add_subcommand("gen-data", "generate an offline dataset");
  add_common(gen);
  gen->add_option("--out", out, "output dataset path (JSONL)")->required();
  gen->add_option("--seed", seed, "override the dataset seed");

  auto* fit = app.add_subcommand("fit", "fit the model bundle from a dataset");
  add_common(fit);
  fit->add_option("--data", data, "input dataset path")->required();
  fit->add_option("--out", out, "output bundle path (JSON)")->required();

  auto* align = app.add_subcommand("align", "run the two-loop prompt selection");
  add_common(align);
  align->add_option("--model", model, "model bundle path")->required();
  align->add_option("--out", out, "output report path (JSON)")->required();
  align->add_option("--seed", seed, "override the alignment seed");

  auto* evaluate = app.add_subcommand("evaluate", "ablation table and metric report");
  add_common(evaluate);
  evaluate->add_option("--model", model, "model bundle path")->required();
  evaluate->add_option("--data", data, "dataset path (reward normalization bounds)")->required();
  evaluate->add_option("--out-dir", out_dir, "output directory");

  auto* landscape = app.add_subcommand("landscape", "occupancy/energy/G CSV export");
  add_common(landscape);
  landscape->add_option("--model", model, "model bundle path")->required();
  landscape->add_option("--out-dir", out_dir, "output directory");
  landscape->add_flag("--svg", svg, "also render SVG heatmaps from the CSVs");

  auto* bound = app.add_subcommand("bound-check", "escape frequencies vs. the analytic bound");
  add_common(bound);
  bound->add_option("--model", model, "model bundle path")->required();
  bound->add_option("--data", data, "dataset path (band percentiles)")->required();
  bound->add_option("--grid", grid, "comma-separated loop sizes, e.g. 1,3,5");
  bound->add_option("--runs", runs, "runs per grid point");
  bound->add_option("--out", out, "output CSV path")->required();

  auto* infer = app.add_subcommand("infer-skill", "posterior concentration over skills");
  add_common(infer);
  infer->add_option("--model", model, "model bundle path")->required();
  infer->add_option("--out", out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // bad flags are configuration errors
  }

  try {
    if (gen->parsed()) return run_gen_data(common, out, seed);
    if (fit->parsed()) return run_fit(common, data, out);
    if (align->parsed()) return run_align(common, model, out, seed);
    if (evaluate->parsed()) return run_evaluate(common, model, data, out_dir);
    if (landscape->parsed()) return run_landscape(common, model, out_dir, svg);
    if (bound->parsed()) return run_bound_check(common, model, data, grid, runs, out);
    if (infer->parsed()) return run_infer_skill(common, model, out);
  } catch (const sas::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
