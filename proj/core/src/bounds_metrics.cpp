#include "sasalign/bounds_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sasalign/parallel.hpp"

namespace sas {

void BoundParams::validate() const {
  if (!(c2 > c1) || !(c1 > 0))
    throw std::invalid_argument("bound: need c2 > c1 > 0");
  if (kappa <= 0) throw std::invalid_argument("bound: kappa must be positive");
  if (l <= 0) throw std::invalid_argument("bound: l must be positive");
  if (n < 1 || m < 1 || t < 1)
    throw std::invalid_argument("bound: n, m, t must be at least 1");
  if (e_mean <= 0) throw std::invalid_argument("bound: e_mean must be positive");
}

BoundTerms thm2_rhs(const BoundParams& p) {
  p.validate();
  BoundTerms out;
  const double ratio = p.e_mean / p.c2;
  out.vacuous_first_term = ratio >= 1.0;
  out.term1 = std::pow(ratio, static_cast<double>(p.n) * p.t);
  out.term2 =
      std::exp(-2.0 * p.m * p.kappa * p.kappa * (p.c2 - p.c1) * (p.c2 - p.c1) / (p.t * p.l * p.l));
  out.total = out.term1 + out.term2;
  return out;
}

bool trajectory_escapes_band(const Trajectory& traj, const EnergyTable& energy, double c1,
                             double c2) {
  for (int t = 0; t < traj.length(); ++t) {
    const double e = energy.at(traj.states[static_cast<std::size_t>(t)],
                               traj.actions[static_cast<std::size_t>(t)]);
    if (e < c1 || e > c2) return true;
  }
  return false;
}

std::vector<EscapeFrequency> empirical_escape(
    const LearnedKernel& kernel, const ContextPolicy& policy, const EnergyTable& energy,
    const LyapunovTable& g, const TabularMdp& mdp, StateId s1, double c1, double c2,
    int horizon, int k, std::span<const int> ns, std::span<const int> ms, int n_runs,
    std::uint64_t seed, int threads) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be at least 1");
  if (!(c2 >= c1)) throw std::invalid_argument("need c2 >= c1");

  struct Point {
    int n, m;
  };
  std::vector<Point> grid;
  for (int n : ns)
    for (int m : ms) grid.push_back({n, m});

  std::vector<EscapeFrequency> out(grid.size());
  std::vector<std::vector<char>> imagined(grid.size());
  std::vector<std::vector<char>> deployed(grid.size());
  for (auto& v : imagined) v.assign(static_cast<std::size_t>(n_runs), 0);
  for (auto& v : deployed) v.assign(static_cast<std::size_t>(n_runs), 0);

  parallel_for_index(grid.size() * static_cast<std::size_t>(n_runs), threads,
                     [&](std::size_t idx) {
                       const std::size_t gi = idx / static_cast<std::size_t>(n_runs);
                       const int run = static_cast<int>(idx % static_cast<std::size_t>(n_runs));
                       SasConfig cfg;
                       cfg.n = grid[gi].n;
                       cfg.m = grid[gi].m;
                       cfg.k = k;
                       cfg.horizon = horizon;
                       cfg.seed = RngStream::derive(seed, gi, static_cast<std::uint64_t>(run))
                                      .next_u64();
                       const SasReport report = run_sas(kernel, policy, energy, g, s1, cfg);
                       const Trajectory& best =
                           report.loop2[static_cast<std::size_t>(report.j_star)].rollout;
                       imagined[gi][static_cast<std::size_t>(run)] =
                           trajectory_escapes_band(best, energy, c1, c2) ? 1 : 0;
                       RngStream deploy_rng =
                           RngStream::derive(seed, gi, static_cast<std::uint64_t>(run), 77);
                       const EpisodeResult ep = deploy(policy, report.final_prompt, mdp, s1,
                                                       horizon, deploy_rng);
                       deployed[gi][static_cast<std::size_t>(run)] =
                           trajectory_escapes_band(ep.trajectory, energy, c1, c2) ? 1 : 0;
                     });

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    out[gi].n = grid[gi].n;
    out[gi].m = grid[gi].m;
    double im = 0, de = 0;
    for (int r = 0; r < n_runs; ++r) {
      im += imagined[gi][static_cast<std::size_t>(r)];
      de += deployed[gi][static_cast<std::size_t>(r)];
    }
    out[gi].imagined = im / n_runs;
    out[gi].deployed = de / n_runs;
  }
  return out;
}

double normalized_reward(double raw, double r_min, double r_max) {
  if (!(r_max > r_min)) throw std::domain_error("degenerate reward range: r_max must exceed r_min");
  return (raw - r_min) / (r_max - r_min);
}

double normalized_cost(double raw, double kappa_threshold, double epsilon) {
  if (kappa_threshold < 0) throw std::invalid_argument("cost threshold must be non-negative");
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  return (raw + epsilon) / (kappa_threshold + epsilon);
}

namespace {

struct Episode {
  double reward = 0;
  double cost = 0;
  bool failed = false;
};

const char* kMethods[] = {"backbone", "rand", "maxmax", "sas"};

// One deployed episode per (method, seed, episode index); identical budgets,
// only the prompt source differs.
std::vector<std::vector<Episode>> run_method_episodes(
    const TabularMdp& mdp, const OfflineDataset& dataset, const LearnedKernel& kernel,
    const ContextPolicy& policy, const EnergyTable& energy, const LyapunovTable& g,
    const AblationConfig& cfg, int threads) {
  if (cfg.seeds.empty()) throw std::invalid_argument("harness needs at least one seed");
  if (cfg.episodes_per_seed < 1)
    throw std::invalid_argument("episodes_per_seed must be at least 1");
  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t per_method = n_seeds * static_cast<std::size_t>(cfg.episodes_per_seed);
  std::vector<std::vector<Episode>> episodes(4);
  for (auto& v : episodes) v.resize(per_method);

  parallel_for_index(4 * per_method, threads, [&](std::size_t idx) {
    const std::size_t method = idx / per_method;
    const std::size_t slot = idx % per_method;
    const std::size_t seed_idx = slot / static_cast<std::size_t>(cfg.episodes_per_seed);
    const std::uint64_t ep_idx = slot % static_cast<std::size_t>(cfg.episodes_per_seed);
    const std::uint64_t seed = cfg.seeds[seed_idx];

    Prompt prompt;  // backbone: empty, source none
    if (method == 1) {
      RngStream rng = RngStream::derive(seed, 101, ep_idx);
      prompt = baseline_random_prompt(dataset, cfg.sas.k, rng);
    } else if (method == 2) {
      RngStream rng = RngStream::derive(seed, 102, ep_idx);
      prompt = baseline_maxmax(kernel, policy, energy, mdp.start(), cfg.sas.n, cfg.sas.k,
                               cfg.sas.horizon, rng);
    } else if (method == 3) {
      SasConfig sc = cfg.sas;
      sc.seed = RngStream::derive(seed, 103, ep_idx).next_u64();
      prompt = run_sas(kernel, policy, energy, g, mdp.start(), sc).final_prompt;
    }
    RngStream deploy_rng = RngStream::derive(seed, 200 + method, ep_idx);
    const EpisodeResult res =
        deploy(policy, prompt, mdp, mdp.start(), cfg.eval_horizon, deploy_rng);
    episodes[method][slot] = Episode{res.reward_return, res.cost_return, res.failed};
  });
  return episodes;
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  const double mu = mean_of(xs);
  double acc = 0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

std::vector<AblationRow> ablation_harness(const TabularMdp& mdp, const OfflineDataset& dataset,
                                          const LearnedKernel& kernel,
                                          const ContextPolicy& policy,
                                          const EnergyTable& energy, const LyapunovTable& g,
                                          const AblationConfig& cfg, int threads) {
  if (cfg.cost_thresholds.empty())
    throw std::invalid_argument("harness needs at least one cost threshold");
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = -std::numeric_limits<double>::infinity();
  for (const auto& t : dataset.trajectories) {
    r_min = std::min(r_min, t.reward_return());
    r_max = std::max(r_max, t.reward_return());
  }
  const auto episodes =
      run_method_episodes(mdp, dataset, kernel, policy, energy, g, cfg, threads);

  std::vector<AblationRow> rows;
  for (std::size_t method = 0; method < 4; ++method) {
    std::vector<double> rewards, costs, failures;
    for (const auto& ep : episodes[method]) {
      for (double kappa : cfg.cost_thresholds) {
        rewards.push_back(normalized_reward(ep.reward, r_min, r_max));
        costs.push_back(normalized_cost(ep.cost, kappa, cfg.epsilon));
        failures.push_back(ep.failed ? 1.0 : 0.0);
      }
    }
    AblationRow row;
    row.method = kMethods[method];
    row.reward_mean = mean_of(rewards);
    row.reward_std = std_of(rewards);
    row.cost_mean = mean_of(costs);
    row.cost_std = std_of(costs);
    row.failure_mean = mean_of(failures);
    row.failure_std = std_of(failures);
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::pair<std::string, MetricReport>> metric_reports(
    const TabularMdp& mdp, const OfflineDataset& dataset, const LearnedKernel& kernel,
    const ContextPolicy& policy, const EnergyTable& energy, const LyapunovTable& g,
    const AblationConfig& cfg, int threads) {
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = -std::numeric_limits<double>::infinity();
  for (const auto& t : dataset.trajectories) {
    r_min = std::min(r_min, t.reward_return());
    r_max = std::max(r_max, t.reward_return());
  }
  const auto episodes =
      run_method_episodes(mdp, dataset, kernel, policy, energy, g, cfg, threads);

  std::vector<std::pair<std::string, MetricReport>> out;
  for (std::size_t method = 0; method < 4; ++method) {
    MetricReport rep;
    rep.episodes = static_cast<int>(episodes[method].size());
    double nr = 0, nc = 0, fail = 0, rr = 0, rc = 0;
    for (const auto& ep : episodes[method]) {
      rr += ep.reward;
      rc += ep.cost;
      fail += ep.failed ? 1.0 : 0.0;
      nr += normalized_reward(ep.reward, r_min, r_max);
      double c = 0;
      for (double kappa : cfg.cost_thresholds) c += normalized_cost(ep.cost, kappa, cfg.epsilon);
      nc += c / static_cast<double>(cfg.cost_thresholds.size());
    }
    const double n = static_cast<double>(rep.episodes);
    rep.normalized_reward = nr / n;
    rep.normalized_cost = nc / n;
    rep.failure_rate = fail / n;
    rep.raw_reward_mean = rr / n;
    rep.raw_cost_mean = rc / n;
    out.emplace_back(kMethods[method], rep);
  }
  return out;
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (pct < 0 || pct > 100) throw std::invalid_argument("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

PercentileRegions percentile_regions(const LyapunovTable& g, double low_pct, double high_pct) {
  if (!(low_pct < high_pct)) throw std::invalid_argument("need low_pct < high_pct");
  std::vector<double> avg(static_cast<std::size_t>(g.num_states), 0.0);
  for (StateId s = 0; s < g.num_states; ++s) {
    double sum = 0;
    for (int a = 0; a < 4; ++a) sum += g.at(s, a);
    avg[static_cast<std::size_t>(s)] = sum / 4.0;
  }
  PercentileRegions regions;
  regions.low_value = nearest_rank_percentile(avg, low_pct);
  regions.high_value = nearest_rank_percentile(avg, high_pct);
  for (StateId s = 0; s < g.num_states; ++s) {
    if (avg[static_cast<std::size_t>(s)] > regions.high_value) regions.invalid.push_back(s);
    if (avg[static_cast<std::size_t>(s)] < regions.low_value) regions.roa.push_back(s);
  }
  return regions;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream os;
  os << "method,reward_mean,reward_std,cost_mean,cost_std,failure_mean,failure_std\n";
  for (const auto& r : rows)
    os << r.method << ',' << fmt(r.reward_mean) << ',' << fmt(r.reward_std) << ','
       << fmt(r.cost_mean) << ',' << fmt(r.cost_std) << ',' << fmt(r.failure_mean) << ','
       << fmt(r.failure_std) << '\n';
  return os.str();
}

std::string bound_check_csv(std::span<const EscapeFrequency> points, const BoundParams& base) {
  std::ostringstream os;
  os << "n,m,empirical,term1,term2,total\n";
  for (const auto& p : points) {
    BoundParams params = base;
    params.n = p.n;
    params.m = p.m;
    const BoundTerms terms = thm2_rhs(params);
    os << p.n << ',' << p.m << ',' << fmt(p.imagined) << ',' << fmt(terms.term1) << ','
       << fmt(terms.term2) << ',' << fmt(terms.total) << '\n';
  }
  return os.str();
}

}  // namespace sas
