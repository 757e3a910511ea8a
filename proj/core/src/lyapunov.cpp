#include "sasalign/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sasalign/errors.hpp"

namespace sas {

const char* g_variant_name(GVariant v) {
  return v == GVariant::kLiteralEq6 ? "literal_eq6" : "ldm_fixed_point";
}

GVariant g_variant_from_name(const std::string& name) {
  if (name == "literal_eq6") return GVariant::kLiteralEq6;
  if (name == "ldm_fixed_point") return GVariant::kLdmFixedPoint;
  throw ParseError("unknown G variant \"" + name + "\"");
}

int InvariantSet::size() const {
  int n = 0;
  for (char m : members) n += m != 0;
  return n;
}

std::vector<double> ldm_backup(std::span<const double> g, const EnergyTable& energy,
                               const DenseKernel& kernel, double gamma) {
  const int n = kernel.num_states;
  std::vector<double> min_g(static_cast<std::size_t>(n),
                            std::numeric_limits<double>::infinity());
  for (StateId s = 0; s < n; ++s)
    for (int a = 0; a < kNumActions; ++a)
      min_g[static_cast<std::size_t>(s)] = std::min(
          min_g[static_cast<std::size_t>(s)], g[static_cast<std::size_t>(s) * kNumActions + a]);

  std::vector<double> out(g.size());
  for (StateId s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const auto row = kernel.row(s, a);
      double expect = 0;
      for (StateId sp = 0; sp < n; ++sp) {
        const double p = row[static_cast<std::size_t>(sp)];
        if (p > 0) expect += p * min_g[static_cast<std::size_t>(sp)];
      }
      const std::size_t i = static_cast<std::size_t>(s) * kNumActions + a;
      out[i] = std::max(energy.values[i], gamma * expect);
    }
  }
  return out;
}

LyapunovTable ldm_fixed_point(const EnergyTable& energy, const DenseKernel& kernel,
                              double gamma, double tol, int max_iters) {
  if (gamma <= 0 || gamma >= 1) throw std::invalid_argument("gamma must lie in (0,1)");
  if (tol <= 0) throw std::invalid_argument("tol must be positive");
  for (double e : energy.values)
    if (!std::isfinite(e)) throw std::invalid_argument("energy table has non-finite entries");

  LyapunovTable g;
  g.variant = GVariant::kLdmFixedPoint;
  g.num_states = kernel.num_states;
  g.values = energy.values;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> next = ldm_backup(g.values, energy, kernel, gamma);
    residual = 0;
    for (std::size_t i = 0; i < next.size(); ++i)
      residual = std::max(residual, std::abs(next[i] - g.values[i]));
    g.values = std::move(next);
    if (residual < tol) return g;
  }
  throw NumericalError("LDM fixed point did not converge after " + std::to_string(max_iters) +
                       " iterations; residual " + std::to_string(residual));
}

LyapunovTable ldm_backward_induction(const EnergyTable& energy, const DenseKernel& kernel,
                                     double gamma, int horizon) {
  LyapunovTable g;
  g.variant = GVariant::kLdmFixedPoint;
  g.num_states = kernel.num_states;
  g.values = energy.values;
  for (int h = 0; h < horizon; ++h) g.values = ldm_backup(g.values, energy, kernel, gamma);
  return g;
}

std::vector<double> minimax_energy_to_go(const EnergyTable& energy, const DenseKernel& kernel,
                                         int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const int n = kernel.num_states;
  // W_1(s) = min_a E(s,a); W_h(s) = min_a max(E(s,a), max_{s' in supp} W_{h-1}(s')).
  std::vector<double> w(static_cast<std::size_t>(n));
  for (StateId s = 0; s < n; ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumActions; ++a) best = std::min(best, energy.at(s, a));
    w[static_cast<std::size_t>(s)] = best;
  }
  std::vector<double> next(static_cast<std::size_t>(n));
  for (int h = 2; h <= horizon; ++h) {
    for (StateId s = 0; s < n; ++s) {
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < kNumActions; ++a) {
        double worst_future = -std::numeric_limits<double>::infinity();
        const auto row = kernel.row(s, a);
        for (StateId sp = 0; sp < n; ++sp)
          if (row[static_cast<std::size_t>(sp)] > 0)
            worst_future = std::max(worst_future, w[static_cast<std::size_t>(sp)]);
        best = std::min(best, std::max(energy.at(s, a), worst_future));
      }
      next[static_cast<std::size_t>(s)] = best;
    }
    w.swap(next);
  }
  return w;
}

LyapunovTable g_sas_exact(const EnergyTable& energy, const DenseKernel& kernel,
                          std::span<const StateId> starts, int horizon) {
  if (starts.empty()) throw std::invalid_argument("start set must not be empty");
  const std::vector<double> w = minimax_energy_to_go(energy, kernel, horizon);
  double baseline = -std::numeric_limits<double>::infinity();
  for (StateId s : starts) {
    if (s < 0 || s >= kernel.num_states) throw std::invalid_argument("start state out of range");
    baseline = std::max(baseline, w[static_cast<std::size_t>(s)]);
  }
  LyapunovTable g;
  g.variant = GVariant::kLiteralEq6;
  g.baseline = baseline;
  g.num_states = kernel.num_states;
  g.values.resize(energy.values.size());
  for (std::size_t i = 0; i < energy.values.size(); ++i)
    g.values[i] = baseline - energy.values[i];
  return g;
}

double max_step_energy(const Trajectory& traj, const EnergyTable& energy) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < traj.length(); ++t)
    worst = std::max(worst, energy.at(traj.states[static_cast<std::size_t>(t)],
                                      traj.actions[static_cast<std::size_t>(t)]));
  return worst;
}

double g_sas_sampled(const EnergyTable& energy,
                     const std::function<Trajectory(int)>& sampler, int n_rollouts) {
  if (n_rollouts < 1) throw std::invalid_argument("need at least one rollout");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_rollouts; ++i)
    best = std::min(best, max_step_energy(sampler(i), energy));
  return best;
}

InvariantSet invariant_set(const LyapunovTable& g, double level) {
  InvariantSet set;
  set.level = level;
  set.members.resize(g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i)
    set.members[i] = g.values[i] <= level ? 1 : 0;
  return set;
}

DensePolicy greedy_policy(const LyapunovTable& g) {
  if (g.variant != GVariant::kLdmFixedPoint)
    throw std::invalid_argument("greedy policy requires the ldm_fixed_point variant");
  DensePolicy pi;
  pi.num_states = g.num_states;
  pi.rows.assign(static_cast<std::size_t>(g.num_states) * kNumActions, 0.0);
  for (StateId s = 0; s < g.num_states; ++s) {
    int best = 0;
    for (int a = 1; a < kNumActions; ++a)
      if (g.at(s, a) < g.at(s, best)) best = a;  // strict keeps the lowest id on ties
    pi.rows[static_cast<std::size_t>(s) * kNumActions + best] = 1.0;
  }
  return pi;
}

ObservableSequence observables(const Trajectory& traj, const LyapunovTable& g) {
  if (traj.length() < 2) throw std::invalid_argument("trajectory must have at least 2 steps");
  ObservableSequence obs;
  const int T = traj.length();
  obs.u.resize(static_cast<std::size_t>(T));
  obs.v.resize(static_cast<std::size_t>(T) - 1);
  auto g_at = [&](int t) {
    const StateId s = traj.states[static_cast<std::size_t>(t)];
    const int a = traj.actions[static_cast<std::size_t>(t)];
    if (s < 0 || s >= g.num_states || a < 0 || a >= kNumActions)
      throw std::out_of_range("trajectory pair outside the G table support");
    return g.at(s, a);
  };
  for (int t = 0; t < T; ++t) obs.u[static_cast<std::size_t>(t)] = g_at(t) > 0;
  for (int t = 0; t + 1 < T; ++t)
    obs.v[static_cast<std::size_t>(t)] = g_at(t) - g_at(t + 1) >= 0;
  return obs;
}

double trajectory_score(const ObservableSequence& obs) {
  if (obs.u.empty()) return 0;
  double total = 0;
  for (bool b : obs.u) total += b ? 1 : 0;
  for (bool b : obs.v) total += b ? 1 : 0;
  return total / static_cast<double>(obs.u.size());
}

}  // namespace sas
