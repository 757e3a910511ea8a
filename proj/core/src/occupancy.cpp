#include "sasalign/occupancy.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sas {

void DenseKernel::validate(double tol) const {
  for (StateId s = 0; s < num_states; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      double total = 0;
      for (double p : row(s, a)) {
        if (p < 0) throw std::invalid_argument("kernel row has a negative entry");
        total += p;
      }
      if (std::abs(total - 1.0) > tol)
        throw std::invalid_argument("kernel row does not sum to 1");
    }
  }
}

DenseKernel true_kernel(const TabularMdp& mdp) {
  DenseKernel k;
  k.num_states = mdp.num_states();
  k.probs.resize(static_cast<std::size_t>(k.num_states) * kNumActions * k.num_states);
  for (StateId s = 0; s < k.num_states; ++s)
    for (int a = 0; a < kNumActions; ++a) {
      const auto row = mdp.kernel_row(s, a);
      std::copy(row.begin(), row.end(),
                k.probs.begin() + (static_cast<std::size_t>(s) * kNumActions + a) *
                                      static_cast<std::size_t>(k.num_states));
    }
  k.p1.assign(static_cast<std::size_t>(k.num_states), 0.0);
  k.p1[static_cast<std::size_t>(mdp.start())] = 1.0;
  return k;
}

double OccupancyTable::total() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

OccupancyTable OccupancyTable::normalized() const {
  OccupancyTable out = *this;
  const double mass = total();
  if (mass <= 0) throw std::invalid_argument("cannot normalize an all-zero occupancy table");
  for (double& v : out.values) v /= mass;
  out.normalization = Normalization::kNormalized;
  return out;
}

int FeasibleRegion::size() const {
  int n = 0;
  for (char m : members) n += m != 0;
  return n;
}

OccupancyTable exact_occupancy(const DenseKernel& kernel, const DensePolicy& policy,
                               double gamma, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (gamma <= 0 || gamma >= 1) throw std::invalid_argument("gamma must lie in (0,1)");
  policy.validate(1e-9);
  const int n = kernel.num_states;
  if (policy.num_states != n) throw std::invalid_argument("policy/kernel state-count mismatch");

  OccupancyTable occ;
  occ.num_states = n;
  occ.gamma = gamma;
  occ.horizon = horizon;
  occ.values.assign(static_cast<std::size_t>(n) * kNumActions, 0.0);

  std::vector<double> state_dist = kernel.p1;
  std::vector<double> next(static_cast<std::size_t>(n));
  double discount = 1.0;
  for (int t = 1; t <= horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId s = 0; s < n; ++s) {
      const double ps = state_dist[static_cast<std::size_t>(s)];
      if (ps == 0) continue;
      for (int a = 0; a < kNumActions; ++a) {
        const double q = ps * policy.prob(s, a);
        if (q == 0) continue;
        occ.values[static_cast<std::size_t>(s) * kNumActions + a] += discount * q;
        const auto row = kernel.row(s, a);
        for (StateId sp = 0; sp < n; ++sp) next[static_cast<std::size_t>(sp)] += q * row[static_cast<std::size_t>(sp)];
      }
    }
    state_dist.swap(next);
    discount *= gamma;
  }
  return occ;
}

OccupancyTable empirical_occupancy(std::span<const Trajectory> rollouts, double gamma,
                                   double smoothing_epsilon, int num_states) {
  if (rollouts.empty()) throw std::invalid_argument("empty rollout list");
  const int horizon = rollouts.front().length();
  for (const auto& r : rollouts)
    if (r.length() != horizon)
      throw std::invalid_argument("rollouts must share a common horizon");

  OccupancyTable occ;
  occ.num_states = num_states;
  occ.gamma = gamma;
  occ.horizon = horizon;
  occ.values.assign(static_cast<std::size_t>(num_states) * kNumActions, 0.0);
  for (const auto& r : rollouts) {
    double discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      occ.values[static_cast<std::size_t>(r.states[static_cast<std::size_t>(t)]) * kNumActions +
                 r.actions[static_cast<std::size_t>(t)]] += discount;
      discount *= gamma;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(rollouts.size());
  for (double& v : occ.values) v = v * inv_n + smoothing_epsilon;
  return occ;
}

EnergyTable energy(const OccupancyTable& occ) {
  EnergyTable e;
  e.num_states = occ.num_states;
  e.values.resize(occ.values.size());
  for (std::size_t i = 0; i < occ.values.size(); ++i) {
    if (occ.values[i] <= 0)
      throw std::domain_error(
          "occupancy has a zero entry; smooth the table (smoothing_epsilon > 0) before "
          "taking energies");
    e.values[i] = -std::log(occ.values[i]);
  }
  return e;
}

double concentrability(const OccupancyTable& target_occ, const OccupancyTable& data_occ) {
  if (target_occ.values.size() != data_occ.values.size() ||
      target_occ.num_states != data_occ.num_states)
    throw std::invalid_argument("occupancy tables cover different supports");
  const OccupancyTable target = target_occ.normalized();
  const OccupancyTable data = data_occ.normalized();
  double worst = 1.0;
  for (std::size_t i = 0; i < target.values.size(); ++i) {
    if (data.values[i] <= 0) {
      if (target.values[i] > 0)
        throw std::invalid_argument("data occupancy must be positive wherever target is");
      continue;
    }
    worst = std::max(worst, target.values[i] / data.values[i]);
  }
  return worst;
}

FeasibleRegion feasible_region(const OccupancyTable& occ, double d, double c_max,
                               double d_conc) {
  if (d <= 0) throw std::invalid_argument("budget d must be positive");
  if (c_max <= 0) throw std::invalid_argument("c_max must be positive");
  if (d_conc < 1) throw std::invalid_argument("concentrability must be at least 1");
  FeasibleRegion region;
  region.threshold = d / (c_max * d_conc);
  region.members.resize(occ.values.size());
  for (std::size_t i = 0; i < occ.values.size(); ++i)
    region.members[i] = occ.values[i] >= region.threshold ? 1 : 0;
  return region;
}

CmdpSufficiency verify_cmdp_sufficiency(const TabularMdp& mdp, const DensePolicy& policy,
                                        const OccupancyTable& occ, double d) {
  if (d <= 0) throw std::invalid_argument("budget d must be positive");
  policy.validate(1e-9);
  CmdpSufficiency out;
  out.cost_threshold = d * (1.0 - occ.gamma);
  const double density_cap = d / mdp.c_max();
  out.antecedent = true;
  out.j_c = 0;
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const double c = mdp.cost(s, a);
      const double rho = occ.at(s, a);
      out.j_c += rho * c;
      if (c >= out.cost_threshold && c > 0 && rho > density_cap) out.antecedent = false;
    }
  }
  out.conclusion = out.j_c <= d;
  out.holds = !out.antecedent || out.conclusion;
  out.margin = d - out.j_c;
  return out;
}

std::vector<double> action_averaged_occupancy(const OccupancyTable& occ) {
  std::vector<double> out(static_cast<std::size_t>(occ.num_states), 0.0);
  for (StateId s = 0; s < occ.num_states; ++s) {
    double sum = 0;
    for (int a = 0; a < 4; ++a) sum += occ.at(s, a);
    out[static_cast<std::size_t>(s)] = sum / 4.0;
  }
  return out;
}

}  // namespace sas
