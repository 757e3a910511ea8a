#include "sasalign/skill_inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sas {

void SkillFamily::validate() const {
  if (skills.empty()) throw std::invalid_argument("skill family is empty");
  if (prior.size() != skills.size())
    throw std::invalid_argument("prior size does not match skill count");
  double total = 0;
  for (double p : prior) {
    if (p < 0) throw std::invalid_argument("prior has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("prior does not sum to 1");
  if (true_index < 0 || true_index >= static_cast<int>(skills.size()))
    throw std::invalid_argument("true_index out of range");
}

double prompt_log_likelihood(const Prompt& prompt, const Skill& skill,
                             const LearnedKernel& kernel) {
  if (prompt.empty()) throw std::invalid_argument("prompt must be non-empty");
  double total = 0;
  for (int t = 0; t < prompt.length(); ++t) {
    const auto [s, a] = prompt.pairs[static_cast<std::size_t>(t)];
    const double pa = skill.policy.prob(s, a);
    if (pa <= 0) return kLogZero;
    total += std::log(pa);
    if (t + 1 < prompt.length()) {
      const StateId next = prompt.pairs[static_cast<std::size_t>(t) + 1].first;
      const double ps = kernel.prob(s, a, next);
      if (ps <= 0) return kLogZero;
      total += std::log(ps);
    }
  }
  return total;
}

double r_k(const Prompt& prompt, const Skill& skill, const Skill& skill_star,
           const LearnedKernel& kernel) {
  const double ll = prompt_log_likelihood(prompt, skill, kernel);
  if (ll <= kLogZero) return kLogZero;
  if (&skill == &skill_star || skill.policy.rows == skill_star.policy.rows) return 0.0;
  const double ll_star = prompt_log_likelihood(prompt, skill_star, kernel);
  return (ll - ll_star) / prompt.length();
}

std::vector<double> posterior(const Prompt& prompt, const SkillFamily& family,
                              const LearnedKernel& kernel) {
  family.validate();
  if (prompt.empty()) return family.prior;  // e^0 weights: posterior equals prior
  const Skill& star = family.skills[static_cast<std::size_t>(family.true_index)];
  const double K = prompt.length();
  std::vector<double> log_w(family.skills.size(), kLogZero);
  double max_log = kLogZero;
  for (std::size_t i = 0; i < family.skills.size(); ++i) {
    if (family.prior[i] <= 0) continue;
    const double r = r_k(prompt, family.skills[i], star, kernel);
    if (r <= kLogZero) continue;
    log_w[i] = K * r + std::log(family.prior[i]);
    max_log = std::max(max_log, log_w[i]);
  }
  if (max_log <= kLogZero)
    throw std::domain_error("prompt is impossible under every skill in the family");
  std::vector<double> w(family.skills.size(), 0.0);
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (log_w[i] <= kLogZero) continue;
    w[i] = std::exp(log_w[i] - max_log);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

Prompt sample_skill_prompt(const Skill& skill, const LearnedKernel& kernel, StateId s1, int k,
                           RngStream& rng) {
  if (k < 1) throw std::invalid_argument("prompt length must be at least 1");
  Prompt p;
  p.source = PromptSource::kNone;
  StateId s = s1;
  for (int t = 0; t < k; ++t) {
    const int a = rng.discrete(skill.policy.row(s));
    p.pairs.emplace_back(s, a);
    s = rng.discrete(kernel.row(s, a));
  }
  return p;
}

std::vector<ConcentrationPoint> concentration_curve(const SkillFamily& family,
                                                    const LearnedKernel& kernel,
                                                    std::span<const int> ks, int n_prompts,
                                                    StateId s1, std::uint64_t seed) {
  family.validate();
  if (n_prompts < 1) throw std::invalid_argument("need at least one prompt");
  if (!std::is_sorted(ks.begin(), ks.end()))
    throw std::invalid_argument("K values must be sorted ascending");
  const Skill& star = family.skills[static_cast<std::size_t>(family.true_index)];
  std::vector<ConcentrationPoint> curve;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const int k = ks[ki];
    double sum = 0, sum_sq = 0;
    for (int i = 0; i < n_prompts; ++i) {
      RngStream rng = RngStream::derive(seed, ki, static_cast<std::uint64_t>(i));
      const Prompt prompt = sample_skill_prompt(star, kernel, s1, k, rng);
      const double mass =
          posterior(prompt, family, kernel)[static_cast<std::size_t>(family.true_index)];
      sum += mass;
      sum_sq += mass * mass;
    }
    ConcentrationPoint pt;
    pt.k = k;
    pt.mean_mass = sum / n_prompts;
    const double var = std::max(0.0, sum_sq / n_prompts - pt.mean_mass * pt.mean_mass);
    pt.std_dev = std::sqrt(var);
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace sas

#include "sasalign/skill_family.hpp"

namespace sas {

SkillFamily default_skill_family(const TabularMdp& mdp, double epsilon) {
  SkillFamily family;
  family.skills.push_back({"safe", shortest_safe_path_policy(mdp, epsilon)});
  const StateId detour = mdp.layout().hazards.empty()
                             ? (mdp.num_states() - 1 == mdp.goal() ? 0 : mdp.num_states() - 1)
                             : mdp.layout().hazards.front();
  family.skills.push_back({"hazard", route_via_policy(mdp, detour, epsilon)});
  family.skills.push_back({"random", uniform_policy(mdp.num_states())});
  family.prior = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  family.true_index = 0;
  return family;
}

}  // namespace sas
