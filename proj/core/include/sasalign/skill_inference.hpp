#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sasalign/policies.hpp"
#include "sasalign/world_model.hpp"

namespace sas {

// Log-probabilities of impossible events are clamped to this sentinel so the
// posterior can zero them out without NaN propagation.
inline constexpr double kLogZero = -1e18;

struct Skill {
  std::string name;
  DensePolicy policy;
};

// Finite family of candidate high-level policies with a prior and a
// designated generating skill.
struct SkillFamily {
  std::vector<Skill> skills;
  std::vector<double> prior;
  int true_index = 0;

  void validate() const;  // prior sums to 1, sizes agree
};

// log p(prompt | theta) = sum_t log pi_theta(a_t|s_t) + sum_{t<K} log
// P(s_{t+1}|s_t,a_t). Zero-probability steps yield kLogZero.
double prompt_log_likelihood(const Prompt& prompt, const Skill& skill,
                             const LearnedKernel& kernel);

// (1/K) * [log p(prompt|theta) - log p(prompt|theta_star)]. Identically 0
// for theta = theta_star; kLogZero when the prompt is impossible under theta.
double r_k(const Prompt& prompt, const Skill& skill, const Skill& skill_star,
           const LearnedKernel& kernel);

// Posterior over skills with weights exp(K * r_K(theta)) * prior(theta),
// normalized via log-sum-exp. An empty prompt returns the prior. Throws
// std::domain_error if the prompt is impossible under every skill.
std::vector<double> posterior(const Prompt& prompt, const SkillFamily& family,
                              const LearnedKernel& kernel);

struct ConcentrationPoint {
  int k = 0;
  double mean_mass = 0;  // mean posterior mass on the generating skill
  double std_dev = 0;
};

// For each K, samples n_prompts K-step prompts from the generating skill
// under the learned kernel (starting at s1) and averages the posterior mass
// on that skill. ks must be sorted ascending.
std::vector<ConcentrationPoint> concentration_curve(const SkillFamily& family,
                                                    const LearnedKernel& kernel,
                                                    std::span<const int> ks, int n_prompts,
                                                    StateId s1, std::uint64_t seed);

// K-step rollout of a Markov skill under the learned kernel, packaged as a
// prompt.
Prompt sample_skill_prompt(const Skill& skill, const LearnedKernel& kernel, StateId s1, int k,
                           RngStream& rng);

}  // namespace sas
