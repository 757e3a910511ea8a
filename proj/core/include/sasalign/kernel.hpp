#pragma once

#include <span>
#include <vector>

#include "sasalign/grid.hpp"

namespace sas {

// Explicit transition matrix plus initial-state distribution, the common
// currency of the dynamic-programming oracles. Rows are indexed
// [(s * kNumActions + a) * num_states + s'].
struct DenseKernel {
  int num_states = 0;
  std::vector<double> probs;
  std::vector<double> p1;

  std::span<const double> row(StateId s, int a) const {
    return {probs.data() + (static_cast<std::size_t>(s) * kNumActions + a) *
                               static_cast<std::size_t>(num_states),
            static_cast<std::size_t>(num_states)};
  }
  double prob(StateId s, int a, StateId next) const { return row(s, a)[static_cast<std::size_t>(next)]; }

  // Throws std::invalid_argument if any row fails to be a distribution.
  void validate(double tol = 1e-12) const;
};

// The environment's exact kernel with p1 concentrated on the start cell.
DenseKernel true_kernel(const TabularMdp& mdp);

}  // namespace sas
