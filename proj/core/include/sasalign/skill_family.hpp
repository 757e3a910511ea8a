#pragma once

#include "sasalign/grid.hpp"
#include "sasalign/skill_inference.hpp"

namespace sas {

// Three mutually distinguishable behavior skills on a layout: the safe
// shortest-path routine (the generating skill), a route forced through the
// first hazard cell, and a uniform random walk.
SkillFamily default_skill_family(const TabularMdp& mdp, double epsilon = 0.1);

}  // namespace sas
