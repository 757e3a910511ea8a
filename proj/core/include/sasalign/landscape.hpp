#pragma once

#include <optional>
#include <string>

#include "sasalign/dataset.hpp"
#include "sasalign/lyapunov.hpp"
#include "sasalign/occupancy.hpp"

namespace sas {

// One row per (cell, action): x,y,action,occupancy,energy.
std::string occupancy_landscape_csv(int width, int height, const OccupancyTable& occ,
                                    const EnergyTable& energy);

// One row per (cell, action): x,y,action,g_value,variant,in_invariant_set.
std::string g_landscape_csv(int width, int height, const LyapunovTable& g,
                            const InvariantSet& set);

// Static heatmap rendered from a landscape CSV (never from internal state).
// value_column selects the CSV column to average per cell over the movement
// actions; an optional deployed trajectory is overlaid as a polyline.
std::string landscape_svg_from_csv(const std::string& csv, const std::string& value_column,
                                   const std::optional<Trajectory>& overlay,
                                   StateId goal, const std::vector<StateId>& hazards);

}  // namespace sas
