#include "sasalign/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "sasalign/errors.hpp"

namespace sas {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(line);
  while (std::getline(is, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

std::string occupancy_landscape_csv(int width, int height, const OccupancyTable& occ,
                                    const EnergyTable& energy) {
  std::ostringstream os;
  os << "x,y,action,occupancy,energy\n";
  for (StateId s = 0; s < width * height; ++s)
    for (int a = 0; a < kNumActions; ++a)
      os << s % width << ',' << s / width << ',' << action_name(a) << ',' << fmt(occ.at(s, a))
         << ',' << fmt(energy.at(s, a)) << '\n';
  return os.str();
}

std::string g_landscape_csv(int width, int height, const LyapunovTable& g,
                            const InvariantSet& set) {
  std::ostringstream os;
  os << "x,y,action,g_value,variant,in_invariant_set\n";
  for (StateId s = 0; s < width * height; ++s)
    for (int a = 0; a < kNumActions; ++a)
      os << s % width << ',' << s / width << ',' << action_name(a) << ',' << fmt(g.at(s, a))
         << ',' << g_variant_name(g.variant) << ',' << (set.contains(s, a) ? 1 : 0) << '\n';
  return os.str();
}

std::string landscape_svg_from_csv(const std::string& csv, const std::string& value_column,
                                   const std::optional<Trajectory>& overlay,
                                   StateId goal, const std::vector<StateId>& hazards) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("landscape csv is empty");
  const auto header = split_csv_line(line);
  int value_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == value_column) value_idx = static_cast<int>(i);
  if (value_idx < 0) throw ParseError("landscape csv has no column \"" + value_column + "\"");

  // Per-cell mean over the movement actions.
  std::map<std::pair<int, int>, std::pair<double, int>> cells;
  int width = 0, height = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw ParseError("landscape csv has a ragged row");
    const int x = std::stoi(fields[0]);
    const int y = std::stoi(fields[1]);
    width = std::max(width, x + 1);
    height = std::max(height, y + 1);
    if (fields[2] == "stay") continue;
    auto& acc = cells[{x, y}];
    acc.first += std::stod(fields[static_cast<std::size_t>(value_idx)]);
    acc.second += 1;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (auto& [xy, acc] : cells) {
    acc.first /= std::max(1, acc.second);
    lo = std::min(lo, acc.first);
    hi = std::max(hi, acc.first);
  }
  const double range = hi > lo ? hi - lo : 1.0;

  const int cell = 40;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width * cell << "\" height=\""
      << height * cell << "\">\n";
  for (const auto& [xy, acc] : cells) {
    const double t = (acc.first - lo) / range;
    const int shade = static_cast<int>(std::lround(255 * (1.0 - t)));
    svg << "<rect x=\"" << xy.first * cell << "\" y=\"" << xy.second * cell << "\" width=\""
        << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << ',' << shade
        << ",255)\" stroke=\"#888\"/>\n";
  }
  auto cell_center = [&](StateId s) {
    return std::pair<int, int>{(s % width) * cell + cell / 2, (s / width) * cell + cell / 2};
  };
  for (StateId h : hazards) {
    const auto [cx, cy] = cell_center(h);
    svg << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << cell / 4
        << "\" fill=\"none\" stroke=\"red\" stroke-width=\"3\"/>\n";
  }
  {
    const auto [cx, cy] = cell_center(goal);
    svg << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << cell / 4
        << "\" fill=\"green\"/>\n";
  }
  if (overlay.has_value() && !overlay->states.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"magenta\" stroke-width=\"3\" points=\"";
    for (StateId s : overlay->states) {
      const auto [cx, cy] = cell_center(s);
      svg << cx << ',' << cy << ' ';
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace sas
