#include "sasalign/policies.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "sasalign/errors.hpp"

namespace sas {

void DensePolicy::validate(double tol) const {
  if (static_cast<int>(rows.size()) != num_states * kNumActions)
    throw std::invalid_argument("policy table has wrong size");
  for (StateId s = 0; s < num_states; ++s) {
    double total = 0;
    for (int a = 0; a < kNumActions; ++a) {
      const double p = prob(s, a);
      if (p < 0) throw std::invalid_argument("policy row has a negative entry");
      total += p;
    }
    if (std::abs(total - 1.0) > tol)
      throw std::invalid_argument("policy row for state " + std::to_string(s) +
                                  " does not sum to 1");
  }
}

DensePolicy uniform_policy(int num_states) {
  DensePolicy pi;
  pi.num_states = num_states;
  pi.rows.assign(static_cast<std::size_t>(num_states) * kNumActions, 1.0 / kNumActions);
  return pi;
}

namespace {

// Dijkstra from the goal over the 4-neighbour grid graph. Edge weight equals
// the entry cost of the destination cell: hazard_weight for hazards, 1
// otherwise. Walls are absent, so every cell is reachable.
std::vector<double> distance_to_goal(const TabularMdp& mdp, double hazard_weight) {
  const int n = mdp.num_states();
  std::vector<double> dist(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
  using Item = std::pair<double, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[static_cast<std::size_t>(mdp.goal())] = 0.0;
  heap.emplace(0.0, mdp.goal());
  while (!heap.empty()) {
    const auto [d, s] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(s)]) continue;
    for (int a = 0; a < 4; ++a) {  // movement actions only
      // Walk the grid graph backwards; moves are symmetric so scanning
      // neighbours of s via intended moves from s is equivalent.
      const int x = mdp.x_of(s);
      const int y = mdp.y_of(s);
      int nx = x, ny = y;
      switch (a) {
        case kPosX: nx = x + 1; break;
        case kNegX: nx = x - 1; break;
        case kPosY: ny = y + 1; break;
        case kNegY: ny = y - 1; break;
      }
      if (nx < 0 || nx >= mdp.width() || ny < 0 || ny >= mdp.height()) continue;
      const StateId t = mdp.state_at(nx, ny);
      const double w = mdp.is_hazard(s) ? hazard_weight : 1.0;  // cost of entering s from t
      if (dist[static_cast<std::size_t>(t)] > d + w) {
        dist[static_cast<std::size_t>(t)] = d + w;
        heap.emplace(d + w, t);
      }
    }
  }
  return dist;
}

DensePolicy greedy_route_policy(const TabularMdp& mdp, const std::vector<double>& dist,
                                double epsilon, double hazard_weight) {
  const int n = mdp.num_states();
  DensePolicy pi;
  pi.num_states = n;
  pi.rows.assign(static_cast<std::size_t>(n) * kNumActions, 0.0);
  for (StateId s = 0; s < n; ++s) {
    int best = kStay;
    if (s != mdp.goal()) {
      double best_val = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 4; ++a) {
        const StateId t = mdp.intended_next(s, a);
        if (t == s) continue;  // wall
        const double entry = mdp.is_hazard(t) ? hazard_weight : 1.0;
        const double val = entry + dist[static_cast<std::size_t>(t)];
        if (val < best_val) {  // strict keeps the lowest action id on ties
          best_val = val;
          best = a;
        }
      }
    }
    for (int a = 0; a < kNumActions; ++a)
      pi.rows[static_cast<std::size_t>(s) * kNumActions + a] =
          epsilon / kNumActions + (a == best ? 1.0 - epsilon : 0.0);
  }
  return pi;
}

}  // namespace

std::vector<double> safe_distance_field(const TabularMdp& mdp, double hazard_weight) {
  return distance_to_goal(mdp, hazard_weight);
}

DensePolicy shortest_safe_path_policy(const TabularMdp& mdp, double epsilon,
                                      double hazard_weight) {
  const auto dist = distance_to_goal(mdp, hazard_weight);
  return greedy_route_policy(mdp, dist, epsilon, hazard_weight);
}

DensePolicy route_via_policy(const TabularMdp& mdp, StateId waypoint, double epsilon) {
  if (!mdp.in_grid(waypoint)) throw std::invalid_argument("waypoint out of grid");
  // Head for the waypoint first, then for the goal, ignoring hazards. The
  // waypoint leg reuses the goal-routing machinery on a temporary layout.
  LayoutConfig leg = mdp.layout();
  leg.goal = waypoint;
  leg.hazards.clear();
  const TabularMdp to_waypoint(leg);
  const auto dist_waypoint = distance_to_goal(to_waypoint, 1.0);
  const auto dist_goal = distance_to_goal(mdp, 1.0);
  const DensePolicy leg1 = greedy_route_policy(to_waypoint, dist_waypoint, epsilon, 1.0);
  const DensePolicy leg2 = greedy_route_policy(mdp, dist_goal, epsilon, 1.0);

  // A Markov blend: cells closer to the waypoint than the remaining
  // waypoint->goal detour follow leg 2; otherwise leg 1. This yields a
  // stationary policy whose typical path passes the waypoint.
  const int n = mdp.num_states();
  DensePolicy pi;
  pi.num_states = n;
  pi.rows.resize(static_cast<std::size_t>(n) * kNumActions);
  for (StateId s = 0; s < n; ++s) {
    const bool reached_leg2 =
        dist_waypoint[static_cast<std::size_t>(s)] <= 0.0 ||
        dist_goal[static_cast<std::size_t>(s)] <
            dist_goal[static_cast<std::size_t>(waypoint)];
    const DensePolicy& src = reached_leg2 ? leg2 : leg1;
    for (int a = 0; a < kNumActions; ++a)
      pi.rows[static_cast<std::size_t>(s) * kNumActions + a] = src.prob(s, a);
  }
  return pi;
}

DensePolicy behavior_policy(const TabularMdp& mdp, const std::string& name) {
  if (name == "expert") return shortest_safe_path_policy(mdp, 0.05);
  if (name == "medium") return shortest_safe_path_policy(mdp, 0.3);
  if (name == "random") return uniform_policy(mdp.num_states());
  throw ConfigError("unknown behavior policy \"" + name +
                    "\"; valid names: expert, medium, random");
}

}  // namespace sas
