#include "sasalign/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "sasalign/errors.hpp"

namespace sas {

const char* action_name(int action) {
  switch (action) {
    case kPosX: return "+x";
    case kNegX: return "-x";
    case kPosY: return "+y";
    case kNegY: return "-y";
    case kStay: return "stay";
    default: return "?";
  }
}

namespace {

void validate_layout(const LayoutConfig& cfg) {
  if (cfg.width <= 0 || cfg.height <= 0)
    throw ConfigError("layout: width and height must be positive");
  const int n = cfg.width * cfg.height;
  auto in_grid = [&](StateId s) { return s >= 0 && s < n; };
  if (!in_grid(cfg.start)) throw ConfigError("layout: start cell out of grid");
  if (!in_grid(cfg.goal)) throw ConfigError("layout: goal cell out of grid");
  for (StateId h : cfg.hazards) {
    if (!in_grid(h)) throw ConfigError("layout: hazard cell out of grid");
    if (h == cfg.goal) throw ConfigError("layout: goal must not be a hazard cell");
  }
  if (cfg.slip_prob < 0.0 || cfg.slip_prob >= 1.0)
    throw ConfigError("layout: slip_prob must lie in [0, 1)");
  if (cfg.gamma <= 0.0 || cfg.gamma >= 1.0)
    throw ConfigError("layout: gamma must lie in (0, 1)");
  if (cfg.c_max <= 0.0) throw ConfigError("layout: c_max must be positive");
}

}  // namespace

TabularMdp::TabularMdp(const LayoutConfig& cfg) : cfg_(cfg) {
  validate_layout(cfg_);
  const int n = num_states();
  hazard_mask_.assign(static_cast<std::size_t>(n), 0);
  for (StateId h : cfg_.hazards) hazard_mask_[static_cast<std::size_t>(h)] = 1;

  kernel_.assign(static_cast<std::size_t>(n) * kNumActions * n, 0.0);
  for (StateId s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      double* row = kernel_.data() + (static_cast<std::size_t>(s) * kNumActions + a) *
                                         static_cast<std::size_t>(n);
      if (s == cfg_.goal) {
        row[cfg_.goal] = 1.0;
        continue;
      }
      const double slip_share = cfg_.slip_prob / (kNumActions - 1);
      for (int executed = 0; executed < kNumActions; ++executed) {
        const double p = (executed == a) ? 1.0 - cfg_.slip_prob : slip_share;
        row[intended_next(s, executed)] += p;
      }
    }
  }
}

StateId TabularMdp::intended_next(StateId s, int action) const {
  if (s == cfg_.goal) return cfg_.goal;
  int x = x_of(s);
  int y = y_of(s);
  switch (action) {
    case kPosX: x += 1; break;
    case kNegX: x -= 1; break;
    case kPosY: y += 1; break;
    case kNegY: y -= 1; break;
    case kStay: break;
    default: throw std::invalid_argument("unknown action id " + std::to_string(action));
  }
  if (x < 0 || x >= cfg_.width || y < 0 || y >= cfg_.height) return s;  // wall clamp
  return state_at(x, y);
}

void TabularMdp::check_state_action(StateId s, int action) const {
  if (!in_grid(s))
    throw std::invalid_argument("state " + std::to_string(s) + " out of grid");
  if (action < 0 || action >= kNumActions)
    throw std::invalid_argument("unknown action id " + std::to_string(action));
}

double TabularMdp::reward(StateId s, int action) const {
  check_state_action(s, action);
  return s == cfg_.goal ? 1.0 : 0.0;
}

double TabularMdp::cost(StateId s, int action) const {
  check_state_action(s, action);
  return is_hazard(s) ? cfg_.c_max : 0.0;
}

std::span<const double> TabularMdp::kernel_row(StateId s, int action) const {
  check_state_action(s, action);
  const int n = num_states();
  return {kernel_.data() + (static_cast<std::size_t>(s) * kNumActions + action) *
                               static_cast<std::size_t>(n),
          static_cast<std::size_t>(n)};
}

Transition TabularMdp::step(StateId s, int action, RngStream& rng) const {
  check_state_action(s, action);
  const auto row = kernel_row(s, action);
  const StateId next = rng.discrete(row);
  return Transition{s, action, next, reward(s, action), cost(s, action)};
}

std::string TabularMdp::digest() const {
  // FNV-1a over the canonical layout description. Content fingerprint, not
  // cryptographic.
  std::ostringstream os;
  os << cfg_.width << 'x' << cfg_.height << ";s" << cfg_.start << ";g" << cfg_.goal << ";h";
  std::vector<StateId> h = cfg_.hazards;
  std::sort(h.begin(), h.end());
  for (StateId c : h) os << c << ',';
  char buf[96];
  std::snprintf(buf, sizeof(buf), ";slip%.12g;gamma%.12g;cmax%.12g", cfg_.slip_prob, cfg_.gamma,
                cfg_.c_max);
  os << buf;
  const std::string text = os.str();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

LayoutConfig builtin_layout_config(const std::string& name) {
  LayoutConfig cfg;
  cfg.name = name;
  if (name == "corridor") {
    cfg.width = 8;
    cfg.height = 1;
    cfg.start = 0;                    // (0,0)
    cfg.goal = 7;                     // (7,0)
    cfg.hazards = {3};                // (3,0)
  } else if (name == "two-paths") {
    cfg.width = 7;
    cfg.height = 5;
    cfg.start = 0;                    // (0,0)
    cfg.goal = 4 * 7 + 6;             // (6,4)
    // Both corner routes from (0,0) to (6,4) have length 10; the lower one
    // (down the left edge, then along the bottom row) is lined with hazards,
    // the upper one (along the top row, then down the right edge) is clean.
    for (int x = 1; x <= 5; ++x) cfg.hazards.push_back(4 * 7 + x);
  } else if (name == "ring") {
    cfg.width = 5;
    cfg.height = 5;
    cfg.start = 2;                    // (2,0)
    cfg.goal = 4 * 5 + 2;             // (2,4)
    // Free cells form the perimeter loop; the interior block is hazardous
    // and the right-hand arc of the loop carries one hazard stretch, so the
    // clean way around is the left arc.
    for (int y = 1; y <= 3; ++y)
      for (int x = 1; x <= 3; ++x) cfg.hazards.push_back(y * 5 + x);
    for (int y = 1; y <= 3; ++y) cfg.hazards.push_back(y * 5 + 4);
  } else {
    throw ConfigError("unknown layout \"" + name +
                      "\"; valid names: corridor, two-paths, ring");
  }
  return cfg;
}

TabularMdp make_layout(const std::string& name, double slip_prob, double gamma, double c_max) {
  LayoutConfig cfg = builtin_layout_config(name);
  cfg.slip_prob = slip_prob;
  cfg.gamma = gamma;
  cfg.c_max = c_max;
  return TabularMdp(cfg);
}

}  // namespace sas
