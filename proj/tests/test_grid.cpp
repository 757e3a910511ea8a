#include <doctest.h>

#include <cmath>
#include <set>

#include "sasalign/errors.hpp"
#include "sasalign/grid.hpp"

using namespace sas;

TEST_CASE("deterministic kernel moves as intended") {
  TabularMdp mdp = make_layout("two-paths", 0.0);
  RngStream rng(1);
  const Transition tr = mdp.step(mdp.state_at(0, 0), kPosX, rng);
  CHECK(tr.next_state == mdp.state_at(1, 0));
  CHECK(tr.reward == 0.0);
  CHECK(tr.cost == 0.0);
}

TEST_CASE("wall moves clamp to the current cell") {
  TabularMdp mdp = make_layout("two-paths", 0.0);
  RngStream rng(1);
  const StateId right_edge = mdp.state_at(6, 0);
  CHECK(mdp.step(right_edge, kPosX, rng).next_state == right_edge);
  CHECK(mdp.step(mdp.state_at(0, 0), kNegY, rng).next_state == mdp.state_at(0, 0));
}

TEST_CASE("slip statistics match the kernel definition") {
  // Oracle: binomial confidence band around the intended-move probability.
  TabularMdp mdp = make_layout("two-paths", 0.2);
  const StateId interior = mdp.state_at(3, 2);
  RngStream rng(42);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (mdp.step(interior, kPosX, rng).next_state == mdp.state_at(4, 2)) ++hits;
  const double p = 0.8;
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(hits) / n - p) < 3 * sigma);
}

TEST_CASE("kernel rows are distributions") {
  for (const char* name : {"corridor", "two-paths", "ring"}) {
    TabularMdp mdp = make_layout(name, 0.17);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      for (int a = 0; a < kNumActions; ++a) {
        double total = 0;
        for (double p : mdp.kernel_row(s, a)) {
          CHECK(p >= 0.0);
          total += p;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("slip mass splits as intended before wall aggregation") {
  TabularMdp mdp = make_layout("two-paths", 0.2);
  const StateId interior = mdp.state_at(3, 2);
  const auto row = mdp.kernel_row(interior, kPosX);
  CHECK(row[static_cast<std::size_t>(mdp.state_at(4, 2))] == doctest::Approx(0.8));
  CHECK(row[static_cast<std::size_t>(mdp.state_at(2, 2))] == doctest::Approx(0.05));
  CHECK(row[static_cast<std::size_t>(mdp.state_at(3, 3))] == doctest::Approx(0.05));
  CHECK(row[static_cast<std::size_t>(mdp.state_at(3, 1))] == doctest::Approx(0.05));
  CHECK(row[static_cast<std::size_t>(interior)] == doctest::Approx(0.05));  // stay slip
}

TEST_CASE("slip zero gives one-hot rows") {
  TabularMdp mdp = make_layout("corridor", 0.0);
  const auto row = mdp.kernel_row(0, kPosX);
  for (StateId s = 0; s < mdp.num_states(); ++s)
    CHECK(row[static_cast<std::size_t>(s)] == (s == 1 ? 1.0 : 0.0));
}

TEST_CASE("wall-adjacent slip aggregates onto the clamped cell") {
  TabularMdp mdp = make_layout("corridor", 0.2);  // 8x1: +y/-y both clamp
  const auto row = mdp.kernel_row(1, kPosX);
  // stay, +y and -y all resolve to cell 1: 3 * 0.05.
  CHECK(row[1] == doctest::Approx(0.15));
  CHECK(row[2] == doctest::Approx(0.8));
  CHECK(row[0] == doctest::Approx(0.05));
}

TEST_CASE("goal is absorbing with unit reward") {
  TabularMdp mdp = make_layout("two-paths", 0.3);
  RngStream rng(7);
  for (int a = 0; a < kNumActions; ++a) {
    const Transition tr = mdp.step(mdp.goal(), a, rng);
    CHECK(tr.next_state == mdp.goal());
    CHECK(tr.reward == 1.0);
  }
}

TEST_CASE("hazard cost equals c_max, elsewhere zero") {
  TabularMdp mdp = make_layout("corridor", 0.0, 0.99, 2.5);
  CHECK(mdp.cost(3, kStay) == 2.5);
  CHECK(mdp.cost(2, kStay) == 0.0);
  for (StateId s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < kNumActions; ++a) CHECK(mdp.cost(s, a) <= mdp.c_max());
}

TEST_CASE("built-in layouts match their definitions") {
  TabularMdp corridor = make_layout("corridor");
  CHECK(corridor.width() == 8);
  CHECK(corridor.height() == 1);
  CHECK(corridor.goal() == corridor.state_at(7, 0));
  CHECK(corridor.is_hazard(corridor.state_at(3, 0)));

  TabularMdp two_paths = make_layout("two-paths");
  CHECK(two_paths.width() == 7);
  CHECK(two_paths.height() == 5);
  int hazard_count = 0;
  for (StateId s = 0; s < two_paths.num_states(); ++s) {
    if (!two_paths.is_hazard(s)) continue;
    ++hazard_count;
    CHECK(two_paths.y_of(s) == 4);  // hazards line the lower route only
  }
  CHECK(hazard_count == 5);
  CHECK_FALSE(two_paths.is_hazard(two_paths.goal()));

  for (const char* name : {"corridor", "two-paths", "ring"}) {
    TabularMdp mdp = make_layout(name);
    CHECK_FALSE(mdp.is_hazard(mdp.goal()));
    CHECK_FALSE(mdp.is_hazard(mdp.start()));
  }
}

TEST_CASE("unknown layout names are configuration errors") {
  CHECK_THROWS_AS(make_layout("spiral"), ConfigError);
  try {
    make_layout("spiral");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("corridor") != std::string::npos);
    CHECK(msg.find("two-paths") != std::string::npos);
    CHECK(msg.find("ring") != std::string::npos);
  }
}

TEST_CASE("invalid state or action raises invalid_argument") {
  TabularMdp mdp = make_layout("corridor");
  RngStream rng(3);
  CHECK_THROWS_AS(mdp.step(-1, kPosX, rng), std::invalid_argument);
  CHECK_THROWS_AS(mdp.step(99, kPosX, rng), std::invalid_argument);
  CHECK_THROWS_AS(mdp.step(0, 5, rng), std::invalid_argument);
}

TEST_CASE("identical seeds reproduce step sequences") {
  TabularMdp mdp = make_layout("ring", 0.25);
  RngStream a(99), b(99);
  StateId sa = mdp.start(), sb = mdp.start();
  for (int t = 0; t < 200; ++t) {
    const int action = t % kNumActions;
    sa = mdp.step(sa, action, a).next_state;
    sb = mdp.step(sb, action, b).next_state;
    CHECK(sa == sb);
  }
}

TEST_CASE("goal inside hazards is rejected") {
  LayoutConfig cfg = builtin_layout_config("corridor");
  cfg.hazards.push_back(cfg.goal);
  CHECK_THROWS_AS(TabularMdp{cfg}, ConfigError);
}
