#include <doctest.h>

#include <algorithm>

#include "gridpilot/episode.hpp"
#include "gridpilot/rng.hpp"
#include "gridpilot/scene_gen.hpp"
#include "oracles.hpp"

using namespace gridpilot;

namespace {

Scene corridor(int len) {
  Scene s;
  s.width = len;
  s.height = 1;
  s.id = "corridor";
  s.cells.assign(static_cast<size_t>(len), CellClass::Floor);
  return s;
}

}  // namespace

TEST_CASE("vocabulary stays closed and small") {
  CHECK(vocab::size() <= 64);
  CHECK(vocab::token_name(vocab::token_id("stop")) == "stop");
  CHECK_THROWS_AS(vocab::token_id("banana"), std::invalid_argument);
}

TEST_CASE("straight 3-cell path reads go forward 3 stop") {
  const Scene s = corridor(5);
  const std::vector<Cell> path = {{0, 0}, {1, 0}, {2, 0}};
  const auto ids = generate_instruction(path, s);
  CHECK(vocab::decode(ids) == "go forward 3 stop");
}

TEST_CASE("a single left turn emits the left token exactly once") {
  Scene s = load_scene("SCENE v1 3 3\n...\n...\n...\n");
  // East then north: at (2,2) heading E, turning to N is a LEFT turn.
  const std::vector<Cell> path = {{0, 2}, {1, 2}, {2, 2}, {2, 1}, {2, 0}};
  const auto ids = generate_instruction(path, s);
  const int left = vocab::token_id("left");
  const int right = vocab::token_id("right");
  CHECK(std::count(ids.begin(), ids.end(), left) == 1);
  CHECK(std::count(ids.begin(), ids.end(), right) == 0);
}

TEST_CASE("goal landmarks show up as stop at <name>") {
  Scene s = corridor(4);
  s.set(3, 0, CellClass::LandmarkD);
  const std::vector<Cell> path = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  CHECK(vocab::decode(generate_instruction(path, s)) == "go forward 4 stop at d");
}

TEST_CASE("instructions respect the vocabulary and the length cap") {
  SceneGenConfig gcfg;
  for (uint64_t seed = 0; seed < 30; ++seed) {
    const Scene s = generate_scene(seed, gcfg, "s");
    EpisodeGenConfig ecfg;
    const EpisodeSpec ep = generate_episode(s, seed * 13 + 1, ecfg);
    CHECK(!ep.instruction.empty());
    CHECK(static_cast<int>(ep.instruction.size()) <= ecfg.max_instruction_len);
    for (int id : ep.instruction) {
      CHECK(id >= 0);
      CHECK(id < vocab::size());
    }
  }
}

TEST_CASE("generate_episode is deterministic") {
  const Scene s = generate_scene(5, SceneGenConfig{}, "s5");
  const EpisodeSpec a = generate_episode(s, 99);
  const EpisodeSpec b = generate_episode(s, 99);
  CHECK(a.start == b.start);
  CHECK(a.goal == b.goal);
  CHECK(a.reference_path == b.reference_path);
  CHECK(a.instruction == b.instruction);
  CHECK(a.goal_region == b.goal_region);
}

TEST_CASE("generate_episode fails cleanly when min_len exceeds the diameter") {
  const Scene s = corridor(4);
  EpisodeGenConfig cfg;
  cfg.min_len = 50;
  cfg.max_retries = 32;
  CHECK_THROWS_AS(generate_episode(s, 1, cfg), std::runtime_error);
}

TEST_CASE("reference paths have geodesic length, against the Dijkstra oracle") {
  SceneGenConfig gcfg;
  int checked = 0;
  for (uint64_t seed = 0; seed < 20 && checked < 100; ++seed) {
    const Scene s = generate_scene(seed + 500, gcfg, "s");
    for (uint64_t e = 0; e < 8; ++e, ++checked) {
      const EpisodeSpec ep = generate_episode(s, Rng::mix(seed, e));
      const auto dist = oracles::dijkstra_grid(s, {ep.goal});
      const int want =
          dist[static_cast<size_t>(ep.start.y) * s.width + ep.start.x];
      CHECK(static_cast<int>(ep.reference_path.size()) - 1 == want);
      CHECK(ep.reference_path.front() == ep.start.cell());
      // Last cell lies in the goal region.
      bool in_region = false;
      for (const Cell& g : ep.goal_region)
        if (g == ep.reference_path.back()) in_region = true;
      CHECK(in_region);
    }
  }
  CHECK(checked >= 100);
}

TEST_CASE("goal_region honors the r_goal radius") {
  const Scene s = corridor(8);
  EpisodeGenConfig cfg;
  cfg.min_len = 4;
  cfg.r_goal = 1;
  const EpisodeSpec ep = generate_episode(s, 3, cfg);
  // Region spans the goal and its walkable neighbors at distance <= 1.
  for (const Cell& g : ep.goal_region)
    CHECK(std::abs(g.x - ep.goal.x) + std::abs(g.y - ep.goal.y) <= 1);
  CHECK(ep.goal_region.size() >= 2);
}
