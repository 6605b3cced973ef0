#include <doctest.h>

#include "gridpilot/grid.hpp"
#include "gridpilot/rng.hpp"
#include "gridpilot/scene_gen.hpp"
#include "oracles.hpp"

using namespace gridpilot;

namespace {

Scene open_scene(int w, int h) {
  Scene s;
  s.width = w;
  s.height = h;
  s.id = "open";
  s.cells.assign(static_cast<size_t>(w) * h, CellClass::Floor);
  return s;
}

Scene random_scene(uint64_t seed, int w = 15, int h = 15) {
  SceneGenConfig cfg;
  cfg.width = w;
  cfg.height = h;
  return generate_scene(seed, cfg, "rand" + std::to_string(seed));
}

}  // namespace

TEST_CASE("load_scene parses a 3x3 all-floor body") {
  const Scene s = load_scene("SCENE v1 3 3\n...\n...\n...\n");
  CHECK(s.width == 3);
  CHECK(s.height == 3);
  int floors = 0;
  for (auto c : s.cells)
    if (c == CellClass::Floor) ++floors;
  CHECK(floors == 9);
}

TEST_CASE("load_scene rejects unknown characters with a line number") {
  CHECK_THROWS_WITH_AS(load_scene("SCENE v1 3 1\n.Z.\n"),
                       doctest::Contains("line 2"), std::runtime_error);
}

TEST_CASE("load_scene rejects header/body dimension mismatch") {
  CHECK_THROWS_AS(load_scene("SCENE v1 3 2\n...\n...\n...\n"), std::runtime_error);
  CHECK_THROWS_AS(load_scene("SCENE v1 3 4\n...\n...\n...\n"), std::runtime_error);
  CHECK_THROWS_AS(load_scene("SCENE v1 4 2\n...\n...\n"), std::runtime_error);
}

TEST_CASE("load_scene round-trips through scene_to_text") {
  const Scene s = random_scene(7);
  const Scene back = load_scene(scene_to_text(s), s.id);
  CHECK(back.cells == s.cells);
}

TEST_CASE("step moves north by decreasing y") {
  const Scene s = open_scene(5, 5);
  const auto r = step(s, Pose{2, 2, Heading::N}, Action::Fwd);
  CHECK(r.pose == Pose{2, 1, Heading::N});
  CHECK_FALSE(r.collided);
}

TEST_CASE("step LEFT rotates counter-clockwise") {
  const Scene s = open_scene(5, 5);
  CHECK(step(s, Pose{2, 2, Heading::N}, Action::Left).pose == Pose{2, 2, Heading::W});
  CHECK(step(s, Pose{2, 2, Heading::N}, Action::Right).pose == Pose{2, 2, Heading::E});
}

TEST_CASE("step into the border collides and stays put") {
  const Scene s = open_scene(3, 3);
  const auto r = step(s, Pose{0, 0, Heading::W}, Action::Fwd);
  CHECK(r.pose == Pose{0, 0, Heading::W});
  CHECK(r.collided);
}

TEST_CASE("rotation closure: four LEFTs (or RIGHTs) restore the pose") {
  const Scene s = open_scene(4, 4);
  for (int h = 0; h < 4; ++h) {
    Pose p{1, 2, static_cast<Heading>(h)};
    Pose q = p;
    for (int i = 0; i < 4; ++i) q = step(s, q, Action::Left).pose;
    CHECK(q == p);
    for (int i = 0; i < 4; ++i) q = step(s, q, Action::Right).pose;
    CHECK(q == p);
  }
}

TEST_CASE("STOP is the identity") {
  const Scene s = open_scene(4, 4);
  const Pose p{1, 1, Heading::S};
  CHECK(step(s, p, Action::Stop).pose == p);
}

TEST_CASE("render_observation of a boxed-in agent is all WALL except self") {
  const Scene s = load_scene("SCENE v1 3 3\n###\n#A#\n###\n");
  const Observation o = render_observation(s, Pose{1, 1, Heading::N}, 5);
  const int agent_row = 4, agent_col = 2;
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      if (r == agent_row && c == agent_col) {
        CHECK(o.at(r, c) == CellClass::LandmarkA);
      } else {
        CHECK(o.at(r, c) == CellClass::Wall);
      }
    }
  }
}

TEST_CASE("landmark one cell ahead lands at bottom-center minus one row") {
  Scene s = open_scene(7, 7);
  s.set(3, 2, CellClass::LandmarkC);  // one north of (3,3)
  const Observation o = render_observation(s, Pose{3, 3, Heading::N}, 5);
  CHECK(o.at(3, 2) == CellClass::LandmarkC);  // agent row 4, one ahead is row 3
}

TEST_CASE("render_observation is rotation-equivariant") {
  // The E-facing patch must equal the N-facing patch of the scene rotated so
  // that east maps to north: (x,y) -> (y, W-1-x) on a square scene.
  const Scene s = random_scene(3, 9, 9);
  const Pose agent{4, 4, Heading::E};
  const Observation east = render_observation(s, agent, 5);

  Scene rotated = s;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      rotated.set(y, s.width - 1 - x, s.at(x, y));
  const Observation north = render_observation(
      rotated, Pose{agent.y, s.width - 1 - agent.x, Heading::N}, 5);
  CHECK(east.patch == north.patch);
}

TEST_CASE("render_observation is pure") {
  const Scene s = random_scene(11);
  const Pose p{5, 5, Heading::S};
  CHECK(render_observation(s, p) == render_observation(s, p));
}

TEST_CASE("geodesic_field on an open 3x3 grid matches Manhattan distance") {
  const Scene s = open_scene(3, 3);
  const DistanceField f = geodesic_field(s, {{0, 0}});
  CHECK(f.at(2, 2) == 4);
  CHECK(f.at(0, 0) == 0);
  CHECK(f.at(1, 0) == 1);
}

TEST_CASE("geodesic_field marks walled-off cells unreachable") {
  const Scene s = load_scene("SCENE v1 5 3\n..#..\n..#..\n..#..\n");
  const DistanceField f = geodesic_field(s, {{0, 0}});
  CHECK(f.at(4, 2) == DistanceField::kUnreachable);
  CHECK(f.at(1, 2) == 3);
}

TEST_CASE("geodesic_field rejects WALL sources and empty source sets") {
  const Scene s = load_scene("SCENE v1 3 3\n#..\n...\n...\n");
  CHECK_THROWS_AS(geodesic_field(s, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(geodesic_field(s, {}), std::invalid_argument);
}

TEST_CASE("geodesic_field matches the Dijkstra oracle on random 15x15 scenes") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Scene s = random_scene(seed);
    const auto floors = s.walkable_cells();
    Rng rng(seed * 77 + 1);
    const Cell src = floors[rng.below(floors.size())];
    const DistanceField f = geodesic_field(s, {src});
    const auto oracle = oracles::dijkstra_grid(s, {src});
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        if (!s.walkable(x, y)) continue;
        const int got = f.at(x, y);
        const int want = oracle[static_cast<size_t>(y) * s.width + x];
        CHECK(got == want);
      }
    }
  }
}

TEST_CASE("geodesic_field satisfies the unit-step property") {
  const Scene s = random_scene(42);
  const auto floors = s.walkable_cells();
  const DistanceField f = geodesic_field(s, {floors.front()});
  for (const Cell& c : floors) {
    for (const Cell& d : {Cell{0, -1}, Cell{1, 0}, Cell{0, 1}, Cell{-1, 0}}) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (!s.in_bounds(n.x, n.y) || !s.walkable(n)) continue;
      const int a = f.at(c), b = f.at(n);
      if (a == DistanceField::kUnreachable || b == DistanceField::kUnreachable)
        continue;
      CHECK(std::abs(a - b) <= 1);
    }
  }
}

TEST_CASE("expert_action goes FWD down a corridor toward the goal") {
  const Scene s = load_scene("SCENE v1 5 1\n.....\n");
  const DistanceField f = geodesic_field(s, {{4, 0}});
  CHECK(expert_action(s, Pose{0, 0, Heading::E}, f, {{4, 0}}) == Action::Fwd);
}

TEST_CASE("expert_action turns LEFT when facing a wall with the goal leftward") {
  // Agent faces N into a wall; goal sits to the west.
  const Scene s = load_scene("SCENE v1 3 2\n###\n...\n");
  const DistanceField f = geodesic_field(s, {{0, 1}});
  const Pose pose{2, 1, Heading::N};
  CHECK(expert_action(s, pose, f, {{0, 1}}) == Action::Left);

  // Enumerate all non-STOP actions: LEFT must be the unique one after which
  // moving forward would strictly decrease the distance to the goal.
  int improving = 0;
  for (Action a : {Action::Fwd, Action::Left, Action::Right}) {
    const Pose next = step(s, pose, a).pose;
    const Cell fwd = heading_delta(next.heading);
    const Cell ahead{next.x + fwd.x, next.y + fwd.y};
    if (s.walkable(ahead) && f.at(ahead) < f.at(next.cell())) {
      ++improving;
      CHECK(a == Action::Left);
    }
  }
  CHECK(improving == 1);
}

TEST_CASE("expert_action stops inside the goal region") {
  const Scene s = open_scene(4, 4);
  const DistanceField f = geodesic_field(s, {{1, 1}});
  CHECK(expert_action(s, Pose{1, 1, Heading::S}, f, {{1, 1}}) == Action::Stop);
}

TEST_CASE("expert_action throws for unreachable poses") {
  const Scene s = load_scene("SCENE v1 3 1\n.#.\n");
  const DistanceField f = geodesic_field(s, {{0, 0}});
  CHECK_THROWS_AS(expert_action(s, Pose{2, 0, Heading::W}, f, {{0, 0}}),
                  std::runtime_error);
}

TEST_CASE("expert reaches the goal in exactly the geodesic number of FWD steps") {
  for (uint64_t seed = 100; seed < 110; ++seed) {
    const Scene s = random_scene(seed);
    const auto floors = s.walkable_cells();
    Rng rng(seed);
    const Cell goal = floors[rng.below(floors.size())];
    const DistanceField f = geodesic_field(s, {goal});
    Cell start = floors[rng.below(floors.size())];
    if (f.at(start) == DistanceField::kUnreachable) continue;
    Pose pose{start.x, start.y, static_cast<Heading>(rng.below(4))};
    const int expected_fwd = f.at(start);
    int fwd_taken = 0;
    for (int guard = 0; guard < 10000; ++guard) {
      const Action a = expert_action(s, pose, f, {goal});
      if (a == Action::Stop) break;
      if (a == Action::Fwd) ++fwd_taken;
      pose = step(s, pose, a).pose;
    }
    CHECK(pose.cell() == goal);
    CHECK(fwd_taken == expected_fwd);
  }
}

TEST_CASE("generated scenes keep all floor cells mutually reachable") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Scene s = random_scene(seed, 13, 13);
    const auto floors = s.walkable_cells();
    REQUIRE(!floors.empty());
    const DistanceField f = geodesic_field(s, {floors.front()});
    for (const Cell& c : floors) CHECK(f.at(c) != DistanceField::kUnreachable);
  }
}

TEST_CASE("scene generation is deterministic per seed") {
  SceneGenConfig cfg;
  const Scene a = generate_scene(123, cfg, "a");
  const Scene b = generate_scene(123, cfg, "a");
  CHECK(a.cells == b.cells);
  const Scene c = generate_scene(124, cfg, "a");
  CHECK(a.cells != c.cells);
}
