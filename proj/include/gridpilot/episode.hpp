#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridpilot/grid.hpp"

namespace gridpilot {

// Closed instruction vocabulary. Token ids are fixed by table position so
// serialized instructions stay stable across builds.
namespace vocab {

int size();
const std::string& token_name(int id);
int token_id(const std::string& name);  // throws on unknown token
std::string decode(const std::vector<int>& ids);

}  // namespace vocab

struct EpisodeSpec {
  std::string scene_id;
  Pose start;
  Cell goal;
  std::vector<Cell> goal_region;     // cells within geodesic radius r_goal of goal
  std::vector<Cell> reference_path;  // start cell .. goal-region cell
  std::vector<int> instruction;
  uint64_t seed = 0;

  std::string id() const { return scene_id + ":" + std::to_string(seed); }
};

struct EpisodeGenConfig {
  int min_len = 4;       // minimum geodesic start->goal distance, in cells
  int r_goal = 0;        // goal region radius; 0 keeps the region at the goal cell
  int max_retries = 256;
  int max_instruction_len = 48;
};

// Templated instruction for a reference path: straight runs become
// "go forward <cells>", corners "turn left/right [at <landmark>]", and the
// path ends with "stop [at <landmark>]". Run lengths count cells, so a
// straight 3-cell path reads "go forward 3". Deterministic.
std::vector<int> generate_instruction(const std::vector<Cell>& reference_path,
                                      const Scene& scene,
                                      int max_len = 48);

// Samples start pose and goal at geodesic distance >= min_len, then derives
// the reference path by simulating the shortest-path follower from the start
// pose, so the expert reproduces the reference exactly. Same (scene, seed,
// config) always yields the same spec. Throws when no valid pair exists
// within the retry budget.
EpisodeSpec generate_episode(const Scene& scene, uint64_t rng_seed,
                             const EpisodeGenConfig& config = {});

}  // namespace gridpilot
