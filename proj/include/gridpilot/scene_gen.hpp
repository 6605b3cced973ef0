#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridpilot/grid.hpp"

namespace gridpilot {

struct SceneGenConfig {
  int width = 13;
  int height = 13;
  int rooms = 4;
  double landmark_density = 0.25;  // fraction of floor cells carrying a landmark
  int n_train = 8;
  int n_val_unseen = 4;
};

// One connected scene: carved rooms joined by L-shaped corridors, landmarks
// sprinkled over the floor. Deterministic per (seed, config).
Scene generate_scene(uint64_t seed, const SceneGenConfig& config,
                     const std::string& id);

struct SceneSplits {
  std::vector<Scene> train;
  std::vector<Scene> val_unseen;
};

// train / val_seen share scenes (val_seen differs by episode seeds);
// val_unseen gets fresh scenes.
SceneSplits generate_scene_splits(uint64_t seed, const SceneGenConfig& config);

}  // namespace gridpilot
