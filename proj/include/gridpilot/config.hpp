#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gridpilot/episode.hpp"
#include "gridpilot/loop.hpp"
#include "gridpilot/model.hpp"
#include "gridpilot/scene_gen.hpp"
#include "gridpilot/train.hpp"

namespace gridpilot {

// Whole-run configuration, loaded from one JSON document. Unknown keys are
// rejected; every field has a default except the seed, which commands that
// produce artifacts require.
struct RunConfig {
  std::optional<uint64_t> seed;
  ModelConfig model;
  TrainConfig train;
  LoopConfig loop;
  EpisodeGenConfig episodes;
  SceneGenConfig scenes;
  EvalConfig eval;
  std::string scene_dir;      // where gen-scenes wrote (or will write) scenes
  std::string eval_split = "val_unseen";  // val_seen | val_unseen | train

  uint64_t require_seed() const;
};

RunConfig config_from_json(const std::string& text);
// Effective config with every default filled in; load(emit(x)) == x.
std::string config_to_json(const RunConfig& cfg);

RunConfig load_config_file(const std::string& path);
void write_config_file(const std::string& path, const RunConfig& cfg);

}  // namespace gridpilot
