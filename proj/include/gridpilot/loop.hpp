#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gridpilot/metrics.hpp"
#include "gridpilot/train.hpp"

namespace gridpilot {

struct LoopConfig {
  int rounds = 3;              // on-policy rounds after the bootstrap round
  int episodes_per_round = 24;
  int bootstrap_episodes = 0;  // 0 -> episodes_per_round
  int dev_threshold = 3;       // cells; deviation beyond this hands control to the expert
  int t_max = 0;               // 0 -> 4 * scene diameter
  bool aggregate = true;
  int eval_episodes = 40;

  void validate() const;
  int bootstrap_count() const {
    return bootstrap_episodes > 0 ? bootstrap_episodes : episodes_per_round;
  }
};

// Geodesic distance (cells) from the agent's cell to the nearest
// reference-path cell; +infinity sentinel when walled off.
double deviation(const Scene& scene, const Pose& pose,
                 const std::vector<Cell>& reference_path);

// Expert demonstration for an episode: the shortest-path follower drives from
// start to the goal region. Takeover flags stay false (round-0 bootstrap data).
Trajectory expert_trajectory(const Scene& scene, const EpisodeSpec& episode,
                             int patch_side, int t_max);

// On-policy rollout with deviation-aware expert takeover: once the geodesic
// deviation from the reference exceeds dev_threshold the expert acts for the
// remainder of the episode, while the pilot cache keeps propagating.
Trajectory collect_rollout(const ParamStore& params, const ModelConfig& cfg,
                           const Scene& scene, const EpisodeSpec& episode,
                           const LoopConfig& lcfg, int t_max,
                           const RolloutPolicy& policy = {});

// Union of all rounds (aggregate=true) or the latest round only.
std::vector<Trajectory> aggregate_buffers(
    const std::vector<std::vector<Trajectory>>& rounds, bool aggregate);

struct CurveRow {
  int round = 0;
  double sr = 0.0, spl = 0.0, ne = 0.0, osr = 0.0, ndtw = 0.0;
};

std::string curve_csv(const std::vector<CurveRow>& rows);

struct FlywheelResult {
  std::vector<CurveRow> curve;
  std::vector<LossRecord> losses;
  std::vector<std::vector<Trajectory>> round_buffers;  // per collected round
};

struct FlywheelIO {
  // Called after each round with the round index and the trained params;
  // empty hooks skip artifact writing.
  std::function<void(int round, const ParamStore&)> on_checkpoint;
  std::function<void(int round, const std::vector<Trajectory>&)> on_trajectories;
};

// Full closed loop. Round 0 trains on expert demonstrations; rounds 1..R
// collect on-policy rollouts with takeover, aggregate and fine-tune. After
// every round the model is evaluated on the held-out episodes and one curve
// row is appended.
FlywheelResult run_flywheel(ParamStore& params, const ModelConfig& cfg,
                            const SceneSet& train_scenes,
                            const SceneSet& heldout_scenes,
                            const LoopConfig& lcfg, const TrainConfig& tcfg,
                            const EpisodeGenConfig& egen, const EvalConfig& ecfg,
                            uint64_t seed, const FlywheelIO& io = {},
                            bool skip_bootstrap = false);

// Fixed episode sets derived from a seed: training episodes round-robin over
// the scene set, evaluation episodes from a disjoint seed stream.
std::vector<EpisodeSpec> sample_episodes(const SceneSet& scenes, int count,
                                         uint64_t seed, const EpisodeGenConfig& egen,
                                         const std::string& stream_tag);

// Re-simulates a trajectory under step(); returns the 1-based step of the
// first pose mismatch, or 0 when the replay is exact.
int replay_check(const Scene& scene, const Trajectory& traj);

}  // namespace gridpilot
