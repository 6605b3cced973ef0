#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "gridpilot/model.hpp"
#include "gridpilot/trajectory.hpp"

namespace gridpilot {

// The only view of the environment a rollout gets: the current observation
// and the ability to execute an action. No future frame is reachable through
// this interface.
class EnvSession {
 public:
  EnvSession(const Scene& scene, const Pose& start, int patch_side)
      : scene_(&scene), pose_(start), k_(patch_side) {}

  Observation current_observation() const {
    return render_observation(*scene_, pose_, k_);
  }
  const Pose& pose() const { return pose_; }
  bool apply(Action a) {
    const StepResult r = step(*scene_, pose_, a);
    pose_ = r.pose;
    return r.collided;
  }

 private:
  const Scene* scene_;
  Pose pose_;
  int k_;
};

// Single-slot read-write store for the propagated pilot token. Initialized
// from the placeholder embedding, overwritten exactly once per step.
struct PilotCache {
  Tensor current;  // (1, d)

  static PilotCache init(const ParamStore& params) {
    return PilotCache{initial_pilot(params)};
  }
  void write(const Tensor& z) { current = z; }
  const Tensor& read() const { return current; }
};

struct RolloutPolicy {
  bool sample = false;      // greedy argmax by default
  double temperature = 1.0;
  uint64_t seed = 0;
};

// Called once per step with the 1-based step index, the pre-step pose and the
// policy's proposed action; returns the action to execute and whether this
// step counts as an expert takeover.
struct StepDecision {
  Action action;
  bool takeover = false;
};
using StepInterceptor =
    std::function<StepDecision(int step, const Pose& pose, Action proposed)>;

// Strictly causal recurrent rollout: read cache, model_step with the cached
// pilot, pick an action, overwrite the cache with the new pilot token, act,
// render the next observation. Terminates on STOP or after t_max steps.
// The returned trajectory has episode/source_round left for the caller.
Trajectory rollout(const ParamStore& params, const ModelConfig& cfg,
                   EnvSession& session, const std::vector<int>& instruction,
                   int t_max, const RolloutPolicy& policy = {},
                   const StepInterceptor& interceptor = {});

struct CausalityProbeResult {
  bool applicable = false;  // false when no unobserved cell exists to mutate
  bool pass = false;
  int first_divergence = -1;  // 1-based step of first mismatch, -1 if none
  Cell mutated{};
};

// Runs the episode on the original scene, mutates one walkable cell that was
// never rendered during steps 1..t_split, reruns, and demands bit-identical
// action and pilot sequences up to and including t_split.
CausalityProbeResult causality_probe(const ParamStore& params, const ModelConfig& cfg,
                                     const Scene& scene, const EpisodeSpec& episode,
                                     int t_split, int t_max, uint64_t probe_seed);

}  // namespace gridpilot
