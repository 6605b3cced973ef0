#include "gridpilot/infer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "gridpilot/rng.hpp"

namespace gridpilot {

namespace {

Action select_action(const Tensor& logits, const RolloutPolicy& policy, Rng& rng) {
  const auto probs = softmax4(logits);
  if (!policy.sample) {
    int best = 0;
    for (int i = 1; i < 4; ++i)
      if (probs[static_cast<size_t>(i)] > probs[static_cast<size_t>(best)]) best = i;
    return static_cast<Action>(best);
  }
  if (policy.temperature <= 0.0)
    throw std::invalid_argument("rollout: sampling temperature must be positive");
  std::array<double, 4> scaled{};
  double mx = logits.data[0] / policy.temperature;
  for (int i = 0; i < 4; ++i) {
    scaled[static_cast<size_t>(i)] = logits.data[static_cast<size_t>(i)] / policy.temperature;
    mx = std::max(mx, scaled[static_cast<size_t>(i)]);
  }
  double sum = 0.0;
  for (double& v : scaled) {
    v = std::exp(v - mx);
    sum += v;
  }
  double r = rng.uniform() * sum;
  for (int i = 0; i < 4; ++i) {
    r -= scaled[static_cast<size_t>(i)];
    if (r <= 0.0) return static_cast<Action>(i);
  }
  return Action::Stop;
}

}  // namespace

Trajectory rollout(const ParamStore& params, const ModelConfig& cfg,
                   EnvSession& session, const std::vector<int>& instruction,
                   int t_max, const RolloutPolicy& policy,
                   const StepInterceptor& interceptor) {
  if (t_max < 1) throw std::invalid_argument("rollout: t_max must be >= 1");
  Trajectory traj;
  traj.poses.push_back(session.pose());
  PilotCache cache = PilotCache::init(params);
  Rng rng(policy.seed);

  for (int t = 1; t <= t_max; ++t) {
    const Observation obs = session.current_observation();
    const StepOutput out = model_step(params, cfg, instruction, obs, cache.read());
    cache.write(out.pilot);

    Action action = select_action(out.action_logits, policy, rng);
    bool took_over = false;
    if (interceptor) {
      const StepDecision d = interceptor(t, session.pose(), action);
      action = d.action;
      took_over = d.takeover;
    }

    traj.observations.push_back(obs);
    traj.actions.push_back(action);
    traj.takeover.push_back(took_over);
    traj.pilots.push_back(out.pilot);

    session.apply(action);
    traj.poses.push_back(session.pose());
    if (action == Action::Stop) break;
  }
  return traj;
}

CausalityProbeResult causality_probe(const ParamStore& params, const ModelConfig& cfg,
                                     const Scene& scene, const EpisodeSpec& episode,
                                     int t_split, int t_max, uint64_t probe_seed) {
  CausalityProbeResult result;
  if (t_split < 1) throw std::invalid_argument("causality_probe: t_split must be >= 1");

  EnvSession base_session(scene, episode.start, cfg.k);
  const Trajectory base =
      rollout(params, cfg, base_session, episode.instruction, t_max);

  // Cells rendered during steps 1..t_split of the baseline run.
  const int split = std::min<int>(t_split, base.length());
  std::set<Cell> seen;
  const int half = cfg.k / 2;
  for (int t = 0; t < split; ++t) {
    const Pose& p = base.poses[static_cast<size_t>(t)];
    const Cell fwd = heading_delta(p.heading);
    const Cell right = heading_delta(rotate_right(p.heading));
    for (int row = 0; row < cfg.k; ++row) {
      const int ahead = (cfg.k - 1) - row;
      for (int col = 0; col < cfg.k; ++col) {
        const int side = col - half;
        seen.insert({p.x + fwd.x * ahead + right.x * side,
                     p.y + fwd.y * ahead + right.y * side});
      }
    }
  }

  std::vector<Cell> candidates;
  for (const Cell& c : scene.walkable_cells()) {
    if (!seen.count(c)) candidates.push_back(c);
  }
  if (candidates.empty()) return result;  // probe not applicable
  result.applicable = true;

  Rng rng(probe_seed);
  const Cell target = candidates[rng.below(candidates.size())];
  Scene mutated = scene;
  // Swap to a different walkable class so geometry is untouched.
  const CellClass old_class = scene.at(target);
  CellClass new_class =
      old_class == CellClass::Floor ? CellClass::LandmarkA : CellClass::Floor;
  if (new_class == old_class) new_class = CellClass::LandmarkB;
  mutated.set(target.x, target.y, new_class);
  result.mutated = target;

  EnvSession mut_session(mutated, episode.start, cfg.k);
  const Trajectory other =
      rollout(params, cfg, mut_session, episode.instruction, t_max);

  const int compare = std::min({split, base.length(), other.length()});
  if (other.length() < split && other.length() < base.length()) {
    // Diverged by terminating early inside the protected prefix.
    result.first_divergence = other.length() + 1;
    return result;
  }
  for (int t = 0; t < compare; ++t) {
    const bool same_action = base.actions[static_cast<size_t>(t)] ==
                             other.actions[static_cast<size_t>(t)];
    const bool same_pilot = base.pilots[static_cast<size_t>(t)].data ==
                            other.pilots[static_cast<size_t>(t)].data;
    if (!same_action || !same_pilot) {
      result.first_divergence = t + 1;
      return result;
    }
  }
  result.pass = true;
  return result;
}

}  // namespace gridpilot
