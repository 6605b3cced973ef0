#include "gridpilot/loop.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gridpilot/rng.hpp"

namespace gridpilot {

void LoopConfig::validate() const {
  if (rounds < 1) throw std::invalid_argument("LoopConfig: rounds must be >= 1");
  if (episodes_per_round < 1)
    throw std::invalid_argument("LoopConfig: episodes_per_round must be >= 1");
  if (dev_threshold < 1)
    throw std::invalid_argument("LoopConfig: dev_threshold must be >= 1");
  if (t_max < 0) throw std::invalid_argument("LoopConfig: t_max must be >= 0");
  if (eval_episodes < 1)
    throw std::invalid_argument("LoopConfig: eval_episodes must be >= 1");
}

double deviation(const Scene& scene, const Pose& pose,
                 const std::vector<Cell>& reference_path) {
  if (reference_path.empty())
    throw std::invalid_argument("deviation: empty reference path");
  const DistanceField field = geodesic_field(scene, reference_path);
  const int d = field.at(pose.cell());
  if (d == DistanceField::kUnreachable)
    return std::numeric_limits<double>::infinity();
  return static_cast<double>(d);
}

Trajectory expert_trajectory(const Scene& scene, const EpisodeSpec& episode,
                             int patch_side, int t_max) {
  const DistanceField field = geodesic_field(scene, {episode.goal});
  Trajectory traj;
  traj.episode = episode;
  Pose pose = episode.start;
  traj.poses.push_back(pose);
  for (int t = 1; t <= t_max; ++t) {
    const Action a = expert_action(scene, pose, field, episode.goal_region);
    traj.observations.push_back(render_observation(scene, pose, patch_side));
    traj.actions.push_back(a);
    traj.takeover.push_back(false);
    traj.expert_actions.push_back(a);
    pose = step(scene, pose, a).pose;
    traj.poses.push_back(pose);
    if (a == Action::Stop) break;
  }
  return traj;
}

Trajectory collect_rollout(const ParamStore& params, const ModelConfig& cfg,
                           const Scene& scene, const EpisodeSpec& episode,
                           const LoopConfig& lcfg, int t_max,
                           const RolloutPolicy& policy) {
  const DistanceField goal_field = geodesic_field(scene, {episode.goal});
  const DistanceField path_field = geodesic_field(scene, episode.reference_path);

  bool taken_over = false;
  std::vector<Action> expert_labels;
  auto interceptor = [&](int, const Pose& pose, Action proposed) {
    const int dev = path_field.at(pose.cell());
    if (!taken_over &&
        (dev == DistanceField::kUnreachable || dev > lcfg.dev_threshold)) {
      taken_over = true;
    }
    const Action expert = expert_action(scene, pose, goal_field, episode.goal_region);
    expert_labels.push_back(expert);
    return StepDecision{taken_over ? expert : proposed, taken_over};
  };

  EnvSession session(scene, episode.start, cfg.k);
  Trajectory traj = rollout(params, cfg, session, episode.instruction, t_max,
                            policy, interceptor);
  traj.episode = episode;
  traj.expert_actions = std::move(expert_labels);
  return traj;
}

std::vector<Trajectory> aggregate_buffers(
    const std::vector<std::vector<Trajectory>>& rounds, bool aggregate) {
  if (rounds.empty())
    throw std::invalid_argument("aggregate_buffers: no rounds collected");
  std::vector<Trajectory> out;
  if (aggregate) {
    for (const auto& r : rounds) out.insert(out.end(), r.begin(), r.end());
  } else {
    out = rounds.back();
  }
  if (out.empty()) throw std::runtime_error("aggregate_buffers: empty union");
  return out;
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "round,SR,SPL,NE,OSR,nDTW\n";
  for (const CurveRow& r : rows) {
    out << r.round << "," << r.sr << "," << r.spl << "," << r.ne << "," << r.osr
        << "," << r.ndtw << "\n";
  }
  return out.str();
}

std::vector<EpisodeSpec> sample_episodes(const SceneSet& scenes, int count,
                                         uint64_t seed, const EpisodeGenConfig& egen,
                                         const std::string& stream_tag) {
  if (scenes.empty()) throw std::invalid_argument("sample_episodes: no scenes");
  uint64_t tag = 0;
  for (char c : stream_tag) tag = tag * 131 + static_cast<unsigned char>(c);
  std::vector<const Scene*> ordered;
  for (const auto& [id, scene] : scenes) ordered.push_back(&scene);
  std::vector<EpisodeSpec> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Scene& scene = *ordered[static_cast<size_t>(i) % ordered.size()];
    out.push_back(generate_episode(
        scene, Rng::mix(Rng::mix(seed, tag), static_cast<uint64_t>(i)), egen));
  }
  return out;
}

namespace {

int effective_t_max(const LoopConfig& lcfg, const Scene& scene,
                    std::map<std::string, int>& diameter_cache) {
  if (lcfg.t_max > 0) return lcfg.t_max;
  auto it = diameter_cache.find(scene.id);
  if (it == diameter_cache.end())
    it = diameter_cache.emplace(scene.id, scene_diameter(scene)).first;
  return std::max(4, 4 * it->second);
}

}  // namespace

FlywheelResult run_flywheel(ParamStore& params, const ModelConfig& cfg,
                            const SceneSet& train_scenes,
                            const SceneSet& heldout_scenes,
                            const LoopConfig& lcfg, const TrainConfig& tcfg,
                            const EpisodeGenConfig& egen, const EvalConfig& ecfg,
                            uint64_t seed, const FlywheelIO& io,
                            bool skip_bootstrap) {
  lcfg.validate();
  tcfg.validate();
  if (train_scenes.empty()) throw std::invalid_argument("run_flywheel: no train scenes");
  if (heldout_scenes.empty())
    throw std::invalid_argument("run_flywheel: no held-out scenes");

  std::map<std::string, int> diameters;
  FlywheelResult result;

  const std::vector<EpisodeSpec> eval_episodes = sample_episodes(
      heldout_scenes, lcfg.eval_episodes, seed, egen, "eval");
  int eval_t_max = lcfg.t_max;
  if (eval_t_max == 0) {
    for (const auto& [id, scene] : heldout_scenes)
      eval_t_max = std::max(eval_t_max, 4 * scene_diameter(scene));
  }

  auto evaluate_round = [&](int round) {
    const MetricsReport report =
        evaluate(params, cfg, heldout_scenes, eval_episodes, eval_t_max, ecfg);
    result.curve.push_back(CurveRow{round, report.sr, report.spl, report.ne_mean,
                                    report.osr, report.ndtw});
  };

  auto train_on = [&](int round, const std::vector<Trajectory>& buffer) {
    TrainConfig round_cfg = tcfg;
    round_cfg.seed = Rng::mix(seed, 9000 + static_cast<uint64_t>(round));
    const auto records = train_round(params, cfg, buffer, round_cfg, round);
    result.losses.insert(result.losses.end(), records.begin(), records.end());
  };

  int first_round = 1;
  if (!skip_bootstrap) {
    std::vector<Trajectory> bootstrap;
    const auto episodes = sample_episodes(train_scenes, lcfg.bootstrap_count(),
                                          seed, egen, "bootstrap");
    for (const EpisodeSpec& ep : episodes) {
      const Scene& scene = train_scenes.at(ep.scene_id);
      Trajectory t = expert_trajectory(scene, ep, cfg.k,
                                       effective_t_max(lcfg, scene, diameters));
      t.source_round = 0;
      bootstrap.push_back(std::move(t));
    }
    result.round_buffers.push_back(std::move(bootstrap));
    train_on(0, aggregate_buffers(result.round_buffers, lcfg.aggregate));
    if (io.on_trajectories) io.on_trajectories(0, result.round_buffers.back());
    if (io.on_checkpoint) io.on_checkpoint(0, params);
    evaluate_round(0);
  }

  for (int round = first_round; round <= lcfg.rounds; ++round) {
    std::vector<Trajectory> collected;
    const auto episodes =
        sample_episodes(train_scenes, lcfg.episodes_per_round,
                        Rng::mix(seed, static_cast<uint64_t>(round)), egen, "loop");
    for (const EpisodeSpec& ep : episodes) {
      const Scene& scene = train_scenes.at(ep.scene_id);
      Trajectory t = collect_rollout(params, cfg, scene, ep, lcfg,
                                     effective_t_max(lcfg, scene, diameters));
      t.source_round = round;
      collected.push_back(std::move(t));
    }
    result.round_buffers.push_back(std::move(collected));
    train_on(round, aggregate_buffers(result.round_buffers, lcfg.aggregate));
    if (io.on_trajectories) io.on_trajectories(round, result.round_buffers.back());
    if (io.on_checkpoint) io.on_checkpoint(round, params);
    evaluate_round(round);
  }
  return result;
}

int replay_check(const Scene& scene, const Trajectory& traj) {
  traj.validate();
  Pose pose = traj.poses.front();
  for (int t = 0; t < traj.length(); ++t) {
    pose = step(scene, pose, traj.actions[static_cast<size_t>(t)]).pose;
    if (!(pose == traj.poses[static_cast<size_t>(t) + 1])) return t + 1;
  }
  return 0;
}

}  // namespace gridpilot
