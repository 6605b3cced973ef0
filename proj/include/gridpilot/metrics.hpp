#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridpilot/infer.hpp"
#include "gridpilot/trajectory.hpp"

namespace gridpilot {

using SceneSet = std::map<std::string, Scene>;

struct EvalConfig {
  int d_succ = 2;  // success radius in cells
  RolloutPolicy policy;
};

struct EpisodeMetrics {
  std::string episode_id;
  double ne = 0.0;
  int success = 0;
  int oracle_success = 0;
  double spl_term = 0.0;
  double ndtw = 0.0;
  int path_cells = 0;
  int shortest_cells = 0;
  bool excluded = false;  // start inside the goal region (zero-length shortest path)
};

struct MetricsReport {
  int n_episodes = 0;
  double ne_mean = 0.0;
  double sr = 0.0;
  double osr = 0.0;
  double spl = 0.0;
  double ndtw = 0.0;
  std::vector<EpisodeMetrics> episodes;

  std::string to_csv() const;
  std::string to_text() const;
};

// Geodesic distance from the final cell to the goal; unreachable cells come
// back as +infinity and count as failures.
double navigation_error(const Scene& scene, const Pose& final_pose, Cell goal);

int success(double ne, int d_succ);

// 1 iff any visited cell comes within d_succ of the goal.
int oracle_success(const Scene& scene, const std::vector<Pose>& poses, Cell goal,
                   int d_succ);

// (1/N) * sum S_i * l_i / max(p_i, l_i). Episodes with l_i = 0 are excluded.
double spl(const std::vector<int>& successes, const std::vector<int>& shortest,
           const std::vector<int>& path_lengths);

// DTW over monotone alignments with Euclidean point distance, normalized as
// exp(-DTW / (|R| * d_succ)).
double dtw_distance(const std::vector<Cell>& reference, const std::vector<Cell>& query);
double ndtw(const std::vector<Cell>& reference, const std::vector<Cell>& query,
            int d_succ);

// Metrics for one finished trajectory against its episode spec.
EpisodeMetrics score_trajectory(const Scene& scene, const Trajectory& traj,
                                int d_succ);

MetricsReport aggregate_metrics(const std::vector<EpisodeMetrics>& episodes);

// Greedy rollout per episode followed by aggregation.
MetricsReport evaluate(const ParamStore& params, const ModelConfig& cfg,
                       const SceneSet& scenes, const std::vector<EpisodeSpec>& episodes,
                       int t_max, const EvalConfig& ecfg = {});

}  // namespace gridpilot
