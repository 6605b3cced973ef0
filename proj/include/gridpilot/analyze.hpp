#pragma once

#include <string>
#include <vector>

#include "gridpilot/metrics.hpp"

namespace gridpilot {

struct LatentSample {
  std::vector<double> z;
  Action action = Action::Fwd;
  std::string episode_id;
  int step = 0;  // 1-based
};

// Greedy rollouts over the episodes; one sample per executed non-STOP step.
std::vector<LatentSample> collect_latents(const ParamStore& params,
                                          const ModelConfig& cfg,
                                          const SceneSet& scenes,
                                          const std::vector<EpisodeSpec>& episodes,
                                          int t_max);

struct PcaResult {
  // n x k projection onto the leading components, mean-centered input.
  std::vector<std::vector<double>> projection;
  std::vector<double> explained_variance_ratios;  // one per component, descending
  std::vector<std::vector<double>> components;    // k rows of dimension d
  double total_variance = 0.0;
  bool rank_deficient = false;
};

// From-scratch PCA: mean-center, eigendecompose the covariance (cyclic
// Jacobi), order by descending eigenvalue. Sign convention: the first
// coordinate of each component with |value| > 1e-12 is positive. Covariance
// uses the 1/n normalization so duplicated point sets are invariant.
PcaResult pca(const std::vector<std::vector<double>>& points, int k);

struct CollapseReport {
  int n_samples = 0;
  double total_variance = 0.0;
  double top1_ratio = 0.0;
  double silhouette = 0.0;
  bool collapsed = false;
  std::vector<std::pair<std::string, std::vector<double>>> centroids;  // per action
  std::vector<std::pair<std::string, double>> centroid_distances;      // pairwise
  PcaResult projection;  // 2D
  std::vector<Action> actions;  // aligned with projection rows

  std::string to_json() const;
  std::string to_text() const;
  std::string projection_csv() const;  // columns x,y,action_name
};

// Mean silhouette coefficient over the given labels; singleton clusters score 0.
double silhouette_score(const std::vector<std::vector<double>>& points,
                        const std::vector<int>& labels);

// STOP samples are dropped; requires >= 10 samples spanning >= 2 actions.
CollapseReport collapse_report(const std::vector<LatentSample>& samples);

}  // namespace gridpilot
