#include "gridpilot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gridpilot {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

double navigation_error(const Scene& scene, const Pose& final_pose, Cell goal) {
  const DistanceField field = geodesic_field(scene, {goal});
  const int d = field.at(final_pose.cell());
  if (d == DistanceField::kUnreachable)
    return std::numeric_limits<double>::infinity();
  return static_cast<double>(d);
}

int success(double ne, int d_succ) { return ne <= static_cast<double>(d_succ) ? 1 : 0; }

int oracle_success(const Scene& scene, const std::vector<Pose>& poses, Cell goal,
                   int d_succ) {
  if (poses.empty()) throw std::invalid_argument("oracle_success: empty pose list");
  const DistanceField field = geodesic_field(scene, {goal});
  for (const Pose& p : poses) {
    const int d = field.at(p.cell());
    if (d != DistanceField::kUnreachable && d <= d_succ) return 1;
  }
  return 0;
}

double spl(const std::vector<int>& successes, const std::vector<int>& shortest,
           const std::vector<int>& path_lengths) {
  if (successes.size() != shortest.size() || successes.size() != path_lengths.size())
    throw std::invalid_argument("spl: input lists must have equal length");
  double total = 0.0;
  int counted = 0;
  for (size_t i = 0; i < successes.size(); ++i) {
    if (shortest[i] <= 0) continue;  // degenerate episode, excluded upstream
    ++counted;
    const double denom = static_cast<double>(std::max(path_lengths[i], shortest[i]));
    total += successes[i] * static_cast<double>(shortest[i]) / denom;
  }
  return counted > 0 ? total / counted : 0.0;
}

double dtw_distance(const std::vector<Cell>& reference, const std::vector<Cell>& query) {
  if (reference.empty() || query.empty())
    throw std::invalid_argument("dtw: paths must be non-empty");
  const size_t n = reference.size();
  const size_t m = query.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), curr(m + 1, inf);
  prev[0] = 0.0;
  for (size_t i = 1; i <= n; ++i) {
    curr[0] = inf;
    for (size_t j = 1; j <= m; ++j) {
      const double dx = reference[i - 1].x - query[j - 1].x;
      const double dy = reference[i - 1].y - query[j - 1].y;
      const double cost = std::sqrt(dx * dx + dy * dy);
      curr[j] = cost + std::min({prev[j], curr[j - 1], prev[j - 1]});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

double ndtw(const std::vector<Cell>& reference, const std::vector<Cell>& query,
            int d_succ) {
  const double d = dtw_distance(reference, query);
  return std::exp(-d / (static_cast<double>(reference.size()) * d_succ));
}

EpisodeMetrics score_trajectory(const Scene& scene, const Trajectory& traj,
                                int d_succ) {
  EpisodeMetrics m;
  m.episode_id = traj.episode.id();
  m.ne = navigation_error(scene, traj.poses.back(), traj.episode.goal);
  m.success = success(m.ne, d_succ);
  m.oracle_success = oracle_success(scene, traj.poses, traj.episode.goal, d_succ);
  m.path_cells = traj.path_cells();
  m.shortest_cells = static_cast<int>(traj.episode.reference_path.size()) - 1;
  if (m.shortest_cells <= 0) {
    m.excluded = true;
    m.spl_term = 0.0;
  } else {
    const double denom =
        static_cast<double>(std::max(m.path_cells, m.shortest_cells));
    m.spl_term = m.success * static_cast<double>(m.shortest_cells) / denom;
  }
  m.ndtw = ndtw(traj.episode.reference_path, traj.visited_cells(), d_succ);
  return m;
}

MetricsReport aggregate_metrics(const std::vector<EpisodeMetrics>& episodes) {
  MetricsReport report;
  report.episodes = episodes;
  int counted = 0;
  int spl_counted = 0;
  for (const EpisodeMetrics& m : episodes) {
    ++counted;
    report.ne_mean += m.ne;
    report.sr += m.success;
    report.osr += m.oracle_success;
    report.ndtw += m.ndtw;
    if (!m.excluded) {
      report.spl += m.spl_term;
      ++spl_counted;
    }
  }
  report.n_episodes = counted;
  if (counted > 0) {
    report.ne_mean /= counted;
    report.sr /= counted;
    report.osr /= counted;
    report.ndtw /= counted;
  }
  report.spl = spl_counted > 0 ? report.spl / spl_counted : 0.0;
  return report;
}

MetricsReport evaluate(const ParamStore& params, const ModelConfig& cfg,
                       const SceneSet& scenes, const std::vector<EpisodeSpec>& episodes,
                       int t_max, const EvalConfig& ecfg) {
  if (episodes.empty()) throw std::invalid_argument("evaluate: no episodes");
  std::vector<EpisodeMetrics> per_episode;
  per_episode.reserve(episodes.size());
  for (const EpisodeSpec& ep : episodes) {
    auto it = scenes.find(ep.scene_id);
    if (it == scenes.end())
      throw std::runtime_error("evaluate: unknown scene \"" + ep.scene_id + "\"");
    EnvSession session(it->second, ep.start, cfg.k);
    Trajectory traj = rollout(params, cfg, session, ep.instruction, t_max, ecfg.policy);
    traj.episode = ep;
    per_episode.push_back(score_trajectory(it->second, traj, ecfg.d_succ));
  }
  return aggregate_metrics(per_episode);
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out << "episode_id,NE,success,oracle_success,spl,nDTW,path_cells,shortest_cells\n";
  for (const EpisodeMetrics& m : episodes) {
    out << m.episode_id << "," << fmt(m.ne) << "," << m.success << ","
        << m.oracle_success << "," << fmt(m.spl_term) << "," << fmt(m.ndtw) << ","
        << m.path_cells << "," << m.shortest_cells << "\n";
  }
  out << "summary," << fmt(ne_mean) << "," << fmt(sr) << "," << fmt(osr) << ","
      << fmt(spl) << "," << fmt(ndtw) << "," << n_episodes << ",-\n";
  return out.str();
}

std::string MetricsReport::to_text() const {
  std::ostringstream out;
  out << "episodes: " << n_episodes << "\n";
  out << "NE (cells): " << ne_mean << "\n";
  out << "SR:   " << sr << "\n";
  out << "OSR:  " << osr << "\n";
  out << "SPL:  " << spl << "\n";
  out << "nDTW: " << ndtw << "\n";
  return out.str();
}

}  // namespace gridpilot
