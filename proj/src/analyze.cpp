#include "gridpilot/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridpilot {

std::vector<LatentSample> collect_latents(const ParamStore& params,
                                          const ModelConfig& cfg,
                                          const SceneSet& scenes,
                                          const std::vector<EpisodeSpec>& episodes,
                                          int t_max) {
  std::vector<LatentSample> out;
  for (const EpisodeSpec& ep : episodes) {
    auto it = scenes.find(ep.scene_id);
    if (it == scenes.end())
      throw std::runtime_error("collect_latents: unknown scene \"" + ep.scene_id + "\"");
    EnvSession session(it->second, ep.start, cfg.k);
    const Trajectory traj = rollout(params, cfg, session, ep.instruction, t_max);
    for (int t = 0; t < traj.length(); ++t) {
      if (traj.actions[static_cast<size_t>(t)] == Action::Stop) continue;
      LatentSample s;
      s.z = traj.pilots[static_cast<size_t>(t)].data;
      s.action = traj.actions[static_cast<size_t>(t)];
      s.episode_id = ep.id();
      s.step = t + 1;
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& values,
                  std::vector<std::vector<double>>& vectors) {
  const size_t n = a.size();
  vectors.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (size_t i = 0; i < n; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (size_t i = 0; i < n; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (size_t i = 0; i < n; ++i) {
          const double vip = vectors[i][p], viq = vectors[i][q];
          vectors[i][p] = c * vip - s * viq;
          vectors[i][q] = s * vip + c * viq;
        }
      }
    }
  }
  values.resize(n);
  for (size_t i = 0; i < n; ++i) values[i] = a[i][i];
}

const char* action_label_name(Action a) { return action_name(a); }

}  // namespace

PcaResult pca(const std::vector<std::vector<double>>& points, int k) {
  const int n = static_cast<int>(points.size());
  if (n < 2) throw std::invalid_argument("pca: need at least 2 points");
  const int d = static_cast<int>(points[0].size());
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != d)
      throw std::invalid_argument("pca: inconsistent point dimensions");
  }
  if (k < 1 || k > std::min(n, d))
    throw std::invalid_argument("pca: k must be within 1..min(n,d)");

  std::vector<double> mean(static_cast<size_t>(d), 0.0);
  for (const auto& p : points)
    for (int j = 0; j < d; ++j) mean[static_cast<size_t>(j)] += p[static_cast<size_t>(j)];
  for (double& m : mean) m /= n;

  // Covariance with 1/n so duplicating the sample leaves it unchanged.
  std::vector<std::vector<double>> cov(static_cast<size_t>(d),
                                       std::vector<double>(static_cast<size_t>(d), 0.0));
  for (const auto& p : points) {
    for (int i = 0; i < d; ++i) {
      const double di = p[static_cast<size_t>(i)] - mean[static_cast<size_t>(i)];
      for (int j = i; j < d; ++j) {
        cov[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
            di * (p[static_cast<size_t>(j)] - mean[static_cast<size_t>(j)]);
      }
    }
  }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      cov[static_cast<size_t>(i)][static_cast<size_t>(j)] /= n;
      cov[static_cast<size_t>(j)][static_cast<size_t>(i)] =
          cov[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }

  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  jacobi_eigen(cov, values, vectors);

  std::vector<int> idx(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) idx[static_cast<size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return values[static_cast<size_t>(a)] > values[static_cast<size_t>(b)]; });

  PcaResult result;
  for (int i = 0; i < d; ++i)
    result.total_variance += std::max(0.0, values[static_cast<size_t>(i)]);

  for (int c = 0; c < k; ++c) {
    const int col = idx[static_cast<size_t>(c)];
    std::vector<double> comp(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) comp[static_cast<size_t>(i)] = vectors[static_cast<size_t>(i)][static_cast<size_t>(col)];
    // Sign convention: first coordinate with |value| > 1e-12 made positive.
    for (double v : comp) {
      if (std::abs(v) > 1e-12) {
        if (v < 0)
          for (double& x : comp) x = -x;
        break;
      }
    }
    const double ev = std::max(0.0, values[static_cast<size_t>(col)]);
    result.explained_variance_ratios.push_back(
        result.total_variance > 0 ? ev / result.total_variance : 0.0);
    if (ev <= 1e-12) result.rank_deficient = true;
    result.components.push_back(std::move(comp));
  }

  result.projection.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(k), 0.0));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < k; ++c) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        acc += (points[static_cast<size_t>(r)][static_cast<size_t>(j)] - mean[static_cast<size_t>(j)]) *
               result.components[static_cast<size_t>(c)][static_cast<size_t>(j)];
      }
      result.projection[static_cast<size_t>(r)][static_cast<size_t>(c)] = acc;
    }
  }
  return result;
}

double silhouette_score(const std::vector<std::vector<double>>& points,
                        const std::vector<int>& labels) {
  const size_t n = points.size();
  if (n != labels.size())
    throw std::invalid_argument("silhouette: points/labels size mismatch");
  if (n < 2) throw std::invalid_argument("silhouette: need at least 2 points");

  std::map<int, int> cluster_sizes;
  for (int l : labels) cluster_sizes[l] += 1;
  if (cluster_sizes.size() < 2)
    throw std::invalid_argument("silhouette: need at least 2 clusters");

  auto dist = [&](size_t a, size_t b) {
    double acc = 0.0;
    for (size_t j = 0; j < points[a].size(); ++j) {
      const double d = points[a][j] - points[b][j];
      acc += d * d;
    }
    return std::sqrt(acc);
  };

  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (cluster_sizes[labels[i]] == 1) continue;  // convention: s = 0
    std::map<int, double> sums;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[labels[j]] += dist(i, j);
    }
    const double a = sums[labels[i]] / (cluster_sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, sum] : sums) {
      if (label == labels[i]) continue;
      b = std::min(b, sum / cluster_sizes[label]);
    }
    const double denom = std::max(a, b);
    total += denom > 0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

CollapseReport collapse_report(const std::vector<LatentSample>& samples) {
  std::vector<const LatentSample*> kept;
  for (const LatentSample& s : samples) {
    if (s.action == Action::Stop) continue;  // excluded per its low frequency
    kept.push_back(&s);
  }
  if (kept.size() < 10)
    throw std::invalid_argument("collapse_report: need >= 10 non-STOP samples, got " +
                                std::to_string(kept.size()));
  std::map<int, int> per_action;
  for (const auto* s : kept) per_action[static_cast<int>(s->action)] += 1;
  if (per_action.size() < 2)
    throw std::invalid_argument("collapse_report: need >= 2 distinct actions");

  CollapseReport report;
  report.n_samples = static_cast<int>(kept.size());

  std::vector<std::vector<double>> points;
  std::vector<int> labels;
  for (const auto* s : kept) {
    points.push_back(s->z);
    labels.push_back(static_cast<int>(s->action));
    report.actions.push_back(s->action);
  }

  report.projection = pca(points, std::min<int>(2, static_cast<int>(points[0].size())));
  report.total_variance = report.projection.total_variance;
  report.top1_ratio = report.projection.explained_variance_ratios.empty()
                          ? 0.0
                          : report.projection.explained_variance_ratios[0];
  report.collapsed = report.total_variance <= 1e-12;

  // Centroids and pairwise distances in the full latent space.
  const size_t d = points[0].size();
  std::map<int, std::vector<double>> centroid;
  for (size_t i = 0; i < points.size(); ++i) {
    auto& c = centroid[labels[i]];
    if (c.empty()) c.assign(d, 0.0);
    for (size_t j = 0; j < d; ++j) c[j] += points[i][j];
  }
  for (auto& [label, c] : centroid)
    for (double& v : c) v /= per_action[label];
  for (const auto& [label, c] : centroid)
    report.centroids.emplace_back(action_label_name(static_cast<Action>(label)), c);
  for (auto a = centroid.begin(); a != centroid.end(); ++a) {
    for (auto b = std::next(a); b != centroid.end(); ++b) {
      double acc = 0.0;
      for (size_t j = 0; j < d; ++j) {
        const double diff = a->second[j] - b->second[j];
        acc += diff * diff;
      }
      report.centroid_distances.emplace_back(
          std::string(action_label_name(static_cast<Action>(a->first))) + "-" +
              action_label_name(static_cast<Action>(b->first)),
          std::sqrt(acc));
    }
  }

  if (report.collapsed) {
    report.silhouette = 0.0;
  } else {
    report.silhouette = silhouette_score(report.projection.projection, labels);
  }
  return report;
}

std::string CollapseReport::projection_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,action_name\n";
  for (size_t i = 0; i < projection.projection.size(); ++i) {
    const auto& row = projection.projection[i];
    out << row[0] << "," << (row.size() > 1 ? row[1] : 0.0) << ","
        << action_label_name(actions[i]) << "\n";
  }
  return out.str();
}

std::string CollapseReport::to_json() const {
  nlohmann::json j;
  j["n_samples"] = n_samples;
  j["total_variance"] = total_variance;
  j["top1_explained_variance_ratio"] = top1_ratio;
  j["silhouette"] = silhouette;
  j["collapsed"] = collapsed;
  nlohmann::json cents = nlohmann::json::object();
  for (const auto& [name, c] : centroids) cents[name] = c;
  j["centroids"] = std::move(cents);
  nlohmann::json dists = nlohmann::json::object();
  for (const auto& [name, v] : centroid_distances) dists[name] = v;
  j["centroid_distances"] = std::move(dists);
  j["explained_variance_ratios"] = projection.explained_variance_ratios;
  return j.dump(2);
}

std::string CollapseReport::to_text() const {
  std::ostringstream out;
  out << "samples: " << n_samples << "\n";
  out << "total latent variance: " << total_variance << "\n";
  out << "top-1 explained variance ratio: " << top1_ratio << "\n";
  out << "mean silhouette (actions, 2D): " << silhouette << "\n";
  out << "verdict: " << (collapsed ? "COLLAPSED" : "structured") << "\n";
  for (const auto& [name, v] : centroid_distances)
    out << "centroid distance " << name << ": " << v << "\n";
  return out.str();
}

}  // namespace gridpilot
