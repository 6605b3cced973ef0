#include "gridpilot/episode.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "gridpilot/rng.hpp"

namespace gridpilot {

namespace vocab {

namespace {

// 7 keywords + 6 landmark names + run lengths 1..20 = 33 tokens.
const std::vector<std::string>& table() {
  static const std::vector<std::string> t = [] {
    std::vector<std::string> v = {"go",   "forward", "turn", "left",
                                  "right", "stop",    "at"};
    for (char c = 'a'; c <= 'f'; ++c) v.emplace_back(1, c);
    for (int n = 1; n <= 20; ++n) v.push_back(std::to_string(n));
    return v;
  }();
  return t;
}

}  // namespace

int size() { return static_cast<int>(table().size()); }

const std::string& token_name(int id) {
  if (id < 0 || id >= size()) throw std::out_of_range("vocab: bad token id");
  return table()[static_cast<size_t>(id)];
}

int token_id(const std::string& name) {
  const auto& t = table();
  for (size_t i = 0; i < t.size(); ++i)
    if (t[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("vocab: unknown token \"" + name + "\"");
}

std::string decode(const std::vector<int>& ids) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += token_name(ids[i]);
  }
  return out;
}

}  // namespace vocab

namespace {

constexpr int kMaxRunToken = 20;

std::optional<int> landmark_near(const Scene& scene, Cell c) {
  // The cell itself first, then neighbors in N,E,S,W order.
  const Cell probes[5] = {c, {c.x, c.y - 1}, {c.x + 1, c.y}, {c.x, c.y + 1},
                          {c.x - 1, c.y}};
  for (const Cell& p : probes) {
    const CellClass cls = scene.at(p);
    if (cls >= CellClass::LandmarkA && cls <= CellClass::LandmarkF) {
      return static_cast<int>(cls) - static_cast<int>(CellClass::LandmarkA);
    }
  }
  return std::nullopt;
}

Heading edge_heading(Cell from, Cell to) {
  for (int h = 0; h < 4; ++h) {
    const Cell d = heading_delta(static_cast<Heading>(h));
    if (from.x + d.x == to.x && from.y + d.y == to.y)
      return static_cast<Heading>(h);
  }
  throw std::logic_error("reference path cells are not adjacent");
}

void emit_run(std::vector<int>& out, int cells) {
  while (cells > 0) {
    const int n = std::min(cells, kMaxRunToken);
    out.push_back(vocab::token_id("go"));
    out.push_back(vocab::token_id("forward"));
    out.push_back(vocab::token_id(std::to_string(n)));
    cells -= n;
  }
}

std::vector<int> build_tokens(const std::vector<Cell>& path, const Scene& scene,
                              bool with_landmarks) {
  std::vector<int> out;
  const int at_id = vocab::token_id("at");
  const int lm_base = vocab::token_id("a");

  if (path.size() >= 2) {
    Heading dir = edge_heading(path[0], path[1]);
    int run_cells = 2;  // the run's start cell plus the first move
    for (size_t i = 1; i + 1 < path.size(); ++i) {
      const Heading next = edge_heading(path[i], path[i + 1]);
      if (next == dir) {
        ++run_cells;
        continue;
      }
      emit_run(out, run_cells);
      out.push_back(vocab::token_id("turn"));
      out.push_back(next == rotate_left(dir) ? vocab::token_id("left")
                                             : vocab::token_id("right"));
      if (with_landmarks) {
        if (auto lm = landmark_near(scene, path[i])) {
          out.push_back(at_id);
          out.push_back(lm_base + *lm);
        }
      }
      dir = next;
      run_cells = 2;
    }
    emit_run(out, run_cells);
  }
  out.push_back(vocab::token_id("stop"));
  if (with_landmarks) {
    if (auto lm = landmark_near(scene, path.back())) {
      out.push_back(at_id);
      out.push_back(lm_base + *lm);
    }
  }
  return out;
}

}  // namespace

std::vector<int> generate_instruction(const std::vector<Cell>& reference_path,
                                      const Scene& scene, int max_len) {
  if (reference_path.empty())
    throw std::invalid_argument("generate_instruction: empty reference path");
  std::vector<int> out = build_tokens(reference_path, scene, true);
  if (static_cast<int>(out.size()) > max_len)
    out = build_tokens(reference_path, scene, false);
  if (static_cast<int>(out.size()) > max_len) {
    out.resize(static_cast<size_t>(max_len));
    out.back() = vocab::token_id("stop");
  }
  return out;
}

EpisodeSpec generate_episode(const Scene& scene, uint64_t rng_seed,
                             const EpisodeGenConfig& config) {
  const auto floors = scene.walkable_cells();
  if (floors.size() < 2)
    throw std::runtime_error("generate_episode: scene has fewer than 2 walkable cells");

  Rng rng(rng_seed);
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    const Cell start_cell = floors[rng.below(floors.size())];
    const Heading heading = static_cast<Heading>(rng.below(4));
    const Cell goal = floors[rng.below(floors.size())];
    const DistanceField field = geodesic_field(scene, {goal});
    const int d = field.at(start_cell);
    if (d == DistanceField::kUnreachable || d < config.min_len) continue;

    EpisodeSpec spec;
    spec.scene_id = scene.id;
    spec.seed = rng_seed;
    spec.start = Pose{start_cell.x, start_cell.y, heading};
    spec.goal = goal;
    for (int y = 0; y < scene.height; ++y) {
      for (int x = 0; x < scene.width; ++x) {
        const int v = field.at(x, y);
        if (v != DistanceField::kUnreachable && v <= config.r_goal)
          spec.goal_region.push_back({x, y});
      }
    }

    // Walk the follower so the reference matches its trajectory cell-for-cell.
    Pose pose = spec.start;
    spec.reference_path.push_back(pose.cell());
    for (;;) {
      const Action a = expert_action(scene, pose, field, spec.goal_region);
      if (a == Action::Stop) break;
      const StepResult r = step(scene, pose, a);
      if (a == Action::Fwd) spec.reference_path.push_back(r.pose.cell());
      pose = r.pose;
    }
    spec.instruction = generate_instruction(spec.reference_path, scene,
                                            config.max_instruction_len);
    return spec;
  }
  throw std::runtime_error(
      "generate_episode: no start/goal pair at distance >= " +
      std::to_string(config.min_len) + " after " +
      std::to_string(config.max_retries) + " retries on scene \"" + scene.id +
      "\"");
}

}  // namespace gridpilot
