#include "gridpilot/grid.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace gridpilot {

namespace {

const char kClassChars[kCellClassCount] = {'#', '.', 'A', 'B', 'C', 'D', 'E', 'F'};

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw std::runtime_error("scene parse error at line " + std::to_string(line) +
                           ": " + msg);
}

}  // namespace

char cell_class_to_char(CellClass c) { return kClassChars[static_cast<int>(c)]; }

bool cell_class_from_char(char ch, CellClass& out) {
  for (int i = 0; i < kCellClassCount; ++i) {
    if (kClassChars[i] == ch) {
      out = static_cast<CellClass>(i);
      return true;
    }
  }
  return false;
}

const char* action_name(Action a) {
  switch (a) {
    case Action::Fwd: return "FWD";
    case Action::Left: return "LEFT";
    case Action::Right: return "RIGHT";
    case Action::Stop: return "STOP";
  }
  return "?";
}

const char* heading_name(Heading h) {
  switch (h) {
    case Heading::N: return "N";
    case Heading::E: return "E";
    case Heading::S: return "S";
    case Heading::W: return "W";
  }
  return "?";
}

Cell heading_delta(Heading h) {
  switch (h) {
    case Heading::N: return {0, -1};
    case Heading::E: return {1, 0};
    case Heading::S: return {0, 1};
    case Heading::W: return {-1, 0};
  }
  return {0, 0};
}

Heading rotate_left(Heading h) {
  return static_cast<Heading>((static_cast<int>(h) + 3) % 4);
}

Heading rotate_right(Heading h) {
  return static_cast<Heading>((static_cast<int>(h) + 1) % 4);
}

std::vector<Cell> Scene::walkable_cells() const {
  std::vector<Cell> out;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (walkable(x, y)) out.push_back({x, y});
  return out;
}

Scene load_scene(const std::string& text, const std::string& id) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) parse_fail(1, "empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::istringstream header(line);
  std::string magic, version;
  int w = 0, h = 0;
  if (!(header >> magic >> version >> w >> h) || magic != "SCENE" ||
      version != "v1") {
    parse_fail(1, "expected header \"SCENE v1 <W> <H>\"");
  }
  if (w <= 0 || h <= 0) parse_fail(1, "non-positive dimensions");

  Scene scene;
  scene.width = w;
  scene.height = h;
  scene.id = id;
  scene.cells.reserve(static_cast<size_t>(w) * h);

  int row = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && row == h) break;  // tolerate one trailing blank line
    if (row >= h) parse_fail(line_no, "more body rows than header height");
    if (static_cast<int>(line.size()) != w) {
      parse_fail(line_no, "row has " + std::to_string(line.size()) +
                              " cells, expected " + std::to_string(w));
    }
    for (char ch : line) {
      CellClass c;
      if (!cell_class_from_char(ch, c)) {
        parse_fail(line_no, std::string("unknown cell character '") + ch + "'");
      }
      scene.cells.push_back(c);
    }
    ++row;
  }
  if (row != h) {
    parse_fail(line_no + 1, "expected " + std::to_string(h) +
                                " body rows, got " + std::to_string(row));
  }
  bool any_walkable =
      std::any_of(scene.cells.begin(), scene.cells.end(),
                  [](CellClass c) { return c != CellClass::Wall; });
  if (!any_walkable) parse_fail(1, "scene has no walkable cell");
  return scene;
}

std::string scene_to_text(const Scene& scene) {
  std::string out = "SCENE v1 " + std::to_string(scene.width) + " " +
                    std::to_string(scene.height) + "\n";
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x)
      out.push_back(cell_class_to_char(scene.at(x, y)));
    out.push_back('\n');
  }
  return out;
}

StepResult step(const Scene& scene, const Pose& pose, Action action) {
  StepResult r{pose, false};
  switch (action) {
    case Action::Fwd: {
      const Cell d = heading_delta(pose.heading);
      const int nx = pose.x + d.x;
      const int ny = pose.y + d.y;
      if (scene.walkable(nx, ny)) {
        r.pose.x = nx;
        r.pose.y = ny;
      } else {
        r.collided = true;
      }
      break;
    }
    case Action::Left:
      r.pose.heading = rotate_left(pose.heading);
      break;
    case Action::Right:
      r.pose.heading = rotate_right(pose.heading);
      break;
    case Action::Stop:
      break;
  }
  return r;
}

Observation render_observation(const Scene& scene, const Pose& pose, int k) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("patch side must be odd");
  Observation obs;
  obs.k = k;
  obs.patch.resize(static_cast<size_t>(k) * k);
  const Cell fwd = heading_delta(pose.heading);
  const Cell right = heading_delta(rotate_right(pose.heading));
  const int half = k / 2;
  for (int row = 0; row < k; ++row) {
    const int ahead = (k - 1) - row;  // agent occupies the bottom row
    for (int col = 0; col < k; ++col) {
      const int side = col - half;
      const int x = pose.x + fwd.x * ahead + right.x * side;
      const int y = pose.y + fwd.y * ahead + right.y * side;
      obs.patch[static_cast<size_t>(row) * k + col] = scene.at(x, y);
    }
  }
  return obs;
}

DistanceField geodesic_field(const Scene& scene, const std::vector<Cell>& sources) {
  if (sources.empty()) throw std::invalid_argument("geodesic_field: no sources");
  DistanceField field;
  field.width = scene.width;
  field.height = scene.height;
  field.dist.assign(static_cast<size_t>(scene.width) * scene.height,
                    DistanceField::kUnreachable);
  std::deque<Cell> queue;
  for (const Cell& s : sources) {
    if (!scene.walkable(s)) {
      throw std::invalid_argument("geodesic_field: source (" +
                                  std::to_string(s.x) + "," +
                                  std::to_string(s.y) + ") is WALL");
    }
    if (field.at(s) == 0) continue;
    field.dist[static_cast<size_t>(s.y) * scene.width + s.x] = 0;
    queue.push_back(s);
  }
  static const Cell kDirs[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    const int d = field.at(c);
    for (const Cell& dir : kDirs) {
      const Cell n{c.x + dir.x, c.y + dir.y};
      if (!scene.in_bounds(n.x, n.y) || !scene.walkable(n)) continue;
      auto& slot = field.dist[static_cast<size_t>(n.y) * scene.width + n.x];
      if (slot > d + 1) {
        slot = d + 1;
        queue.push_back(n);
      }
    }
  }
  return field;
}

Action expert_action(const Scene& scene, const Pose& pose,
                     const DistanceField& field_to_goal,
                     const std::vector<Cell>& goal_region) {
  const int here = field_to_goal.at(pose.cell());
  if (here == DistanceField::kUnreachable) {
    throw std::runtime_error("expert_action: pose unreachable from goal");
  }
  for (const Cell& g : goal_region) {
    if (g == pose.cell()) return Action::Stop;
  }

  const Cell fwd = heading_delta(pose.heading);
  const Cell ahead{pose.x + fwd.x, pose.y + fwd.y};
  if (scene.walkable(ahead) && field_to_goal.at(ahead) < here) return Action::Fwd;

  // Tie-break over neighbors in fixed N,E,S,W order.
  int best = DistanceField::kUnreachable;
  Heading best_dir = pose.heading;
  for (int h = 0; h < 4; ++h) {
    const Cell d = heading_delta(static_cast<Heading>(h));
    const Cell n{pose.x + d.x, pose.y + d.y};
    if (!scene.walkable(n)) continue;
    const int v = field_to_goal.at(n);
    if (v < best) {
      best = v;
      best_dir = static_cast<Heading>(h);
    }
  }
  if (best == DistanceField::kUnreachable) {
    throw std::runtime_error("expert_action: no walkable neighbor");
  }
  const int diff =
      (static_cast<int>(best_dir) - static_cast<int>(pose.heading) + 4) % 4;
  if (diff == 0) return Action::Fwd;
  if (diff == 1) return Action::Right;
  return Action::Left;  // diff 2 (behind, both rotations equidistant) or 3
}

int scene_diameter(const Scene& scene) {
  int diameter = 0;
  const auto cells = scene.walkable_cells();
  for (const Cell& c : cells) {
    const DistanceField f = geodesic_field(scene, {c});
    for (const Cell& o : cells) {
      const int d = f.at(o);
      if (d != DistanceField::kUnreachable) diameter = std::max(diameter, d);
    }
  }
  return diameter;
}

}  // namespace gridpilot
