#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace gridpilot {

// Cell semantics of a scene. Landmarks are walkable floor variants that carry
// a distinguishable class; only WALL blocks motion.
enum class CellClass : uint8_t {
  Wall = 0,
  Floor = 1,
  LandmarkA = 2,
  LandmarkB = 3,
  LandmarkC = 4,
  LandmarkD = 5,
  LandmarkE = 6,
  LandmarkF = 7,
};

constexpr int kCellClassCount = 8;

char cell_class_to_char(CellClass c);
bool cell_class_from_char(char ch, CellClass& out);

enum class Heading : uint8_t { N = 0, E = 1, S = 2, W = 3 };

// Fixed action codes 0..3. STOP terminates an episode.
enum class Action : uint8_t { Fwd = 0, Left = 1, Right = 2, Stop = 3 };

constexpr int kActionCount = 4;

const char* action_name(Action a);
const char* heading_name(Heading h);

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
  bool operator<(const Cell& o) const { return y != o.y ? y < o.y : x < o.x; }
};

// Unit step vector for a heading; N decreases y.
Cell heading_delta(Heading h);
Heading rotate_left(Heading h);
Heading rotate_right(Heading h);

struct Scene {
  int width = 0;
  int height = 0;
  std::vector<CellClass> cells;  // row-major, height rows of width entries
  std::string id;

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  // Out-of-bounds queries read as WALL.
  CellClass at(int x, int y) const {
    return in_bounds(x, y) ? cells[static_cast<size_t>(y) * width + x]
                           : CellClass::Wall;
  }
  CellClass at(Cell c) const { return at(c.x, c.y); }
  bool walkable(int x, int y) const { return at(x, y) != CellClass::Wall; }
  bool walkable(Cell c) const { return walkable(c.x, c.y); }
  void set(int x, int y, CellClass c) {
    cells[static_cast<size_t>(y) * width + x] = c;
  }
  std::vector<Cell> walkable_cells() const;
};

struct Pose {
  int x = 0;
  int y = 0;
  Heading heading = Heading::N;
  Cell cell() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

// Egocentric k x k patch. The agent sits at the bottom-center entry and its
// heading points up; out-of-bounds cells read WALL. Row-major storage.
struct Observation {
  int k = 0;
  std::vector<CellClass> patch;

  CellClass at(int row, int col) const {
    return patch[static_cast<size_t>(row) * k + col];
  }
  bool operator==(const Observation&) const = default;
};

// Geodesic distances (in cells) over 4-connected non-WALL cells.
struct DistanceField {
  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  int width = 0;
  int height = 0;
  std::vector<int> dist;

  int at(int x, int y) const {
    if (x < 0 || x >= width || y < 0 || y >= height) return kUnreachable;
    return dist[static_cast<size_t>(y) * width + x];
  }
  int at(Cell c) const { return at(c.x, c.y); }
  bool reachable(Cell c) const { return at(c) != kUnreachable; }
};

// Parses the SCENE v1 format. Errors name the offending line (1-based).
Scene load_scene(const std::string& text, const std::string& id = "");
std::string scene_to_text(const Scene& scene);

struct StepResult {
  Pose pose;
  bool collided = false;
};

// Deterministic transition: FWD moves one cell along the heading unless the
// target is WALL (collision leaves the pose unchanged); LEFT/RIGHT rotate 90
// degrees; STOP is the identity.
StepResult step(const Scene& scene, const Pose& pose, Action action);

Observation render_observation(const Scene& scene, const Pose& pose, int k = 5);

// Multi-source BFS. Throws if sources is empty or contains a WALL cell.
DistanceField geodesic_field(const Scene& scene, const std::vector<Cell>& sources);

// Shortest-path follower. STOP inside the goal region; otherwise FWD whenever
// the forward cell strictly decreases the field, else a single rotation toward
// the minimizing 4-neighbor (ties in N,E,S,W order; LEFT when the target is
// directly behind). Throws if the pose is unreachable from the goal.
Action expert_action(const Scene& scene, const Pose& pose,
                     const DistanceField& field_to_goal,
                     const std::vector<Cell>& goal_region);

// Longest finite geodesic between walkable cells (0 for degenerate scenes).
int scene_diameter(const Scene& scene);

}  // namespace gridpilot
