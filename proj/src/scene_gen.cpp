#include "gridpilot/scene_gen.hpp"

#include <algorithm>
#include <stdexcept>

#include "gridpilot/rng.hpp"

namespace gridpilot {

namespace {

struct Room {
  int x, y, w, h;
  Cell center() const { return {x + w / 2, y + h / 2}; }
};

void carve(Scene& s, int x, int y) {
  if (s.in_bounds(x, y)) s.set(x, y, CellClass::Floor);
}

void carve_corridor(Scene& s, Cell a, Cell b, bool horizontal_first) {
  int x = a.x, y = a.y;
  if (horizontal_first) {
    for (; x != b.x; x += (b.x > x) ? 1 : -1) carve(s, x, y);
    for (; y != b.y; y += (b.y > y) ? 1 : -1) carve(s, x, y);
  } else {
    for (; y != b.y; y += (b.y > y) ? 1 : -1) carve(s, x, y);
    for (; x != b.x; x += (b.x > x) ? 1 : -1) carve(s, x, y);
  }
  carve(s, x, y);
}

}  // namespace

Scene generate_scene(uint64_t seed, const SceneGenConfig& config,
                     const std::string& id) {
  if (config.width < 7 || config.height < 7)
    throw std::invalid_argument("generate_scene: scene must be at least 7x7");
  Rng rng(seed);
  Scene scene;
  scene.width = config.width;
  scene.height = config.height;
  scene.id = id;
  scene.cells.assign(static_cast<size_t>(config.width) * config.height,
                     CellClass::Wall);

  std::vector<Room> rooms;
  const int max_room = std::max(3, std::min(config.width, config.height) / 2);
  for (int i = 0; i < config.rooms; ++i) {
    const int w = 3 + static_cast<int>(rng.below(static_cast<uint64_t>(max_room - 2)));
    const int h = 3 + static_cast<int>(rng.below(static_cast<uint64_t>(max_room - 2)));
    const int x = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(
                          std::max(1, config.width - w - 1))));
    const int y = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(
                          std::max(1, config.height - h - 1))));
    rooms.push_back({x, y, w, h});
    for (int yy = y; yy < y + h && yy < config.height - 1; ++yy)
      for (int xx = x; xx < x + w && xx < config.width - 1; ++xx)
        carve(scene, xx, yy);
  }
  for (size_t i = 1; i < rooms.size(); ++i) {
    carve_corridor(scene, rooms[i - 1].center(), rooms[i].center(),
                   rng.below(2) == 0);
  }

  // Landmarks go on floor cells; classes cycle through a shuffled order so
  // every scene uses several letters.
  auto floors = scene.walkable_cells();
  const int n_landmarks = std::max(
      1, static_cast<int>(static_cast<double>(floors.size()) *
                          config.landmark_density));
  for (size_t i = floors.size(); i > 1; --i) {
    std::swap(floors[i - 1], floors[rng.below(i)]);
  }
  for (int i = 0; i < n_landmarks && i < static_cast<int>(floors.size()); ++i) {
    const int cls = static_cast<int>(CellClass::LandmarkA) +
                    static_cast<int>(rng.below(6));
    scene.set(floors[static_cast<size_t>(i)].x, floors[static_cast<size_t>(i)].y,
              static_cast<CellClass>(cls));
  }
  return scene;
}

SceneSplits generate_scene_splits(uint64_t seed, const SceneGenConfig& config) {
  SceneSplits splits;
  for (int i = 0; i < config.n_train; ++i) {
    splits.train.push_back(generate_scene(Rng::mix(seed, 1000 + i), config,
                                          "train_" + std::to_string(i)));
  }
  for (int i = 0; i < config.n_val_unseen; ++i) {
    splits.val_unseen.push_back(generate_scene(Rng::mix(seed, 2000 + i), config,
                                               "unseen_" + std::to_string(i)));
  }
  return splits;
}

}  // namespace gridpilot
