#include "gridpilot/trajectory.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gridpilot {

namespace {

using nlohmann::json;

}  // namespace

int Trajectory::path_cells() const {
  int n = 0;
  for (size_t i = 1; i < poses.size(); ++i) {
    if (poses[i].cell() == poses[i - 1].cell()) continue;
    ++n;
  }
  return n;
}

std::vector<Cell> Trajectory::visited_cells() const {
  std::vector<Cell> out;
  for (const Pose& p : poses) {
    if (out.empty() || !(out.back() == p.cell())) out.push_back(p.cell());
  }
  return out;
}

void Trajectory::validate() const {
  const size_t t = actions.size();
  if (observations.size() != t)
    throw std::runtime_error("trajectory: observation/action count mismatch");
  if (poses.size() != t + 1)
    throw std::runtime_error("trajectory: pose count must be steps + 1");
  if (takeover.size() != t)
    throw std::runtime_error("trajectory: takeover flag count mismatch");
}

std::string trajectory_to_jsonl_line(const Trajectory& t) {
  t.validate();
  json j;
  j["episode_id"] = t.episode.id();
  j["scene_id"] = t.episode.scene_id;
  j["instr_ids"] = t.episode.instruction;
  json poses = json::array();
  for (const Pose& p : t.poses)
    poses.push_back({p.x, p.y, static_cast<int>(p.heading)});
  j["poses"] = std::move(poses);
  json actions = json::array();
  for (Action a : t.actions) actions.push_back(static_cast<int>(a));
  j["actions"] = std::move(actions);
  json take = json::array();
  for (bool b : t.takeover) take.push_back(b ? 1 : 0);
  j["takeover"] = std::move(take);
  json obs = json::array();
  for (const Observation& o : t.observations) {
    json grid = json::array();
    for (CellClass c : o.patch) grid.push_back(static_cast<int>(c));
    obs.push_back(std::move(grid));
  }
  j["observations"] = std::move(obs);
  j["source_round"] = t.source_round;
  return j.dump();
}

Trajectory trajectory_from_jsonl_line(const std::string& line) {
  const json j = json::parse(line);
  Trajectory t;
  t.episode.scene_id = j.at("scene_id").get<std::string>();
  const std::string eid = j.at("episode_id").get<std::string>();
  const auto colon = eid.rfind(':');
  if (colon != std::string::npos)
    t.episode.seed = std::stoull(eid.substr(colon + 1));
  t.episode.instruction = j.at("instr_ids").get<std::vector<int>>();
  for (const auto& p : j.at("poses")) {
    t.poses.push_back(Pose{p.at(0).get<int>(), p.at(1).get<int>(),
                           static_cast<Heading>(p.at(2).get<int>())});
  }
  for (const auto& a : j.at("actions"))
    t.actions.push_back(static_cast<Action>(a.get<int>()));
  for (const auto& b : j.at("takeover")) t.takeover.push_back(b.get<int>() != 0);
  for (const auto& grid : j.at("observations")) {
    Observation o;
    const size_t n = grid.size();
    int k = 1;
    while (k * k < static_cast<int>(n)) ++k;
    if (k * k != static_cast<int>(n))
      throw std::runtime_error("trajectory: observation is not a k x k grid");
    o.k = k;
    for (const auto& c : grid) o.patch.push_back(static_cast<CellClass>(c.get<int>()));
    t.observations.push_back(std::move(o));
  }
  t.source_round = j.at("source_round").get<int>();
  if (!t.poses.empty()) t.episode.start = t.poses.front();
  t.validate();
  return t;
}

void save_trajectories_jsonl(const std::string& path,
                             const std::vector<Trajectory>& trajectories) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trajectories: cannot write \"" + path + "\"");
  for (const Trajectory& t : trajectories) out << trajectory_to_jsonl_line(t) << "\n";
}

std::vector<Trajectory> load_trajectories_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("trajectories: cannot read \"" + path + "\"");
  std::vector<Trajectory> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(trajectory_from_jsonl_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("trajectories: line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return out;
}

}  // namespace gridpilot
