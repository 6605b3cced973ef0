#pragma once

#include <string>
#include <vector>

#include "gridpilot/episode.hpp"
#include "gridpilot/grid.hpp"
#include "gridpilot/tensor.hpp"

namespace gridpilot {

// One executed episode. Step t (1-based, t = 1..T) observed observations[t-1]
// from poses[t-1] and executed actions[t-1], landing in poses[t].
struct Trajectory {
  EpisodeSpec episode;
  std::vector<Observation> observations;  // o_1 .. o_T
  std::vector<Action> actions;            // executed a_col_1 .. a_col_T
  std::vector<Pose> poses;                // p_0 .. p_T
  std::vector<bool> takeover;             // per step
  int source_round = 0;

  // In-memory extras, not part of the JSONL schema: the pilot token written
  // to the cache at each step, and the expert's action at each pre-step pose
  // (used by expert-relabel training).
  std::vector<Tensor> pilots;
  std::vector<Action> expert_actions;

  int length() const { return static_cast<int>(actions.size()); }
  // FWD moves executed, i.e. path length in cells (rotations are free).
  int path_cells() const;
  // Cells visited in order with consecutive duplicates collapsed.
  std::vector<Cell> visited_cells() const;
  void validate() const;
};

// JSONL round-trip. One trajectory per line with fields {episode_id,
// scene_id, instr_ids, poses, actions, takeover, observations, source_round}.
std::string trajectory_to_jsonl_line(const Trajectory& t);
Trajectory trajectory_from_jsonl_line(const std::string& line);

void save_trajectories_jsonl(const std::string& path,
                             const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> load_trajectories_jsonl(const std::string& path);

}  // namespace gridpilot
