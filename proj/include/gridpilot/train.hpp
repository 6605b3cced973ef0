#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridpilot/model.hpp"
#include "gridpilot/trajectory.hpp"

namespace gridpilot {

enum class SupervisionMode { Vision, None };
enum class LabelMode { Executed, Expert };

SupervisionMode supervision_mode_from_string(const std::string& s);
LabelMode label_mode_from_string(const std::string& s);
std::string to_string(SupervisionMode m);
std::string to_string(LabelMode m);

struct TrainConfig {
  double lambda_pil = 0.1;
  double lr = 1e-3;
  int epochs = 10;
  int batch_episodes = 8;
  uint64_t seed = 0;
  SupervisionMode supervision_mode = SupervisionMode::Vision;
  LabelMode label_mode = LabelMode::Executed;
  // Diagnostics. teacher_forcing=false fills the pilot slot with the model's
  // own propagated token instead of the privileged input; detach_targets=false
  // lets gradient flow into the encoder through the regression target.
  bool teacher_forcing = true;
  bool detach_targets = true;

  void validate() const;
};

// Per-step privileged tuple. The slot input is the pooled encoding of
// observations[input_obs_index] (recomputed on-tape so the encoder trains
// through it); the regression target is a detached constant, present exactly
// for t <= T-2.
struct PrivilegedStep {
  int obs_index = 0;        // o_t
  int input_obs_index = 0;  // o_{t+1}, or o_T at the last step
  std::optional<Tensor> pilot_target;  // pooled v of o_{t+2}
  int target_obs_index = -1;
  int action_label = 0;
};

struct PrivilegedBatch {
  const Trajectory* trajectory = nullptr;
  std::vector<PrivilegedStep> steps;
  std::vector<Tensor> pilot_inputs;  // detached snapshots, for inspection
};

// Mean over the visual-token axis: (N_v, d) -> (1, d).
Tensor pool_tokens(const Tensor& visual_tokens);
Var pool_tokens_var(Tape& tape, Var visual_tokens);

PrivilegedBatch build_privileged_batch(const ParamStore& params,
                                       const ModelConfig& cfg,
                                       const Trajectory& trajectory,
                                       const TrainConfig& tcfg = {});

// Sum over steps of -log p(label). Also exposed per-step for logging.
double loss_action(const std::vector<Tensor>& logits_per_step,
                   const std::vector<int>& labels);
// Sum of squared L2 residuals between pilots and their targets.
double loss_pilot(const std::vector<Tensor>& pilots,
                  const std::vector<Tensor>& targets);
double total_loss(double l_act, double l_pil, double lambda_pil);

struct EpisodeLossVars {
  Var total;
  double act = 0.0;
  double pil = 0.0;
  int steps = 0;
};

// Builds the full objective for one trajectory on the tape: teacher-forced
// forward per step, action cross-entropy plus lambda * pilot regression.
EpisodeLossVars episode_loss_vars(Tape& tape, ParamStore& params,
                                  const ModelConfig& cfg, const Trajectory& traj,
                                  const TrainConfig& tcfg);

struct LossRecord {
  int round = 0;
  int epoch = 0;
  double loss_total = 0.0;
  double loss_act = 0.0;
  double loss_pil = 0.0;
  double act_per_step = 0.0;
};

// One fine-tuning round over a trajectory buffer: seeded epoch shuffles,
// gradient accumulation over batch_episodes episodes per Adam step.
// Deterministic given (params, buffer, cfg). Throws on an empty buffer or a
// non-finite loss.
std::vector<LossRecord> train_round(ParamStore& params, const ModelConfig& cfg,
                                    const std::vector<Trajectory>& buffer,
                                    const TrainConfig& tcfg, int round_index = 0);

std::string loss_log_csv(const std::vector<LossRecord>& records);

}  // namespace gridpilot
