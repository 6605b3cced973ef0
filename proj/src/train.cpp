#include "gridpilot/train.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gridpilot/rng.hpp"

namespace gridpilot {

SupervisionMode supervision_mode_from_string(const std::string& s) {
  if (s == "vision") return SupervisionMode::Vision;
  if (s == "none") return SupervisionMode::None;
  throw std::invalid_argument("supervision_mode must be \"vision\" or \"none\", got \"" + s + "\"");
}

LabelMode label_mode_from_string(const std::string& s) {
  if (s == "executed") return LabelMode::Executed;
  if (s == "expert") return LabelMode::Expert;
  throw std::invalid_argument("label_mode must be \"executed\" or \"expert\", got \"" + s + "\"");
}

std::string to_string(SupervisionMode m) {
  return m == SupervisionMode::Vision ? "vision" : "none";
}

std::string to_string(LabelMode m) {
  return m == LabelMode::Executed ? "executed" : "expert";
}

void TrainConfig::validate() const {
  if (lambda_pil < 0.0) throw std::invalid_argument("TrainConfig: lambda_pil must be >= 0");
  if (lr <= 0.0) throw std::invalid_argument("TrainConfig: lr must be positive");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_episodes < 1)
    throw std::invalid_argument("TrainConfig: batch_episodes must be >= 1");
}

Tensor pool_tokens(const Tensor& visual_tokens) {
  if (visual_tokens.rows() < 1)
    throw std::invalid_argument("pool_tokens: empty token sequence");
  Tape tape;
  return tape.value(tape.mean_rows(tape.constant(visual_tokens)));
}

Var pool_tokens_var(Tape& tape, Var visual_tokens) {
  return tape.mean_rows(visual_tokens);
}

PrivilegedBatch build_privileged_batch(const ParamStore& params,
                                       const ModelConfig& cfg,
                                       const Trajectory& trajectory,
                                       const TrainConfig& tcfg) {
  const int t_len = trajectory.length();
  if (t_len < 1)
    throw std::invalid_argument("build_privileged_batch: empty trajectory");
  trajectory.validate();

  PrivilegedBatch batch;
  batch.trajectory = &trajectory;
  std::vector<Tensor> pooled(static_cast<size_t>(t_len));
  for (int i = 0; i < t_len; ++i) {
    pooled[static_cast<size_t>(i)] =
        pool_tokens(encode_observation(params, cfg, trajectory.observations[static_cast<size_t>(i)]));
  }

  for (int t = 1; t <= t_len; ++t) {
    PrivilegedStep s;
    s.obs_index = t - 1;
    // Slot input is the next observation; STOP leaves the world unchanged so
    // the last step reuses o_T.
    s.input_obs_index = (t < t_len) ? t : t_len - 1;
    if (t <= t_len - 2) {
      s.target_obs_index = t + 1;  // o_{t+2}
      s.pilot_target = pooled[static_cast<size_t>(t + 1)];
    }
    if (tcfg.label_mode == LabelMode::Expert) {
      if (trajectory.expert_actions.size() != static_cast<size_t>(t_len))
        throw std::runtime_error(
            "build_privileged_batch: expert labels requested but the "
            "trajectory has no recorded expert actions");
      s.action_label = static_cast<int>(trajectory.expert_actions[static_cast<size_t>(t - 1)]);
    } else {
      s.action_label = static_cast<int>(trajectory.actions[static_cast<size_t>(t - 1)]);
    }
    batch.pilot_inputs.push_back(pooled[static_cast<size_t>(s.input_obs_index)]);
    batch.steps.push_back(std::move(s));
  }
  return batch;
}

double loss_action(const std::vector<Tensor>& logits_per_step,
                   const std::vector<int>& labels) {
  if (logits_per_step.size() != labels.size())
    throw std::invalid_argument("loss_action: one label per step required");
  Tape tape;
  std::vector<Var> rows;
  rows.reserve(logits_per_step.size());
  for (const Tensor& l : logits_per_step) rows.push_back(tape.constant(l));
  return tape.scalar(tape.cross_entropy_logits(tape.concat_rows(rows), labels));
}

double loss_pilot(const std::vector<Tensor>& pilots,
                  const std::vector<Tensor>& targets) {
  if (pilots.size() != targets.size())
    throw std::invalid_argument("loss_pilot: pilots/targets must pair up");
  double total = 0.0;
  for (size_t i = 0; i < pilots.size(); ++i) {
    if (!pilots[i].same_shape(targets[i]))
      throw std::invalid_argument("loss_pilot: dimension mismatch " +
                                  pilots[i].shape_str() + " vs " +
                                  targets[i].shape_str());
    for (int64_t j = 0; j < pilots[i].size(); ++j) {
      const double d = pilots[i].data[static_cast<size_t>(j)] -
                       targets[i].data[static_cast<size_t>(j)];
      total += d * d;
    }
  }
  return total;
}

double total_loss(double l_act, double l_pil, double lambda_pil) {
  if (!std::isfinite(l_act) || !std::isfinite(l_pil))
    throw std::invalid_argument("total_loss: non-finite term");
  return l_act + lambda_pil * l_pil;
}

EpisodeLossVars episode_loss_vars(Tape& tape, ParamStore& params,
                                  const ModelConfig& cfg, const Trajectory& traj,
                                  const TrainConfig& tcfg) {
  const PrivilegedBatch batch = build_privileged_batch(params, cfg, traj, tcfg);
  const ParamRef ref = ParamRef::trainable(params);

  // Encode each observation once; steps share the vars.
  const int t_len = traj.length();
  std::vector<Var> encoded(static_cast<size_t>(t_len));
  std::vector<Var> pooled(static_cast<size_t>(t_len));
  for (int i = 0; i < t_len; ++i) {
    encoded[static_cast<size_t>(i)] = encode_observation_vars(
        tape, ref, cfg, traj.observations[static_cast<size_t>(i)]);
    pooled[static_cast<size_t>(i)] =
        pool_tokens_var(tape, encoded[static_cast<size_t>(i)]);
  }

  std::vector<Var> logit_rows;
  std::vector<int> labels;
  std::vector<Var> pilot_terms;
  Var self_pilot;  // previous step's pilot when teacher forcing is off
  for (const PrivilegedStep& s : batch.steps) {
    Var slot;
    if (tcfg.teacher_forcing) {
      slot = pooled[static_cast<size_t>(s.input_obs_index)];
    } else {
      slot = self_pilot.valid() ? self_pilot
                                : ref.get(tape, "pilot.z0");
    }
    StepVars step = model_step_from_tokens(tape, ref, cfg, traj.episode.instruction,
                                           encoded[static_cast<size_t>(s.obs_index)], slot);
    self_pilot = step.pilot;
    logit_rows.push_back(step.logits);
    labels.push_back(s.action_label);
    if (tcfg.supervision_mode == SupervisionMode::Vision && s.pilot_target) {
      Var target = tcfg.detach_targets
                       ? tape.constant(*s.pilot_target)
                       : pooled[static_cast<size_t>(s.target_obs_index)];
      pilot_terms.push_back(tape.sum_sq_diff(step.pilot, target));
    }
  }

  EpisodeLossVars out;
  out.steps = t_len;
  Var l_act = tape.cross_entropy_logits(tape.concat_rows(logit_rows), labels);
  out.act = tape.scalar(l_act);
  Var total = l_act;
  if (!pilot_terms.empty()) {
    Var l_pil = pilot_terms[0];
    for (size_t i = 1; i < pilot_terms.size(); ++i)
      l_pil = tape.add(l_pil, pilot_terms[i]);
    out.pil = tape.scalar(l_pil);
    total = tape.add(l_act, tape.scale(l_pil, tcfg.lambda_pil));
  }
  out.total = total;
  return out;
}

std::vector<LossRecord> train_round(ParamStore& params, const ModelConfig& cfg,
                                    const std::vector<Trajectory>& buffer,
                                    const TrainConfig& tcfg, int round_index) {
  tcfg.validate();
  if (buffer.empty()) throw std::invalid_argument("train_round: empty buffer");

  AdamConfig adam;
  adam.lr = tcfg.lr;
  std::vector<LossRecord> records;
  Rng rng(Rng::mix(tcfg.seed, static_cast<uint64_t>(round_index)));

  std::vector<size_t> order(buffer.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);

    LossRecord rec;
    rec.round = round_index;
    rec.epoch = epoch;
    int total_steps = 0;
    size_t cursor = 0;
    while (cursor < order.size()) {
      const size_t batch_end =
          std::min(order.size(), cursor + static_cast<size_t>(tcfg.batch_episodes));
      const double inv = 1.0 / static_cast<double>(batch_end - cursor);
      for (; cursor < batch_end; ++cursor) {
        const Trajectory& traj = buffer[order[cursor]];
        Tape tape;
        EpisodeLossVars loss = episode_loss_vars(tape, params, cfg, traj, tcfg);
        const double value = tape.scalar(loss.total);
        if (!std::isfinite(value)) {
          throw std::runtime_error(
              "train_round: non-finite loss on episode \"" + traj.episode.id() +
              "\" (round " + std::to_string(round_index) + ", epoch " +
              std::to_string(epoch) + ")");
        }
        tape.backward(tape.scale(loss.total, inv));
        rec.loss_total += total_loss(loss.act, loss.pil, tcfg.lambda_pil);
        rec.loss_act += loss.act;
        rec.loss_pil += loss.pil;
        total_steps += loss.steps;
      }
      adam_step(params, adam);
    }
    const double n = static_cast<double>(buffer.size());
    rec.loss_total /= n;
    rec.loss_act /= n;
    rec.loss_pil /= n;
    rec.act_per_step = total_steps > 0 ? rec.loss_act * n / total_steps : 0.0;
    records.push_back(rec);
  }
  return records;
}

std::string loss_log_csv(const std::vector<LossRecord>& records) {
  std::ostringstream out;
  out << "round,epoch,loss_total,loss_act,loss_pil\n";
  out.precision(17);
  for (const LossRecord& r : records) {
    out << r.round << "," << r.epoch << "," << r.loss_total << "," << r.loss_act
        << "," << r.loss_pil << "\n";
  }
  return out.str();
}

}  // namespace gridpilot
