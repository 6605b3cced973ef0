#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridpilot/grid.hpp"
#include "gridpilot/tensor.hpp"

namespace gridpilot {

struct ModelConfig {
  int d = 32;        // hidden size
  int n_layers = 2;
  int n_heads = 2;
  int vocab = 33;    // instruction vocabulary size
  int k = 5;         // observation patch side; N_v = k*k
  int l_max = 48;    // maximum instruction length
  int action_count = 4;

  int n_vis() const { return k * k; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Shapes of every learnable tensor, keyed by name. Used both to initialize
// parameters and to validate checkpoints.
std::map<std::string, std::vector<int>> expected_param_shapes(const ModelConfig& cfg);

// Scaled-normal init (std 0.02) for embeddings and weights, zeros for biases,
// ones for layer-norm scales. Deterministic per seed.
ParamStore init_params(const ModelConfig& cfg, uint64_t seed);

// Hidden states the step exposes for diagnostics alongside its outputs.
struct StepOutput {
  Tensor action_logits;  // (1, 4)
  Tensor pilot;          // (1, d)
  Tensor h_act;          // (1, d)
  Tensor h_pil;          // (1, d)
};

struct StepVars {
  Var logits;
  Var pilot;
  Var h_act;
  Var h_pil;
};

// --- graph builders (shared by training and inference paths) ---

// Visual tokens: one token per patch cell, class embedding plus patch
// positional embedding, row-major order. Shape (k*k, d).
Var encode_observation_vars(Tape& tape, const ParamRef& params,
                            const ModelConfig& cfg, const Observation& obs);

// Assembled input [instruction; visual tokens; PILOT slot; ACT query].
// pilot_input fills the PILOT slot: the cached pilot token at inference, the
// privileged pooled next-observation latent during training.
Var build_sequence_vars(Tape& tape, const ParamRef& params, const ModelConfig& cfg,
                        const std::vector<int>& instruction, Var visual_tokens,
                        Var pilot_input);

// Pre-norm causal transformer over the assembled sequence. Returns (N, d).
Var forward_vars(Tape& tape, const ParamRef& params, const ModelConfig& cfg, Var u);

// Full step: encode, assemble, forward, then read the action logits off the
// ACT position and the pilot token off the PILOT position.
StepVars model_step_vars(Tape& tape, const ParamRef& params, const ModelConfig& cfg,
                         const std::vector<int>& instruction, const Observation& obs,
                         Var pilot_input);

// Same, but takes already-encoded visual tokens so training can encode each
// observation once per tape and reuse it across steps.
StepVars model_step_from_tokens(Tape& tape, const ParamRef& params,
                                const ModelConfig& cfg,
                                const std::vector<int>& instruction, Var vis,
                                Var pilot_input);

// --- value-level API ---

Tensor encode_observation(const ParamStore& params, const ModelConfig& cfg,
                          const Observation& obs);

// Softmax over W_a h_act.
std::array<double, 4> action_distribution(const ParamStore& params,
                                          const ModelConfig& cfg,
                                          const Tensor& h_act);

// z = G_psi h_pil + bias. Introduces no other inputs.
Tensor pilot_update(const ParamStore& params, const Tensor& h_pil);

// (a_t, z_t) from (instruction, current observation, previous pilot token).
// The signature admits no future observations.
StepOutput model_step(const ParamStore& params, const ModelConfig& cfg,
                      const std::vector<int>& instruction, const Observation& obs,
                      const Tensor& z_prev);

// The trainable placeholder that fills the PILOT slot at step 1.
Tensor initial_pilot(const ParamStore& params);

std::array<double, 4> softmax4(const Tensor& logits);

}  // namespace gridpilot
