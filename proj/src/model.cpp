#include "gridpilot/model.hpp"

#include <cmath>
#include <stdexcept>

#include "gridpilot/rng.hpp"

namespace gridpilot {

void ModelConfig::validate() const {
  if (d <= 0 || n_layers <= 0 || n_heads <= 0 || vocab <= 0 || k <= 0 ||
      l_max <= 0)
    throw std::invalid_argument("ModelConfig: all dimensions must be positive");
  if (d % n_heads != 0)
    throw std::invalid_argument("ModelConfig: d must be divisible by n_heads");
  if (k % 2 == 0) throw std::invalid_argument("ModelConfig: k must be odd");
  if (vocab > 64) throw std::invalid_argument("ModelConfig: vocab must be <= 64");
  if (action_count != 4)
    throw std::invalid_argument("ModelConfig: action_count must be 4");
}

std::map<std::string, std::vector<int>> expected_param_shapes(const ModelConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::vector<int>> s;
  s["instr.tok_emb"] = {cfg.vocab, cfg.d};
  s["instr.pos_emb"] = {cfg.l_max, cfg.d};
  s["enc.class_emb"] = {kCellClassCount, cfg.d};
  s["enc.patch_pos_emb"] = {cfg.n_vis(), cfg.d};
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    s[p + "ln1.gamma"] = {1, cfg.d};
    s[p + "ln1.beta"] = {1, cfg.d};
    s[p + "attn.wq"] = {cfg.d, cfg.d};
    s[p + "attn.wk"] = {cfg.d, cfg.d};
    s[p + "attn.wv"] = {cfg.d, cfg.d};
    s[p + "attn.wo"] = {cfg.d, cfg.d};
    s[p + "attn.bq"] = {1, cfg.d};
    s[p + "attn.bk"] = {1, cfg.d};
    s[p + "attn.bv"] = {1, cfg.d};
    s[p + "attn.bo"] = {1, cfg.d};
    s[p + "ln2.gamma"] = {1, cfg.d};
    s[p + "ln2.beta"] = {1, cfg.d};
    s[p + "mlp.w1"] = {cfg.d, 4 * cfg.d};
    s[p + "mlp.b1"] = {1, 4 * cfg.d};
    s[p + "mlp.w2"] = {4 * cfg.d, cfg.d};
    s[p + "mlp.b2"] = {1, cfg.d};
  }
  s["ln_f.gamma"] = {1, cfg.d};
  s["ln_f.beta"] = {1, cfg.d};
  s["head.w_a"] = {cfg.d, cfg.action_count};
  s["pilot.proj.w"] = {cfg.d, cfg.d};
  s["pilot.proj.b"] = {1, cfg.d};
  s["pilot.z0"] = {1, cfg.d};
  s["act_query"] = {1, cfg.d};
  return s;
}

ParamStore init_params(const ModelConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  ParamStore store;
  for (const auto& [name, shape] : expected_param_shapes(cfg)) {
    Tensor t(shape[0], shape[1]);
    const bool is_bias = name.ends_with(".beta") || name.find(".b") != std::string::npos;
    const bool is_ln_scale = name.ends_with(".gamma");
    if (is_ln_scale) {
      std::fill(t.data.begin(), t.data.end(), 1.0);
    } else if (!is_bias) {
      for (double& v : t.data) v = rng.normal(0.0, 0.02);
    }
    store.add(name, std::move(t));
  }
  return store;
}

Var encode_observation_vars(Tape& tape, const ParamRef& params,
                            const ModelConfig& cfg, const Observation& obs) {
  if (obs.k != cfg.k)
    throw std::invalid_argument("encode_observation: patch side " +
                                std::to_string(obs.k) + " != config k " +
                                std::to_string(cfg.k));
  std::vector<int> class_ids;
  class_ids.reserve(obs.patch.size());
  for (CellClass c : obs.patch) {
    const int id = static_cast<int>(c);
    if (id < 0 || id >= kCellClassCount)
      throw std::out_of_range("encode_observation: cell class out of range");
    class_ids.push_back(id);
  }
  Var cls = tape.embedding_rows(params.get(tape, "enc.class_emb"), class_ids);
  return tape.add(cls, params.get(tape, "enc.patch_pos_emb"));
}

Var build_sequence_vars(Tape& tape, const ParamRef& params, const ModelConfig& cfg,
                        const std::vector<int>& instruction, Var visual_tokens,
                        Var pilot_input) {
  if (instruction.empty())
    throw std::invalid_argument("build_sequence: empty instruction");
  if (static_cast<int>(instruction.size()) > cfg.l_max)
    throw std::invalid_argument("build_sequence: instruction length " +
                                std::to_string(instruction.size()) +
                                " exceeds l_max " + std::to_string(cfg.l_max));
  for (int id : instruction) {
    if (id < 0 || id >= cfg.vocab)
      throw std::out_of_range("build_sequence: token id " + std::to_string(id) +
                              " outside vocabulary");
  }
  Var tok = tape.embedding_rows(params.get(tape, "instr.tok_emb"), instruction);
  std::vector<int> pos_ids(instruction.size());
  for (size_t i = 0; i < pos_ids.size(); ++i) pos_ids[i] = static_cast<int>(i);
  Var pos = tape.embedding_rows(params.get(tape, "instr.pos_emb"), pos_ids);
  Var instr = tape.add(tok, pos);
  return tape.concat_rows(
      {instr, visual_tokens, pilot_input, params.get(tape, "act_query")});
}

namespace {

Tensor causal_mask(int n) {
  // Additive mask; -1e9 underflows to an exact zero probability after the
  // shifted exp, which keeps prefix hidden states bit-identical under any
  // change to future positions.
  Tensor m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m.at(i, j) = -1e9;
  return m;
}

Var linear(Tape& tape, const ParamRef& params, const std::string& w,
           const std::string& b, Var x) {
  return tape.add_rowvec(tape.matmul(x, params.get(tape, w)), params.get(tape, b));
}

}  // namespace

Var forward_vars(Tape& tape, const ParamRef& params, const ModelConfig& cfg, Var u) {
  const int n = tape.value(u).rows();
  const int dh = cfg.d / cfg.n_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  Var mask = tape.constant(causal_mask(n));

  Var x = u;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    Var xn = tape.layer_norm(x, params.get(tape, p + "ln1.gamma"),
                             params.get(tape, p + "ln1.beta"));
    Var q = linear(tape, params, p + "attn.wq", p + "attn.bq", xn);
    Var k = linear(tape, params, p + "attn.wk", p + "attn.bk", xn);
    Var v = linear(tape, params, p + "attn.wv", p + "attn.bv", xn);
    std::vector<Var> heads;
    for (int h = 0; h < cfg.n_heads; ++h) {
      Var qh = tape.slice_cols(q, h * dh, dh);
      Var kh = tape.slice_cols(k, h * dh, dh);
      Var vh = tape.slice_cols(v, h * dh, dh);
      Var scores = tape.scale(tape.matmul(qh, tape.transpose(kh)), inv_sqrt_dh);
      Var probs = tape.softmax_rows(tape.add(scores, mask));
      heads.push_back(tape.matmul(probs, vh));
    }
    Var attn = linear(tape, params, p + "attn.wo", p + "attn.bo",
                      tape.concat_cols(heads));
    x = tape.add(x, attn);
    Var xn2 = tape.layer_norm(x, params.get(tape, p + "ln2.gamma"),
                              params.get(tape, p + "ln2.beta"));
    Var hidden = tape.gelu(linear(tape, params, p + "mlp.w1", p + "mlp.b1", xn2));
    Var mlp = linear(tape, params, p + "mlp.w2", p + "mlp.b2", hidden);
    x = tape.add(x, mlp);
  }
  return tape.layer_norm(x, params.get(tape, "ln_f.gamma"),
                         params.get(tape, "ln_f.beta"));
}

StepVars model_step_vars(Tape& tape, const ParamRef& params, const ModelConfig& cfg,
                         const std::vector<int>& instruction, const Observation& obs,
                         Var pilot_input) {
  Var vis = encode_observation_vars(tape, params, cfg, obs);
  return model_step_from_tokens(tape, params, cfg, instruction, vis, pilot_input);
}

StepVars model_step_from_tokens(Tape& tape, const ParamRef& params,
                                const ModelConfig& cfg,
                                const std::vector<int>& instruction, Var vis,
                                Var pilot_input) {
  Var u = build_sequence_vars(tape, params, cfg, instruction, vis, pilot_input);
  Var hidden = forward_vars(tape, params, cfg, u);
  const int n = tape.value(hidden).rows();
  StepVars out;
  out.h_pil = tape.slice_rows(hidden, n - 2, 1);  // PILOT slot precedes ACT
  out.h_act = tape.slice_rows(hidden, n - 1, 1);
  out.logits = tape.matmul(out.h_act, params.get(tape, "head.w_a"));
  out.pilot = tape.add_rowvec(tape.matmul(out.h_pil, params.get(tape, "pilot.proj.w")),
                              params.get(tape, "pilot.proj.b"));
  return out;
}

Tensor encode_observation(const ParamStore& params, const ModelConfig& cfg,
                          const Observation& obs) {
  Tape tape;
  return tape.value(
      encode_observation_vars(tape, ParamRef::frozen(params), cfg, obs));
}

std::array<double, 4> softmax4(const Tensor& logits) {
  if (logits.size() != 4)
    throw std::invalid_argument("softmax4: expected 4 logits, got " +
                                logits.shape_str());
  double mx = logits.data[0];
  for (double v : logits.data) mx = std::max(mx, v);
  std::array<double, 4> p{};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    p[static_cast<size_t>(i)] = std::exp(logits.data[static_cast<size_t>(i)] - mx);
    sum += p[static_cast<size_t>(i)];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::array<double, 4> action_distribution(const ParamStore& params,
                                          const ModelConfig& cfg,
                                          const Tensor& h_act) {
  if (h_act.rows() != 1 || h_act.cols() != cfg.d)
    throw std::invalid_argument("action_distribution: bad h_act shape " +
                                h_act.shape_str());
  Tape tape;
  Var logits = tape.matmul(tape.constant(h_act),
                           tape.frozen(params, "head.w_a"));
  return softmax4(tape.value(logits));
}

Tensor pilot_update(const ParamStore& params, const Tensor& h_pil) {
  Tape tape;
  Var z = tape.add_rowvec(tape.matmul(tape.constant(h_pil),
                                      tape.frozen(params, "pilot.proj.w")),
                          tape.frozen(params, "pilot.proj.b"));
  return tape.value(z);
}

StepOutput model_step(const ParamStore& params, const ModelConfig& cfg,
                      const std::vector<int>& instruction, const Observation& obs,
                      const Tensor& z_prev) {
  if (z_prev.rows() != 1 || z_prev.cols() != cfg.d)
    throw std::invalid_argument("model_step: z_prev must be (1,d), got " +
                                z_prev.shape_str());
  Tape tape;
  const ParamRef ref = ParamRef::frozen(params);
  StepVars vars =
      model_step_vars(tape, ref, cfg, instruction, obs, tape.constant(z_prev));
  StepOutput out;
  out.action_logits = tape.value(vars.logits);
  out.pilot = tape.value(vars.pilot);
  out.h_act = tape.value(vars.h_act);
  out.h_pil = tape.value(vars.h_pil);
  return out;
}

Tensor initial_pilot(const ParamStore& params) {
  return params.at("pilot.z0").value;
}

}  // namespace gridpilot
