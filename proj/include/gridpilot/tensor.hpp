#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gridpilot {

// Dense row-major tensor of doubles. The model only needs rank-2 shapes
// (scalars are 1x1), but the shape list is kept general.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int rows, int cols, double fill = 0.0)
      : shape{rows, cols},
        data(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill) {}

  static Tensor row(const std::vector<double>& values) {
    Tensor t(1, static_cast<int>(values.size()));
    t.data = values;
    return t;
  }

  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  int64_t size() const { return static_cast<int64_t>(data.size()); }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols() + c];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool finite() const;
  std::string shape_str() const;
};

// Named parameter with its gradient accumulator and Adam moment buffers.
struct Param {
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
};

class ParamStore {
 public:
  Param& add(const std::string& name, Tensor init);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) > 0; }

  void zero_grads();
  int64_t value_count() const;
  std::vector<std::string> names() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  // Adam step counter; lives here so optimizer state serializes with the store.
  int64_t adam_t = 0;

 private:
  std::map<std::string, Param> params_;
};

// Handle into a Tape node.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Records a forward computation and runs exact reverse-mode accumulation.
// One tape is built per loss evaluation; backward() may run once.
class Tape {
 public:
  Var constant(Tensor value);
  // Trainable leaf bound to a store parameter; repeated calls for the same
  // parameter return the same node so gradients accumulate in one place.
  Var param(ParamStore& store, const std::string& name);
  // Read-only leaf (no gradient), for inference-style passes.
  Var frozen(const ParamStore& store, const std::string& name);

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var add_rowvec(Var m, Var row);  // broadcast a (1,n) row over (m,n)
  Var scale(Var a, double c);
  Var gelu(Var a);
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var softmax_rows(Var a);
  Var mean_rows(Var a);  // (m,n) -> (1,n)
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_rows(Var a, int start, int len);
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_cols(Var a, int start, int len);
  Var embedding_rows(Var table, const std::vector<int>& ids);
  // Sum over rows of -log softmax(logits)[label]; stable via logsumexp.
  Var cross_entropy_logits(Var logits, const std::vector<int>& labels);
  Var sum_sq_diff(Var a, Var b);  // ||a - b||^2 as a 1x1 scalar

  const Tensor& value(Var v) const;
  double scalar(Var v) const;

  // Seeds d(loss)=1 and accumulates exact gradients into every bound
  // parameter's grad buffer. loss must be 1x1. Throws if the tape is empty,
  // the handle is invalid, or backward already ran.
  void backward(Var loss);

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily during backward
    std::vector<int> parents;
    std::function<void(Tape&, int)> backward_fn;  // may be empty for leaves
    Param* bound = nullptr;
  };

  friend struct TapeOps;

  Var push(Tensor value, std::vector<int> parents,
           std::function<void(Tape&, int)> backward_fn);
  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  Tensor& grad_of(int id);
  void check(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::map<const Param*, int> param_nodes_;
  bool backward_done_ = false;
};

// Chooses between trainable and frozen parameter access so model graph
// builders have a single code path for training and inference.
class ParamRef {
 public:
  static ParamRef trainable(ParamStore& store) {
    ParamRef r;
    r.mutable_store_ = &store;
    r.store_ = &store;
    return r;
  }
  static ParamRef frozen(const ParamStore& store) {
    ParamRef r;
    r.store_ = &store;
    return r;
  }

  Var get(Tape& tape, const std::string& name) const {
    if (mutable_store_) return tape.param(*mutable_store_, name);
    return tape.frozen(*store_, name);
  }
  const ParamStore& store() const { return *store_; }

 private:
  ParamStore* mutable_store_ = nullptr;
  const ParamStore* store_ = nullptr;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over every parameter; gradient buffers are zeroed
// afterward.
void adam_step(ParamStore& store, const AdamConfig& cfg);

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central finite differences per coordinate against the tape gradients of
// fn. Relative error is |g_a - g_n| / max(1e-8, |g_a| + |g_n|). fn must be a
// deterministic function of the store values. Throws on non-finite values.
GradCheckReport grad_check(ParamStore& store,
                           const std::function<Var(Tape&, ParamStore&)>& fn,
                           double eps = 1e-5);

}  // namespace gridpilot
