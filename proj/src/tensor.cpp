#include "gridpilot/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace gridpilot {

namespace {

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              a.shape_str() + " and " + b.shape_str());
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a) {
  throw std::invalid_argument(std::string(op) + ": bad shape " + a.shape_str());
}

// y = 0.5 x (1 + tanh(c (x + 0.044715 x^3))), the tanh approximation; smooth
// everywhere so finite differences stay reliable.
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

double gelu_fwd(double x) {
  const double u = kGeluC * (x + 0.044715 * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_bwd(double x) {
  const double u = kGeluC * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  const double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

}  // namespace

bool Tensor::finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_str() const {
  std::string s = "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Param& ParamStore::add(const std::string& name, Tensor init) {
  if (params_.count(name))
    throw std::invalid_argument("ParamStore: duplicate parameter \"" + name + "\"");
  Param p;
  p.grad = Tensor(init.rows(), init.cols());
  p.m = Tensor(init.rows(), init.cols());
  p.v = Tensor(init.rows(), init.cols());
  p.value = std::move(init);
  return params_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end())
    throw std::out_of_range("ParamStore: unknown parameter \"" + name + "\"");
  return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    throw std::out_of_range("ParamStore: unknown parameter \"" + name + "\"");
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : params_)
    std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
}

int64_t ParamStore::value_count() const {
  int64_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

// ----------------------------- tape core -----------------------------

Var Tape::push(Tensor value, std::vector<int> parents,
               std::function<void(Tape&, int)> backward_fn) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.backward_fn = std::move(backward_fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_of(int id) {
  Node& n = node(id);
  if (n.grad.data.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::check(Var v, const char* op) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument(std::string(op) + ": invalid tape handle");
}

const Tensor& Tape::value(Var v) const {
  check(v, "value");
  return nodes_[static_cast<size_t>(v.id)].value;
}

double Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  if (t.size() != 1) shape_fail("scalar", t);
  return t.data[0];
}

Var Tape::constant(Tensor value) { return push(std::move(value), {}, {}); }

Var Tape::param(ParamStore& store, const std::string& name) {
  Param& p = store.at(name);
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{it->second};
  Var v = push(p.value, {}, {});
  node(v.id).bound = &p;
  param_nodes_[&p] = v.id;
  return v;
}

Var Tape::frozen(const ParamStore& store, const std::string& name) {
  return constant(store.at(name).value);
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw std::runtime_error("backward: tape has no recorded forward");
  check(loss, "backward");
  if (backward_done_) throw std::runtime_error("backward: tape already consumed");
  const Tensor& lv = value(loss);
  if (lv.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " + lv.shape_str());
  backward_done_ = true;
  grad_of(loss.id).data[0] = 1.0;
  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = node(id);
    if (n.grad.data.empty()) continue;  // nothing flowed here
    if (n.backward_fn) n.backward_fn(*this, id);
    if (n.bound) {
      for (int64_t i = 0; i < n.grad.size(); ++i)
        n.bound->grad.data[static_cast<size_t>(i)] += n.grad.data[static_cast<size_t>(i)];
    }
  }
}

// ----------------------------- operations -----------------------------

Var Tape::matmul(Var a, Var b) {
  check(a, "matmul");
  check(b, "matmul");
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.rows()) shape_fail("matmul", A, B);
  const int m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C(m, n);
  for (int i = 0; i < m; ++i) {
    const double* arow = &A.data[static_cast<size_t>(i) * k];
    double* crow = &C.data[static_cast<size_t>(i) * n];
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = &B.data[static_cast<size_t>(kk) * n];
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return push(std::move(C), {a.id, b.id}, [a, b, m, k, n](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    Tensor& ga = t.grad_of(a.id);
    Tensor& gb = t.grad_of(b.id);
    // dA = g B^T
    for (int i = 0; i < m; ++i)
      for (int kk = 0; kk < k; ++kk) {
        double acc = 0.0;
        const double* grow = &g.data[static_cast<size_t>(i) * n];
        const double* brow = &B.data[static_cast<size_t>(kk) * n];
        for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
        ga.data[static_cast<size_t>(i) * k + kk] += acc;
      }
    // dB = A^T g
    for (int kk = 0; kk < k; ++kk) {
      for (int i = 0; i < m; ++i) {
        const double av = A.data[static_cast<size_t>(i) * k + kk];
        if (av == 0.0) continue;
        const double* grow = &g.data[static_cast<size_t>(i) * n];
        double* gbrow = &gb.data[static_cast<size_t>(kk) * n];
        for (int j = 0; j < n; ++j) gbrow[j] += av * grow[j];
      }
    }
  });
}

Var Tape::transpose(Var a) {
  check(a, "transpose");
  const Tensor& A = value(a);
  Tensor T(A.cols(), A.rows());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) T.at(j, i) = A.at(i, j);
  return push(std::move(T), {a.id}, [a](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& ga = t.grad_of(a.id);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) ga.at(j, i) += g.at(i, j);
  });
}

Var Tape::add(Var a, Var b) {
  check(a, "add");
  check(b, "add");
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) shape_fail("add", A, B);
  Tensor C = A;
  for (int64_t i = 0; i < C.size(); ++i) C.data[static_cast<size_t>(i)] += B.data[static_cast<size_t>(i)];
  return push(std::move(C), {a.id, b.id}, [a, b](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& ga = t.grad_of(a.id);
    Tensor& gb = t.grad_of(b.id);
    for (int64_t i = 0; i < g.size(); ++i) {
      ga.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
      gb.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  check(a, "sub");
  check(b, "sub");
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) shape_fail("sub", A, B);
  Tensor C = A;
  for (int64_t i = 0; i < C.size(); ++i) C.data[static_cast<size_t>(i)] -= B.data[static_cast<size_t>(i)];
  return push(std::move(C), {a.id, b.id}, [a, b](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& ga = t.grad_of(a.id);
    Tensor& gb = t.grad_of(b.id);
    for (int64_t i = 0; i < g.size(); ++i) {
      ga.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
      gb.data[static_cast<size_t>(i)] -= g.data[static_cast<size_t>(i)];
    }
  });
}

Var Tape::add_rowvec(Var m, Var row) {
  check(m, "add_rowvec");
  check(row, "add_rowvec");
  const Tensor& A = value(m);
  const Tensor& R = value(row);
  if (R.rows() != 1 || R.cols() != A.cols()) shape_fail("add_rowvec", A, R);
  Tensor C = A;
  for (int i = 0; i < C.rows(); ++i)
    for (int j = 0; j < C.cols(); ++j) C.at(i, j) += R.at(0, j);
  return push(std::move(C), {m.id, row.id}, [m, row](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& ga = t.grad_of(m.id);
    Tensor& gr = t.grad_of(row.id);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) {
        ga.at(i, j) += g.at(i, j);
        gr.at(0, j) += g.at(i, j);
      }
  });
}

Var Tape::scale(Var a, double c) {
  check(a, "scale");
  Tensor C = value(a);
  for (double& v : C.data) v *= c;
  return push(std::move(C), {a.id}, [a, c](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& ga = t.grad_of(a.id);
    for (int64_t i = 0; i < g.size(); ++i)
      ga.data[static_cast<size_t>(i)] += c * g.data[static_cast<size_t>(i)];
  });
}

Var Tape::gelu(Var a) {
  check(a, "gelu");
  Tensor C = value(a);
  for (double& v : C.data) v = gelu_fwd(v);
  return push(std::move(C), {a.id}, [a](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_of(a.id);
    for (int64_t i = 0; i < g.size(); ++i)
      ga.data[static_cast<size_t>(i)] +=
          g.data[static_cast<size_t>(i)] * gelu_bwd(x.data[static_cast<size_t>(i)]);
  });
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  check(x, "layer_norm");
  check(gamma, "layer_norm");
  check(beta, "layer_norm");
  const Tensor& X = value(x);
  const Tensor& G = value(gamma);
  const Tensor& B = value(beta);
  const int n = X.cols();
  if (G.rows() != 1 || G.cols() != n) shape_fail("layer_norm", X, G);
  if (B.rows() != 1 || B.cols() != n) shape_fail("layer_norm", X, B);

  Tensor Y(X.rows(), n);
  Tensor xhat(X.rows(), n);
  std::vector<double> inv_sigma(static_cast<size_t>(X.rows()));
  for (int i = 0; i < X.rows(); ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += X.at(i, j);
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = X.at(i, j) - mu;
      var += d * d;
    }
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[static_cast<size_t>(i)] = is;
    for (int j = 0; j < n; ++j) {
      const double xh = (X.at(i, j) - mu) * is;
      xhat.at(i, j) = xh;
      Y.at(i, j) = G.at(0, j) * xh + B.at(0, j);
    }
  }
  auto xhat_p = std::make_shared<Tensor>(std::move(xhat));
  auto is_p = std::make_shared<std::vector<double>>(std::move(inv_sigma));
  return push(std::move(Y), {x.id, gamma.id, beta.id},
              [x, gamma, beta, xhat_p, is_p, n](Tape& t, int id) {
                const Tensor& g = t.node(id).grad;
                const Tensor& G = t.value(gamma);
                Tensor& gx = t.grad_of(x.id);
                Tensor& gg = t.grad_of(gamma.id);
                Tensor& gb = t.grad_of(beta.id);
                for (int i = 0; i < g.rows(); ++i) {
                  double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                  for (int j = 0; j < n; ++j) {
                    const double gy = g.at(i, j);
                    const double xh = xhat_p->at(i, j);
                    gb.at(0, j) += gy;
                    gg.at(0, j) += gy * xh;
                    const double dxh = gy * G.at(0, j);
                    mean_dxhat += dxh;
                    mean_dxhat_xhat += dxh * xh;
                  }
                  mean_dxhat /= n;
                  mean_dxhat_xhat /= n;
                  const double is = (*is_p)[static_cast<size_t>(i)];
                  for (int j = 0; j < n; ++j) {
                    const double dxh = g.at(i, j) * G.at(0, j);
                    const double xh = xhat_p->at(i, j);
                    gx.at(i, j) +=
                        is * (dxh - mean_dxhat - xh * mean_dxhat_xhat);
                  }
                }
              });
}

Var Tape::softmax_rows(Var a) {
  check(a, "softmax_rows");
  Tensor Y = value(a);
  for (int i = 0; i < Y.rows(); ++i) {
    double mx = Y.at(i, 0);
    for (int j = 1; j < Y.cols(); ++j) mx = std::max(mx, Y.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < Y.cols(); ++j) {
      const double e = std::exp(Y.at(i, j) - mx);
      Y.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < Y.cols(); ++j) Y.at(i, j) /= sum;
  }
  return push(std::move(Y), {a.id}, [a](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    const Tensor& y = t.node(id).value;
    Tensor& ga = t.grad_of(a.id);
    for (int i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (int j = 0; j < g.cols(); ++j) dot += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < g.cols(); ++j)
        ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
    }
  });
}

Var Tape::mean_rows(Var a) {
  check(a, "mean_rows");
  const Tensor& A = value(a);
  if (A.rows() < 1) shape_fail("mean_rows", A);
  Tensor Y(1, A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) Y.at(0, j) += A.at(i, j);
  for (int j = 0; j < A.cols(); ++j) Y.at(0, j) /= A.rows();
  const int m = A.rows();
  return push(std::move(Y), {a.id}, [a, m](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& ga = t.grad_of(a.id);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < g.cols(); ++j) ga.at(i, j) += g.at(0, j) / m;
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
  int rows = 0;
  const int cols = value(parts[0]).cols();
  std::vector<int> parents;
  for (Var p : parts) {
    check(p, "concat_rows");
    if (value(p).cols() != cols) shape_fail("concat_rows", value(parts[0]), value(p));
    rows += value(p).rows();
    parents.push_back(p.id);
  }
  Tensor C(rows, cols);
  int r = 0;
  for (Var p : parts) {
    const Tensor& A = value(p);
    std::copy(A.data.begin(), A.data.end(),
              C.data.begin() + static_cast<int64_t>(r) * cols);
    r += A.rows();
  }
  auto parts_copy = parts;
  return push(std::move(C), std::move(parents), [parts_copy, cols](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    int r = 0;
    for (Var p : parts_copy) {
      Tensor& gp = t.grad_of(p.id);
      for (int i = 0; i < gp.rows(); ++i)
        for (int j = 0; j < cols; ++j) gp.at(i, j) += g.at(r + i, j);
      r += gp.rows();
    }
  });
}

Var Tape::slice_rows(Var a, int start, int len) {
  check(a, "slice_rows");
  const Tensor& A = value(a);
  if (start < 0 || len < 1 || start + len > A.rows()) shape_fail("slice_rows", A);
  Tensor C(len, A.cols());
  for (int i = 0; i < len; ++i)
    for (int j = 0; j < A.cols(); ++j) C.at(i, j) = A.at(start + i, j);
  return push(std::move(C), {a.id}, [a, start, len](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& ga = t.grad_of(a.id);
    for (int i = 0; i < len; ++i)
      for (int j = 0; j < g.cols(); ++j) ga.at(start + i, j) += g.at(i, j);
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
  const int rows = value(parts[0]).rows();
  int cols = 0;
  std::vector<int> parents;
  for (Var p : parts) {
    check(p, "concat_cols");
    if (value(p).rows() != rows) shape_fail("concat_cols", value(parts[0]), value(p));
    cols += value(p).cols();
    parents.push_back(p.id);
  }
  Tensor C(rows, cols);
  int c0 = 0;
  for (Var p : parts) {
    const Tensor& A = value(p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < A.cols(); ++j) C.at(i, c0 + j) = A.at(i, j);
    c0 += A.cols();
  }
  auto parts_copy = parts;
  return push(std::move(C), std::move(parents), [parts_copy, rows](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    int c0 = 0;
    for (Var p : parts_copy) {
      Tensor& gp = t.grad_of(p.id);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < gp.cols(); ++j) gp.at(i, j) += g.at(i, c0 + j);
      c0 += gp.cols();
    }
  });
}

Var Tape::slice_cols(Var a, int start, int len) {
  check(a, "slice_cols");
  const Tensor& A = value(a);
  if (start < 0 || len < 1 || start + len > A.cols()) shape_fail("slice_cols", A);
  Tensor C(A.rows(), len);
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < len; ++j) C.at(i, j) = A.at(i, start + j);
  return push(std::move(C), {a.id}, [a, start, len](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& ga = t.grad_of(a.id);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < len; ++j) ga.at(i, start + j) += g.at(i, j);
  });
}

Var Tape::embedding_rows(Var table, const std::vector<int>& ids) {
  check(table, "embedding_rows");
  const Tensor& T = value(table);
  Tensor C(static_cast<int>(ids.size()), T.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= T.rows())
      throw std::out_of_range("embedding_rows: index " + std::to_string(ids[i]) +
                              " out of range for table " + T.shape_str());
    for (int j = 0; j < T.cols(); ++j)
      C.at(static_cast<int>(i), j) = T.at(ids[i], j);
  }
  return push(std::move(C), {table.id}, [table, ids](Tape& t, int id) {
    const Tensor& g = t.node(id).grad;
    Tensor& gt = t.grad_of(table.id);
    for (size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < g.cols(); ++j)
        gt.at(ids[i], j) += g.at(static_cast<int>(i), j);
  });
}

Var Tape::cross_entropy_logits(Var logits, const std::vector<int>& labels) {
  check(logits, "cross_entropy_logits");
  const Tensor& L = value(logits);
  if (L.rows() != static_cast<int>(labels.size()))
    throw std::invalid_argument("cross_entropy_logits: " +
                                std::to_string(labels.size()) + " labels for " +
                                std::to_string(L.rows()) + " rows");
  for (int lab : labels) {
    if (lab < 0 || lab >= L.cols())
      throw std::out_of_range("cross_entropy_logits: label " +
                              std::to_string(lab) + " outside 0.." +
                              std::to_string(L.cols() - 1));
  }
  double total = 0.0;
  for (int i = 0; i < L.rows(); ++i) {
    double mx = L.at(i, 0);
    for (int j = 1; j < L.cols(); ++j) mx = std::max(mx, L.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < L.cols(); ++j) sum += std::exp(L.at(i, j) - mx);
    total += mx + std::log(sum) - L.at(i, labels[static_cast<size_t>(i)]);
  }
  Tensor out(1, 1);
  out.data[0] = total;
  return push(std::move(out), {logits.id}, [logits, labels](Tape& t, int id) {
    const double g = t.node(id).grad.data[0];
    const Tensor& L = t.value(logits);
    Tensor& gl = t.grad_of(logits.id);
    for (int i = 0; i < L.rows(); ++i) {
      double mx = L.at(i, 0);
      for (int j = 1; j < L.cols(); ++j) mx = std::max(mx, L.at(i, j));
      double sum = 0.0;
      for (int j = 0; j < L.cols(); ++j) sum += std::exp(L.at(i, j) - mx);
      for (int j = 0; j < L.cols(); ++j) {
        const double p = std::exp(L.at(i, j) - mx) / sum;
        gl.at(i, j) += g * (p - (labels[static_cast<size_t>(i)] == j ? 1.0 : 0.0));
      }
    }
  });
}

Var Tape::sum_sq_diff(Var a, Var b) {
  check(a, "sum_sq_diff");
  check(b, "sum_sq_diff");
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) shape_fail("sum_sq_diff", A, B);
  double total = 0.0;
  for (int64_t i = 0; i < A.size(); ++i) {
    const double d = A.data[static_cast<size_t>(i)] - B.data[static_cast<size_t>(i)];
    total += d * d;
  }
  Tensor out(1, 1);
  out.data[0] = total;
  return push(std::move(out), {a.id, b.id}, [a, b](Tape& t, int id) {
    const double g = t.node(id).grad.data[0];
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    Tensor& ga = t.grad_of(a.id);
    Tensor& gb = t.grad_of(b.id);
    for (int64_t i = 0; i < A.size(); ++i) {
      const double d = 2.0 * (A.data[static_cast<size_t>(i)] - B.data[static_cast<size_t>(i)]);
      ga.data[static_cast<size_t>(i)] += g * d;
      gb.data[static_cast<size_t>(i)] -= g * d;
    }
  });
}

// ----------------------------- optimizer -----------------------------

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  store.adam_t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(store.adam_t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(store.adam_t));
  for (auto& [name, p] : store) {
    for (int64_t i = 0; i < p.value.size(); ++i) {
      const size_t s = static_cast<size_t>(i);
      const double g = p.grad.data[s];
      p.m.data[s] = cfg.beta1 * p.m.data[s] + (1.0 - cfg.beta1) * g;
      p.v.data[s] = cfg.beta2 * p.v.data[s] + (1.0 - cfg.beta2) * g * g;
      const double mhat = p.m.data[s] / bc1;
      const double vhat = p.v.data[s] / bc2;
      p.value.data[s] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
  }
}

// ----------------------------- grad check -----------------------------

GradCheckReport grad_check(ParamStore& store,
                           const std::function<Var(Tape&, ParamStore&)>& fn,
                           double eps) {
  if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be positive");
  store.zero_grads();
  {
    Tape tape;
    Var loss = fn(tape, store);
    if (!std::isfinite(tape.scalar(loss)))
      throw std::runtime_error("grad_check: non-finite loss");
    tape.backward(loss);
  }
  std::map<std::string, Tensor> analytic;
  for (const auto& name : store.names()) analytic[name] = store.at(name).grad;

  auto eval = [&]() {
    Tape tape;
    const double v = tape.scalar(fn(tape, store));
    if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite loss");
    return v;
  };

  GradCheckReport report;
  for (const auto& name : store.names()) {
    Param& p = store.at(name);
    for (int64_t i = 0; i < p.value.size(); ++i) {
      const size_t s = static_cast<size_t>(i);
      const double saved = p.value.data[s];
      p.value.data[s] = saved + eps;
      const double up = eval();
      p.value.data[s] = saved - eps;
      const double down = eval();
      p.value.data[s] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double ana = analytic[name].data[s];
      const double rel =
          std::abs(ana - numeric) / std::max(1e-8, std::abs(ana) + std::abs(numeric));
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_index = static_cast<int>(i);
        report.analytic = ana;
        report.numeric = numeric;
      }
    }
  }
  store.zero_grads();
  return report;
}

}  // namespace gridpilot
