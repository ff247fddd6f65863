#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "smarttodo/error.hpp"
#include "smarttodo/numeric/random.hpp"
#include "smarttodo/numeric/tensor.hpp"

namespace smarttodo::numeric {

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const noexcept { return id >= 0; }
};

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Param,
  MatMul,
  MatMulTN,
  Add,
  AddCol,
  Mul,
  Scale,
  ScaleVar,
  OneMinus,
  ConcatRows,
  ConcatCols,
  SliceRows,
  Tanh,
  Sigmoid,
  Softmax,
  Embedding,
  Dropout,
  CrossEntropy,
  Nll,
  BceLogits,
  Sum,
  PadRows,
  ScatterAdd,
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Constant: return "constant";
    case Op::Variable: return "variable";
    case Op::Param: return "param";
    case Op::MatMul: return "matmul";
    case Op::MatMulTN: return "matmul_tn";
    case Op::Add: return "add";
    case Op::AddCol: return "add_col";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::ScaleVar: return "scale_var";
    case Op::OneMinus: return "one_minus";
    case Op::ConcatRows: return "concat_rows";
    case Op::ConcatCols: return "concat_cols";
    case Op::SliceRows: return "slice_rows";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Softmax: return "softmax";
    case Op::Embedding: return "embedding";
    case Op::Dropout: return "dropout";
    case Op::CrossEntropy: return "cross_entropy";
    case Op::Nll: return "nll";
    case Op::BceLogits: return "bce_with_logits";
    case Op::Sum: return "sum";
    case Op::PadRows: return "pad_rows";
    case Op::ScatterAdd: return "scatter_add";
  }
  return "?";
}

/// Floor added inside -log(p) so a zero probability yields a large finite loss.
inline constexpr double kNllFloor = 1e-12;

/// Define-by-run reverse-mode tape. Every forward op appends one node; the
/// node list is therefore already in topological order. A tape is used for a
/// single step and then cleared.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// True if a dropout op with p > 0 ran in training mode since the last clear.
  bool stochastic() const noexcept { return stochastic_; }

  void clear() {
    nodes_.clear();
    consumed_ = false;
    stochastic_ = false;
  }

  // -- leaves ---------------------------------------------------------------

  Var constant(Tensor t) {
    Node n(Op::Constant);
    n.value = std::move(t);
    return push(std::move(n));
  }

  /// Leaf that receives a gradient on the node itself.
  Var variable(Tensor t) {
    Node n(Op::Variable);
    n.value = std::move(t);
    n.requires_grad = grad_enabled_;
    return push(std::move(n));
  }

  /// Leaf bound to a Parameter; backward accumulates into Parameter::grad.
  Var param(Parameter& p) {
    Node n(Op::Param);
    n.param = &p;
    n.requires_grad = grad_enabled_;
    return push(std::move(n), /*check=*/false);
  }

  const Tensor& value(Var v) const { return value_of(at(v)); }

  /// Gradient of a Variable leaf after backward (zeros if untouched).
  Tensor grad(Var v) const {
    const Node& n = at(v);
    if (n.param != nullptr) return n.param->grad;
    if (n.grad.empty()) return Tensor(value_of(n).rows(), value_of(n).cols());
    return n.grad;
  }

  // -- primitive ops ----------------------------------------------------------

  Var matmul(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.cols() != B.rows()) mismatch("matmul", A, B);
    const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    Tensor C(m, n);
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = C.row(i);
      for (std::size_t p = 0; p < k; ++p) {
        const double av = A(i, p);
        if (av == 0.0) continue;
        const double* brow = B.row(p);
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
    return binary(Op::MatMul, a, b, std::move(C));
  }

  /// a^T * b without materializing the transpose.
  Var matmul_tn(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.rows() != B.rows()) mismatch("matmul_tn", A, B);
    const std::size_t k = A.rows(), m = A.cols(), n = B.cols();
    Tensor C(m, n);
    for (std::size_t p = 0; p < k; ++p) {
      const double* arow = A.row(p);
      const double* brow = B.row(p);
      for (std::size_t i = 0; i < m; ++i) {
        const double av = arow[i];
        if (av == 0.0) continue;
        double* crow = C.row(i);
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
    return binary(Op::MatMulTN, a, b, std::move(C));
  }

  Var add(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) mismatch("add", A, B);
    Tensor C = A;
    for (std::size_t i = 0; i < C.size(); ++i) C[i] += B[i];
    return binary(Op::Add, a, b, std::move(C));
  }

  /// Matrix plus a column vector broadcast over every column.
  Var add_col(Var m, Var col) {
    const Tensor& M = value(m);
    const Tensor& v = value(col);
    if (v.cols() != 1 || v.rows() != M.rows()) mismatch("add_col", M, v);
    Tensor C = M;
    for (std::size_t r = 0; r < C.rows(); ++r) {
      for (std::size_t c = 0; c < C.cols(); ++c) C(r, c) += v[r];
    }
    return binary(Op::AddCol, m, col, std::move(C));
  }

  Var mul(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) mismatch("mul", A, B);
    Tensor C = A;
    for (std::size_t i = 0; i < C.size(); ++i) C[i] *= B[i];
    return binary(Op::Mul, a, b, std::move(C));
  }

  Var scale(Var a, double factor) {
    Tensor C = value(a);
    for (double& v : C.values()) v *= factor;
    Node n = unary_node(Op::Scale, a, std::move(C));
    n.scalar = factor;
    return push(std::move(n));
  }

  /// Every element of x multiplied by the 1x1 value s.
  Var scale_var(Var x, Var s) {
    const Tensor& S = value(s);
    if (S.size() != 1) mismatch("scale_var", value(x), S);
    Tensor C = value(x);
    for (double& v : C.values()) v *= S[0];
    return binary(Op::ScaleVar, x, s, std::move(C));
  }

  Var one_minus(Var a) {
    Tensor C = value(a);
    for (double& v : C.values()) v = 1.0 - v;
    return push(unary_node(Op::OneMinus, a, std::move(C)));
  }

  /// Stack tensors with equal column counts vertically (axis 0).
  Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw NumericError("concat of zero tensors");
    const std::size_t cols = value(parts[0]).cols();
    std::size_t rows = 0;
    for (Var p : parts) {
      if (value(p).cols() != cols) mismatch("concat_rows", value(parts[0]), value(p));
      rows += value(p).rows();
    }
    Tensor C(rows, cols);
    std::size_t off = 0;
    for (Var p : parts) {
      const Tensor& P = value(p);
      std::copy(P.values().begin(), P.values().end(), C.values().begin() + off);
      off += P.size();
    }
    return nary(Op::ConcatRows, parts, std::move(C));
  }
  Var concat_rows(std::initializer_list<Var> parts) {
    return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
  }

  /// Place tensors with equal row counts side by side (axis 1).
  Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw NumericError("concat of zero tensors");
    const std::size_t rows = value(parts[0]).rows();
    std::size_t cols = 0;
    for (Var p : parts) {
      if (value(p).rows() != rows) mismatch("concat_cols", value(parts[0]), value(p));
      cols += value(p).cols();
    }
    Tensor C(rows, cols);
    std::size_t off = 0;
    for (Var p : parts) {
      const Tensor& P = value(p);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < P.cols(); ++c) C(r, off + c) = P(r, c);
      }
      off += P.cols();
    }
    return nary(Op::ConcatCols, parts, std::move(C));
  }

  /// Generic concat: axis 0 stacks rows, axis 1 stacks columns.
  Var concat(std::span<const Var> parts, int axis) {
    if (axis == 0) return concat_rows(parts);
    if (axis == 1) return concat_cols(parts);
    throw NumericError("concat axis must be 0 or 1");
  }

  Var slice_rows(Var a, std::size_t start, std::size_t count) {
    const Tensor& A = value(a);
    if (start + count > A.rows() || count == 0) {
      throw NumericError("slice_rows [" + std::to_string(start) + "," +
                         std::to_string(start + count) + ") out of range for " +
                         shape_string(A));
    }
    Tensor C(count, A.cols());
    std::copy(A.values().begin() + start * A.cols(),
              A.values().begin() + (start + count) * A.cols(), C.values().begin());
    Node n = unary_node(Op::SliceRows, a, std::move(C));
    n.indices = {start};
    return push(std::move(n));
  }

  Var tanh(Var a) {
    Tensor C = value(a);
    for (double& v : C.values()) v = std::tanh(v);
    return push(unary_node(Op::Tanh, a, std::move(C)));
  }

  Var sigmoid(Var a) {
    Tensor C = value(a);
    for (double& v : C.values()) v = stable_sigmoid(v);
    return push(unary_node(Op::Sigmoid, a, std::move(C)));
  }

  /// Softmax over axis 0 (each column normalized) or axis 1 (each row).
  Var softmax(Var a, int axis = 0) {
    if (axis != 0 && axis != 1) throw NumericError("softmax axis must be 0 or 1");
    Tensor C = value(a);
    const std::size_t outer = axis == 0 ? C.cols() : C.rows();
    const std::size_t inner = axis == 0 ? C.rows() : C.cols();
    for (std::size_t o = 0; o < outer; ++o) {
      auto idx = [&](std::size_t i) { return axis == 0 ? i * C.cols() + o : o * C.cols() + i; };
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < inner; ++i) mx = std::max(mx, C[idx(i)]);
      double z = 0.0;
      for (std::size_t i = 0; i < inner; ++i) {
        C[idx(i)] = std::exp(C[idx(i)] - mx);
        z += C[idx(i)];
      }
      for (std::size_t i = 0; i < inner; ++i) C[idx(i)] /= z;
    }
    Node n = unary_node(Op::Softmax, a, std::move(C));
    n.indices = {static_cast<std::size_t>(axis)};
    return push(std::move(n));
  }

  /// Row `id` of a (vocab x dim) table, returned as a dim x 1 column.
  Var embedding(Var table, std::size_t id) {
    const Tensor& T = value(table);
    if (id >= T.rows()) {
      throw NumericError("embedding id " + std::to_string(id) + " out of range for " +
                         shape_string(T));
    }
    Tensor C(T.cols(), 1);
    for (std::size_t c = 0; c < T.cols(); ++c) C[c] = T(id, c);
    Node n = unary_node(Op::Embedding, table, std::move(C));
    n.indices = {id};
    return push(std::move(n));
  }

  /// Inverted dropout: kept units scaled by 1/(1-p) in training, identity otherwise.
  Var dropout(Var a, double p, bool train, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw NumericError("dropout rate must be in [0,1)");
    if (!train || p == 0.0) return a;
    stochastic_ = true;
    const Tensor& A = value(a);
    Tensor mask(A.rows(), A.cols());
    Tensor C = A;
    const double keep = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < C.size(); ++i) {
      mask[i] = rng.uniform() < p ? 0.0 : keep;
      C[i] *= mask[i];
    }
    Node n = unary_node(Op::Dropout, a, std::move(C));
    n.saved = std::move(mask);
    return push(std::move(n));
  }

  /// -log softmax(logits)[target] for a column of logits, fused for stability.
  Var cross_entropy(Var logits, std::size_t target) {
    const Tensor& Z = value(logits);
    if (Z.cols() != 1 || target >= Z.rows()) {
      throw NumericError("cross_entropy target " + std::to_string(target) + " invalid for " +
                         shape_string(Z));
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : Z.values()) mx = std::max(mx, v);
    Tensor probs(Z.rows(), 1);
    double z = 0.0;
    for (std::size_t i = 0; i < Z.rows(); ++i) {
      probs[i] = std::exp(Z[i] - mx);
      z += probs[i];
    }
    for (double& v : probs.values()) v /= z;
    const double loss = std::log(z) + mx - Z[target];
    Node n = unary_node(Op::CrossEntropy, logits, Tensor::scalar(loss));
    n.indices = {target};
    n.saved = std::move(probs);
    return push(std::move(n));
  }

  /// -log(p[target]) for a column of probabilities.
  Var nll(Var probs, std::size_t target) {
    const Tensor& P = value(probs);
    if (P.cols() != 1 || target >= P.rows()) {
      throw NumericError("nll target " + std::to_string(target) + " invalid for " +
                         shape_string(P));
    }
    Node n = unary_node(Op::Nll, probs, Tensor::scalar(-std::log(P[target] + kNllFloor)));
    n.indices = {target};
    return push(std::move(n));
  }

  /// Binary cross-entropy on a single logit with label in {0,1}.
  Var bce_with_logits(Var logit, double label) {
    const Tensor& Z = value(logit);
    if (Z.size() != 1) throw NumericError("bce_with_logits expects a 1x1 logit");
    const double z = Z[0];
    const double loss = std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
    Node n = unary_node(Op::BceLogits, logit, Tensor::scalar(loss));
    n.scalar = label;
    return push(std::move(n));
  }

  Var sum(Var a) { return push(unary_node(Op::Sum, a, Tensor::scalar(value(a).sum()))); }

  /// Extend a column with zeros to `rows` entries.
  Var pad_rows(Var a, std::size_t rows) {
    const Tensor& A = value(a);
    if (A.cols() != 1 || rows < A.rows()) mismatch("pad_rows", A, Tensor(rows, 1));
    Tensor C(rows, 1);
    std::copy(A.values().begin(), A.values().end(), C.values().begin());
    return push(unary_node(Op::PadRows, a, std::move(C)));
  }

  /// out[index[i]] += a[i] for a column a; out has `rows` entries.
  Var scatter_add(Var a, std::span<const std::size_t> index, std::size_t rows) {
    const Tensor& A = value(a);
    if (A.cols() != 1 || A.rows() != index.size()) {
      throw NumericError("scatter_add index length does not match " + shape_string(A));
    }
    Tensor C(rows, 1);
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] >= rows) throw NumericError("scatter_add index out of range");
      C[index[i]] += A[i];
    }
    Node n = unary_node(Op::ScatterAdd, a, std::move(C));
    n.indices.assign(index.begin(), index.end());
    return push(std::move(n));
  }

  // -- reverse pass -----------------------------------------------------------

  /// Accumulates d(seed * loss)/dx into every leaf that requires a gradient.
  void backward(Var loss, double seed = 1.0) {
    if (consumed_) throw NumericError("backward called twice on the same tape");
    Node& root = at_mut(loss);
    if (value_of(root).size() != 1) {
      throw NumericError("backward requires a scalar loss, got " + shape_string(value_of(root)));
    }
    if (!root.requires_grad) throw NumericError("loss is detached from every trainable input");
    consumed_ = true;
    grad_of(loss.id)[0] += seed;
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.requires_grad || n.op == Op::Param || n.op == Op::Variable) continue;
      if (n.grad.empty()) continue;
      propagate(n);
    }
  }

 private:
  struct Node {
    explicit Node(Op o) : op(o) {}
    Op op;
    bool requires_grad = false;
    int a = -1;
    int b = -1;
    std::vector<int> inputs;
    std::vector<std::size_t> indices;
    double scalar = 0.0;
    Tensor value;
    Tensor grad;
    Tensor saved;
    Parameter* param = nullptr;
  };

  static double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }

  [[noreturn]] static void mismatch(const char* op, const Tensor& a, const Tensor& b) {
    throw NumericError(std::string("shape mismatch in ") + op + ": " + shape_string(a) + " vs " +
                       shape_string(b));
  }

  const Node& at(Var v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
      throw NumericError("variable does not belong to this tape");
    }
    return nodes_[static_cast<std::size_t>(v.id)];
  }
  Node& at_mut(Var v) {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
      throw NumericError("variable does not belong to this tape");
    }
    return nodes_[static_cast<std::size_t>(v.id)];
  }

  static const Tensor& value_of(const Node& n) { return n.param ? n.param->value : n.value; }

  Tensor& grad_of(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.param != nullptr) return n.param->grad;
    if (n.grad.empty()) {
      const Tensor& v = value_of(n);
      n.grad = Tensor(v.rows(), v.cols());
    }
    return n.grad;
  }

  bool needs(int id) const { return id >= 0 && nodes_[static_cast<std::size_t>(id)].requires_grad; }

  Node unary_node(Op op, Var a, Tensor value) const {
    Node n(op);
    n.a = a.id;
    n.requires_grad = grad_enabled_ && at(a).requires_grad;
    n.value = std::move(value);
    return n;
  }

  Var binary(Op op, Var a, Var b, Tensor value) {
    Node n(op);
    n.a = a.id;
    n.b = b.id;
    n.requires_grad = grad_enabled_ && (at(a).requires_grad || at(b).requires_grad);
    n.value = std::move(value);
    return push(std::move(n));
  }

  Var nary(Op op, std::span<const Var> parts, Tensor value) {
    Node n(op);
    for (Var p : parts) {
      n.inputs.push_back(p.id);
      n.requires_grad = n.requires_grad || at(p).requires_grad;
    }
    n.requires_grad = n.requires_grad && grad_enabled_;
    n.value = std::move(value);
    return push(std::move(n));
  }

  Var push(Node n, bool check = true) {
    if (check && !n.value.all_finite()) {
      throw NumericError(std::string("non-finite output in ") + op_name(n.op));
    }
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  void propagate(Node& n) {
    // n.grad must not be invalidated while we write into inputs' grads; inputs
    // always have smaller ids and grads are separate buffers, so references hold.
    const Tensor& G = n.grad;
    switch (n.op) {
      case Op::Constant:
      case Op::Variable:
      case Op::Param:
        return;
      case Op::MatMul: {
        const Tensor& A = value_of(nodes_[n.a]);
        const Tensor& B = value_of(nodes_[n.b]);
        const std::size_t m = A.rows(), k = A.cols(), cols = B.cols();
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = G.row(i);
            for (std::size_t p = 0; p < k; ++p) {
              const double* brow = B.row(p);
              double s = 0.0;
              for (std::size_t j = 0; j < cols; ++j) s += grow[j] * brow[j];
              dA(i, p) += s;
            }
          }
        }
        if (needs(n.b)) {
          Tensor& dB = grad_of(n.b);
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = G.row(i);
            for (std::size_t p = 0; p < k; ++p) {
              const double av = A(i, p);
              if (av == 0.0) continue;
              double* drow = dB.row(p);
              for (std::size_t j = 0; j < cols; ++j) drow[j] += av * grow[j];
            }
          }
        }
        return;
      }
      case Op::MatMulTN: {
        const Tensor& A = value_of(nodes_[n.a]);
        const Tensor& B = value_of(nodes_[n.b]);
        const std::size_t k = A.rows(), m = A.cols(), cols = B.cols();
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = B.row(p);
            for (std::size_t i = 0; i < m; ++i) {
              const double* grow = G.row(i);
              double s = 0.0;
              for (std::size_t j = 0; j < cols; ++j) s += brow[j] * grow[j];
              dA(p, i) += s;
            }
          }
        }
        if (needs(n.b)) {
          Tensor& dB = grad_of(n.b);
          for (std::size_t p = 0; p < k; ++p) {
            double* drow = dB.row(p);
            for (std::size_t i = 0; i < m; ++i) {
              const double av = A(p, i);
              if (av == 0.0) continue;
              const double* grow = G.row(i);
              for (std::size_t j = 0; j < cols; ++j) drow[j] += av * grow[j];
            }
          }
        }
        return;
      }
      case Op::Add:
        if (needs(n.a)) accumulate(grad_of(n.a), G);
        if (needs(n.b)) accumulate(grad_of(n.b), G);
        return;
      case Op::AddCol:
        if (needs(n.a)) accumulate(grad_of(n.a), G);
        if (needs(n.b)) {
          Tensor& dv = grad_of(n.b);
          for (std::size_t r = 0; r < G.rows(); ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < G.cols(); ++c) s += G(r, c);
            dv[r] += s;
          }
        }
        return;
      case Op::Mul: {
        const Tensor& A = value_of(nodes_[n.a]);
        const Tensor& B = value_of(nodes_[n.b]);
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < G.size(); ++i) dA[i] += G[i] * B[i];
        }
        if (needs(n.b)) {
          Tensor& dB = grad_of(n.b);
          for (std::size_t i = 0; i < G.size(); ++i) dB[i] += G[i] * A[i];
        }
        return;
      }
      case Op::Scale:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < G.size(); ++i) dA[i] += G[i] * n.scalar;
        }
        return;
      case Op::ScaleVar: {
        const Tensor& X = value_of(nodes_[n.a]);
        const double s = value_of(nodes_[n.b])[0];
        if (needs(n.a)) {
          Tensor& dX = grad_of(n.a);
          for (std::size_t i = 0; i < G.size(); ++i) dX[i] += G[i] * s;
        }
        if (needs(n.b)) {
          double acc = 0.0;
          for (std::size_t i = 0; i < G.size(); ++i) acc += G[i] * X[i];
          grad_of(n.b)[0] += acc;
        }
        return;
      }
      case Op::OneMinus:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < G.size(); ++i) dA[i] -= G[i];
        }
        return;
      case Op::ConcatRows: {
        std::size_t off = 0;
        for (int id : n.inputs) {
          const std::size_t len = value_of(nodes_[id]).size();
          if (needs(id)) {
            Tensor& d = grad_of(id);
            for (std::size_t i = 0; i < len; ++i) d[i] += G[off + i];
          }
          off += len;
        }
        return;
      }
      case Op::ConcatCols: {
        std::size_t off = 0;
        for (int id : n.inputs) {
          const Tensor& P = value_of(nodes_[id]);
          if (needs(id)) {
            Tensor& d = grad_of(id);
            for (std::size_t r = 0; r < P.rows(); ++r) {
              for (std::size_t c = 0; c < P.cols(); ++c) d(r, c) += G(r, off + c);
            }
          }
          off += P.cols();
        }
        return;
      }
      case Op::SliceRows:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          const std::size_t off = n.indices[0] * G.cols();
          for (std::size_t i = 0; i < G.size(); ++i) dA[off + i] += G[i];
        }
        return;
      case Op::Tanh:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < G.size(); ++i) dA[i] += G[i] * (1.0 - n.value[i] * n.value[i]);
        }
        return;
      case Op::Sigmoid:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < G.size(); ++i) dA[i] += G[i] * n.value[i] * (1.0 - n.value[i]);
        }
        return;
      case Op::Softmax:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          const Tensor& Y = n.value;
          const int axis = static_cast<int>(n.indices[0]);
          const std::size_t outer = axis == 0 ? Y.cols() : Y.rows();
          const std::size_t inner = axis == 0 ? Y.rows() : Y.cols();
          for (std::size_t o = 0; o < outer; ++o) {
            auto idx = [&](std::size_t i) { return axis == 0 ? i * Y.cols() + o : o * Y.cols() + i; };
            double dot = 0.0;
            for (std::size_t i = 0; i < inner; ++i) dot += G[idx(i)] * Y[idx(i)];
            for (std::size_t i = 0; i < inner; ++i) dA[idx(i)] += Y[idx(i)] * (G[idx(i)] - dot);
          }
        }
        return;
      case Op::Embedding:
        if (needs(n.a)) {
          Tensor& dT = grad_of(n.a);
          const std::size_t row = n.indices[0];
          for (std::size_t c = 0; c < G.size(); ++c) dT(row, c) += G[c];
        }
        return;
      case Op::Dropout:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < G.size(); ++i) dA[i] += G[i] * n.saved[i];
        }
        return;
      case Op::CrossEntropy:
        if (needs(n.a)) {
          Tensor& dZ = grad_of(n.a);
          const double g = G[0];
          for (std::size_t i = 0; i < dZ.size(); ++i) dZ[i] += g * n.saved[i];
          dZ[n.indices[0]] -= g;
        }
        return;
      case Op::Nll:
        if (needs(n.a)) {
          const Tensor& P = value_of(nodes_[n.a]);
          const std::size_t t = n.indices[0];
          grad_of(n.a)[t] -= G[0] / (P[t] + kNllFloor);
        }
        return;
      case Op::BceLogits:
        if (needs(n.a)) {
          const double z = value_of(nodes_[n.a])[0];
          grad_of(n.a)[0] += G[0] * (stable_sigmoid(z) - n.scalar);
        }
        return;
      case Op::Sum:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (double& v : dA.values()) v += G[0];
        }
        return;
      case Op::PadRows:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += G[i];
        }
        return;
      case Op::ScatterAdd:
        if (needs(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < n.indices.size(); ++i) dA[i] += G[n.indices[i]];
        }
        return;
    }
  }

  static void accumulate(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
  }

  std::vector<Node> nodes_;
  bool grad_enabled_;
  bool consumed_ = false;
  bool stochastic_ = false;
};

}  // namespace smarttodo::numeric
