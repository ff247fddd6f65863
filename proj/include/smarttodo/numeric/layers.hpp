#pragma once

#include <string>

#include "smarttodo/numeric/tape.hpp"
#include "smarttodo/numeric/tensor.hpp"

namespace smarttodo::numeric {

/// y = W x + b with W (out x in), b (out x 1).
struct Linear {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;

  static Linear create(ParameterSet& params, const std::string& prefix, std::size_t in,
                       std::size_t out) {
    Linear l;
    l.weight = &params.add(prefix + ".weight", out, in);
    l.bias = &params.add(prefix + ".bias", out, 1);
    return l;
  }

  std::size_t in() const { return weight->value.cols(); }
  std::size_t out() const { return weight->value.rows(); }

  Var operator()(Tape& tape, Var x) const {
    return tape.add(tape.matmul(tape.param(*weight), x), tape.param(*bias));
  }
};

/// Single LSTM cell; gates stacked as [input, forget, candidate, output].
struct LstmCell {
  Parameter* weight = nullptr;  // 4H x (in + H)
  Parameter* bias = nullptr;    // 4H x 1
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;

  struct State {
    Var h;
    Var c;
  };

  static LstmCell create(ParameterSet& params, const std::string& prefix, std::size_t input,
                         std::size_t hidden) {
    LstmCell cell;
    cell.weight = &params.add(prefix + ".weight", 4 * hidden, input + hidden);
    cell.bias = &params.add(prefix + ".bias", 4 * hidden, 1);
    cell.input_size = input;
    cell.hidden_size = hidden;
    return cell;
  }

  State zero_state(Tape& tape) const {
    return {tape.constant(Tensor(hidden_size, 1)), tape.constant(Tensor(hidden_size, 1))};
  }

  State step(Tape& tape, Var x, State prev) const {
    const std::size_t H = hidden_size;
    Var z = tape.add(tape.matmul(tape.param(*weight), tape.concat_rows({x, prev.h})),
                     tape.param(*bias));
    Var i = tape.sigmoid(tape.slice_rows(z, 0, H));
    Var f = tape.sigmoid(tape.slice_rows(z, H, H));
    Var g = tape.tanh(tape.slice_rows(z, 2 * H, H));
    Var o = tape.sigmoid(tape.slice_rows(z, 3 * H, H));
    Var c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
    Var h = tape.mul(o, tape.tanh(c));
    return {h, c};
  }
};

/// Additive attention: e_j = v^T tanh(W_h h_j + W_s s + b), a = softmax(e),
/// context = sum_j a_j h_j. Encoder states are the columns of a (H x T) matrix.
struct AdditiveAttention {
  Parameter* w_h = nullptr;  // A x Hs
  Parameter* w_s = nullptr;  // A x Hq
  Parameter* v = nullptr;    // A x 1
  Parameter* b = nullptr;    // A x 1

  struct Result {
    Var weights;  // T x 1
    Var context;  // Hs x 1
  };

  static AdditiveAttention create(ParameterSet& params, const std::string& prefix,
                                  std::size_t state_size, std::size_t query_size,
                                  std::size_t attn_size) {
    AdditiveAttention a;
    a.w_h = &params.add(prefix + ".w_h", attn_size, state_size);
    a.w_s = &params.add(prefix + ".w_s", attn_size, query_size);
    a.v = &params.add(prefix + ".v", attn_size, 1);
    a.b = &params.add(prefix + ".bias", attn_size, 1);
    return a;
  }

  /// W_h * states, computed once per source sequence.
  Var keys(Tape& tape, Var states) const { return tape.matmul(tape.param(*w_h), states); }

  Result attend(Tape& tape, Var states, Var keys, Var query) const {
    Var proj = tape.add(tape.matmul(tape.param(*w_s), query), tape.param(*b));
    Var hidden = tape.tanh(tape.add_col(keys, proj));
    Var scores = tape.matmul_tn(hidden, tape.param(*v));
    Var weights = tape.softmax(scores, 0);
    Var context = tape.matmul(states, weights);
    return {weights, context};
  }
};

}  // namespace smarttodo::numeric
