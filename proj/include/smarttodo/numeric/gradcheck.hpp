#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "smarttodo/error.hpp"
#include "smarttodo/numeric/random.hpp"
#include "smarttodo/numeric/tape.hpp"
#include "smarttodo/numeric/tensor.hpp"

namespace smarttodo::numeric {

struct GradCheckOptions {
  double epsilon = 1e-5;
  /// Coordinates checked per tensor; larger tensors are sampled.
  std::size_t max_coords_per_tensor = 64;
  /// Denominator floor for the relative error so coordinates whose true
  /// gradient is ~0 are compared against central-difference noise, not 0.
  double denominator_floor = 1e-5;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
};

/// Builds the loss on a fresh tape. Must be deterministic.
using LossBuilder = std::function<Var(Tape&)>;

/// Compares analytic gradients of `build` against central differences.
/// Throws if the closure ran a stochastic op (training-mode dropout).
inline GradCheckResult finite_diff_check(const LossBuilder& build,
                                         std::span<Parameter* const> params,
                                         const GradCheckOptions& opt = {}) {
  for (Parameter* p : params) p->grad.fill(0.0);
  {
    Tape tape;
    Var loss = build(tape);
    if (tape.stochastic()) {
      throw NumericError("finite_diff_check requires a deterministic closure (dropout is active)");
    }
    tape.backward(loss);
  }
  auto eval = [&]() {
    Tape tape(false);
    Var loss = build(tape);
    return tape.value(loss)[0];
  };

  Rng rng(opt.seed);
  GradCheckResult result;
  for (Parameter* p : params) {
    std::vector<std::size_t> coords(p->value.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (coords.size() > opt.max_coords_per_tensor) {
      rng.shuffle(coords);
      coords.resize(opt.max_coords_per_tensor);
    }
    for (std::size_t i : coords) {
      const double saved = p->value[i];
      p->value[i] = saved + opt.epsilon;
      const double up = eval();
      p->value[i] = saved - opt.epsilon;
      const double down = eval();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * opt.epsilon);
      const double analytic = p->grad[i];
      const double denom =
          std::max({std::abs(numeric), std::abs(analytic), opt.denominator_floor});
      const double rel = std::abs(numeric - analytic) / denom;
      ++result.coords_checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_param = p->name;
      }
    }
  }
  return result;
}

}  // namespace smarttodo::numeric
