#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "smarttodo/error.hpp"
#include "smarttodo/numeric/tensor.hpp"

namespace smarttodo::numeric {

/// Global L2 norm of all gradients.
inline double grad_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    for (double g : p->grad.values()) sq += g * g;
  }
  return std::sqrt(sq);
}

/// Rescales every gradient by max_norm / norm when the global norm exceeds
/// max_norm. Returns the factor that was applied (1.0 when untouched).
inline double clip_grad_norm(std::span<Parameter* const> params, double max_norm = 2.0) {
  const double norm = grad_norm(params);
  if (!(norm > max_norm)) return 1.0;
  const double factor = max_norm / norm;
  for (Parameter* p : params) {
    for (double& g : p->grad.values()) g *= factor;
  }
  return factor;
}

struct AdagradOptions {
  double learning_rate = 0.15;
  double accumulator_init = 0.1;
};

/// Adagrad: acc += g^2; p -= lr * g / sqrt(acc). One accumulator per parameter.
class Adagrad {
 public:
  Adagrad(std::span<Parameter* const> params, AdagradOptions options = {})
      : params_(params.begin(), params.end()), options_(options) {
    accumulators_.reserve(params_.size());
    for (const Parameter* p : params_) {
      accumulators_.emplace_back(p->value.rows(), p->value.cols(), options_.accumulator_init);
    }
  }

  const AdagradOptions& options() const noexcept { return options_; }
  const std::vector<Tensor>& accumulators() const noexcept { return accumulators_; }

  /// Applies one update and zeroes the gradients.
  void step() {
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Parameter& p = *params_[k];
      Tensor& acc = accumulators_[k];
      if (!p.grad.same_shape(p.value) || !acc.same_shape(p.value)) {
        throw NumericError("adagrad state shape mismatch for " + p.name);
      }
      auto& value = p.value.values();
      auto& grad = p.grad.values();
      auto& a = acc.values();
      for (std::size_t i = 0; i < value.size(); ++i) {
        const double g = grad[i];
        if (g == 0.0) continue;
        a[i] += g * g;
        value[i] -= options_.learning_rate * g / std::sqrt(a[i]);
        grad[i] = 0.0;
      }
    }
  }

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> accumulators_;
  AdagradOptions options_;
};

}  // namespace smarttodo::numeric
