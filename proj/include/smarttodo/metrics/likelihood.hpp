#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "smarttodo/error.hpp"

namespace smarttodo::metrics {

/// One teacher-forced prediction: a distribution and the gold index.
struct TokenPrediction {
  std::vector<double> probs;
  std::size_t target = 0;
};

struct LikelihoodReport {
  double perplexity = 0.0;
  double token_accuracy = 0.0;
  double mean_nll = 0.0;
  std::size_t tokens = 0;
};

/// Streaming accumulator of per-token NLL and argmax correctness.
class LikelihoodAccumulator {
 public:
  /// Lowest index wins argmax ties.
  void add(std::span<const double> probs, std::size_t target) {
    if (target >= probs.size()) throw MetricsError("likelihood: target outside distribution");
    std::size_t arg = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
      if (probs[i] > probs[arg]) arg = i;
    }
    add(-std::log(probs[target]), arg == target);
  }

  void add(double nll, bool correct) {
    nll_sum_ += nll;
    correct_ += correct ? 1 : 0;
    ++tokens_;
  }

  std::size_t tokens() const noexcept { return tokens_; }

  LikelihoodReport report() const {
    if (tokens_ == 0) throw MetricsError("likelihood: empty dataset");
    LikelihoodReport r;
    r.tokens = tokens_;
    r.mean_nll = nll_sum_ / static_cast<double>(tokens_);
    r.perplexity = std::exp(r.mean_nll);
    r.token_accuracy = static_cast<double>(correct_) / static_cast<double>(tokens_);
    return r;
  }

 private:
  double nll_sum_ = 0.0;
  std::size_t correct_ = 0;
  std::size_t tokens_ = 0;
};

/// ppl = exp(mean NLL per target token); accuracy = fraction of argmax hits.
inline LikelihoodReport perplexity_and_token_accuracy(std::span<const TokenPrediction> predictions) {
  LikelihoodAccumulator acc;
  for (const auto& p : predictions) acc.add(p.probs, p.target);
  return acc.report();
}

}  // namespace smarttodo::metrics
