#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "smarttodo/corpus/types.hpp"
#include "smarttodo/error.hpp"
#include "smarttodo/numeric/random.hpp"
#include "smarttodo/text/tokenizer.hpp"

namespace smarttodo::corpus {

struct SplitRatios {
  double train = 7349.0 / 9349.0;
  double validation = 1000.0 / 9349.0;
  double test = 1000.0 / 9349.0;
};

/// Seeded Fisher-Yates shuffle, then validation and test take
/// floor(n * ratio) instances each and train takes the remainder.
inline DatasetSplit split_dataset(const std::vector<TodoInstance>& instances,
                                  const SplitRatios& ratios, std::uint64_t seed) {
  const std::size_t n = instances.size();
  if (n < 3) throw CorpusError("split_dataset needs at least 3 instances, got " + std::to_string(n));
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0) {
    throw CorpusError("split ratios must be non-negative");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw CorpusError("split ratios must sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  numeric::Rng rng(seed);
  rng.shuffle(order);

  auto allot = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-7));
  };
  const std::size_t n_val = allot(ratios.validation);
  const std::size_t n_test = allot(ratios.test);
  const std::size_t n_train = n - n_val - n_test;

  DatasetSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& inst = instances[order[i]];
    if (i < n_train) {
      split.train.push_back(inst);
    } else if (i < n_train + n_val) {
      split.validation.push_back(inst);
    } else {
      split.test.push_back(inst);
    }
  }
  return split;
}

/// The annotation with the fewest tokens; the first one wins ties. Empty
/// annotations are skipped unless every annotation is empty.
inline const std::string& choose_reference(const std::vector<std::string>& annotations) {
  if (annotations.empty()) throw CorpusError("choose_reference: no annotations");
  std::size_t best = 0;
  std::size_t best_len = SIZE_MAX;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const std::size_t len = text::tokenize(annotations[i]).size();
    if (len > 0 && len < best_len) {
      best = i;
      best_len = len;
    }
  }
  return annotations[best];
}

inline const std::string& reference_of(const TodoInstance& inst) {
  return choose_reference(inst.annotations);
}

}  // namespace smarttodo::corpus
