#pragma once

#include <string>
#include <vector>

#include "smarttodo/metrics/bleu.hpp"
#include "smarttodo/metrics/rouge.hpp"

namespace smarttodo::metrics {

struct MetricReport {
  double bleu4 = 0.0;
  double rouge1_f1 = 0.0;
  double rouge2_f1 = 0.0;
  double rougeL_f1 = 0.0;
  std::size_t n_instances = 0;
};

/// Corpus BLEU-4 plus instance-averaged ROUGE F1.
inline MetricReport evaluate(const std::vector<Tokens>& candidates,
                             const std::vector<std::vector<Tokens>>& references) {
  MetricReport r;
  r.n_instances = candidates.size();
  r.bleu4 = bleu4(candidates, references);
  if (candidates.empty()) return r;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    r.rouge1_f1 += rouge_n(candidates[i], references[i], 1);
    r.rouge2_f1 += rouge_n(candidates[i], references[i], 2);
    r.rougeL_f1 += rouge_l(candidates[i], references[i]);
  }
  const double n = static_cast<double>(candidates.size());
  r.rouge1_f1 /= n;
  r.rouge2_f1 /= n;
  r.rougeL_f1 /= n;
  return r;
}

}  // namespace smarttodo::metrics
