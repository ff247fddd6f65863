#pragma once

#include <algorithm>
#include <vector>

#include "smarttodo/error.hpp"
#include "smarttodo/metrics/bleu.hpp"

namespace smarttodo::metrics {

namespace detail {

inline double f1(double overlap, double cand_total, double ref_total) {
  if (overlap <= 0.0 || cand_total <= 0.0 || ref_total <= 0.0) return 0.0;
  const double p = overlap / cand_total;
  const double r = overlap / ref_total;
  return 2.0 * p * r / (p + r);
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

/// ROUGE-N F1 (beta = 1) from clipped n-gram overlap.
inline double rouge_n(const Tokens& candidate, const Tokens& reference, std::size_t n) {
  if (n != 1 && n != 2) throw MetricsError("rouge_n: n must be 1 or 2");
  const NgramCounts cand = ngram_counts(candidate, n);
  const NgramCounts ref = ngram_counts(reference, n);
  std::size_t overlap = 0, cand_total = 0, ref_total = 0;
  for (const auto& [g, c] : cand) {
    cand_total += c;
    auto it = ref.find(g);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  for (const auto& [g, c] : ref) ref_total += c;
  return detail::f1(static_cast<double>(overlap), static_cast<double>(cand_total),
                    static_cast<double>(ref_total));
}

/// ROUGE-L F1 from the longest common subsequence.
inline double rouge_l(const Tokens& candidate, const Tokens& reference) {
  const auto lcs = static_cast<double>(detail::lcs_length(candidate, reference));
  return detail::f1(lcs, static_cast<double>(candidate.size()),
                    static_cast<double>(reference.size()));
}

/// Multi-reference variants take the maximum over references.
inline double rouge_n(const Tokens& candidate, const std::vector<Tokens>& references, std::size_t n) {
  double best = 0.0;
  for (const auto& r : references) best = std::max(best, rouge_n(candidate, r, n));
  return best;
}

inline double rouge_l(const Tokens& candidate, const std::vector<Tokens>& references) {
  double best = 0.0;
  for (const auto& r : references) best = std::max(best, rouge_l(candidate, r));
  return best;
}

}  // namespace smarttodo::metrics
