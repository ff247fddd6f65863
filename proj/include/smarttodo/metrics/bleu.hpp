#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "smarttodo/error.hpp"

namespace smarttodo::metrics {

using Tokens = std::vector<std::string>;
using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

inline NgramCounts ngram_counts(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

/// Sufficient statistics for corpus BLEU-4.
struct BleuStats {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t n = 0; n < 4; ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    candidate_length += o.candidate_length;
    reference_length += o.reference_length;
    return *this;
  }
};

/// Clipped n-gram matches against the reference set; the effective reference
/// length is the one closest to the candidate length (shorter on ties).
inline BleuStats bleu_stats(const Tokens& candidate, const std::vector<Tokens>& references) {
  if (references.empty()) throw MetricsError("bleu: empty reference set");
  BleuStats s;
  s.candidate_length = candidate.size();
  std::size_t best = references[0].size();
  for (const auto& ref : references) {
    const auto d = [&](std::size_t len) {
      return len > candidate.size() ? len - candidate.size() : candidate.size() - len;
    };
    if (d(ref.size()) < d(best) || (d(ref.size()) == d(best) && ref.size() < best)) best = ref.size();
  }
  s.reference_length = best;
  for (std::size_t n = 1; n <= 4; ++n) {
    const NgramCounts cand = ngram_counts(candidate, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [g, c] : ngram_counts(ref, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    for (const auto& [g, c] : cand) {
      s.totals[n - 1] += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) s.matches[n - 1] += std::min(c, it->second);
    }
  }
  return s;
}

/// BLEU-4 from statistics. Geometric mean of the modified precisions with
/// brevity penalty exp(1 - r/c) when c < r. A zero match count for n >= 2 is
/// smoothed to (0 + 1) / (total + 1); a zero unigram match gives 0.
inline double bleu_from_stats(const BleuStats& s) {
  if (s.candidate_length == 0 || s.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    double p;
    if (n > 0 && s.matches[n] == 0) {
      p = 1.0 / static_cast<double>(s.totals[n] + 1);
    } else {
      p = static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]);
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(s.candidate_length);
  const double r = static_cast<double>(s.reference_length);
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

/// Corpus-level BLEU-4: statistics are summed over all pairs first.
inline double bleu4(const std::vector<Tokens>& candidates,
                    const std::vector<std::vector<Tokens>>& references) {
  if (candidates.size() != references.size()) {
    throw MetricsError("bleu: " + std::to_string(candidates.size()) + " candidates but " +
                       std::to_string(references.size()) + " reference sets");
  }
  BleuStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += bleu_stats(candidates[i], references[i]);
  return bleu_from_stats(total);
}

inline double sentence_bleu4(const Tokens& candidate, const std::vector<Tokens>& references) {
  return bleu_from_stats(bleu_stats(candidate, references));
}

/// Mean of per-pair sentence BLEU-4.
inline double mean_sentence_bleu4(const std::vector<Tokens>& candidates,
                                  const std::vector<std::vector<Tokens>>& references) {
  if (candidates.size() != references.size()) {
    throw MetricsError("bleu: candidate and reference counts differ");
  }
  if (candidates.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) sum += sentence_bleu4(candidates[i], references[i]);
  return sum / static_cast<double>(candidates.size());
}

}  // namespace smarttodo::metrics
