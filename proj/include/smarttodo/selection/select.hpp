#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "smarttodo/corpus/types.hpp"
#include "smarttodo/error.hpp"
#include "smarttodo/selection/context.hpp"
#include "smarttodo/selection/providers.hpp"

namespace smarttodo::selection {

inline double inner_product(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw SelectionError("embedding dimensions differ: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Omega(s) = h(s)^T h(E), unnormalised.
inline double relevance(const SentenceRef& sentence, const SentenceRef& context,
                        const EmbeddingProvider& provider) {
  return inner_product(provider.embed(sentence), provider.embed(context));
}

struct Selected {
  std::size_t index = 0;  // into TodoInstance::all_sentences()
  std::string text;
  double score = 0.0;
};

/// Every candidate with its score, by score descending then document order.
inline std::vector<Selected> rank_candidates(const SelectionInput& in,
                                             const EmbeddingProvider& provider) {
  const auto bound = provider.bind(in);
  const EmbeddingProvider& h = bound ? *bound : provider;
  const Vector e = h.embed(in.query);
  std::vector<Selected> out;
  out.reserve(in.candidates.size());
  for (const auto& c : in.candidates) out.push_back({c.index, c.text, inner_product(h.embed(c.ref), e)});
  std::stable_sort(out.begin(), out.end(), [](const Selected& a, const Selected& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  return out;
}

/// The K highest-scoring candidates (fewer if there are fewer candidates).
inline std::vector<Selected> select_top_k(const SelectionInput& in, const EmbeddingProvider& provider,
                                          std::size_t k) {
  if (k == 0) throw SelectionError("select_top_k needs K >= 1");
  auto ranked = rank_candidates(in, provider);
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

struct HelpfulReport {
  double proportion = 0.0;
  std::size_t evaluated = 0;
  std::size_t hits = 0;
  /// Ids of instances without helpful labels.
  std::vector<std::string> skipped;
};

/// Fraction of labelled instances whose top K contains a helpful sentence.
inline HelpfulReport at_least_one_helpful(const std::vector<corpus::TodoInstance>& instances,
                                          const EmbeddingProvider& provider, std::size_t k,
                                          std::size_t tau = 10) {
  HelpfulReport r;
  for (const auto& inst : instances) {
    if (!inst.helpful_labels) {
      r.skipped.push_back(inst.id);
      continue;
    }
    const auto& labels = *inst.helpful_labels;
    const auto top = select_top_k(selection_input(inst, tau), provider, k);
    ++r.evaluated;
    r.hits += std::any_of(top.begin(), top.end(), [&](const Selected& s) {
      return s.index < labels.size() && labels[s.index];
    });
  }
  if (r.evaluated) r.proportion = static_cast<double>(r.hits) / static_cast<double>(r.evaluated);
  return r;
}

/// Content-lemma sequences of every sentence, for word-vector training.
inline std::vector<std::vector<std::string>> lemma_corpus(
    const std::vector<corpus::TodoInstance>& instances) {
  std::vector<std::vector<std::string>> out;
  for (const auto& inst : instances) {
    for (const auto& s : inst.all_sentences()) {
      auto l = text::content_lemmas(s);
      if (!l.empty()) out.push_back(std::move(l));
    }
    auto subject = text::content_lemmas(inst.thread.candidate.subject);
    if (!subject.empty()) out.push_back(std::move(subject));
  }
  return out;
}

}  // namespace smarttodo::selection
