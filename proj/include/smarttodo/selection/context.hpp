#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "smarttodo/corpus/types.hpp"
#include "smarttodo/error.hpp"
#include "smarttodo/text/lemmatizer.hpp"
#include "smarttodo/text/tokenizer.hpp"

namespace smarttodo::selection {

/// The τ most frequent content lemmas across `token_lists`, scanned in order.
/// Ties go to the earlier first occurrence, then lexicographic order.
inline std::vector<std::string> top_tokens(const std::vector<std::vector<std::string>>& token_lists,
                                           std::size_t tau = 10) {
  struct Stat {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::map<std::string, Stat> stats;
  std::size_t position = 0;
  for (const auto& tokens : token_lists) {
    for (const auto& lemma : text::content_lemmas(tokens)) {
      auto [it, fresh] = stats.try_emplace(lemma, Stat{0, position});
      ++it->second.count;
      ++position;
    }
  }
  std::vector<std::pair<std::string, Stat>> ranked(stats.begin(), stats.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    if (a.second.first != b.second.first) return a.second.first < b.second.first;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < tau; ++i) out.push_back(ranked[i].first);
  return out;
}

struct EnrichedContext {
  std::vector<std::string> query;
  std::vector<std::string> subject;
  std::vector<std::string> top_tokens;
  /// query ++ subject ++ top_tokens
  std::vector<std::string> tokens;

  bool operator==(const EnrichedContext&) const = default;
};

inline EnrichedContext build_enriched_context(std::vector<std::string> query,
                                              std::vector<std::string> subject,
                                              std::vector<std::string> top) {
  if (query.empty()) throw SelectionError("enriched context needs a non-empty commitment sentence");
  EnrichedContext e{std::move(query), std::move(subject), std::move(top), {}};
  e.tokens = e.query;
  e.tokens.insert(e.tokens.end(), e.subject.begin(), e.subject.end());
  e.tokens.insert(e.tokens.end(), e.top_tokens.begin(), e.top_tokens.end());
  return e;
}

/// A sentence as seen by an embedding provider. The key addresses
/// precomputed vectors: "<instance id>:<sentence index>", or
/// "<instance id>:E" for the enriched context.
struct SentenceRef {
  std::string key;
  std::vector<std::string> lemmas;
};

struct CandidateSentence {
  std::size_t index = 0;  // into TodoInstance::all_sentences()
  std::string text;
  SentenceRef ref;
};

/// Everything selection needs for one instance.
struct SelectionInput {
  std::string instance_id;
  EnrichedContext context;
  SentenceRef query;
  std::vector<CandidateSentence> candidates;
};

inline std::string enriched_context_key(const std::string& instance_id) { return instance_id + ":E"; }

inline std::string sentence_key(const std::string& instance_id, std::size_t index) {
  return instance_id + ":" + std::to_string(index);
}

/// Candidates are every sentence of e_c and e_p except the commitment H.
inline SelectionInput selection_input(const corpus::TodoInstance& inst, std::size_t tau = 10) {
  const auto sentences = inst.all_sentences();
  const std::size_t h = inst.commitment_sentence_index;
  if (h >= inst.candidate_sentences().size()) {
    throw SelectionError("instance " + inst.id + " has no commitment sentence at index " +
                         std::to_string(h));
  }
  std::vector<std::vector<std::string>> token_lists;
  for (const auto& s : sentences) token_lists.push_back(text::tokenize(s));
  auto subject = text::tokenize(inst.thread.candidate.subject);

  std::vector<std::vector<std::string>> scan = token_lists;
  scan.push_back(subject);

  SelectionInput in;
  in.instance_id = inst.id;
  in.context = build_enriched_context(token_lists[h], subject, top_tokens(scan, tau));
  in.query = {enriched_context_key(inst.id), text::content_lemmas(in.context.tokens)};
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i == h) continue;
    in.candidates.push_back(
        {i, sentences[i], {sentence_key(inst.id, i), text::content_lemmas(token_lists[i])}});
  }
  return in;
}

}  // namespace smarttodo::selection
