#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "smarttodo/text/tokenizer.hpp"

namespace smarttodo::text {

// The irregular map and the stopword list are part of the observable
// behaviour of content selection; edits change selection scores.

/// Irregular forms. Every value must be a fixed point of lemmatize().
inline const std::unordered_map<std::string_view, std::string_view>& irregular_lemmas() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"am", "be"},          {"is", "be"},          {"are", "be"},
      {"was", "be"},         {"were", "be"},        {"been", "be"},
      {"being", "be"},       {"has", "have"},       {"had", "have"},
      {"having", "have"},    {"does", "do"},        {"did", "do"},
      {"done", "do"},        {"doing", "do"},       {"goes", "go"},
      {"went", "go"},        {"gone", "go"},        {"going", "go"},
      {"sent", "send"},      {"made", "make"},      {"got", "get"},
      {"gotten", "get"},     {"took", "take"},      {"taken", "take"},
      {"gave", "give"},      {"given", "give"},     {"told", "tell"},
      {"said", "say"},       {"kept", "keep"},      {"brought", "bring"},
      {"bought", "buy"},     {"thought", "think"},  {"met", "meet"},
      {"left", "leave"},     {"found", "find"},     {"wrote", "write"},
      {"written", "write"},  {"writing", "write"},  {"ran", "run"},
      {"began", "begin"},    {"begun", "begin"},    {"saw", "see"},
      {"seen", "see"},       {"knew", "know"},      {"known", "know"},
      {"came", "come"},      {"coming", "come"},    {"felt", "feel"},
      {"heard", "hear"},     {"held", "hold"},      {"paid", "pay"},
      {"put", "put"},        {"set", "set"},        {"read", "read"},
      {"led", "lead"},       {"lost", "lose"},      {"built", "build"},
      {"spent", "spend"},    {"understood", "understand"},
      {"used", "use"},       {"using", "use"},      {"uses", "use"},
      {"created", "create"}, {"creating", "create"}, {"creates", "create"},
      {"prepared", "prepare"}, {"preparing", "prepare"},
      {"completed", "complete"}, {"completing", "complete"},
      {"children", "child"}, {"men", "man"},        {"women", "woman"},
      {"people", "person"},  {"feet", "foot"},      {"teeth", "tooth"},
      {"mice", "mouse"},     {"data", "data"},      {"news", "news"},
      {"better", "good"},    {"best", "good"},      {"worse", "bad"},
      {"worst", "bad"},
  };
  return table;
}

/// Embedded English stopword inventory (function words and clitics).
inline const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",        "about",   "above",   "after",   "again",    "against", "all",
      "also",     "am",      "an",      "and",     "any",      "are",     "as",
      "at",       "be",      "because", "been",    "before",   "being",   "below",
      "between",  "both",    "but",     "by",      "can",      "could",   "did",
      "do",       "does",    "doing",   "down",    "during",   "each",    "either",
      "else",     "ever",    "few",     "for",     "from",     "further", "had",
      "has",      "have",    "having",  "he",      "her",      "here",    "hers",
      "herself",  "him",     "himself", "his",     "how",      "however", "i",
      "if",       "in",      "into",    "is",      "it",       "its",     "itself",
      "just",     "let",     "may",     "me",      "might",    "more",    "most",
      "much",     "must",    "my",      "myself",  "neither",  "no",      "nor",
      "not",      "now",     "of",      "off",     "on",       "once",    "only",
      "or",       "other",   "our",     "ours",    "ourselves", "out",    "over",
      "own",      "same",    "shall",   "she",     "should",   "so",      "some",
      "such",     "than",    "that",    "the",     "their",    "theirs",  "them",
      "themselves", "then",  "there",   "these",   "they",     "this",    "those",
      "though",   "through", "to",      "too",     "under",    "until",   "up",
      "upon",     "us",      "very",    "was",     "we",       "were",    "what",
      "when",     "where",   "whether", "which",   "while",    "who",     "whom",
      "whose",    "why",     "will",    "with",    "within",   "without", "would",
      "yet",      "you",     "your",    "yours",   "yourself", "yourselves",
      "'ll",      "'s",      "'re",     "'ve",     "'d",       "'m",      "n't",
      "hi",       "hello",   "dear",    "thanks",  "thank",    "please",  "yes",
      "ok",       "okay",
  };
  return words;
}

inline bool is_stopword(std::string_view token) {
  return stopwords().count(detail::lower_ascii(token)) != 0;
}

/// True for tokens that carry content: at least one letter or digit and not
/// a stopword.
inline bool is_content_token(std::string_view token) {
  bool has_word = false;
  for (unsigned char c : token) {
    if (detail::is_alpha(c) || detail::is_digit(c) || c >= 0x80) {
      has_word = true;
      break;
    }
  }
  return has_word && !is_stopword(token);
}

namespace detail {

inline bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

inline bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline bool has_vowel(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

inline bool all_lower_alpha(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

/// Repairs a stem left after removing -ed / -ing.
inline std::string restore_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();  // runn -> run
    return stem;
  }
  if (ends_with(stem, "at") || ends_with(stem, "iz") || ends_with(stem, "v") ||
      (n >= 3 && stem[n - 1] == 'c' && is_vowel(stem[n - 2]))) {
    return stem + "e";  // updat -> update, finaliz -> finalize
  }
  // Short consonant-vowel-consonant stems take a silent e: mak -> make.
  const bool cvc = n >= 3 && !is_vowel(stem[n - 3]) && is_vowel(stem[n - 2]) &&
                   !is_vowel(stem[n - 1]) && stem[n - 1] != 'w' && stem[n - 1] != 'x' &&
                   stem[n - 1] != 'y';
  if (cvc && (n == 3 || (n == 4 && !is_vowel(stem[0])))) return stem + "e";
  return stem;
}

inline std::string lemmatize_once(const std::string& w) {
  const auto& irregular = irregular_lemmas();
  if (auto it = irregular.find(w); it != irregular.end()) return std::string(it->second);
  if (!all_lower_alpha(w)) return w;
  const std::size_t n = w.size();
  if (n >= 5 && ends_with(w, "ies")) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, n - 2);
  if (n >= 5 && (ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes") ||
                 ends_with(w, "zes"))) {
    return w.substr(0, n - 2);
  }
  if (n >= 4 && w.back() == 's' && !ends_with(w, "ss") && !ends_with(w, "us") &&
      !ends_with(w, "is")) {
    return w.substr(0, n - 1);
  }
  if (n >= 5 && ends_with(w, "ied")) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "eed")) return w;
  if (n >= 5 && ends_with(w, "ed") && has_vowel(std::string_view(w).substr(0, n - 2))) {
    return restore_stem(w.substr(0, n - 2));
  }
  if (n >= 6 && ends_with(w, "ing") && has_vowel(std::string_view(w).substr(0, n - 3))) {
    return restore_stem(w.substr(0, n - 3));
  }
  return w;
}

}  // namespace detail

/// Rule-based lemma: plural -s/-es/-ies, -ed and -ing with undoubling and
/// silent-e restoration, plus the irregular table. Rules are applied until a
/// fixed point, so the function is idempotent. Non-alphabetic tokens pass
/// through unchanged (apart from lowercasing).
inline std::string lemmatize(std::string_view token) {
  std::string cur = detail::lower_ascii(token);
  for (int guard = 0; guard < 64; ++guard) {
    std::string next = detail::lemmatize_once(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

/// Lemmas of the content tokens, in order, duplicates kept.
inline std::vector<std::string> content_lemmas(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (!is_content_token(t)) continue;
    std::string lemma = lemmatize(t);
    if (!is_stopword(lemma)) out.push_back(std::move(lemma));
  }
  return out;
}

inline std::vector<std::string> content_lemmas(std::string_view sentence) {
  return content_lemmas(tokenize(sentence));
}

}  // namespace smarttodo::text
