#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "smarttodo/text/tokenizer.hpp"

namespace smarttodo::text {

/// Words ending in '.' that never close a sentence.
inline constexpr std::array<std::string_view, 24> kAbbreviations = {
    "e.g.", "i.e.", "mr.",   "mrs.", "ms.",   "dr.",  "prof.", "sr.",
    "jr.",  "st.",  "vs.",   "inc.", "ltd.",  "co.",  "corp.", "approx.",
    "dept.", "no.", "fig.",  "est.", "cf.",   "a.m.", "p.m.",  "u.s."};

namespace detail {

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

inline std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_space(static_cast<unsigned char>(c))) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

/// The whitespace-delimited word that ends at position `end` (inclusive).
inline std::string word_ending_at(std::string_view s, std::size_t end) {
  std::size_t start = end;
  while (start > 0 && !is_space(static_cast<unsigned char>(s[start - 1]))) --start;
  return lower_ascii(s.substr(start, end - start + 1));
}

inline bool guarded(std::string_view para, std::size_t period) {
  const std::string w = word_ending_at(para, period);
  for (auto a : kAbbreviations) {
    if (w == a) return true;
  }
  // Single-letter initials such as "J." in "J. Smith".
  return w.size() == 2 && is_alpha(static_cast<unsigned char>(w[0]));
}

inline void split_paragraph(std::string_view para, std::vector<std::string>& out) {
  std::size_t start = 0;
  const std::size_t n = para.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_terminator(para[i])) {
      ++i;
      continue;
    }
    const std::size_t first = i;
    std::size_t j = i;
    while (j + 1 < n && is_terminator(para[j + 1])) ++j;
    const std::size_t last_terminator = j;
    while (j + 1 < n && is_closer(para[j + 1])) ++j;
    const bool at_boundary = j + 1 == n || is_space(static_cast<unsigned char>(para[j + 1]));
    const bool abbreviation =
        first == last_terminator && para[first] == '.' && guarded(para, first);
    if (at_boundary && !abbreviation) {
      std::string s = collapse_ws(para.substr(start, j + 1 - start));
      if (!s.empty()) out.push_back(std::move(s));
      start = j + 1;
    }
    i = j + 1;
  }
  std::string tail = collapse_ws(para.substr(start));
  if (!tail.empty()) out.push_back(std::move(tail));
}

}  // namespace detail

/// Splits a body into sentences: a run of '.', '!' or '?' (plus closing quotes
/// or brackets) followed by whitespace or end of text ends a sentence, unless
/// the word is a guarded abbreviation; a blank line always ends a sentence.
/// Whitespace inside a sentence is collapsed to single spaces.
inline std::vector<std::string> split_sentences(std::string_view body) {
  std::vector<std::string> out;
  std::size_t start = 0;
  const std::size_t n = body.size();
  std::size_t i = 0;
  while (i < n) {
    if (body[i] == '\n') {
      std::size_t j = i + 1;
      while (j < n && body[j] != '\n' && detail::is_space(static_cast<unsigned char>(body[j]))) ++j;
      if (j < n && body[j] == '\n') {
        detail::split_paragraph(body.substr(start, i - start), out);
        while (j < n && detail::is_space(static_cast<unsigned char>(body[j]))) ++j;
        start = j;
        i = j;
        continue;
      }
    }
    ++i;
  }
  detail::split_paragraph(body.substr(start), out);
  return out;
}

}  // namespace smarttodo::text
