#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace smarttodo::text {

namespace detail {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
/// Letters, digits and any non-ASCII byte (kept intact inside words).
inline bool is_word(unsigned char c) { return is_alpha(c) || is_digit(c) || c >= 0x80; }

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

/// Typographic apostrophes (U+2018, U+2019) become ASCII '.
inline std::string normalize_quotes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(s[i + 2]) == 0x98 ||
         static_cast<unsigned char>(s[i + 2]) == 0x99)) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

inline constexpr std::array<std::string_view, 6> kClitics = {"ll", "re", "ve", "s", "d", "m"};

inline bool is_clitic(std::string_view s) {
  for (auto c : kClitics) {
    if (s == c) return true;
  }
  return false;
}

/// Splits a run of word characters and apostrophes into tokens.
inline void split_word(const std::string& seg, std::vector<std::string>& out) {
  const auto apos = seg.find('\'');
  if (apos == std::string::npos) {
    out.push_back(seg);
    return;
  }
  if (seg == "n't") {
    out.push_back(seg);
    return;
  }
  const bool single_apostrophe = seg.find('\'', apos + 1) == std::string::npos;
  if (single_apostrophe) {
    // do|n't, ca|n't
    if (seg.size() > 3 && seg.compare(seg.size() - 3, 3, "n't") == 0 && apos == seg.size() - 2) {
      out.push_back(seg.substr(0, seg.size() - 3));
      out.push_back("n't");
      return;
    }
    // i|'ll, it|'s, or a bare clitic 'll
    if (is_clitic(std::string_view(seg).substr(apos + 1))) {
      if (apos > 0) out.push_back(seg.substr(0, apos));
      out.push_back(seg.substr(apos));
      return;
    }
  }
  // Any other apostrophe is punctuation.
  std::string cur;
  for (char c : seg) {
    if (c == '\'') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
      out.push_back("'");
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
}

}  // namespace detail

/// Deterministic rule tokenizer.
///
/// Rules, applied in order:
///   1. typographic apostrophes normalize to ', then ASCII letters are lowercased;
///   2. whitespace separates chunks and is discarded;
///   3. inside a chunk, maximal runs of letters/digits/non-ASCII bytes and
///      apostrophes form words; '.', ',' and ':' between two digits stay inside
///      the word ("3.5", "10:00");
///   4. every other character is its own punctuation token;
///   5. words split off the clitics 'll 're 've 's 'd 'm and n't
///      ("i'll" -> i 'll, "don't" -> do n't); other apostrophes are punctuation.
inline std::vector<std::string> tokenize(std::string_view input) {
  const std::string text = detail::lower_ascii(detail::normalize_quotes(input));
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) detail::split_word(word, tokens);
    word.clear();
  };
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (detail::is_space(c)) {
      flush();
    } else if (detail::is_word(c) || c == '\'') {
      word.push_back(static_cast<char>(c));
    } else if ((c == '.' || c == ',' || c == ':') && !word.empty() &&
               detail::is_digit(static_cast<unsigned char>(word.back())) && i + 1 < n &&
               detail::is_digit(static_cast<unsigned char>(text[i + 1]))) {
      word.push_back(static_cast<char>(c));
    } else {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return tokens;
}

inline std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace smarttodo::text
