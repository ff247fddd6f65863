#pragma once

#include <algorithm>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "smarttodo/error.hpp"

namespace smarttodo::text {

namespace special {
inline constexpr const char* kPad = "<pad>";
inline constexpr const char* kUnk = "<unk>";
inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kTo = "<to>";
inline constexpr const char* kSub = "<sub>";
inline constexpr const char* kQuery = "<query>";
inline constexpr const char* kSent = "<sent>";
inline constexpr const char* kInputEnd = "<eos>";
}  // namespace special

/// Special tokens in id order; they always occupy ids 0..8.
inline const std::vector<std::string>& default_specials() {
  static const std::vector<std::string> specials = {
      special::kPad, special::kUnk,   special::kBos,  special::kEos,     special::kTo,
      special::kSub, special::kQuery, special::kSent, special::kInputEnd};
  return specials;
}

/// Token ids of an encoded sequence, parallel to its tokens.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<std::size_t> ids;
};

/// Bijective token <-> id map. Specials come first in fixed order; the rest
/// are ordered by count descending, then lexicographically.
class Vocabulary {
 public:
  static constexpr std::size_t kPadId = 0;
  static constexpr std::size_t kUnkId = 1;
  static constexpr std::size_t kBosId = 2;
  static constexpr std::size_t kEosId = 3;

  Vocabulary() : Vocabulary(default_specials()) {}

  explicit Vocabulary(const std::vector<std::string>& specials) {
    if (specials.size() < 4 || specials[0] != special::kPad || specials[1] != special::kUnk ||
        specials[2] != special::kBos || specials[3] != special::kEos) {
      throw TextError("specials must start with <pad> <unk> <s> </s>");
    }
    for (const auto& s : specials) append(s);
    n_specials_ = id_to_token_.size();
  }

  std::size_t size() const noexcept { return id_to_token_.size(); }
  std::size_t special_count() const noexcept { return n_specials_; }
  std::size_t min_count() const noexcept { return min_count_; }

  bool contains(const std::string& token) const { return token_to_id_.count(token) != 0; }

  /// Id of `token`, or the <unk> id.
  std::size_t id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
  }

  const std::string& token(std::size_t id) const {
    if (id >= id_to_token_.size()) {
      throw TextError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                      std::to_string(id_to_token_.size()));
    }
    return id_to_token_[id];
  }

  const std::vector<std::string>& tokens() const noexcept { return id_to_token_; }

  /// Counts tokens across `sequences` and keeps those seen at least
  /// `min_count` times.
  static Vocabulary build(std::span<const std::vector<std::string>> sequences,
                          std::size_t min_count = 2,
                          const std::vector<std::string>& specials = default_specials()) {
    Vocabulary v(specials);
    v.min_count_ = min_count;
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& seq : sequences) {
      for (const auto& t : seq) ++counts[t];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [tok, c] : counts) {
      if (c >= min_count && !v.contains(tok)) kept.emplace_back(tok, c);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (auto& [tok, c] : kept) v.append(tok);
    return v;
  }

  TokenSequence encode(const std::vector<std::string>& tokens) const {
    TokenSequence seq;
    seq.tokens = tokens;
    seq.ids.reserve(tokens.size());
    for (const auto& t : tokens) seq.ids.push_back(id(t));
    return seq;
  }

  std::vector<std::string> decode(std::span<const std::size_t> ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (auto i : ids) out.push_back(token(i));
    return out;
  }

  /// Signed overload so callers passing -1 get an error, not a wraparound.
  std::vector<std::string> decode(std::span<const long long> ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (auto i : ids) {
      if (i < 0) throw TextError("negative token id " + std::to_string(i));
      out.push_back(token(static_cast<std::size_t>(i)));
    }
    return out;
  }

  /// One token per line; the line number is the id.
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw TextError("cannot write vocabulary " + path);
    for (const auto& t : id_to_token_) out << t << '\n';
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TextError("cannot read vocabulary " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    const auto& specials = default_specials();
    if (lines.size() < specials.size() ||
        !std::equal(specials.begin(), specials.end(), lines.begin())) {
      throw TextError("vocabulary " + path + " does not start with the special tokens");
    }
    Vocabulary v(specials);
    for (std::size_t i = specials.size(); i < lines.size(); ++i) {
      if (lines[i].empty() || v.contains(lines[i])) {
        throw TextError("vocabulary " + path + " line " + std::to_string(i + 1) +
                        ": empty or duplicate token");
      }
      v.append(lines[i]);
    }
    return v;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  void append(const std::string& t) {
    token_to_id_.emplace(t, id_to_token_.size());
    id_to_token_.push_back(t);
  }

  std::unordered_map<std::string, std::size_t> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::size_t n_specials_ = 0;
  std::size_t min_count_ = 0;
};

inline Vocabulary build_vocabulary(std::span<const std::vector<std::string>> sequences,
                                   std::size_t min_count = 2,
                                   const std::vector<std::string>& specials = default_specials()) {
  return Vocabulary::build(sequences, min_count, specials);
}

inline TokenSequence encode(const Vocabulary& vocab, const std::vector<std::string>& tokens) {
  return vocab.encode(tokens);
}

inline std::vector<std::string> decode(const Vocabulary& vocab, std::span<const std::size_t> ids) {
  return vocab.decode(ids);
}

inline std::vector<std::string> decode(const Vocabulary& vocab, std::span<const long long> ids) {
  return vocab.decode(ids);
}

}  // namespace smarttodo::text
