#pragma once

#include <string>
#include <vector>

#include "smarttodo/corpus/types.hpp"
#include "smarttodo/error.hpp"
#include "smarttodo/text/tokenizer.hpp"
#include "smarttodo/text/vocabulary.hpp"

namespace smarttodo::seq2seq {

enum class Field { Marker, Recipient, Subject, Query, Sentence };

/// Serialized encoder input with the field each token came from.
struct EncoderInput {
  std::vector<std::string> tokens;
  std::vector<Field> fields;

  std::size_t size() const noexcept { return tokens.size(); }
  std::string str() const { return text::join(tokens, " "); }

  /// The H tokens (the bifocal query encoder's input).
  std::vector<std::string> query() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (fields[i] == Field::Query) out.push_back(tokens[i]);
    }
    return out;
  }

  /// Everything except the <query> marker and the H tokens.
  std::vector<std::string> rest() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (fields[i] != Field::Query && tokens[i] != text::special::kQuery) out.push_back(tokens[i]);
    }
    return out;
  }
};

inline constexpr std::size_t kMaxInputTokens = 400;

/// Display name of an address: "Alice Smith <a@x.com>" -> "Alice Smith",
/// "alice@x.com" and "<alice@x.com>" -> "alice", otherwise the string itself.
inline std::string display_name(const std::string& address) {
  std::string name = address;
  if (name.size() > 1 && name.front() == '<' && name.back() == '>') name = name.substr(1, name.size() - 2);
  if (auto lt = name.find('<'); lt != std::string::npos && lt > 0) {
    name = name.substr(0, lt);
  } else if (auto at = name.find('@'); at != std::string::npos) {
    name = name.substr(0, at);
  }
  std::string out;
  for (char c : name) {
    if (c != '"') out.push_back(c);
  }
  const auto b = out.find_first_not_of(" \t");
  const auto e = out.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : out.substr(b, e - b + 1);
}

inline std::vector<std::string> recipient_tokens(const corpus::EmailMessage& m) {
  return m.to.empty() ? std::vector<std::string>{} : text::tokenize(display_name(m.to.front()));
}

/// <to> recipient <sub> subject <query> H <sent> I_1 I_2 ... <eos>.
/// Inputs longer than `max_tokens` lose trailing selected-sentence tokens
/// first, then trailing query, subject and recipient tokens.
inline EncoderInput serialize_input(const corpus::TodoInstance& inst,
                                    const std::vector<std::string>& selected,
                                    std::size_t max_tokens = kMaxInputTokens) {
  const auto sentences = inst.candidate_sentences();
  if (inst.commitment_sentence_index >= sentences.size()) {
    throw Seq2SeqError("instance " + inst.id + " has no commitment sentence");
  }
  const auto& msg = inst.thread.candidate;
  std::vector<std::vector<std::string>> parts = {
      recipient_tokens(msg), text::tokenize(msg.subject),
      text::tokenize(sentences[inst.commitment_sentence_index]), {}};
  for (const auto& s : selected) {
    for (auto& t : text::tokenize(s)) parts[3].push_back(std::move(t));
  }
  const std::size_t fixed = 5;
  std::size_t content = 0;
  for (const auto& p : parts) content += p.size();
  const std::size_t budget = max_tokens > fixed ? max_tokens - fixed : 0;
  for (std::size_t k = parts.size(); k-- > 0 && content > budget;) {
    const std::size_t cut = std::min(parts[k].size(), content - budget);
    parts[k].resize(parts[k].size() - cut);
    content -= cut;
  }

  static const char* markers[] = {text::special::kTo, text::special::kSub, text::special::kQuery,
                                  text::special::kSent};
  static const Field kinds[] = {Field::Recipient, Field::Subject, Field::Query, Field::Sentence};
  EncoderInput in;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    in.tokens.emplace_back(markers[k]);
    in.fields.push_back(Field::Marker);
    for (auto& t : parts[k]) {
      in.tokens.push_back(std::move(t));
      in.fields.push_back(kinds[k]);
    }
  }
  in.tokens.emplace_back(text::special::kInputEnd);
  in.fields.push_back(Field::Marker);
  return in;
}

/// Recipient, subject and H tokens joined by spaces.
inline std::string concatenate_baseline(const corpus::TodoInstance& inst) {
  std::vector<std::string> out = recipient_tokens(inst.thread.candidate);
  for (auto& t : text::tokenize(inst.thread.candidate.subject)) out.push_back(std::move(t));
  for (auto& t : text::tokenize(inst.commitment_sentence())) out.push_back(std::move(t));
  return text::join(out, " ");
}

}  // namespace smarttodo::seq2seq
