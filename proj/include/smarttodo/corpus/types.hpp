#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smarttodo/text/sentence_splitter.hpp"

namespace smarttodo::corpus {

struct EmailMessage {
  std::string id;
  std::string from;
  std::vector<std::string> to;
  std::string subject;
  std::string body;
  std::int64_t sent_time = 0;
  std::optional<std::string> reply_to_id;

  friend bool operator==(const EmailMessage&, const EmailMessage&) = default;
};

/// Candidate email e_c and the message it replies to, e_p.
struct EmailThread {
  EmailMessage candidate;
  std::optional<EmailMessage> previous;

  friend bool operator==(const EmailThread&, const EmailThread&) = default;
};

struct TodoInstance {
  std::string id;
  EmailThread thread;
  std::size_t commitment_sentence_index = 0;
  std::vector<std::string> annotations;
  /// One flag per sentence of e_c followed by e_p.
  std::optional<std::vector<bool>> helpful_labels;

  friend bool operator==(const TodoInstance&, const TodoInstance&) = default;

  std::vector<std::string> candidate_sentences() const {
    return text::split_sentences(thread.candidate.body);
  }

  std::vector<std::string> previous_sentences() const {
    return thread.previous ? text::split_sentences(thread.previous->body)
                           : std::vector<std::string>{};
  }

  /// Sentences of e_c then e_p, the index space of helpful_labels.
  std::vector<std::string> all_sentences() const {
    auto out = candidate_sentences();
    for (auto& s : previous_sentences()) out.push_back(std::move(s));
    return out;
  }

  std::string commitment_sentence() const {
    return candidate_sentences().at(commitment_sentence_index);
  }
};

struct DatasetSplit {
  std::vector<TodoInstance> train;
  std::vector<TodoInstance> validation;
  std::vector<TodoInstance> test;
};

}  // namespace smarttodo::corpus
