#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "smarttodo/corpus/types.hpp"
#include "smarttodo/error.hpp"

namespace smarttodo::corpus {

struct LoadOptions {
  /// Throw on the first malformed record instead of collecting diagnostics.
  bool strict = true;
};

struct LoadDiagnostic {
  std::size_t line = 0;
  std::string field;
  std::string message;

  std::string str() const {
    return "line " + std::to_string(line) + (field.empty() ? "" : ", field '" + field + "'") + ": " +
           message;
  }
};

struct LoadResult {
  std::vector<TodoInstance> instances;
  std::vector<LoadDiagnostic> diagnostics;
};

namespace detail {

using nlohmann::json;

struct SchemaError {
  std::string field;
  std::string message;
};

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError{path + key, "missing field"};
  return *it;
}

inline std::string require_string(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError{path + key, "expected a string"};
  return v.get<std::string>();
}

inline EmailMessage parse_message(const json& obj, const std::string& path,
                                  const std::string& default_id) {
  if (!obj.is_object()) throw SchemaError{path.substr(0, path.size() - 1), "expected an object"};
  EmailMessage m;
  m.id = obj.contains("id") ? require_string(obj, "id", path) : default_id;
  if (m.id.empty()) throw SchemaError{path + "id", "empty id"};
  m.from = require_string(obj, "from", path);
  const json& to = require(obj, "to", path);
  if (!to.is_array()) throw SchemaError{path + "to", "expected an array of strings"};
  for (const auto& r : to) {
    if (!r.is_string()) throw SchemaError{path + "to", "expected an array of strings"};
    m.to.push_back(r.get<std::string>());
  }
  m.subject = require_string(obj, "subject", path);
  m.body = require_string(obj, "body", path);
  const json& t = require(obj, "sent_time", path);
  if (!t.is_number_integer()) throw SchemaError{path + "sent_time", "expected an integer"};
  m.sent_time = t.get<std::int64_t>();
  if (auto it = obj.find("reply_to_id"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError{path + "reply_to_id", "expected a string"};
    m.reply_to_id = it->get<std::string>();
  }
  return m;
}

inline TodoInstance parse_instance(const json& obj) {
  if (!obj.is_object()) throw SchemaError{"", "record is not an object"};
  TodoInstance inst;
  inst.id = require_string(obj, "id", "");
  if (inst.id.empty()) throw SchemaError{"id", "empty id"};
  inst.thread.candidate = parse_message(require(obj, "candidate", ""), "candidate.", inst.id + "/c");
  if (auto it = obj.find("previous"); it != obj.end() && !it->is_null()) {
    inst.thread.previous = parse_message(*it, "previous.", inst.id + "/p");
    auto& cand = inst.thread.candidate;
    const auto& prev = *inst.thread.previous;
    if (!cand.reply_to_id) cand.reply_to_id = prev.id;
    if (*cand.reply_to_id != prev.id) {
      throw SchemaError{"candidate.reply_to_id", "does not match previous.id '" + prev.id + "'"};
    }
    if (prev.sent_time >= cand.sent_time) {
      throw SchemaError{"previous.sent_time", "previous email is not earlier than the candidate"};
    }
  }

  const json& idx = require(obj, "commitment_index", "");
  if (!idx.is_number_integer() || idx.get<long long>() < 0) {
    throw SchemaError{"commitment_index", "expected a non-negative integer"};
  }
  inst.commitment_sentence_index = idx.get<std::size_t>();
  const std::size_t n_candidate = inst.candidate_sentences().size();
  if (inst.commitment_sentence_index >= n_candidate) {
    throw SchemaError{"commitment_index", "index " + std::to_string(inst.commitment_sentence_index) +
                                              " out of range for " + std::to_string(n_candidate) +
                                              " candidate sentences"};
  }

  const json& ann = require(obj, "annotations", "");
  if (!ann.is_array() || ann.empty() || ann.size() > 2) {
    throw SchemaError{"annotations", "expected 1 or 2 strings"};
  }
  bool any_nonempty = false;
  for (const auto& a : ann) {
    if (!a.is_string()) throw SchemaError{"annotations", "expected 1 or 2 strings"};
    inst.annotations.push_back(a.get<std::string>());
    any_nonempty = any_nonempty || !text::tokenize(inst.annotations.back()).empty();
  }
  if (!any_nonempty) throw SchemaError{"annotations", "all annotations are empty"};

  if (auto it = obj.find("helpful_labels"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError{"helpful_labels", "expected an array of booleans"};
    std::vector<bool> labels;
    for (const auto& b : *it) {
      if (!b.is_boolean()) throw SchemaError{"helpful_labels", "expected an array of booleans"};
      labels.push_back(b.get<bool>());
    }
    const std::size_t expected = n_candidate + inst.previous_sentences().size();
    if (labels.size() != expected) {
      throw SchemaError{"helpful_labels", "has " + std::to_string(labels.size()) +
                                              " entries, thread has " + std::to_string(expected) +
                                              " sentences"};
    }
    inst.helpful_labels = std::move(labels);
  }
  return inst;
}

inline nlohmann::ordered_json message_json(const EmailMessage& m) {
  nlohmann::ordered_json j;
  j["id"] = m.id;
  j["from"] = m.from;
  j["to"] = m.to;
  j["subject"] = m.subject;
  j["body"] = m.body;
  j["sent_time"] = m.sent_time;
  if (m.reply_to_id) j["reply_to_id"] = *m.reply_to_id;
  return j;
}

}  // namespace detail

/// Parses line-delimited JSON records. Blank lines are skipped; unknown
/// fields are ignored. In non-strict mode malformed records are reported and
/// skipped.
inline LoadResult parse_corpus(std::istream& in, const LoadOptions& options = {}) {
  LoadResult result;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    LoadDiagnostic diag{line_no, "", ""};
    try {
      TodoInstance inst = detail::parse_instance(nlohmann::json::parse(line));
      if (!seen_ids.insert(inst.id).second) {
        throw detail::SchemaError{"id", "duplicate instance id '" + inst.id + "'"};
      }
      result.instances.push_back(std::move(inst));
      continue;
    } catch (const detail::SchemaError& e) {
      diag.field = e.field;
      diag.message = e.message;
    } catch (const nlohmann::json::exception& e) {
      diag.message = std::string("malformed record: ") + e.what();
    }
    if (options.strict) throw CorpusError(diag.str());
    result.diagnostics.push_back(std::move(diag));
  }
  return result;
}

inline LoadResult load_corpus(const std::string& path, const LoadOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read corpus file " + path);
  try {
    return parse_corpus(in, options);
  } catch (const CorpusError& e) {
    throw CorpusError(path + ": " + e.what());
  }
}

inline std::string serialize_instance(const TodoInstance& inst) {
  nlohmann::ordered_json j;
  j["id"] = inst.id;
  j["candidate"] = detail::message_json(inst.thread.candidate);
  if (inst.thread.previous) j["previous"] = detail::message_json(*inst.thread.previous);
  j["commitment_index"] = inst.commitment_sentence_index;
  j["annotations"] = inst.annotations;
  if (inst.helpful_labels) j["helpful_labels"] = *inst.helpful_labels;
  return j.dump();
}

inline void write_corpus(std::ostream& out, const std::vector<TodoInstance>& instances) {
  for (const auto& inst : instances) out << serialize_instance(inst) << '\n';
}

inline std::string serialize_corpus(const std::vector<TodoInstance>& instances) {
  std::ostringstream out;
  write_corpus(out, instances);
  return out.str();
}

inline void save_corpus(const std::string& path, const std::vector<TodoInstance>& instances) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus file " + path);
  write_corpus(out, instances);
}

}  // namespace smarttodo::corpus
