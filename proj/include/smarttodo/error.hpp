#pragma once

#include <stdexcept>
#include <string>

namespace smarttodo {

/// Base error. Every module throws a subclass so the CLI can name the stage.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

class TextError : public Error {
 public:
  explicit TextError(const std::string& what) : Error("text", what) {}
};

class CorpusError : public Error {
 public:
  explicit CorpusError(const std::string& what) : Error("corpus", what) {}
};

class CommitmentError : public Error {
 public:
  explicit CommitmentError(const std::string& what) : Error("commitment", what) {}
};

class SelectionError : public Error {
 public:
  explicit SelectionError(const std::string& what) : Error("selection", what) {}
};

class Seq2SeqError : public Error {
 public:
  explicit Seq2SeqError(const std::string& what) : Error("seq2seq", what) {}
};

class MetricsError : public Error {
 public:
  explicit MetricsError(const std::string& what) : Error("metrics", what) {}
};

class HarnessError : public Error {
 public:
  explicit HarnessError(const std::string& what) : Error("harness", what) {}
};

}  // namespace smarttodo
