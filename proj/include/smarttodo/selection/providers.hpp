#pragma once

#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "smarttodo/error.hpp"
#include "smarttodo/selection/context.hpp"
#include "smarttodo/selection/word_vectors.hpp"

namespace smarttodo::selection {

using Vector = std::vector<double>;

/// h(.): maps a sentence to a fixed-dimension vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Vector embed(const SentenceRef& sentence) const = 0;
  /// Instance-specific provider (e.g. one over the instance's type
  /// inventory), or nullptr when this provider applies as is.
  virtual std::unique_ptr<EmbeddingProvider> bind(const SelectionInput&) const { return nullptr; }
};

/// Binary term-frequency vectors over a fixed type inventory.
class TfBinary : public EmbeddingProvider {
 public:
  TfBinary() = default;
  explicit TfBinary(const std::set<std::string>& inventory) {
    for (const auto& t : inventory) index_.emplace(t, index_.size());
  }

  /// Inventory = the content-lemma types of the given sentences.
  static TfBinary over(const std::vector<std::vector<std::string>>& lemma_lists) {
    std::set<std::string> types;
    for (const auto& l : lemma_lists) types.insert(l.begin(), l.end());
    return TfBinary(types);
  }

  std::string name() const override { return "tf"; }
  std::size_t dimension() const override { return index_.size(); }

  Vector embed(const SentenceRef& s) const override {
    Vector v(index_.size(), 0.0);
    for (const auto& l : s.lemmas) {
      if (auto it = index_.find(l); it != index_.end()) v[it->second] = 1.0;
    }
    return v;
  }

  std::unique_ptr<EmbeddingProvider> bind(const SelectionInput& in) const override {
    std::vector<std::vector<std::string>> lists = {in.query.lemmas};
    for (const auto& c : in.candidates) lists.push_back(c.ref.lemmas);
    return std::make_unique<TfBinary>(over(lists));
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Pooling { Mean, Max };

/// Elementwise mean or max of the sentence's word vectors. Tokens without a
/// vector are skipped; a sentence with none embeds to zeros.
class WordVecPool : public EmbeddingProvider {
 public:
  WordVecPool(std::shared_ptr<const WordVectorTable> table, Pooling pooling)
      : table_(std::move(table)), pooling_(pooling) {
    if (!table_) throw SelectionError("WordVecPool needs a word vector table");
  }

  std::string name() const override { return pooling_ == Pooling::Max ? "wv-max" : "wv-mean"; }
  std::size_t dimension() const override { return table_->dimension(); }

  Vector embed(const SentenceRef& s) const override {
    const std::size_t D = table_->dimension();
    Vector out(D, 0.0);
    std::size_t n = 0;
    for (const auto& l : s.lemmas) {
      const auto v = table_->vector_of(l);
      if (!v) continue;
      for (std::size_t d = 0; d < D; ++d) {
        if (pooling_ == Pooling::Mean) {
          out[d] += (*v)[d];
        } else {
          out[d] = n == 0 ? (*v)[d] : std::max(out[d], (*v)[d]);
        }
      }
      ++n;
    }
    if (pooling_ == Pooling::Mean && n > 0) {
      for (double& x : out) x /= static_cast<double>(n);
    }
    return out;
  }

 private:
  std::shared_ptr<const WordVectorTable> table_;
  Pooling pooling_;
};

/// Precomputed sentence vectors, one "key v1 ... vdim" line each.
class FileVectorProvider : public EmbeddingProvider {
 public:
  explicit FileVectorProvider(std::istream& in, std::string source = "<stream>") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key)) continue;
      Vector v;
      for (double x; ls >> x;) v.push_back(x);
      if (!ls.eof()) throw SelectionError(source + ":" + std::to_string(lineno) + ": bad number");
      if (v.empty()) throw SelectionError(source + ":" + std::to_string(lineno) + ": no values");
      if (dim_ == 0) dim_ = v.size();
      if (v.size() != dim_) {
        throw SelectionError(source + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(dim_) + " values, got " + std::to_string(v.size()));
      }
      if (!vectors_.emplace(key, std::move(v)).second) {
        throw SelectionError(source + ":" + std::to_string(lineno) + ": duplicate key " + key);
      }
    }
    if (vectors_.empty()) throw SelectionError(source + " holds no vectors");
  }

  static FileVectorProvider load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SelectionError("cannot read " + path);
    return FileVectorProvider(in, path);
  }

  std::string name() const override { return "file"; }
  std::size_t dimension() const override { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  Vector embed(const SentenceRef& s) const override {
    auto it = vectors_.find(s.key);
    if (it == vectors_.end()) throw SelectionError("no precomputed vector for key " + s.key);
    return it->second;
  }

 private:
  std::unordered_map<std::string, Vector> vectors_;
  std::size_t dim_ = 0;
};

}  // namespace smarttodo::selection
