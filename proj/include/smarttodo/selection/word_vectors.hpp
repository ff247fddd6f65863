#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "smarttodo/error.hpp"
#include "smarttodo/numeric/random.hpp"

namespace smarttodo::selection {

struct WordVectorOptions {
  std::size_t dim = 300;
  std::size_t window = 5;
  std::size_t epochs = 5;
  std::size_t negatives = 5;
  double learning_rate = 0.025;
  std::size_t min_count = 1;
  /// Frequent-word subsampling threshold; 0 disables it.
  double sample = 0.0;
  /// Character n-gram buckets composed into each word vector.
  bool subword = false;
  std::size_t min_n = 3;
  std::size_t max_n = 6;
  std::size_t buckets = 50000;
  std::uint64_t seed = 1;
};

/// One row per vocabulary token. When trained with subword buckets, vectors
/// for unseen tokens are composed from their character n-grams.
class WordVectorTable {
 public:
  WordVectorTable() = default;
  WordVectorTable(std::vector<std::string> tokens, std::size_t dim, std::vector<double> rows)
      : tokens_(std::move(tokens)), dim_(dim), rows_(std::move(rows)) {
    if (rows_.size() != tokens_.size() * dim_) throw SelectionError("word vector table shape mismatch");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], i).second) {
        throw SelectionError("duplicate token in word vector table: " + tokens_[i]);
      }
    }
    for (double v : rows_) {
      if (!std::isfinite(v)) throw SelectionError("non-finite entry in word vector table");
    }
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t dimension() const noexcept { return dim_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  bool has_subwords() const noexcept { return !buckets_.empty(); }

  std::span<const double> row(std::size_t i) const { return {rows_.data() + i * dim_, dim_}; }

  /// The token's vector; n-gram composition for unknown tokens when
  /// available, otherwise nullopt.
  std::optional<std::vector<double>> vector_of(const std::string& token) const {
    if (auto it = index_.find(token); it != index_.end()) {
      auto r = row(it->second);
      return std::vector<double>(r.begin(), r.end());
    }
    if (!has_subwords()) return std::nullopt;
    const auto grams = ngram_buckets(token, min_n_, max_n_, bucket_count_);
    if (grams.empty()) return std::nullopt;
    std::vector<double> v(dim_, 0.0);
    for (auto g : grams) {
      for (std::size_t d = 0; d < dim_; ++d) v[d] += buckets_[g * dim_ + d];
    }
    for (double& x : v) x /= static_cast<double>(grams.size());
    return v;
  }

  double cosine(const std::string& a, const std::string& b) const {
    const auto va = vector_of(a), vb = vector_of(b);
    if (!va || !vb) throw SelectionError("cosine: unknown token");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t d = 0; d < dim_; ++d) {
      dot += (*va)[d] * (*vb)[d];
      na += (*va)[d] * (*va)[d];
      nb += (*vb)[d] * (*vb)[d];
    }
    return na == 0 || nb == 0 ? 0.0 : dot / std::sqrt(na * nb);
  }

  /// Text format: "<count> <dim>" header, then "token v1 ... vdim" per line.
  void write(std::ostream& out) const {
    out << tokens_.size() << ' ' << dim_ << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      out << tokens_[i];
      for (double v : row(i)) out << ' ' << v;
      out << '\n';
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SelectionError("cannot write " + path);
    write(out);
  }

  static WordVectorTable read(std::istream& in) {
    std::size_t count = 0, dim = 0;
    std::string header;
    if (!std::getline(in, header)) throw SelectionError("word vector file is empty");
    std::istringstream hs(header);
    if (!(hs >> count >> dim) || dim == 0) throw SelectionError("bad word vector header: " + header);
    std::vector<std::string> tokens;
    std::vector<double> rows;
    tokens.reserve(count);
    rows.reserve(count * dim);
    std::string line;
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(in, line)) throw SelectionError("word vector file ends after " + std::to_string(i) + " rows");
      std::istringstream ls(line);
      std::string token;
      ls >> token;
      for (std::size_t d = 0; d < dim; ++d) {
        double v;
        if (!(ls >> v)) {
          throw SelectionError("row " + std::to_string(i + 1) + " (" + token + ") has fewer than " +
                               std::to_string(dim) + " values");
        }
        rows.push_back(v);
      }
      tokens.push_back(token);
    }
    return WordVectorTable(std::move(tokens), dim, std::move(rows));
  }

  static WordVectorTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SelectionError("cannot read " + path);
    return read(in);
  }

  /// Bucket ids of the character n-grams of "<token>".
  static std::vector<std::size_t> ngram_buckets(const std::string& token, std::size_t min_n,
                                                std::size_t max_n, std::size_t buckets) {
    std::vector<std::size_t> out;
    if (buckets == 0) return out;
    const std::string w = "<" + token + ">";
    for (std::size_t n = min_n; n <= max_n; ++n) {
      for (std::size_t i = 0; i + n <= w.size(); ++i) {
        out.push_back(numeric::fnv1a(std::string_view(w).substr(i, n)) % buckets);
      }
    }
    return out;
  }

 private:
  friend WordVectorTable train_word_vectors(const std::vector<std::vector<std::string>>&,
                                            const WordVectorOptions&);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dim_ = 0;
  std::vector<double> rows_;
  std::vector<double> buckets_;
  std::size_t min_n_ = 3, max_n_ = 6, bucket_count_ = 0;
};

/// Skip-gram with negative sampling. Each centre word predicts the words in
/// a randomly shrunk window around it; negatives come from the unigram
/// distribution raised to 0.75. Frequent words are randomly dropped as in
/// word2vec, and the learning rate decays linearly.
inline WordVectorTable train_word_vectors(const std::vector<std::vector<std::string>>& sentences,
                                          const WordVectorOptions& opt = {}) {
  if (opt.dim == 0 || opt.window == 0) throw SelectionError("word vectors need dim and window >= 1");
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : sentences) {
    for (const auto& t : s) {
      ++counts[t];
      ++total;
    }
  }
  if (total <= opt.window) {
    throw SelectionError("word-vector corpus has " + std::to_string(total) +
                         " tokens, not more than the window of " + std::to_string(opt.window));
  }
  std::vector<std::pair<std::string, std::size_t>> vocab;
  for (const auto& [t, c] : counts) {
    if (c >= opt.min_count) vocab.emplace_back(t, c);
  }
  std::stable_sort(vocab.begin(), vocab.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (vocab.empty()) throw SelectionError("no token reaches min_count");
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> tokens;
  for (const auto& [t, c] : vocab) {
    index.emplace(t, tokens.size());
    tokens.push_back(t);
  }

  const std::size_t V = tokens.size(), D = opt.dim;
  numeric::Rng rng(numeric::derive_seed(opt.seed, "selection.word_vectors"));
  std::vector<double> in(V * D), out(V * D, 0.0);
  for (double& x : in) x = rng.uniform(-0.5, 0.5) / static_cast<double>(D);

  const std::size_t B = opt.subword ? opt.buckets : 0;
  std::vector<double> grams(B * D);
  for (double& x : grams) x = rng.uniform(-0.5, 0.5) / static_cast<double>(D);
  std::vector<std::vector<std::size_t>> word_grams(V);
  if (B) {
    for (std::size_t w = 0; w < V; ++w) {
      word_grams[w] = WordVectorTable::ngram_buckets(tokens[w], opt.min_n, opt.max_n, B);
    }
  }

  std::vector<double> cumulative(V);
  double acc = 0.0;
  for (std::size_t w = 0; w < V; ++w) {
    acc += std::pow(static_cast<double>(vocab[w].second), 0.75);
    cumulative[w] = acc;
  }
  auto sample_negative = [&]() {
    const double r = rng.uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), V - 1);
  };

  std::vector<std::vector<std::size_t>> encoded;
  for (const auto& s : sentences) {
    encoded.emplace_back();
    for (const auto& t : s) {
      if (auto it = index.find(t); it != index.end()) encoded.back().push_back(it->second);
    }
  }

  std::vector<double> keep(V, 1.0);
  if (opt.sample > 0.0) {
    for (std::size_t w = 0; w < V; ++w) {
      const double f = static_cast<double>(vocab[w].second) / static_cast<double>(total);
      keep[w] = std::min(1.0, (std::sqrt(f / opt.sample) + 1.0) * opt.sample / f);
    }
  }

  std::vector<double> h(D), grad(D);
  std::vector<std::size_t> kept;
  const double steps = static_cast<double>(opt.epochs) * static_cast<double>(total);
  double done = 0.0;
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    for (const auto& sentence : encoded) {
      kept.clear();
      for (auto w : sentence) {
        if (keep[w] >= 1.0 || rng.bernoulli(keep[w])) kept.push_back(w);
      }
      done += static_cast<double>(sentence.size() - kept.size());
      const auto& s = kept;
      for (std::size_t pos = 0; pos < s.size(); ++pos, done += 1.0) {
        const double lr = opt.learning_rate * std::max(1e-4, 1.0 - done / steps);
        const std::size_t centre = s[pos];
        const auto& g = word_grams[centre];
        const double parts = 1.0 + static_cast<double>(g.size());
        for (std::size_t d = 0; d < D; ++d) {
          double v = in[centre * D + d];
          for (auto b : g) v += grams[b * D + d];
          h[d] = v / parts;
        }
        const std::size_t reach = 1 + rng.below(opt.window);
        const std::size_t lo = pos >= reach ? pos - reach : 0;
        const std::size_t hi = std::min(s.size(), pos + reach + 1);
        for (std::size_t c = lo; c < hi; ++c) {
          if (c == pos) continue;
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t k = 0; k <= opt.negatives; ++k) {
            const std::size_t target = k == 0 ? s[c] : sample_negative();
            if (k > 0 && target == s[c]) continue;
            const double label = k == 0 ? 1.0 : 0.0;
            double* o = &out[target * D];
            double dot = 0.0;
            for (std::size_t d = 0; d < D; ++d) dot += h[d] * o[d];
            const double sig = dot >= 0 ? 1.0 / (1.0 + std::exp(-dot))
                                        : std::exp(dot) / (1.0 + std::exp(dot));
            const double step = lr * (label - sig);
            for (std::size_t d = 0; d < D; ++d) {
              grad[d] += step * o[d];
              o[d] += step * h[d];
            }
          }
          for (std::size_t d = 0; d < D; ++d) {
            const double gd = grad[d] / parts;
            in[centre * D + d] += gd;
            for (auto b : g) grams[b * D + d] += gd;
            h[d] += gd;
          }
        }
      }
    }
  }

  std::vector<double> rows(V * D);
  for (std::size_t w = 0; w < V; ++w) {
    const auto& g = word_grams[w];
    const double parts = 1.0 + static_cast<double>(g.size());
    for (std::size_t d = 0; d < D; ++d) {
      double v = in[w * D + d];
      for (auto b : g) v += grams[b * D + d];
      rows[w * D + d] = v / parts;
    }
  }
  WordVectorTable table(std::move(tokens), D, std::move(rows));
  if (B) {
    table.buckets_ = std::move(grams);
    table.min_n_ = opt.min_n;
    table.max_n_ = opt.max_n;
    table.bucket_count_ = B;
  }
  return table;
}

}  // namespace smarttodo::selection
