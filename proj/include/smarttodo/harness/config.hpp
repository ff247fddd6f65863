#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "smarttodo/commitment/classifier.hpp"
#include "smarttodo/corpus/split.hpp"
#include "smarttodo/corpus/synth.hpp"
#include "smarttodo/error.hpp"
#include "smarttodo/selection/word_vectors.hpp"
#include "smarttodo/seq2seq/decode.hpp"
#include "smarttodo/seq2seq/train.hpp"

namespace smarttodo::harness {

struct Paths {
  std::string corpus;
  /// Word-vector table for the wv-* selection providers.
  std::string vectors;
  /// Precomputed sentence vectors for the file provider.
  std::string sentence_vectors;
  std::string classifier = "out/classifier";
  std::string generator = "out/generator";
  std::string output = "out";
};

struct PipelineConfig {
  Paths paths;
  std::uint64_t seed = 1;
  double threshold = 0.9;
  std::size_t tau = 10;
  std::size_t k = 2;
  std::string provider = "wv-max";
  corpus::SynthSpec synth{};
  corpus::SplitRatios split{};
  commitment::ClassifierConfig classifier{};
  selection::WordVectorOptions word_vectors{};
  seq2seq::ModelConfig model{};
  seq2seq::TrainConfig train{};
  seq2seq::BeamOptions beam{};
};

namespace detail {

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw HarnessError("config " + key + ": expected true or false, got '" + text + "'");
  } else {
    in >> v;
    if (!in || !(in >> std::ws).eof()) throw HarnessError("config " + key + ": cannot parse '" + text + "'");
  }
  return v;
}

template <>
inline std::string parse_value<std::string>(const std::string&, const std::string& text) {
  return text;
}

/// Reads `section.key` into `out`. Precedence: explicit override, then the
/// environment variable SMARTTODO_<SECTION>_<KEY>, then the file, then the
/// default.
class Binder {
 public:
  Binder(const boost::property_tree::ptree& tree, const std::map<std::string, std::string>& overrides)
      : tree_(tree), overrides_(overrides) {}

  template <class T>
  void operator()(const std::string& section, const std::string& key, T& out) {
    const std::string path = section + "." + key;
    seen_.insert(path);
    if (auto it = overrides_.find(path); it != overrides_.end()) {
      out = parse_value<T>(path, it->second);
    } else if (const char* env = std::getenv(env_name(section, key).c_str())) {
      out = parse_value<T>(path, env);
    } else if (auto v = tree_.get_optional<std::string>(path)) {
      out = parse_value<T>(path, *v);
    }
  }

  /// Overrides and file keys that name no field.
  std::vector<std::string> unknown() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : overrides_) {
      if (!seen_.count(k)) out.push_back(k);
    }
    for (const auto& [section, body] : tree_) {
      for (const auto& [key, v] : body) {
        if (!seen_.count(section + "." + key)) out.push_back(section + "." + key);
      }
    }
    return out;
  }

  static std::string env_name(const std::string& section, const std::string& key) {
    std::string name = "SMARTTODO_" + section + "_" + key;
    for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
  }

 private:
  const boost::property_tree::ptree& tree_;
  const std::map<std::string, std::string>& overrides_;
  std::set<std::string> seen_;
};

inline numeric::PatienceRule parse_rule(const std::string& s) {
  if (s == "any") return numeric::PatienceRule::AnyMetricStalls;
  if (s == "all") return numeric::PatienceRule::AllMetricsStall;
  throw HarnessError("config seq2seq.patience_rule: expected 'any' or 'all', got '" + s + "'");
}

inline std::string rule_name(numeric::PatienceRule r) {
  return r == numeric::PatienceRule::AnyMetricStalls ? "any" : "all";
}

/// Visits every configurable field; `bind(section, key, field)`.
template <class Bind>
void visit(PipelineConfig& c, Bind&& bind) {
  bind("paths", "corpus", c.paths.corpus);
  bind("paths", "vectors", c.paths.vectors);
  bind("paths", "sentence_vectors", c.paths.sentence_vectors);
  bind("paths", "classifier", c.paths.classifier);
  bind("paths", "generator", c.paths.generator);
  bind("paths", "output", c.paths.output);

  bind("pipeline", "seed", c.seed);
  bind("pipeline", "threshold", c.threshold);
  bind("pipeline", "tau", c.tau);
  bind("pipeline", "k", c.k);
  bind("pipeline", "provider", c.provider);

  bind("synth", "n_instances", c.synth.n_instances);
  bind("synth", "vocab_size", c.synth.vocab_size);
  bind("synth", "entity_pool", c.synth.entity_pool);
  bind("split", "train", c.split.train);
  bind("split", "validation", c.split.validation);
  bind("split", "test", c.split.test);

  auto& k = c.classifier;
  bind("commitment", "embed_dim", k.embed_dim);
  bind("commitment", "hidden", k.hidden);
  bind("commitment", "attention_dim", k.attention_dim);
  bind("commitment", "max_tokens", k.max_tokens);
  bind("commitment", "min_count", k.min_count);
  bind("commitment", "dropout", k.dropout);
  bind("commitment", "batch_size", k.batch_size);
  bind("commitment", "max_epochs", k.max_epochs);
  bind("commitment", "patience", k.patience);
  bind("commitment", "learning_rate", k.optimizer.learning_rate);
  bind("commitment", "accumulator_init", k.optimizer.accumulator_init);
  bind("commitment", "max_grad_norm", k.max_grad_norm);

  auto& w = c.word_vectors;
  bind("selection", "dim", w.dim);
  bind("selection", "window", w.window);
  bind("selection", "epochs", w.epochs);
  bind("selection", "negatives", w.negatives);
  bind("selection", "learning_rate", w.learning_rate);
  bind("selection", "min_count", w.min_count);
  bind("selection", "sample", w.sample);
  bind("selection", "subword", w.subword);

  auto& m = c.model;
  std::string variant = seq2seq::to_string(m.variant);
  bind("seq2seq", "variant", variant);
  m.variant = seq2seq::parse_variant(variant);
  bind("seq2seq", "embed_dim", m.embed_dim);
  bind("seq2seq", "hidden", m.hidden);
  bind("seq2seq", "attention_dim", m.attention_dim);
  bind("seq2seq", "dropout", m.dropout);
  bind("seq2seq", "attention_dropout", m.attention_dropout);
  auto& t = c.train;
  bind("seq2seq", "batch_size", t.batch_size);
  bind("seq2seq", "learning_rate", t.optimizer.learning_rate);
  bind("seq2seq", "accumulator_init", t.optimizer.accumulator_init);
  bind("seq2seq", "max_grad_norm", t.max_grad_norm);
  bind("seq2seq", "patience", t.patience);
  std::string rule = rule_name(t.patience_rule);
  bind("seq2seq", "patience_rule", rule);
  t.patience_rule = parse_rule(rule);
  bind("seq2seq", "max_epochs", t.max_epochs);
  bind("seq2seq", "min_count", t.min_count);
  bind("seq2seq", "pretrained_vectors", t.pretrained_vectors);
  bind("seq2seq", "beam", c.beam.width);
  bind("seq2seq", "max_len", c.beam.max_len);
}

}  // namespace detail

/// Derives the per-stage seeds from the global seed.
inline void apply_seed(PipelineConfig& c) {
  c.synth.seed = numeric::derive_seed(c.seed, "synth");
  c.classifier.seed = numeric::derive_seed(c.seed, "commitment");
  c.word_vectors.seed = numeric::derive_seed(c.seed, "selection");
  c.model.seed = numeric::derive_seed(c.seed, "seq2seq.model");
  c.train.seed = numeric::derive_seed(c.seed, "seq2seq.train");
}

/// Checks documented ranges; throws HarnessError naming the field.
inline void validate(const PipelineConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw HarnessError("config " + what);
  };
  require(c.threshold >= 0.0 && c.threshold <= 1.0, "pipeline.threshold must be in [0,1]");
  require(c.tau >= 1, "pipeline.tau must be >= 1");
  require(c.k >= 1, "pipeline.k must be >= 1");
  require(c.provider == "tf" || c.provider == "wv-mean" || c.provider == "wv-max" || c.provider == "file",
          "pipeline.provider must be tf, wv-mean, wv-max or file");
  require(c.train.batch_size >= 1 && c.train.max_epochs >= 1 && c.train.patience >= 1,
          "seq2seq batch_size, max_epochs and patience must be >= 1");
  require(c.train.optimizer.learning_rate > 0 && c.train.optimizer.accumulator_init > 0 &&
              c.train.max_grad_norm > 0,
          "seq2seq learning_rate, accumulator_init and max_grad_norm must be positive");
  require(c.model.dropout >= 0 && c.model.dropout < 1 && c.model.attention_dropout >= 0 &&
              c.model.attention_dropout < 1,
          "seq2seq dropout rates must be in [0,1)");
  require(c.model.embed_dim >= 1 && c.model.hidden >= 1 && c.model.attention_dim >= 1,
          "seq2seq dimensions must be >= 1");
  require(c.beam.width >= 1 && c.beam.max_len >= 1, "seq2seq beam and max_len must be >= 1");
}

/// Defaults, then the INI file (if any), then SMARTTODO_<SECTION>_<KEY>
/// environment variables, then `overrides` ("section.key" -> value). The
/// global seed fans out to per-stage seeds. Unknown keys are errors.
inline PipelineConfig load_config(const std::string& path = {},
                                  const std::map<std::string, std::string>& overrides = {}) {
  boost::property_tree::ptree tree;
  if (!path.empty()) {
    try {
      boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw HarnessError("cannot read config: " + std::string(e.what()));
    }
  }
  PipelineConfig c;
  detail::Binder bind(tree, overrides);
  detail::visit(c, bind);
  if (const auto bad = bind.unknown(); !bad.empty()) throw HarnessError("unknown config key " + bad.front());
  apply_seed(c);
  validate(c);
  return c;
}

/// The effective configuration as INI text, loadable by load_config.
inline std::string dump_config(PipelineConfig c) {
  boost::property_tree::ptree tree;
  detail::visit(c, [&](const std::string& section, const std::string& key, const auto& v) {
    std::ostringstream s;
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, bool>) {
      s << (v ? "true" : "false");
    } else if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
      char buf[32];
      s << std::string_view(buf, std::to_chars(buf, buf + sizeof buf, v).ptr - buf);
    } else {
      s << v;
    }
    tree.put(section + "." + key, s.str());
  });
  std::ostringstream out;
  boost::property_tree::write_ini(out, tree);
  return out.str();
}

}  // namespace smarttodo::harness
