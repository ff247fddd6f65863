#pragma once

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "smarttodo/harness/pipeline.hpp"
#include "smarttodo/metrics/bleu.hpp"
#include "smarttodo/metrics/report.hpp"

namespace smarttodo::harness {

inline constexpr const char* kVersion = "0.1.0";

inline std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// -- generation table -------------------------------------------------------------

struct ExperimentRow {
  std::string system;  // concatenate, vanilla, copy or bifocal
  metrics::MetricReport metrics;
  double sentence_bleu4 = 0.0;  // mean of per-instance BLEU-4
  std::size_t epochs = 0;
  std::vector<std::string> outputs;  // decoded test To-Dos
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;

  const ExperimentRow& row(const std::string& system) const {
    for (const auto& r : rows) {
      if (r.system == system) return r;
    }
    throw HarnessError("experiment report has no row " + system);
  }

  /// Aligned text table, one row per system in fixed order.
  std::string table() const {
    std::string out = "system       BLEU-4  sBLEU-4  ROUGE-1  ROUGE-2  ROUGE-L      n\n";
    for (const auto& r : rows) {
      char line[160];
      std::snprintf(line, sizeof line, "%-12s %6s  %7s  %7s  %7s  %7s %6zu\n", r.system.c_str(),
                    fixed(r.metrics.bleu4).c_str(), fixed(r.sentence_bleu4).c_str(),
                    fixed(r.metrics.rouge1_f1).c_str(), fixed(r.metrics.rouge2_f1).c_str(),
                    fixed(r.metrics.rougeL_f1).c_str(), r.metrics.n_instances);
      out += line;
    }
    return out;
  }

  /// One JSON record per row.
  std::string jsonl() const {
    std::string out;
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["system"] = r.system;
      j["bleu4"] = r.metrics.bleu4;
      j["sentence_bleu4"] = r.sentence_bleu4;
      j["rouge1_f1"] = r.metrics.rouge1_f1;
      j["rouge2_f1"] = r.metrics.rouge2_f1;
      j["rougeL_f1"] = r.metrics.rougeL_f1;
      j["n"] = r.metrics.n_instances;
      j["epochs"] = r.epochs;
      out += j.dump() + "\n";
    }
    return out;
  }
};

inline ExperimentRow score_outputs(const std::string& system, std::vector<std::string> outputs,
                                   const std::vector<seq2seq::Example>& test) {
  std::vector<metrics::Tokens> cands;
  std::vector<std::vector<metrics::Tokens>> refs;
  for (std::size_t i = 0; i < test.size(); ++i) {
    cands.push_back(text::tokenize(outputs[i]));
    refs.push_back({test[i].target});
  }
  ExperimentRow r;
  r.system = system;
  r.metrics = metrics::evaluate(cands, refs);
  r.sentence_bleu4 = cands.empty() ? 0.0 : metrics::mean_sentence_bleu4(cands, refs);
  r.outputs = std::move(outputs);
  return r;
}

using ProgressCallback = std::function<void(const std::string& system, const seq2seq::EpochLog&)>;

/// Trains each variant on split.train (early stopping on split.validation),
/// beam-decodes split.test, and scores against the references. The
/// concatenate baseline row comes first. Checkpoints go to
/// <paths.output>/<variant> when `save` is set.
inline ExperimentReport run_experiment(const PipelineConfig& cfg, const corpus::DatasetSplit& split,
                                       const selection::EmbeddingProvider& provider,
                                       const std::vector<seq2seq::Variant>& variants,
                                       bool save = false, const ProgressCallback& progress = {}) {
  if (split.test.empty()) throw HarnessError("experiment needs a non-empty test split");
  const auto train = make_examples(split.train, provider, cfg);
  const auto validation = make_examples(split.validation, provider, cfg);
  const auto test = make_examples(split.test, provider, cfg);

  ExperimentReport report;
  std::vector<std::string> concat;
  for (const auto& inst : split.test) concat.push_back(seq2seq::concatenate_baseline(inst));
  report.rows.push_back(score_outputs("concatenate", std::move(concat), test));

  for (auto v : {seq2seq::Variant::Vanilla, seq2seq::Variant::Copy, seq2seq::Variant::Bifocal}) {
    if (std::find(variants.begin(), variants.end(), v) == variants.end()) continue;
    auto mc = cfg.model;
    mc.variant = v;
    const std::string name = seq2seq::to_string(v);
    auto r = seq2seq::train_seq2seq(train, validation, mc, cfg.train, [&](const seq2seq::EpochLog& e) {
      if (progress) progress(name, e);
    });
    if (save) seq2seq::save_model(r.model, cfg.paths.output + "/" + name);
    std::vector<std::string> outputs;
    for (const auto& ex : test) outputs.push_back(seq2seq::beam_search(r.model, ex.input, cfg.beam).str());
    auto row = score_outputs(name, std::move(outputs), test);
    row.epochs = r.log.size();
    report.rows.push_back(std::move(row));
  }
  return report;
}

// -- selection table --------------------------------------------------------------

struct SelectionRow {
  std::string provider;
  std::vector<std::pair<std::size_t, double>> at_k;  // (K, at-least-one-helpful)
  std::size_t evaluated = 0;
};

struct SelectionReport {
  std::vector<SelectionRow> rows;

  double value(const std::string& provider, std::size_t k) const {
    for (const auto& r : rows) {
      if (r.provider != provider) continue;
      for (const auto& [kk, v] : r.at_k) {
        if (kk == k) return v;
      }
    }
    throw HarnessError("selection report has no entry " + provider + "@" + std::to_string(k));
  }

  std::string table() const {
    std::string out = "provider ";
    if (!rows.empty()) {
      for (const auto& [k, v] : rows.front().at_k) out += "   K=" + std::to_string(k);
    }
    out += "      n\n";
    for (const auto& r : rows) {
      char name[32];
      std::snprintf(name, sizeof name, "%-8s", r.provider.c_str());
      out += name;
      for (const auto& [k, v] : r.at_k) out += "  " + fixed(v);
      char n[32];
      std::snprintf(n, sizeof n, " %6zu\n", r.evaluated);
      out += n;
    }
    return out;
  }

  std::string jsonl() const {
    std::string out;
    for (const auto& r : rows) {
      for (const auto& [k, v] : r.at_k) {
        nlohmann::ordered_json j;
        j["provider"] = r.provider;
        j["k"] = k;
        j["at_least_one_helpful"] = v;
        j["n"] = r.evaluated;
        out += j.dump() + "\n";
      }
    }
    return out;
  }
};

/// at-least-one-helpful per provider and K.
inline SelectionReport run_selection_eval(const std::vector<corpus::TodoInstance>& instances,
                                          const std::vector<const selection::EmbeddingProvider*>& providers,
                                          std::size_t tau = 10, const std::vector<std::size_t>& ks = {2, 3}) {
  SelectionReport report;
  for (const auto* p : providers) {
    SelectionRow row;
    row.provider = p->name();
    for (std::size_t k : ks) {
      const auto r = selection::at_least_one_helpful(instances, *p, k, tau);
      if (r.evaluated == 0) throw HarnessError("selection eval: no instances carry helpful labels");
      row.at_k.emplace_back(k, r.proportion);
      row.evaluated = r.evaluated;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

// -- run log ------------------------------------------------------------------------

/// Append-only JSON-lines log: a header with the config snapshot and code
/// version, then one record per event.
class RunLog {
 public:
  RunLog(const std::string& path, const PipelineConfig& cfg, const std::string& command)
      : out_(path, std::ios::app) {
    if (!out_) throw HarnessError("cannot open run log " + path);
    nlohmann::ordered_json j;
    j["event"] = "start";
    j["time"] = now();
    j["command"] = command;
    j["version"] = kVersion;
    j["config"] = dump_config(cfg);
    write(j);
  }

  void epoch(const std::string& stage, const seq2seq::EpochLog& e) {
    nlohmann::ordered_json j;
    j["event"] = "epoch";
    j["time"] = now();
    j["stage"] = stage;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["validation_accuracy"] = e.validation_accuracy;
    j["validation_perplexity"] = e.validation_perplexity;
    j["seconds"] = e.seconds;
    j["best"] = e.best;
    write(j);
  }

  void event(const std::string& name, nlohmann::ordered_json fields = {}) {
    nlohmann::ordered_json j;
    j["event"] = name;
    j["time"] = now();
    for (auto it = fields.begin(); it != fields.end(); ++it) j[it.key()] = it.value();
    write(j);
  }

 private:
  static std::string now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
  }

  void write(const nlohmann::ordered_json& j) { out_ << j.dump() << '\n' << std::flush; }

  std::ofstream out_;
};

}  // namespace smarttodo::harness
