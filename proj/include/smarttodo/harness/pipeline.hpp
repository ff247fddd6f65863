#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smarttodo/commitment/classifier.hpp"
#include "smarttodo/corpus/io.hpp"
#include "smarttodo/harness/config.hpp"
#include "smarttodo/selection/providers.hpp"
#include "smarttodo/selection/select.hpp"
#include "smarttodo/seq2seq/decode.hpp"
#include "smarttodo/seq2seq/train.hpp"

namespace smarttodo::harness {

inline std::vector<corpus::TodoInstance> load_instances(const std::string& path) {
  if (path.empty()) throw HarnessError("no corpus path configured (paths.corpus)");
  return corpus::load_corpus(path).instances;
}

/// Word vectors from paths.vectors, or trained on `instances` when unset.
inline std::shared_ptr<const selection::WordVectorTable> word_vectors(
    const PipelineConfig& cfg, const std::vector<corpus::TodoInstance>& instances) {
  if (!cfg.paths.vectors.empty() && std::filesystem::exists(cfg.paths.vectors)) {
    return std::make_shared<const selection::WordVectorTable>(
        selection::WordVectorTable::load(cfg.paths.vectors));
  }
  if (instances.empty()) throw HarnessError("no word vectors at '" + cfg.paths.vectors + "' and no corpus to train them on");
  return std::make_shared<const selection::WordVectorTable>(
      selection::train_word_vectors(selection::lemma_corpus(instances), cfg.word_vectors));
}

/// Provider by name: tf, wv-mean, wv-max or file.
inline std::unique_ptr<selection::EmbeddingProvider> make_provider(
    const std::string& name, const PipelineConfig& cfg,
    const std::shared_ptr<const selection::WordVectorTable>& table) {
  using namespace selection;
  if (name == "tf") return std::make_unique<TfBinary>();
  if (name == "wv-mean" || name == "wv-max") {
    if (!table) throw HarnessError("provider " + name + " needs word vectors");
    return std::make_unique<WordVecPool>(table, name == "wv-max" ? Pooling::Max : Pooling::Mean);
  }
  if (name == "file") {
    if (cfg.paths.sentence_vectors.empty()) throw HarnessError("provider file needs paths.sentence_vectors");
    return std::make_unique<FileVectorProvider>(FileVectorProvider::load(cfg.paths.sentence_vectors));
  }
  throw HarnessError("unknown provider '" + name + "'");
}

/// Texts of the top-K selected sentences for `inst`, in score order.
inline std::vector<std::string> selected_sentences(const corpus::TodoInstance& inst,
                                                   const selection::EmbeddingProvider& provider,
                                                   std::size_t k, std::size_t tau) {
  const auto in = selection::selection_input(inst, tau);
  std::vector<std::string> out;
  if (in.candidates.empty()) return out;
  for (auto& s : selection::select_top_k(in, provider, k)) out.push_back(std::move(s.text));
  return out;
}

inline std::vector<seq2seq::Example> make_examples(const std::vector<corpus::TodoInstance>& instances,
                                                   const selection::EmbeddingProvider& provider,
                                                   const PipelineConfig& cfg) {
  std::vector<seq2seq::Example> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    out.push_back(seq2seq::make_example(inst, selected_sentences(inst, provider, cfg.k, cfg.tau)));
  }
  return out;
}

/// Trained stages needed to run the pipeline.
struct Models {
  commitment::CommitmentClassifier classifier;
  std::unique_ptr<selection::EmbeddingProvider> provider;
  seq2seq::Seq2SeqModel generator;
};

inline Models load_models(const PipelineConfig& cfg,
                          const std::shared_ptr<const selection::WordVectorTable>& table) {
  for (const auto& [what, dir] : {std::pair{"classifier", cfg.paths.classifier},
                                  std::pair{"generator", cfg.paths.generator}}) {
    if (!std::filesystem::is_directory(dir)) {
      throw HarnessError(std::string("missing ") + what + " checkpoint directory '" + dir + "'");
    }
  }
  return {commitment::CommitmentClassifier::load(cfg.paths.classifier),
          make_provider(cfg.provider, cfg, table), seq2seq::load_model(cfg.paths.generator)};
}

struct PipelineOutput {
  std::string email_id;
  /// Highest classifier score over the email's sentences.
  double max_score = 0.0;
  std::optional<std::string> commitment;
  std::optional<std::string> todo;
};

/// Commitment detection, selection, serialization and beam decoding for one
/// thread. No To-Do is produced when every sentence scores below threshold.
inline PipelineOutput run_one(const commitment::CommitmentClassifier& clf,
                              const selection::EmbeddingProvider& provider,
                              const seq2seq::Seq2SeqModel& generator, const PipelineConfig& cfg,
                              const corpus::EmailThread& thread) {
  PipelineOutput out;
  out.email_id = thread.candidate.id;
  const auto scored = commitment::extract_candidates(clf, {thread.candidate}, 0.0);
  if (scored.empty()) return out;
  out.max_score = scored.front().score;
  if (out.max_score < cfg.threshold) return out;

  corpus::TodoInstance inst;
  inst.id = thread.candidate.id;
  inst.thread = thread;
  inst.commitment_sentence_index = scored.front().sentence;
  out.commitment = scored.front().text;
  const auto selected = selected_sentences(inst, provider, cfg.k, cfg.tau);
  const auto input = seq2seq::serialize_input(inst, selected);
  out.todo = seq2seq::beam_search(generator, input, cfg.beam).str();
  return out;
}

inline std::vector<PipelineOutput> run_pipeline(const Models& models, const PipelineConfig& cfg,
                                                const std::vector<corpus::EmailThread>& threads) {
  std::vector<PipelineOutput> out;
  out.reserve(threads.size());
  for (const auto& t : threads) {
    out.push_back(run_one(models.classifier, *models.provider, models.generator, cfg, t));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const PipelineOutput& o) {
  nlohmann::ordered_json j;
  j["email_id"] = o.email_id;
  j["max_score"] = o.max_score;
  j["commitment"] = o.commitment ? nlohmann::ordered_json(*o.commitment) : nlohmann::ordered_json();
  j["todo"] = o.todo ? nlohmann::ordered_json(*o.todo) : nlohmann::ordered_json();
  return j;
}

// -- training stages -------------------------------------------------------------

inline commitment::ClassifierTrainResult train_classifier_stage(const PipelineConfig& cfg,
                                                                const corpus::DatasetSplit& split) {
  auto r = commitment::train_classifier(commitment::labeled_sentences(split.train),
                                        commitment::labeled_sentences(split.validation), cfg.classifier);
  r.model.save(cfg.paths.classifier);
  return r;
}

inline seq2seq::TrainResult train_generator_stage(const PipelineConfig& cfg, const corpus::DatasetSplit& split,
                                                  const selection::EmbeddingProvider& provider,
                                                  const seq2seq::EpochCallback& on_epoch = {}) {
  auto r = seq2seq::train_seq2seq(make_examples(split.train, provider, cfg),
                                  make_examples(split.validation, provider, cfg), cfg.model, cfg.train,
                                  on_epoch);
  seq2seq::save_model(r.model, cfg.paths.generator);
  return r;
}

}  // namespace smarttodo::harness
