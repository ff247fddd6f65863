#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "smarttodo/corpus/split.hpp"
#include "smarttodo/metrics/likelihood.hpp"
#include "smarttodo/numeric/checkpoint.hpp"
#include "smarttodo/numeric/early_stopping.hpp"
#include "smarttodo/numeric/optim.hpp"
#include "smarttodo/seq2seq/model.hpp"

namespace smarttodo::seq2seq {

/// One training pair: serialized input and tokenized reference To-Do.
struct Example {
  std::string id;
  EncoderInput input;
  std::vector<std::string> target;
};

inline Example make_example(const corpus::TodoInstance& inst, const std::vector<std::string>& selected,
                            std::size_t max_tokens = kMaxInputTokens) {
  return {inst.id, serialize_input(inst, selected, max_tokens),
          text::tokenize(corpus::reference_of(inst))};
}

struct Vocabularies {
  text::Vocabulary source;
  text::Vocabulary target;
};

inline Vocabularies build_vocabularies(const std::vector<Example>& examples, std::size_t min_count = 2) {
  std::vector<std::vector<std::string>> src, tgt;
  for (const auto& e : examples) {
    src.push_back(e.input.tokens);
    tgt.push_back(e.target);
  }
  return {text::Vocabulary::build(src, min_count), text::Vocabulary::build(tgt, min_count)};
}

struct TrainConfig {
  std::size_t batch_size = 64;
  numeric::AdagradOptions optimizer{};
  double max_grad_norm = 2.0;
  int patience = 5;
  numeric::PatienceRule patience_rule = numeric::PatienceRule::AnyMetricStalls;
  std::size_t max_epochs = 30;
  std::size_t min_count = 2;
  /// Word-vector file for embedding init; empty means seeded random.
  std::string pretrained_vectors;
  std::uint64_t seed = 1;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean NLL per target token
  double validation_accuracy = 0.0;
  double validation_perplexity = 0.0;
  double seconds = 0.0;
  bool best = false;
};

struct TrainResult {
  Seq2SeqModel model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  std::size_t pretrained_rows = 0;
};

/// Teacher-forced perplexity and token accuracy; </s> counts as a token.
inline metrics::LikelihoodReport evaluate_likelihood(const Seq2SeqModel& model,
                                                     const std::vector<Example>& examples) {
  if (examples.empty()) throw Seq2SeqError("evaluate_likelihood: no examples");
  metrics::LikelihoodAccumulator acc;
  Tape tape(false);
  for (const auto& ex : examples) {
    tape.clear();
    const Encoded enc = model.encode(tape, ex.input, false);
    DecoderVars state = model.initial_state(tape, enc);
    std::size_t prev = text::Vocabulary::kBosId;
    for (std::size_t gold : model.target_ids(ex.target, enc.map)) {
      const StepVars sv = model.step(tape, enc, state, prev, false);
      const auto& p = tape.value(sv.distribution).values();
      std::size_t arg = 0;
      for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[arg]) arg = i;
      }
      acc.add(-std::log(p[gold] + numeric::kNllFloor), arg == gold);
      state = sv.next;
      prev = gold;
    }
  }
  return acc.report();
}

using EpochCallback = std::function<void(const EpochLog&)>;

/// Trains `model` in place and restores the best-validation parameters.
/// Returns the epoch log and the best epoch (1-based).
inline std::pair<std::vector<EpochLog>, std::size_t> fit(Seq2SeqModel& model,
                                                         const std::vector<Example>& train,
                                                         const std::vector<Example>& validation,
                                                         const TrainConfig& cfg,
                                                         const EpochCallback& on_epoch = {}) {
  if (train.empty() || validation.empty()) throw Seq2SeqError("training needs non-empty train and validation splits");
  if (cfg.batch_size == 0 || cfg.max_epochs == 0) throw Seq2SeqError("batch size and max epochs must be positive");
  auto& params = model.parameters();
  const auto ptrs = params.pointers();
  numeric::Adagrad opt(ptrs, cfg.optimizer);
  numeric::EarlyStopper stopper(cfg.patience, cfg.patience_rule);
  numeric::Rng order_rng(numeric::derive_seed(cfg.seed, "seq2seq.order"));
  numeric::Rng dropout_rng(numeric::derive_seed(cfg.seed, "seq2seq.dropout"));
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<EpochLog> log;
  std::vector<Tensor> best = params.snapshot();
  std::size_t best_epoch = 0;
  Tape tape;
  params.zero_grad();
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t tokens = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), b + cfg.batch_size);
      const double seed = 1.0 / static_cast<double>(end - b);
      for (std::size_t k = b; k < end; ++k) {
        const Example& ex = train[order[k]];
        tape.clear();
        const auto diverged = [&](const std::string& detail) {
          return Seq2SeqError("non-finite loss at epoch " + std::to_string(epoch) + " on example " +
                              ex.id + " (" + detail + "); lower the learning rate or the gradient norm limit");
        };
        Seq2SeqModel::ExampleLoss out;
        try {
          out = model.loss(tape, ex.input, ex.target, true, &dropout_rng);
        } catch (const NumericError& e) {
          throw diverged(e.what());
        }
        const double loss = tape.value(out.loss)[0];
        if (!std::isfinite(loss)) throw diverged("loss " + std::to_string(loss));
        loss_sum += loss;
        tokens += out.tokens;
        tape.backward(out.loss, seed);
      }
      numeric::clip_grad_norm(ptrs, cfg.max_grad_norm);
      opt.step();
    }
    const auto val = evaluate_likelihood(model, validation);
    const auto u = stopper.update({val.token_accuracy, val.perplexity});
    EpochLog e;
    e.epoch = epoch;
    e.train_loss = loss_sum / static_cast<double>(tokens);
    e.validation_accuracy = val.token_accuracy;
    e.validation_perplexity = val.perplexity;
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    e.best = u.best;
    if (u.best) {
      best = params.snapshot();
      best_epoch = epoch;
    }
    log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (u.stop) break;
  }
  params.restore(best);
  return {std::move(log), best_epoch};
}

/// Builds vocabularies from `train`, initializes a model and fits it.
inline TrainResult train_seq2seq(const std::vector<Example>& train, const std::vector<Example>& validation,
                                 const ModelConfig& model_config, const TrainConfig& cfg,
                                 const EpochCallback& on_epoch = {}) {
  if (train.empty() || validation.empty()) throw Seq2SeqError("training needs non-empty train and validation splits");
  auto vocabs = build_vocabularies(train, cfg.min_count);
  TrainResult result{Seq2SeqModel(std::move(vocabs.source), std::move(vocabs.target), model_config), {}, 0, 0};
  if (!cfg.pretrained_vectors.empty()) {
    result.pretrained_rows =
        result.model.load_pretrained(selection::WordVectorTable::load(cfg.pretrained_vectors));
  }
  auto [log, best] = fit(result.model, train, validation, cfg, on_epoch);
  result.log = std::move(log);
  result.best_epoch = best;
  return result;
}

// -- checkpoint directory ------------------------------------------------------
// model.ckpt (numeric container), src.vocab, tgt.vocab, manifest.json.

inline std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Seq2SeqError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::ostringstream hex;
  hex << std::hex << numeric::fnv1a(ss.str());
  return hex.str();
}

inline std::map<std::string, std::string> model_header(const ModelConfig& c) {
  return {{"kind", "seq2seq"},
          {"variant", to_string(c.variant)},
          {"embed_dim", std::to_string(c.embed_dim)},
          {"hidden", std::to_string(c.hidden)},
          {"attention_dim", std::to_string(c.attention_dim)}};
}

inline void save_model(const Seq2SeqModel& model, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto& c = model.config();
  numeric::save_checkpoint(dir + "/model.ckpt", numeric::to_checkpoint(model.parameters(), model_header(c)));
  model.source_vocab().save(dir + "/src.vocab");
  model.target_vocab().save(dir + "/tgt.vocab");
  std::size_t n_params = 0;
  for (std::size_t i = 0; i < model.parameters().size(); ++i) n_params += model.parameters()[i].value.size();
  nlohmann::ordered_json m;
  m["kind"] = "seq2seq";
  m["variant"] = to_string(c.variant);
  m["embed_dim"] = c.embed_dim;
  m["hidden"] = c.hidden;
  m["attention_dim"] = c.attention_dim;
  m["dropout"] = c.dropout;
  m["attention_dropout"] = c.attention_dropout;
  m["seed"] = c.seed;
  m["source_vocab_size"] = model.source_vocab().size();
  m["target_vocab_size"] = model.target_vocab().size();
  m["source_vocab_hash"] = file_hash(dir + "/src.vocab");
  m["target_vocab_hash"] = file_hash(dir + "/tgt.vocab");
  m["checkpoint_hash"] = file_hash(dir + "/model.ckpt");
  m["parameter_count"] = n_params;
  std::ofstream out(dir + "/manifest.json", std::ios::trunc);
  if (!out) throw Seq2SeqError("cannot write " + dir + "/manifest.json");
  out << m.dump(2) << '\n';
}

inline Seq2SeqModel load_model(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw Seq2SeqError("no manifest.json in " + dir);
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Seq2SeqError(dir + "/manifest.json: " + e.what());
  }
  if (m.value("kind", "") != "seq2seq") throw Seq2SeqError(dir + " is not a seq2seq checkpoint");
  for (const auto& [key, file] : {std::pair{"source_vocab_hash", "src.vocab"},
                                  std::pair{"target_vocab_hash", "tgt.vocab"},
                                  std::pair{"checkpoint_hash", "model.ckpt"}}) {
    if (m.value(key, "") != file_hash(dir + "/" + file)) {
      throw Seq2SeqError(dir + "/" + file + " does not match the manifest hash");
    }
  }
  ModelConfig c;
  c.variant = parse_variant(m.at("variant").get<std::string>());
  c.embed_dim = m.at("embed_dim").get<std::size_t>();
  c.hidden = m.at("hidden").get<std::size_t>();
  c.attention_dim = m.at("attention_dim").get<std::size_t>();
  c.dropout = m.value("dropout", 0.0);
  c.attention_dropout = m.value("attention_dropout", 0.0);
  c.seed = m.value("seed", std::uint64_t{1});
  Seq2SeqModel model(text::Vocabulary::load(dir + "/src.vocab"), text::Vocabulary::load(dir + "/tgt.vocab"), c);
  numeric::load_into(model.parameters(), numeric::load_checkpoint(dir + "/model.ckpt"));
  return model;
}

}  // namespace smarttodo::seq2seq
