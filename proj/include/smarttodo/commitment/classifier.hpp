#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "smarttodo/corpus/types.hpp"
#include "smarttodo/error.hpp"
#include "smarttodo/numeric/checkpoint.hpp"
#include "smarttodo/numeric/early_stopping.hpp"
#include "smarttodo/numeric/layers.hpp"
#include "smarttodo/numeric/optim.hpp"
#include "smarttodo/numeric/random.hpp"
#include "smarttodo/numeric/tape.hpp"
#include "smarttodo/text/sentence_splitter.hpp"
#include "smarttodo/text/tokenizer.hpp"
#include "smarttodo/text/vocabulary.hpp"

namespace smarttodo::commitment {

using numeric::Tape;
using numeric::Tensor;
using numeric::Var;

struct LabeledSentence {
  std::vector<std::string> sentence;
  /// Tokens of the rest of the email, in document order.
  std::vector<std::string> context;
  int label = 0;
};

struct ClassifierConfig {
  std::size_t embed_dim = 100;
  std::size_t hidden = 128;
  std::size_t attention_dim = 64;
  /// Cap on sentence + separator + context tokens.
  std::size_t max_tokens = 256;
  std::size_t min_count = 2;
  double dropout = 0.0;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 30;
  int patience = 5;
  numeric::AdagradOptions optimizer{};
  double max_grad_norm = 2.0;
  /// Embeddings start uniform in [-embed_init, embed_init]; the rest is Glorot.
  double embed_init = 1.0;
  std::uint64_t seed = 1;
};

/// RNN classifier: token plus segment embeddings, one LSTM layer, additive self-attention
/// pooling over the hidden states, and a single sigmoid logit.
class CommitmentClassifier {
 public:
  CommitmentClassifier(text::Vocabulary vocab, const ClassifierConfig& config)
      : vocab_(std::move(vocab)), config_(config) {
    build();
    numeric::Rng rng(numeric::derive_seed(config.seed, "commitment.init"));
    params_.init_glorot(rng);
    for (double& v : embed_->value.values()) v = rng.uniform(-config.embed_init, config.embed_init);
  }

  CommitmentClassifier(CommitmentClassifier&&) noexcept = default;
  CommitmentClassifier& operator=(CommitmentClassifier&&) noexcept = default;

  const text::Vocabulary& vocabulary() const noexcept { return vocab_; }
  const ClassifierConfig& config() const noexcept { return config_; }
  numeric::ParameterSet& parameters() noexcept { return params_; }
  const numeric::ParameterSet& parameters() const noexcept { return params_; }
  numeric::Linear& output() noexcept { return out_; }

  /// sentence ++ <sent> ++ context, truncated to max_tokens (context first).
  /// An empty context drops the separator.
  std::vector<std::size_t> input_ids(const std::vector<std::string>& sentence,
                                     const std::vector<std::string>& context) const {
    std::vector<std::size_t> ids;
    const std::size_t cap = std::max<std::size_t>(config_.max_tokens, 1);
    for (const auto& t : sentence) {
      if (ids.size() >= cap) break;
      ids.push_back(vocab_.id(t));
    }
    if (!context.empty() && ids.size() + 1 < cap) {
      ids.push_back(vocab_.id(text::special::kSent));
      for (const auto& t : context) {
        if (ids.size() >= cap) break;
        ids.push_back(vocab_.id(t));
      }
    }
    if (ids.empty()) ids.push_back(text::Vocabulary::kUnkId);
    return ids;
  }

  std::size_t sentence_length(const std::vector<std::string>& sentence) const {
    return std::min(sentence.size(), std::max<std::size_t>(config_.max_tokens, 1));
  }

  struct Forward {
    Var logit;
    Var weights;  // T x 1 self-attention weights
  };

  /// The first `sentence_length` positions get the sentence segment
  /// embedding, the rest the context segment embedding.
  Forward forward(Tape& tape, const std::vector<std::size_t>& ids, std::size_t sentence_length,
                  bool train, numeric::Rng* rng = nullptr) const {
    Var table = tape.param(*embed_);
    Var segments = tape.param(*segment_);
    auto state = rnn_.zero_state(tape);
    std::vector<Var> hs;
    hs.reserve(ids.size());
    for (std::size_t t = 0; t < ids.size(); ++t) {
      Var x = tape.add(tape.embedding(table, ids[t]),
                       tape.embedding(segments, t < sentence_length ? 0 : 1));
      if (train && config_.dropout > 0.0) x = tape.dropout(x, config_.dropout, true, *rng);
      state = rnn_.step(tape, x, state);
      hs.push_back(state.h);
    }
    Var states = tape.concat_cols(hs);
    Var hidden = tape.tanh(tape.add_col(tape.matmul(tape.param(*attn_w_), states),
                                        tape.param(*attn_b_)));
    Var weights = tape.softmax(tape.matmul_tn(hidden, tape.param(*attn_v_)), 0);
    Var pooled = tape.matmul(states, weights);
    if (train && config_.dropout > 0.0) pooled = tape.dropout(pooled, config_.dropout, true, *rng);
    return {out_(tape, pooled), weights};
  }

  /// Probability in (0, 1) that `sentence` is a commitment.
  double score(const std::vector<std::string>& sentence,
               const std::vector<std::string>& context) const {
    if (sentence.empty()) throw CommitmentError("score: empty sentence");
    Tape tape(false);
    const Forward f = forward(tape, input_ids(sentence, context), sentence_length(sentence), false);
    return squash(tape.value(f.logit)[0]);
  }

  std::vector<double> attention_weights(const std::vector<std::string>& sentence,
                                        const std::vector<std::string>& context) const {
    Tape tape(false);
    const Forward f = forward(tape, input_ids(sentence, context), sentence_length(sentence), false);
    const Tensor& w = tape.value(f.weights);
    return {w.values().begin(), w.values().end()};
  }

  /// Binary cross-entropy for one example; recorded on `tape`.
  Var loss(Tape& tape, const LabeledSentence& ex, bool train, numeric::Rng* rng = nullptr) const {
    const Forward f = forward(tape, input_ids(ex.sentence, ex.context), sentence_length(ex.sentence), train, rng);
    return tape.bce_with_logits(f.logit, ex.label ? 1.0 : 0.0);
  }

  void save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    numeric::save_checkpoint(dir + "/model.ckpt", numeric::to_checkpoint(params_, header()));
    vocab_.save(dir + "/vocab.txt");
  }

  static CommitmentClassifier load(const std::string& dir) {
    const numeric::Checkpoint ckpt = numeric::load_checkpoint(dir + "/model.ckpt");
    auto get = [&](const std::string& key) -> std::size_t {
      auto it = ckpt.header.find(key);
      if (it == ckpt.header.end()) throw CommitmentError("checkpoint header lacks " + key);
      return std::stoull(it->second);
    };
    if (ckpt.header.count("kind") == 0 || ckpt.header.at("kind") != "commitment") {
      throw CommitmentError(dir + " is not a commitment classifier checkpoint");
    }
    ClassifierConfig cfg;
    cfg.embed_dim = get("embed_dim");
    cfg.hidden = get("hidden");
    cfg.attention_dim = get("attention_dim");
    cfg.max_tokens = get("max_tokens");
    CommitmentClassifier clf(text::Vocabulary::load(dir + "/vocab.txt"), cfg);
    numeric::load_into(clf.params_, ckpt);
    return clf;
  }

 private:
  static double squash(double z) {
    const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(p, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
  }

  std::map<std::string, std::string> header() const {
    return {{"kind", "commitment"},
            {"embed_dim", std::to_string(config_.embed_dim)},
            {"hidden", std::to_string(config_.hidden)},
            {"attention_dim", std::to_string(config_.attention_dim)},
            {"max_tokens", std::to_string(config_.max_tokens)},
            {"vocab_size", std::to_string(vocab_.size())}};
  }

  void build() {
    embed_ = &params_.add("embed", vocab_.size(), config_.embed_dim);
    segment_ = &params_.add("segment", 2, config_.embed_dim);
    rnn_ = numeric::LstmCell::create(params_, "rnn", config_.embed_dim, config_.hidden);
    attn_w_ = &params_.add("attn.w", config_.attention_dim, config_.hidden);
    attn_b_ = &params_.add("attn.bias", config_.attention_dim, 1);
    attn_v_ = &params_.add("attn.v", config_.attention_dim, 1);
    out_ = numeric::Linear::create(params_, "out", config_.hidden, 1);
  }

  text::Vocabulary vocab_;
  ClassifierConfig config_;
  numeric::ParameterSet params_;
  numeric::Parameter* embed_ = nullptr;
  numeric::Parameter* segment_ = nullptr;
  numeric::LstmCell rnn_;
  numeric::Parameter* attn_w_ = nullptr;
  numeric::Parameter* attn_b_ = nullptr;
  numeric::Parameter* attn_v_ = nullptr;
  numeric::Linear out_;
};

/// One example per sentence of each candidate email: label 1 for the
/// commitment sentence, context = the other sentences' tokens.
inline std::vector<LabeledSentence> labeled_sentences(const std::vector<corpus::TodoInstance>& data) {
  std::vector<LabeledSentence> out;
  for (const auto& inst : data) {
    const auto sentences = inst.candidate_sentences();
    std::vector<std::vector<std::string>> toks;
    for (const auto& s : sentences) toks.push_back(text::tokenize(s));
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].empty()) continue;
      LabeledSentence ex;
      ex.sentence = toks[i];
      for (std::size_t j = 0; j < toks.size(); ++j) {
        if (j != i) ex.context.insert(ex.context.end(), toks[j].begin(), toks[j].end());
      }
      ex.label = i == inst.commitment_sentence_index ? 1 : 0;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

/// Keeps every minority example and a seeded random subset of the majority
/// of the same size. Balanced input is returned unchanged.
inline std::vector<LabeledSentence> balance(const std::vector<LabeledSentence>& data,
                                            std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i) (data[i].label ? pos : neg).push_back(i);
  if (pos.size() == neg.size()) return data;
  auto& major = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  numeric::Rng rng(seed);
  rng.shuffle(major);
  major.resize(keep);
  std::sort(major.begin(), major.end());
  std::vector<std::size_t> idx = pos;
  idx.insert(idx.end(), neg.begin(), neg.end());
  std::sort(idx.begin(), idx.end());
  std::vector<LabeledSentence> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data[i]);
  return out;
}

struct ClassifierMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double mean_positive_score = 0.0;
  double mean_negative_score = 0.0;
};

inline ClassifierMetrics evaluate_classifier(const CommitmentClassifier& clf,
                                             const std::vector<LabeledSentence>& data,
                                             double threshold = 0.5) {
  ClassifierMetrics m;
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0, npos = 0, nneg = 0;
  for (const auto& ex : data) {
    const double s = clf.score(ex.sentence, ex.context);
    const bool predicted = s >= threshold;
    correct += predicted == (ex.label == 1) ? 1 : 0;
    if (predicted && ex.label) ++tp;
    if (predicted && !ex.label) ++fp;
    if (!predicted && ex.label) ++fn;
    if (ex.label) {
      m.mean_positive_score += s;
      ++npos;
    } else {
      m.mean_negative_score += s;
      ++nneg;
    }
  }
  if (!data.empty()) m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  if (npos) m.mean_positive_score /= static_cast<double>(npos);
  if (nneg) m.mean_negative_score /= static_cast<double>(nneg);
  return m;
}

struct ClassifierEpoch {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct ClassifierTrainResult {
  CommitmentClassifier model;
  std::vector<ClassifierEpoch> log;
  std::size_t best_epoch = 0;
};

/// Balances the training and validation sets, then minimises binary cross-entropy with
/// Adagrad and gradient clipping. Early stopping tracks validation accuracy;
/// the best epoch's parameters are restored. An empty validation set is
/// carved from 10% of the training data.
inline ClassifierTrainResult train_classifier(std::vector<LabeledSentence> train,
                                              std::vector<LabeledSentence> validation,
                                              const ClassifierConfig& config) {
  std::size_t npos = 0;
  for (const auto& ex : train) npos += ex.label ? 1 : 0;
  if (npos < 2 || train.size() - npos < 2) {
    throw CommitmentError("train_classifier needs at least 2 examples per class");
  }
  if (validation.empty()) {
    numeric::Rng rng(numeric::derive_seed(config.seed, "commitment.validation"));
    rng.shuffle(train);
    const std::size_t n_val = std::max<std::size_t>(1, train.size() / 10);
    validation.assign(train.end() - static_cast<std::ptrdiff_t>(n_val), train.end());
    train.resize(train.size() - n_val);
  }
  train = balance(train, numeric::derive_seed(config.seed, "commitment.balance"));
  validation = balance(validation, numeric::derive_seed(config.seed, "commitment.balance.val"));

  std::vector<std::vector<std::string>> seqs;
  for (const auto& ex : train) {
    seqs.push_back(ex.sentence);
    seqs.push_back(ex.context);
  }
  ClassifierTrainResult result{
      CommitmentClassifier(text::Vocabulary::build(seqs, config.min_count), config), {}, 0};
  auto& clf = result.model;
  auto& params = clf.parameters();
  numeric::Adagrad opt(params.pointers(), config.optimizer);
  numeric::EarlyStopper stopper(config.patience, numeric::PatienceRule::AnyMetricStalls, false);
  numeric::Rng order_rng(numeric::derive_seed(config.seed, "commitment.order"));
  numeric::Rng dropout_rng(numeric::derive_seed(config.seed, "commitment.dropout"));

  std::vector<numeric::Tensor> best = params.snapshot();
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t batch = std::max<std::size_t>(config.batch_size, 1);
  Tape tape(true);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        tape.clear();
        Var l = clf.loss(tape, train[order[k]], true, &dropout_rng);
        loss_sum += tape.value(l)[0];
        tape.backward(l, scale);
      }
      numeric::clip_grad_norm(params.pointers(), config.max_grad_norm);
      opt.step();
    }
    const double val_acc = evaluate_classifier(clf, validation).accuracy;
    result.log.push_back({epoch, loss_sum / static_cast<double>(order.size()), val_acc});
    const auto u = stopper.update({val_acc});
    if (u.best) {
      best = params.snapshot();
      result.best_epoch = epoch;
    }
    if (u.stop) break;
  }
  params.restore(best);
  return result;
}

struct Candidate {
  std::size_t email = 0;     // index into the input list
  std::size_t sentence = 0;  // index into split_sentences(body)
  std::string text;
  double score = 0.0;
};

/// Every sentence scoring at least `threshold`, by score descending, then
/// email and sentence order.
inline std::vector<Candidate> extract_candidates(const CommitmentClassifier& clf,
                                                 const std::vector<corpus::EmailMessage>& emails,
                                                 double threshold = 0.9) {
  std::vector<Candidate> out;
  for (std::size_t e = 0; e < emails.size(); ++e) {
    const auto sentences = text::split_sentences(emails[e].body);
    std::vector<std::vector<std::string>> toks;
    for (const auto& s : sentences) toks.push_back(text::tokenize(s));
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].empty()) continue;
      std::vector<std::string> ctx;
      for (std::size_t j = 0; j < toks.size(); ++j) {
        if (j != i) ctx.insert(ctx.end(), toks[j].begin(), toks[j].end());
      }
      const double s = clf.score(toks[i], ctx);
      if (s >= threshold) out.push_back({e, i, sentences[i], s});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.email != b.email) return a.email < b.email;
    return a.sentence < b.sentence;
  });
  return out;
}

}  // namespace smarttodo::commitment
