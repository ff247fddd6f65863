#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "smarttodo/error.hpp"
#include "smarttodo/numeric/layers.hpp"
#include "smarttodo/numeric/random.hpp"
#include "smarttodo/numeric/tape.hpp"
#include "smarttodo/selection/word_vectors.hpp"
#include "smarttodo/seq2seq/input.hpp"
#include "smarttodo/text/vocabulary.hpp"

namespace smarttodo::seq2seq {

using numeric::Tape;
using numeric::Tensor;
using numeric::Var;

enum class Variant { Vanilla, Copy, Bifocal };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Vanilla: return "vanilla";
    case Variant::Copy: return "copy";
    case Variant::Bifocal: return "bifocal";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "vanilla") return Variant::Vanilla;
  if (s == "copy") return Variant::Copy;
  if (s == "bifocal") return Variant::Bifocal;
  throw Seq2SeqError("unknown model variant '" + s + "' (expected vanilla, copy or bifocal)");
}

struct ModelConfig {
  Variant variant = Variant::Copy;
  std::size_t embed_dim = 100;
  std::size_t hidden = 256;
  std::size_t attention_dim = 256;
  double dropout = 0.5;
  double attention_dropout = 0.5;
  /// Random embeddings start uniform in [-embed_init, embed_init].
  double embed_init = 1.0;
  std::uint64_t seed = 1;
};

/// Extended-vocabulary view of one source: V' = V followed by the source
/// tokens missing from V, in order of first occurrence.
struct SourceMap {
  std::vector<std::vector<std::size_t>> ext;  // per segment, per position
  std::vector<std::string> oov;

  std::size_t extended_size(std::size_t vocab_size) const { return vocab_size + oov.size(); }
};

inline SourceMap build_source_map(const text::Vocabulary& target,
                                  const std::vector<std::vector<std::string>>& segments) {
  SourceMap m;
  std::unordered_map<std::string, std::size_t> oov_index;
  for (const auto& seg : segments) {
    m.ext.emplace_back();
    for (const auto& t : seg) {
      if (target.contains(t)) {
        m.ext.back().push_back(target.id(t));
        continue;
      }
      auto [it, fresh] = oov_index.try_emplace(t, m.oov.size());
      if (fresh) m.oov.push_back(t);
      m.ext.back().push_back(target.size() + it->second);
    }
  }
  return m;
}

/// Attention mass aggregated by extended id: P(w) = sum_{i: x_i = w} a_i.
inline Var copy_distribution(Tape& tape, Var weights, const std::vector<std::size_t>& ext,
                             std::size_t ext_size) {
  return tape.scatter_add(weights, ext, ext_size);
}

/// gate * a + (1 - gate) * b for a 1x1 gate.
inline Var blend(Tape& tape, Var a, Var b, Var gate) {
  return tape.add(tape.scale_var(a, gate), tape.scale_var(b, tape.one_minus(gate)));
}

/// Encoder states for one source segment.
struct Memory {
  Var states;  // H x T
  Var keys;    // W_h * states
  std::size_t length = 0;
};

struct Encoded {
  std::vector<Memory> memories;  // one, or query + rest for bifocal
  SourceMap map;
  numeric::LstmCell::State initial;
};

/// Decoder state carried between steps: LSTM state plus the fed-back
/// attentional output.
struct DecoderVars {
  Var h;
  Var c;
  Var feed;
};

struct StepVars {
  DecoderVars next;
  Var distribution;          // over V (vanilla) or V' (copy, bifocal)
  std::vector<Var> weights;  // attention per memory; empty memories omitted
  std::optional<Var> p_gen;
  std::optional<Var> source_gate;
};

/// Attention encoder-decoder with optional copy mechanism and a bifocal
/// (query + rest) dual-encoder variant.
class Seq2SeqModel {
 public:
  Seq2SeqModel(text::Vocabulary source, text::Vocabulary target, const ModelConfig& config)
      : src_(std::move(source)), tgt_(std::move(target)), config_(config) {
    build();
    numeric::Rng rng(numeric::derive_seed(config.seed, "seq2seq.init"));
    params_.init_glorot(rng);
    for (auto* table : {src_embed_, tgt_embed_}) {
      for (double& v : table->value.values()) v = rng.uniform(-config.embed_init, config.embed_init);
    }
  }

  Seq2SeqModel(Seq2SeqModel&&) noexcept = default;
  Seq2SeqModel& operator=(Seq2SeqModel&&) noexcept = default;

  const text::Vocabulary& source_vocab() const noexcept { return src_; }
  const text::Vocabulary& target_vocab() const noexcept { return tgt_; }
  const ModelConfig& config() const noexcept { return config_; }
  Variant variant() const noexcept { return config_.variant; }
  bool copies() const noexcept { return config_.variant != Variant::Vanilla; }
  numeric::ParameterSet& parameters() noexcept { return params_; }
  const numeric::ParameterSet& parameters() const noexcept { return params_; }
  numeric::Linear& gen_gate() noexcept { return gen_gate_; }
  numeric::Linear& source_gate() noexcept { return source_gate_; }
  numeric::AdditiveAttention& attention() noexcept { return attn_; }

  /// Copies rows of `vectors` into both embedding tables for every vocabulary
  /// token it covers; returns the number of rows copied.
  std::size_t load_pretrained(const selection::WordVectorTable& vectors) {
    if (vectors.dimension() != config_.embed_dim) {
      throw Seq2SeqError("pretrained vectors have dimension " + std::to_string(vectors.dimension()) +
                         ", model expects " + std::to_string(config_.embed_dim));
    }
    std::size_t copied = 0;
    auto fill = [&](numeric::Parameter& table, const text::Vocabulary& vocab) {
      for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto v = vectors.vector_of(vocab.token(i));
        if (!v) continue;
        for (std::size_t d = 0; d < v->size(); ++d) table.value(i, d) = (*v)[d];
        ++copied;
      }
    };
    fill(*src_embed_, src_);
    fill(*tgt_embed_, tgt_);
    return copied;
  }

  /// Source segments fed to the encoders: the whole input, or query and rest.
  std::vector<std::vector<std::string>> segments(const EncoderInput& in) const {
    if (config_.variant == Variant::Bifocal) return {in.query(), in.rest()};
    return {in.tokens};
  }

  /// Runs the encoder(s) over the segments. Empty segments get no memory,
  /// except that the first must be non-empty.
  Encoded encode_segments(Tape& tape, const std::vector<std::vector<std::string>>& segs,
                          bool train, numeric::Rng* rng = nullptr) const {
    if (segs.empty() || segs.front().empty()) throw Seq2SeqError("encode: empty input");
    if (segs.size() != (config_.variant == Variant::Bifocal ? 2u : 1u)) {
      throw Seq2SeqError("encode: " + std::to_string(segs.size()) + " segments for a " +
                         to_string(config_.variant) + " model");
    }
    Encoded enc;
    enc.map = build_source_map(tgt_, segs);
    Var table = tape.param(*src_embed_);
    bool have_state = false;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const auto& cell = k == 0 ? encoder_ : encoder_rest_;
      const auto& attn = k == 0 ? attn_ : attn_rest_;
      if (segs[k].empty()) {
        enc.memories.push_back({});
        continue;
      }
      auto state = cell.zero_state(tape);
      std::vector<Var> hs;
      hs.reserve(segs[k].size());
      for (const auto& tok : segs[k]) {
        Var x = embed(tape, table, src_.id(tok), train, rng);
        state = cell.step(tape, x, state);
        hs.push_back(state.h);
      }
      Var states = tape.concat_cols(hs);
      enc.memories.push_back({states, attn.keys(tape, states), segs[k].size()});
      if (!have_state) {
        enc.initial = state;
        have_state = true;
      } else {
        enc.initial = {tape.add(enc.initial.h, state.h), tape.add(enc.initial.c, state.c)};
      }
    }
    return enc;
  }

  Encoded encode(Tape& tape, const EncoderInput& in, bool train, numeric::Rng* rng = nullptr) const {
    return encode_segments(tape, segments(in), train, rng);
  }

  DecoderVars initial_state(Tape& tape, const Encoded& enc) const {
    return {enc.initial.h, enc.initial.c, tape.constant(Tensor(config_.hidden, 1))};
  }

  /// Target-vocabulary id used to embed an extended id.
  std::size_t input_id(std::size_t ext_id) const {
    return ext_id < tgt_.size() ? ext_id : text::Vocabulary::kUnkId;
  }

  /// One decoder step from previous token `prev` (an extended id).
  StepVars step(Tape& tape, const Encoded& enc, const DecoderVars& prev_state, std::size_t prev,
                bool train, numeric::Rng* rng = nullptr) const {
    Var y = embed(tape, tape.param(*tgt_embed_), input_id(prev), train, rng);
    auto s = decoder_.step(tape, tape.concat_rows({y, prev_state.feed}), {prev_state.h, prev_state.c});

    StepVars out;
    std::vector<Var> contexts;
    std::vector<const Memory*> live;
    for (std::size_t k = 0; k < enc.memories.size(); ++k) {
      const Memory& m = enc.memories[k];
      if (m.length == 0) {
        contexts.push_back(tape.constant(Tensor(config_.hidden, 1)));
        continue;
      }
      const auto& attn = k == 0 ? attn_ : attn_rest_;
      auto r = attn.attend(tape, m.states, m.keys, s.h);
      out.weights.push_back(r.weights);
      live.push_back(&m);
      Var ctx = r.context;
      if (train && config_.attention_dropout > 0.0) {
        ctx = tape.dropout(ctx, config_.attention_dropout, true, *rng);
      }
      contexts.push_back(ctx);
    }
    std::vector<Var> ctx_state = contexts;
    ctx_state.push_back(s.h);
    Var cs = tape.concat_rows(ctx_state);
    Var o = tape.tanh(combine_(tape, cs));
    out.next = {s.h, s.c, o};
    if (train && config_.dropout > 0.0) o = tape.dropout(o, config_.dropout, true, *rng);
    Var p_vocab = tape.softmax(generator_(tape, o), 0);
    if (!copies()) {
      out.distribution = p_vocab;
      return out;
    }

    const std::size_t ext_size = enc.map.extended_size(tgt_.size());
    Var p_gen = tape.sigmoid(gen_gate_(tape, tape.concat_rows({cs, y})));
    out.p_gen = p_gen;
    Var copy;
    if (out.weights.size() == 1) {
      const std::size_t k = live[0] == &enc.memories[0] ? 0 : 1;
      copy = copy_distribution(tape, out.weights[0], enc.map.ext[k], ext_size);
    } else {
      Var lambda = tape.sigmoid(source_gate_(tape, cs));
      out.source_gate = lambda;
      copy = blend(tape, copy_distribution(tape, out.weights[0], enc.map.ext[0], ext_size),
                   copy_distribution(tape, out.weights[1], enc.map.ext[1], ext_size), lambda);
    }
    out.distribution = blend(tape, tape.pad_rows(p_vocab, ext_size), copy, p_gen);
    return out;
  }

  /// Extended ids of the target tokens plus </s>. Tokens neither in V nor
  /// copyable map to <unk>.
  std::vector<std::size_t> target_ids(const std::vector<std::string>& target,
                                      const SourceMap& map) const {
    std::vector<std::size_t> ids;
    ids.reserve(target.size() + 1);
    for (const auto& t : target) {
      if (tgt_.contains(t)) {
        ids.push_back(tgt_.id(t));
        continue;
      }
      std::size_t id = text::Vocabulary::kUnkId;
      if (copies()) {
        auto it = std::find(map.oov.begin(), map.oov.end(), t);
        if (it != map.oov.end()) id = tgt_.size() + static_cast<std::size_t>(it - map.oov.begin());
      }
      ids.push_back(id);
    }
    ids.push_back(text::Vocabulary::kEosId);
    return ids;
  }

  struct ExampleLoss {
    Var loss;  // summed token NLL
    std::size_t tokens = 0;
    std::size_t correct = 0;
  };

  /// Teacher-forced negative log-likelihood of `target` (without </s>).
  ExampleLoss loss(Tape& tape, const EncoderInput& in, const std::vector<std::string>& target,
                   bool train, numeric::Rng* rng = nullptr) const {
    const Encoded enc = encode(tape, in, train, rng);
    const auto ids = target_ids(target, enc.map);
    DecoderVars state = initial_state(tape, enc);
    std::size_t prev = text::Vocabulary::kBosId;
    std::vector<Var> terms;
    ExampleLoss out;
    for (std::size_t gold : ids) {
      const StepVars sv = step(tape, enc, state, prev, train, rng);
      terms.push_back(tape.nll(sv.distribution, gold));
      const auto& p = tape.value(sv.distribution).values();
      const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      out.correct += best == gold ? 1 : 0;
      ++out.tokens;
      state = sv.next;
      prev = gold;
    }
    out.loss = tape.sum(tape.concat_rows(terms));
    return out;
  }

 private:
  Var embed(Tape& tape, Var table, std::size_t id, bool train, numeric::Rng* rng) const {
    Var x = tape.embedding(table, id);
    if (train && config_.dropout > 0.0) x = tape.dropout(x, config_.dropout, true, *rng);
    return x;
  }

  void build() {
    const std::size_t E = config_.embed_dim, H = config_.hidden, A = config_.attention_dim;
    const bool bifocal = config_.variant == Variant::Bifocal;
    const std::size_t n_ctx = bifocal ? 2 : 1;
    src_embed_ = &params_.add("src_embed", src_.size(), E);
    tgt_embed_ = &params_.add("tgt_embed", tgt_.size(), E);
    encoder_ = numeric::LstmCell::create(params_, "encoder", E, H);
    if (bifocal) encoder_rest_ = numeric::LstmCell::create(params_, "encoder_rest", E, H);
    decoder_ = numeric::LstmCell::create(params_, "decoder", E + H, H);
    attn_ = numeric::AdditiveAttention::create(params_, "attn", H, H, A);
    if (bifocal) attn_rest_ = numeric::AdditiveAttention::create(params_, "attn_rest", H, H, A);
    combine_ = numeric::Linear::create(params_, "combine", n_ctx * H + H, H);
    generator_ = numeric::Linear::create(params_, "generator", H, tgt_.size());
    if (copies()) gen_gate_ = numeric::Linear::create(params_, "gen_gate", n_ctx * H + H + E, 1);
    if (bifocal) source_gate_ = numeric::Linear::create(params_, "source_gate", n_ctx * H + H, 1);
  }

  text::Vocabulary src_;
  text::Vocabulary tgt_;
  ModelConfig config_;
  numeric::ParameterSet params_;
  numeric::Parameter* src_embed_ = nullptr;
  numeric::Parameter* tgt_embed_ = nullptr;
  numeric::LstmCell encoder_, encoder_rest_, decoder_;
  numeric::AdditiveAttention attn_, attn_rest_;
  numeric::Linear combine_, generator_, gen_gate_, source_gate_;
};

}  // namespace smarttodo::seq2seq
