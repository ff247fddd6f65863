#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "smarttodo/seq2seq/model.hpp"

namespace smarttodo::seq2seq {

/// Decoding over a gradient-free tape with the source encoded once.
class InferenceSession {
 public:
  InferenceSession(const Seq2SeqModel& model, const EncoderInput& input)
      : model_(model), tape_(false), enc_(model.encode(tape_, input, false)) {}

  const Seq2SeqModel& model() const noexcept { return model_; }
  const SourceMap& source_map() const noexcept { return enc_.map; }
  std::size_t extended_size() const {
    return model_.copies() ? enc_.map.extended_size(model_.target_vocab().size())
                           : model_.target_vocab().size();
  }

  DecoderVars initial() { return model_.initial_state(tape_, enc_); }

  struct Output {
    DecoderVars next;
    std::vector<double> probs;
  };

  Output step(const DecoderVars& state, std::size_t prev) {
    StepVars sv = model_.step(tape_, enc_, state, prev, false);
    return {sv.next, tape_.value(sv.distribution).values()};
  }

  /// Surface form of an extended id.
  const std::string& surface(std::size_t id) const {
    const auto& V = model_.target_vocab();
    return id < V.size() ? V.token(id) : enc_.map.oov.at(id - V.size());
  }

 private:
  const Seq2SeqModel& model_;
  Tape tape_;
  Encoded enc_;
};

struct Decoded {
  std::vector<std::string> tokens;  // surface tokens, without </s>
  std::vector<std::size_t> ids;     // extended ids, including </s> when reached
  double log_prob = 0.0;
  /// log_prob divided by ids.size().
  double score = -std::numeric_limits<double>::infinity();
  bool finished = false;

  std::string str() const { return text::join(tokens, " "); }
};

namespace detail {

inline double safe_log(double p) { return std::log(std::max(p, numeric::kNllFloor)); }

/// Token order for ties: higher probability, then lexicographically smaller
/// surface form, then smaller id.
inline std::vector<std::size_t> ranked_tokens(const std::vector<double>& probs,
                                              const InferenceSession& s, std::size_t n) {
  std::vector<std::size_t> ids(probs.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (probs[a] != probs[b]) return probs[a] > probs[b];
                      const auto& sa = s.surface(a);
                      const auto& sb = s.surface(b);
                      return sa != sb ? sa < sb : a < b;
                    });
  ids.resize(n);
  return ids;
}

inline std::vector<std::string> surfaces(const std::vector<std::size_t>& ids,
                                         const InferenceSession& s) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(s.surface(id));
  return out;
}

inline Decoded finish(const std::vector<std::size_t>& ids, double log_prob,
                      const InferenceSession& s) {
  Decoded d;
  d.ids = ids;
  d.log_prob = log_prob;
  d.finished = !ids.empty() && ids.back() == text::Vocabulary::kEosId;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (d.finished && i + 1 == ids.size()) break;
    d.tokens.push_back(s.surface(ids[i]));
  }
  d.score = ids.empty() ? -std::numeric_limits<double>::infinity()
                        : log_prob / static_cast<double>(ids.size());
  return d;
}

inline Decoded greedy(InferenceSession& s, std::size_t max_len) {
  auto state = s.initial();
  std::size_t prev = text::Vocabulary::kBosId;
  std::vector<std::size_t> ids;
  double lp = 0.0;
  for (std::size_t t = 0; t < max_len; ++t) {
    auto out = s.step(state, prev);
    const std::size_t best = ranked_tokens(out.probs, s, 1).front();
    lp += safe_log(out.probs[best]);
    ids.push_back(best);
    if (best == text::Vocabulary::kEosId) break;
    state = out.next;
    prev = best;
  }
  return finish(ids, lp, s);
}

}  // namespace detail

/// Argmax decoding; probability ties go to the lexicographically smaller token.
inline Decoded greedy_decode(const Seq2SeqModel& model, const EncoderInput& input,
                             std::size_t max_len = 30) {
  InferenceSession s(model, input);
  return detail::greedy(s, max_len);
}

struct BeamOptions {
  std::size_t width = 5;
  std::size_t max_len = 30;
  /// Also score the greedy path, so the result is never worse than greedy.
  bool include_greedy = false;
};

/// Beam search. Each step keeps the `width` best expansions by cumulative
/// log-probability (ties by surface sequence); hypotheses leave the beam at
/// </s> or at max_len. The result is the hypothesis with the highest
/// length-normalized log-probability, ties lexicographic.
inline Decoded beam_search(const Seq2SeqModel& model, const EncoderInput& input,
                           const BeamOptions& opt = {}) {
  if (opt.width == 0 || opt.max_len == 0) throw Seq2SeqError("beam width and max_len must be >= 1");
  InferenceSession s(model, input);

  struct Hyp {
    std::vector<std::size_t> ids;
    std::vector<std::string> surface;
    double log_prob = 0.0;
    DecoderVars state;
  };
  std::vector<Hyp> live(1);
  live[0].state = s.initial();
  std::vector<Decoded> done;

  for (std::size_t t = 0; t < opt.max_len && !live.empty(); ++t) {
    std::vector<Hyp> pool;
    for (const Hyp& h : live) {
      const std::size_t prev = h.ids.empty() ? text::Vocabulary::kBosId : h.ids.back();
      auto out = s.step(h.state, prev);
      for (std::size_t id : detail::ranked_tokens(out.probs, s, opt.width)) {
        Hyp n{h.ids, h.surface, h.log_prob + detail::safe_log(out.probs[id]), out.next};
        n.ids.push_back(id);
        n.surface.push_back(s.surface(id));
        pool.push_back(std::move(n));
      }
    }
    std::stable_sort(pool.begin(), pool.end(), [](const Hyp& a, const Hyp& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      return a.surface < b.surface;
    });
    if (pool.size() > opt.width) pool.resize(opt.width);
    live.clear();
    for (auto& h : pool) {
      if (h.ids.back() == text::Vocabulary::kEosId || t + 1 == opt.max_len) {
        done.push_back(detail::finish(h.ids, h.log_prob, s));
      } else {
        live.push_back(std::move(h));
      }
    }
  }
  if (opt.include_greedy && opt.width > 1) done.push_back(detail::greedy(s, opt.max_len));

  const auto better = [&](const Decoded& a, const Decoded& b) {
    if (a.score != b.score) return a.score > b.score;
    return detail::surfaces(a.ids, s) < detail::surfaces(b.ids, s);
  };
  return *std::min_element(done.begin(), done.end(), better);
}

}  // namespace smarttodo::seq2seq
