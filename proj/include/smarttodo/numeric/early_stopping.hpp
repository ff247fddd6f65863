#pragma once

#include <limits>

#include "smarttodo/error.hpp"

namespace smarttodo::numeric {

struct ValidationScore {
  double accuracy = 0.0;
  /// Lower is better; leave at +inf to track accuracy alone.
  double perplexity = std::numeric_limits<double>::infinity();
};

enum class PatienceRule {
  /// Decrement unless every tracked metric improved.
  AnyMetricStalls,
  /// Decrement only when no tracked metric improved.
  AllMetricsStall,
};

/// Patience counter over per-epoch validation scores. A metric improves when
/// it strictly beats its own best so far. The best epoch is the one with the
/// highest accuracy, ties going to lower perplexity.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience, PatienceRule rule = PatienceRule::AnyMetricStalls,
                        bool track_perplexity = true)
      : patience_(patience), remaining_(patience), rule_(rule), track_ppl_(track_perplexity) {
    if (patience < 1) throw NumericError("patience must be at least 1");
  }

  struct Update {
    bool best = false;  // this epoch is the new best checkpoint
    bool stop = false;  // patience exhausted
  };

  Update update(const ValidationScore& s) {
    ++epochs_;
    const bool acc_up = s.accuracy > best_acc_;
    const bool ppl_up = track_ppl_ && s.perplexity < best_ppl_;
    Update u;
    u.best = epochs_ == 1 || s.accuracy > best_epoch_.accuracy ||
             (s.accuracy == best_epoch_.accuracy && s.perplexity < best_epoch_.perplexity);
    if (u.best) {
      best_epoch_ = s;
      best_index_ = epochs_;
    }
    if (acc_up) best_acc_ = s.accuracy;
    if (ppl_up) best_ppl_ = s.perplexity;

    bool improved;
    if (!track_ppl_) {
      improved = acc_up;
    } else if (rule_ == PatienceRule::AnyMetricStalls) {
      improved = acc_up && ppl_up;
    } else {
      improved = acc_up || ppl_up;
    }
    if (improved) {
      remaining_ = patience_;
    } else {
      --remaining_;
    }
    u.stop = remaining_ <= 0;
    return u;
  }

  int remaining() const noexcept { return remaining_; }
  int epochs_seen() const noexcept { return epochs_; }
  /// 1-based epoch of the best score.
  int best_epoch() const noexcept { return best_index_; }
  const ValidationScore& best_score() const noexcept { return best_epoch_; }

 private:
  int patience_;
  int remaining_;
  PatienceRule rule_;
  bool track_ppl_;
  int epochs_ = 0;
  int best_index_ = 0;
  double best_acc_ = -std::numeric_limits<double>::infinity();
  double best_ppl_ = std::numeric_limits<double>::infinity();
  ValidationScore best_epoch_;
};

}  // namespace smarttodo::numeric
