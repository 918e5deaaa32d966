#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace gabo::train {

/// Step schedule: lr = lr0 * factor^(number of milestones <= epoch).
class Scheduler {
 public:
  Scheduler(double lr0, std::vector<std::size_t> milestones, double factor);

  double lr(std::size_t epoch) const;
  /// True when `epoch` is itself a milestone, i.e. its lr differs from the
  /// previous epoch's.
  bool drops_at(std::size_t epoch) const;

 private:
  double lr0_;
  std::vector<std::size_t> milestones_;
  double factor_;
};

/// Best-so-far tracking on a metric to maximise. Epochs without a metric are
/// skipped entirely.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true when `value` is a new best.
  bool observe(std::size_t epoch, std::optional<double> value);
  bool should_stop() const { return stale_ >= patience_; }
  std::optional<double> best() const { return best_; }
  std::optional<std::size_t> best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  std::optional<double> best_;
  std::optional<std::size_t> best_epoch_;
};

}  // namespace gabo::train
