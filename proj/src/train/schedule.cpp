#include "gabo/train/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gabo::train {

Scheduler::Scheduler(double lr0, std::vector<std::size_t> milestones, double factor)
    : lr0_(lr0), milestones_(std::move(milestones)), factor_(factor) {
  if (!(lr0_ > 0.0)) throw std::invalid_argument("Scheduler: initial lr must be positive");
  if (!(factor_ > 0.0)) throw std::invalid_argument("Scheduler: factor must be positive");
  std::sort(milestones_.begin(), milestones_.end());
}

double Scheduler::lr(std::size_t epoch) const {
  const auto passed = std::upper_bound(milestones_.begin(), milestones_.end(), epoch) - milestones_.begin();
  double lr = lr0_;
  for (std::ptrdiff_t i = 0; i < passed; ++i) lr *= factor_;
  return lr;
}

bool Scheduler::drops_at(std::size_t epoch) const {
  return std::binary_search(milestones_.begin(), milestones_.end(), epoch);
}

bool EarlyStopping::observe(std::size_t epoch, std::optional<double> value) {
  if (!value) return false;
  if (!best_ || *value > *best_) {
    best_ = value;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

}  // namespace gabo::train
