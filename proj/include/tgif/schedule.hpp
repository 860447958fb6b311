// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <limits>

#include "tgif/config.hpp"

namespace tgif::nn {

/// Validation-driven learning-rate halving and early stopping. A validation
/// improves only when it is strictly below the best seen so far.
class PlateauSchedule {
 public:
  explicit PlateauSchedule(const TrainConfig& cfg);

  struct Decision {
    int validation = 0;  // 1-based index of this validation
    bool improved = false;
    bool lr_reduced = false;
    bool stop = false;
    double lr = 0.0;  // rate to use from now on
  };

  Decision observe(double val_loss);

  double lr() const { return lr_; }
  double best() const { return best_; }
  int validations() const { return count_; }
  int since_best() const { return since_best_; }

 private:
  double lr_;
  double factor_;
  int lr_patience_;
  int stop_patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int count_ = 0;
  int since_best_ = 0;
  int since_lr_ = 0;  // non-improving validations since the last improvement or halving
};

}  // namespace tgif::nn
