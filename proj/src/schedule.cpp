// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/schedule.hpp"

namespace tgif::nn {

PlateauSchedule::PlateauSchedule(const TrainConfig& cfg)
    : lr_(cfg.lr0),
      factor_(cfg.lr_factor),
      lr_patience_(cfg.lr_patience),
      stop_patience_(cfg.early_stop_patience) {
  cfg.validate();
}

PlateauSchedule::Decision PlateauSchedule::observe(double val_loss) {
  Decision d;
  d.validation = ++count_;
  if (val_loss < best_) {
    best_ = val_loss;
    since_best_ = 0;
    since_lr_ = 0;
    d.improved = true;
  } else {
    ++since_best_;
    ++since_lr_;
    if (since_lr_ >= lr_patience_) {
      lr_ *= factor_;
      since_lr_ = 0;
      d.lr_reduced = true;
    }
    d.stop = since_best_ >= stop_patience_;
  }
  d.lr = lr_;
  return d;
}

}  // namespace tgif::nn
