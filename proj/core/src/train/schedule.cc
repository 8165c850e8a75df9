// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/train/schedule.h"

#include <cmath>
#include <string>

#include "flespeech/common/error.h"

namespace flespeech {
namespace train {

double lr_at(long long step, const LRSchedule& schedule,
             long long total_steps) {
  if (step < 0 || step > total_steps) {
    throw StepOutOfRangeError("step " + std::to_string(step) +
                              " outside [0, " + std::to_string(total_steps) +
                              "]");
  }
  if (total_steps <= schedule.warmup_steps) {
    throw StepOutOfRangeError("total_steps must exceed the warmup");
  }
  if (step < schedule.warmup_steps) {
    const double frac = (double)step / (double)schedule.warmup_steps;
    return schedule.initial + (schedule.peak - schedule.initial) * frac;
  }
  // step == warmup_steps lands here so the peak is returned exactly.
  const double phase = (double)(step - schedule.warmup_steps) /
                       (double)(total_steps - schedule.warmup_steps);
  return schedule.peak * 0.5 * (1.0 + std::cos(M_PI * phase));
}

}  // namespace train
}  // namespace flespeech
