// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_TRAIN_SCHEDULE_H_
#define FLESPEECH_TRAIN_SCHEDULE_H_

namespace flespeech {
namespace train {

// Linear warmup from `initial` to `peak` over warmup_steps, then cosine
// decay to zero at total_steps.
struct LRSchedule {
  int warmup_steps = 5000;
  double initial = 1e-7;
  double peak = 3e-4;
};

// lr at an integer step in [0, total_steps]. Exact endpoints: lr(0) ==
// initial, lr(warmup_steps) == peak, lr(total_steps) == 0, and the decay
// midpoint evaluates to peak/2. Throws StepOutOfRange outside the range or
// when total_steps does not exceed the warmup.
double lr_at(long long step, const LRSchedule& schedule, long long total_steps);

}  // namespace train
}  // namespace flespeech

#endif  // FLESPEECH_TRAIN_SCHEDULE_H_
