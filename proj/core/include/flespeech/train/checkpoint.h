// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_TRAIN_CHECKPOINT_H_
#define FLESPEECH_TRAIN_CHECKPOINT_H_

#include <cstdint>
#include <string>

namespace flespeech {
namespace train {

// Checkpoints live at {run}/{stage}/{step}/. A directory is staged under a
// temporary name and renamed into place once complete, so a partially
// written checkpoint is never visible under its final path.
std::string stage_dir_name(int stage_number);
std::string checkpoint_path(const std::string& run_dir, int stage_number,
                            long long step);

// Creates the staging directory and returns its path; finish with
// commit_checkpoint once all content is inside.
std::string stage_checkpoint(const std::string& run_dir, int stage_number,
                             long long step);
void commit_checkpoint(const std::string& staged_path,
                       const std::string& final_path);

// Highest committed step for a stage. Throws MissingCheckpoint when the
// stage has none.
long long latest_checkpoint_step(const std::string& run_dir, int stage_number);
std::string latest_checkpoint_path(const std::string& run_dir,
                                   int stage_number);
bool has_checkpoint(const std::string& run_dir, int stage_number);

}  // namespace train
}  // namespace flespeech

#endif  // FLESPEECH_TRAIN_CHECKPOINT_H_
