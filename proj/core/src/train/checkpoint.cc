// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/train/checkpoint.h"

#include <filesystem>

#include "flespeech/common/error.h"

namespace flespeech {
namespace train {

namespace fs = std::filesystem;

std::string stage_dir_name(int stage_number) {
  return "stage" + std::to_string(stage_number);
}

std::string checkpoint_path(const std::string& run_dir, int stage_number,
                            long long step) {
  return run_dir + "/" + stage_dir_name(stage_number) + "/" +
         std::to_string(step);
}

std::string stage_checkpoint(const std::string& run_dir, int stage_number,
                             long long step) {
  const std::string staged = run_dir + "/" + stage_dir_name(stage_number) +
                             "/.staging." + std::to_string(step);
  fs::remove_all(staged);
  fs::create_directories(staged);
  return staged;
}

void commit_checkpoint(const std::string& staged_path,
                       const std::string& final_path) {
  fs::remove_all(final_path);
  fs::rename(staged_path, final_path);
}

namespace {

// -1 when the stage has no committed checkpoint.
long long scan_latest(const std::string& run_dir, int stage_number) {
  const fs::path stage_dir =
      fs::path(run_dir) / stage_dir_name(stage_number);
  if (!fs::is_directory(stage_dir)) return -1;
  long long best = -1;
  for (const auto& e : fs::directory_iterator(stage_dir)) {
    if (!e.is_directory()) continue;
    const std::string name = e.path().filename().string();
    if (name.empty() || name[0] == '.') continue;  // staging leftovers
    try {
      best = std::max(best, (long long)std::stoll(name));
    } catch (...) {
      continue;
    }
  }
  return best;
}

}  // namespace

long long latest_checkpoint_step(const std::string& run_dir,
                                 int stage_number) {
  const long long best = scan_latest(run_dir, stage_number);
  if (best < 0) {
    throw MissingCheckpointError("no checkpoint for " +
                                 stage_dir_name(stage_number) + " under " +
                                 run_dir);
  }
  return best;
}

std::string latest_checkpoint_path(const std::string& run_dir,
                                   int stage_number) {
  return checkpoint_path(run_dir, stage_number,
                         latest_checkpoint_step(run_dir, stage_number));
}

bool has_checkpoint(const std::string& run_dir, int stage_number) {
  return scan_latest(run_dir, stage_number) >= 0;
}

}  // namespace train
}  // namespace flespeech
