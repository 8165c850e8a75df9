// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_DATA_MANIFEST_H_
#define FLESPEECH_DATA_MANIFEST_H_

#include <optional>
#include <string>
#include <vector>

#include "flespeech/data/labeling.h"

namespace flespeech {
namespace data {

struct CaptionRecord {
  std::string style_caption;
  std::optional<std::string> face_static_caption;
  std::optional<std::string> face_dynamic_caption;
  std::optional<std::string> face_combined_caption;
};

// One utterance of the training manifest. Scores and attributes are
// optional until the corresponding pipeline pass has filled them in.
struct ManifestEntry {
  std::string audio_path;
  std::string transcript;
  double duration_s = 0.0;
  std::optional<double> snr_score;
  std::optional<double> dnsmos;
  std::optional<AttributeRecord> attributes;
  std::optional<StyleLabel> style_label;
  CaptionRecord captions;
  std::optional<std::string> face_image_path;
  std::optional<std::string> face_video_path;
  bool accepted = false;
  std::vector<std::string> reject_reasons;
};

std::string manifest_entry_to_json(const ManifestEntry& entry);
ManifestEntry manifest_entry_from_json(const std::string& line);

// JSON-Lines, one entry per line, written atomically.
void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

}  // namespace data
}  // namespace flespeech

#endif  // FLESPEECH_DATA_MANIFEST_H_
