// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_MPE_PROMPT_BUNDLE_H_
#define FLESPEECH_MPE_PROMPT_BUNDLE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flespeech/audio/audio_clip.h"
#include "flespeech/media/image.h"

namespace flespeech {
namespace mpe {

enum class Modality { text, audio, image, video, face_caption };

constexpr int kNumModalities = 5;

const char* modality_name(Modality m);

// Optional per-stage prompts with an explicit presence mask. A populated
// field whose mask bit is off is treated as absent and its contents are
// never read; an enabled modality must be populated.
struct PromptBundle {
  std::optional<std::string> text;
  std::optional<AudioClip> audio;
  std::optional<Image> image;
  std::optional<std::vector<Image>> video;
  std::optional<std::string> face_caption;

  bool use_text = false;
  bool use_audio = false;
  bool use_image = false;
  bool use_video = false;
  bool use_face_caption = false;

  void set_text(std::string t) {
    text = std::move(t);
    use_text = true;
  }
  void set_audio(AudioClip a) {
    audio = std::move(a);
    use_audio = true;
  }
  void set_image(Image i) {
    image = std::move(i);
    use_image = true;
  }
  void set_video(std::vector<Image> v) {
    video = std::move(v);
    use_video = true;
  }
  void set_face_caption(std::string c) {
    face_caption = std::move(c);
    use_face_caption = true;
  }

  bool enabled(Modality m) const;
  // A fully empty bundle is legal: generation falls back to the
  // unconditional prior.
  bool empty() const;
  // Throws when a mask bit is set for an unpopulated field.
  void validate() const;
};

// JSON with inline strings and file paths for media, e.g.
// {"text": "...", "audio": "a.wav", "image": "f.ppm", "video": ["f0.ppm"]}.
// Relative paths resolve against base_dir.
PromptBundle bundle_from_json_text(const std::string& json_text,
                                   const std::string& base_dir);
std::string bundle_to_json_text(const PromptBundle& bundle,
                                const std::string& audio_path = "",
                                const std::string& image_path = "",
                                const std::vector<std::string>& video_paths = {});

// Content hash over the enabled modalities only; used in provenance records.
std::uint64_t bundle_hash(const PromptBundle& bundle);

}  // namespace mpe
}  // namespace flespeech

#endif  // FLESPEECH_MPE_PROMPT_BUNDLE_H_
