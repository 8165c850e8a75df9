// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/mpe/prompt_bundle.h"

#include <filesystem>
#include <stdexcept>

#include "flespeech/audio/wav.h"
#include "flespeech/common/hash.h"

#include "json.hpp"

namespace flespeech {
namespace mpe {

namespace fs = std::filesystem;
using nlohmann::json;

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::text:
      return "text";
    case Modality::audio:
      return "audio";
    case Modality::image:
      return "image";
    case Modality::video:
      return "video";
    case Modality::face_caption:
      return "face_caption";
  }
  return "unknown";
}

bool PromptBundle::enabled(Modality m) const {
  switch (m) {
    case Modality::text:
      return use_text;
    case Modality::audio:
      return use_audio;
    case Modality::image:
      return use_image;
    case Modality::video:
      return use_video;
    case Modality::face_caption:
      return use_face_caption;
  }
  return false;
}

bool PromptBundle::empty() const {
  return !use_text && !use_audio && !use_image && !use_video &&
         !use_face_caption;
}

void PromptBundle::validate() const {
  if (use_text && !text.has_value())
    throw std::invalid_argument("prompt bundle enables text without content");
  if (use_audio && !audio.has_value())
    throw std::invalid_argument("prompt bundle enables audio without content");
  if (use_image && !image.has_value())
    throw std::invalid_argument("prompt bundle enables image without content");
  if (use_video && (!video.has_value() || video->empty()))
    throw std::invalid_argument("prompt bundle enables video without frames");
  if (use_face_caption && !face_caption.has_value())
    throw std::invalid_argument(
        "prompt bundle enables face_caption without content");
}

namespace {

std::string resolve(const std::string& path, const std::string& base_dir) {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

}  // namespace

PromptBundle bundle_from_json_text(const std::string& json_text,
                                   const std::string& base_dir) {
  json j = json::parse(json_text);
  PromptBundle b;
  if (j.contains("text")) b.set_text(j.at("text").get<std::string>());
  if (j.contains("audio")) {
    b.set_audio(read_wav(resolve(j.at("audio").get<std::string>(), base_dir)));
  }
  if (j.contains("image")) {
    b.set_image(read_pnm(resolve(j.at("image").get<std::string>(), base_dir)));
  }
  if (j.contains("video")) {
    std::vector<Image> frames;
    for (const auto& p : j.at("video")) {
      frames.push_back(read_pnm(resolve(p.get<std::string>(), base_dir)));
    }
    b.set_video(std::move(frames));
  }
  if (j.contains("face_caption")) {
    b.set_face_caption(j.at("face_caption").get<std::string>());
  }
  b.validate();
  return b;
}

std::string bundle_to_json_text(const PromptBundle& bundle,
                                const std::string& audio_path,
                                const std::string& image_path,
                                const std::vector<std::string>& video_paths) {
  bundle.validate();
  json j = json::object();
  if (bundle.use_text) j["text"] = *bundle.text;
  if (bundle.use_audio) j["audio"] = audio_path;
  if (bundle.use_image) j["image"] = image_path;
  if (bundle.use_video) j["video"] = video_paths;
  if (bundle.use_face_caption) j["face_caption"] = *bundle.face_caption;
  return j.dump(2);
}

std::uint64_t bundle_hash(const PromptBundle& bundle) {
  bundle.validate();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_tag = [&h](const char* tag) { h = fnv1a64(std::string(tag), h); };
  if (bundle.use_text) {
    mix_tag("text:");
    h = fnv1a64(*bundle.text, h);
  }
  if (bundle.use_audio) {
    mix_tag("audio:");
    const auto& s = bundle.audio->samples;
    h = fnv1a64(s.data(), s.size() * sizeof(double), h);
    std::int32_t sr = bundle.audio->sample_rate;
    h = fnv1a64(&sr, sizeof(sr), h);
  }
  if (bundle.use_image) {
    mix_tag("image:");
    const auto& px = bundle.image->pixels;
    h = fnv1a64(px.data(), px.size() * sizeof(double), h);
  }
  if (bundle.use_video) {
    mix_tag("video:");
    for (const auto& f : *bundle.video) {
      h = fnv1a64(f.pixels.data(), f.pixels.size() * sizeof(double), h);
    }
  }
  if (bundle.use_face_caption) {
    mix_tag("face_caption:");
    h = fnv1a64(*bundle.face_caption, h);
  }
  return h;
}

}  // namespace mpe
}  // namespace flespeech
