// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/data/manifest.h"

#include <filesystem>
#include <fstream>

#include "flespeech/common/error.h"

#include "json.hpp"

namespace flespeech {
namespace data {

using nlohmann::json;

namespace {

json label_to_json(const StyleLabel& label) {
  json j;
  j["pitch"] = category_name(label.pitch);
  j["rms"] = category_name(label.rms);
  j["speech_rate"] = category_name(label.speech_rate);
  if (label.gender) j["gender"] = *label.gender;
  if (label.emotion) j["emotion"] = *label.emotion;
  return j;
}

StyleLabel label_from_json(const json& j) {
  StyleLabel label;
  label.pitch = category_from_name(j.at("pitch").get<std::string>());
  label.rms = category_from_name(j.at("rms").get<std::string>());
  label.speech_rate =
      category_from_name(j.at("speech_rate").get<std::string>());
  if (j.contains("gender")) label.gender = j.at("gender").get<std::string>();
  if (j.contains("emotion")) label.emotion = j.at("emotion").get<std::string>();
  return label;
}

json attributes_to_json(const AttributeRecord& rec) {
  json j;
  j["pitch_mean_hz"] = rec.pitch_mean_hz;
  j["pitch_variance"] = rec.pitch_variance;
  j["rms_mean"] = rec.rms_mean;
  j["speech_rate"] = rec.speech_rate;
  if (rec.gender) j["gender"] = *rec.gender;
  if (rec.emotion) j["emotion"] = *rec.emotion;
  return j;
}

AttributeRecord attributes_from_json(const json& j) {
  AttributeRecord rec;
  rec.pitch_mean_hz = j.at("pitch_mean_hz").get<double>();
  rec.pitch_variance = j.at("pitch_variance").get<double>();
  rec.rms_mean = j.at("rms_mean").get<double>();
  rec.speech_rate = j.at("speech_rate").get<double>();
  if (j.contains("gender")) rec.gender = j.at("gender").get<std::string>();
  if (j.contains("emotion")) rec.emotion = j.at("emotion").get<std::string>();
  return rec;
}

}  // namespace

std::string manifest_entry_to_json(const ManifestEntry& entry) {
  json j;
  j["audio_path"] = entry.audio_path;
  j["transcript"] = entry.transcript;
  j["duration_s"] = entry.duration_s;
  if (entry.snr_score) j["snr_score"] = *entry.snr_score;
  if (entry.dnsmos) j["dnsmos"] = *entry.dnsmos;
  if (entry.attributes) j["attributes"] = attributes_to_json(*entry.attributes);
  if (entry.style_label) j["style_label"] = label_to_json(*entry.style_label);
  json c = json::object();
  if (!entry.captions.style_caption.empty()) {
    c["style_caption"] = entry.captions.style_caption;
  }
  if (entry.captions.face_static_caption) {
    c["face_static"] = *entry.captions.face_static_caption;
  }
  if (entry.captions.face_dynamic_caption) {
    c["face_dynamic"] = *entry.captions.face_dynamic_caption;
  }
  if (entry.captions.face_combined_caption) {
    c["face_combined"] = *entry.captions.face_combined_caption;
  }
  if (!c.empty()) j["captions"] = c;
  if (entry.face_image_path) j["face_image"] = *entry.face_image_path;
  if (entry.face_video_path) j["face_video"] = *entry.face_video_path;
  j["accepted"] = entry.accepted;
  if (!entry.reject_reasons.empty()) j["reject_reasons"] = entry.reject_reasons;
  return j.dump();
}

ManifestEntry manifest_entry_from_json(const std::string& line) {
  json j = json::parse(line);
  ManifestEntry e;
  e.audio_path = j.at("audio_path").get<std::string>();
  e.transcript = j.value("transcript", std::string());
  e.duration_s = j.value("duration_s", 0.0);
  if (j.contains("snr_score")) e.snr_score = j.at("snr_score").get<double>();
  if (j.contains("dnsmos")) e.dnsmos = j.at("dnsmos").get<double>();
  if (j.contains("attributes")) {
    e.attributes = attributes_from_json(j.at("attributes"));
  }
  if (j.contains("style_label")) {
    e.style_label = label_from_json(j.at("style_label"));
  }
  if (j.contains("captions")) {
    const json& c = j.at("captions");
    e.captions.style_caption = c.value("style_caption", std::string());
    if (c.contains("face_static")) {
      e.captions.face_static_caption = c.at("face_static").get<std::string>();
    }
    if (c.contains("face_dynamic")) {
      e.captions.face_dynamic_caption = c.at("face_dynamic").get<std::string>();
    }
    if (c.contains("face_combined")) {
      e.captions.face_combined_caption =
          c.at("face_combined").get<std::string>();
    }
  }
  if (j.contains("face_image")) {
    e.face_image_path = j.at("face_image").get<std::string>();
  }
  if (j.contains("face_video")) {
    e.face_video_path = j.at("face_video").get<std::string>();
  }
  e.accepted = j.value("accepted", false);
  if (j.contains("reject_reasons")) {
    for (const auto& r : j.at("reject_reasons")) {
      e.reject_reasons.push_back(r.get<std::string>());
    }
  }
  return e;
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw IoError("cannot write manifest " + tmp);
    for (const auto& e : entries) f << manifest_entry_to_json(e) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(manifest_entry_from_json(line));
  }
  return out;
}

}  // namespace data
}  // namespace flespeech
