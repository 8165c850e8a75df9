// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/data/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flespeech/audio/wav.h"
#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"
#include "flespeech/data/attributes.h"

#include "json.hpp"

namespace flespeech {
namespace data {

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) return "";
  std::stringstream ss;
  ss << f.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

void apply_metadata(ManifestEntry& entry, const fs::path& meta_path) {
  std::ifstream f(meta_path);
  if (!f) return;
  nlohmann::json j = nlohmann::json::parse(f);
  if (j.contains("face_static_caption")) {
    entry.captions.face_static_caption =
        j.at("face_static_caption").get<std::string>();
  }
  if (j.contains("face_dynamic_caption")) {
    entry.captions.face_dynamic_caption =
        j.at("face_dynamic_caption").get<std::string>();
  }
}

// Gender/emotion arrive from sidecar metadata, not from signal analysis.
void apply_meta_to_attributes(const fs::path& meta_path,
                              AttributeRecord& rec) {
  std::ifstream f(meta_path);
  if (!f) return;
  nlohmann::json j = nlohmann::json::parse(f);
  if (j.contains("gender")) rec.gender = j.at("gender").get<std::string>();
  if (j.contains("emotion")) rec.emotion = j.at("emotion").get<std::string>();
}

}  // namespace

BuildReport build_corpus_manifest(const BuildConfig& cfg,
                                  const BuildClients& in_clients) {
  clients::OfflineSnrScorer default_snr;
  clients::OfflineDnsmosScorer default_dnsmos;
  clients::OfflineCaptionCombiner default_combiner;
  clients::ScoreClient& snr = in_clients.snr ? *in_clients.snr : default_snr;
  clients::ScoreClient& dnsmos =
      in_clients.dnsmos ? *in_clients.dnsmos : default_dnsmos;
  clients::LlmClient& combiner =
      in_clients.combiner ? *in_clients.combiner : default_combiner;

  SynonymTable table = SynonymTable::load(cfg.synonyms_path);

  std::vector<fs::path> wavs;
  for (const auto& e : fs::directory_iterator(cfg.input_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") {
      wavs.push_back(e.path());
    }
  }
  std::sort(wavs.begin(), wavs.end());
  if (wavs.empty()) {
    throw EmptyInputError("no wav files in " + cfg.input_dir);
  }

  BuildReport report;
  std::vector<ManifestEntry> entries;
  entries.reserve(wavs.size());

  for (const auto& wav_path : wavs) {
    ManifestEntry entry;
    entry.audio_path = wav_path.string();
    AudioClip clip = read_wav(wav_path.string());
    entry.duration_s = clip.duration_s();

    fs::path stem = wav_path;
    stem.replace_extension();
    entry.transcript = read_text_file(fs::path(stem.string() + ".txt"));

    const fs::path face = stem.string() + ".face.ppm";
    if (fs::exists(face)) entry.face_image_path = face.string();
    const fs::path meta = stem.string() + ".meta.json";
    apply_metadata(entry, meta);

    GateDecision decision = quality_gate(entry, clip, snr, dnsmos);
    entry.accepted = decision.accepted;
    entry.reject_reasons = decision.reasons;

    if (entry.accepted) {
      try {
        AttributeRecord rec = extract_attributes(clip, entry.transcript);
        apply_meta_to_attributes(meta, rec);
        entry.attributes = rec;
      } catch (const NoVoicedFramesError&) {
        entry.accepted = false;
        entry.reject_reasons.push_back("no voiced frames");
      }
    }

    entries.push_back(std::move(entry));
  }

  std::vector<AttributeRecord> accepted_records;
  for (const auto& e : entries) {
    if (e.accepted && e.attributes) accepted_records.push_back(*e.attributes);
  }

  if (accepted_records.size() >= 2) {
    CorpusBounds bounds = compute_corpus_bounds(accepted_records);
    size_t index = 0;
    for (auto& e : entries) {
      ++index;
      if (!e.accepted || !e.attributes) continue;
      e.style_label = assign_label(*e.attributes, bounds);
      e.captions.style_caption = render_style_caption(
          *e.style_label, table, Rng::mix(cfg.seed, (uint64_t)index));
      ++report.labeled;
    }
  }

  for (auto& e : entries) {
    if (e.captions.face_static_caption && e.captions.face_dynamic_caption) {
      e.captions.face_combined_caption =
          combine_face_captions(*e.captions.face_static_caption,
                                *e.captions.face_dynamic_caption, combiner);
    }
  }

  report.total = (int)entries.size();
  for (const auto& e : entries) {
    e.accepted ? ++report.accepted : ++report.rejected;
  }

  write_manifest(cfg.output_manifest, entries);
  return report;
}

}  // namespace data
}  // namespace flespeech
