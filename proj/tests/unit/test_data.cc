// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "flespeech/audio/wav.h"
#include "flespeech/clients/clients.h"
#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"
#include "flespeech/data/attributes.h"
#include "flespeech/data/captions.h"
#include "flespeech/data/corpus.h"
#include "flespeech/data/gate.h"
#include "flespeech/data/labeling.h"
#include "flespeech/data/manifest.h"
#include "test_util.h"
#include "toy_corpus.h"
#include "toy_system.h"

using namespace flespeech;

namespace {

data::ManifestEntry gate_entry(double snr, double dnsmos,
                               const std::string& transcript) {
  data::ManifestEntry e;
  e.audio_path = "x.wav";
  e.transcript = transcript;
  e.snr_score = snr;
  e.dnsmos = dnsmos;
  return e;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("interval bounds equal mean plus/minus population sigma") {
  Rng rng(131);
  std::vector<double> values(1000);
  for (auto& v : values) v = rng.uniform(-10.0, 10.0);

  double mu = 0.0;
  for (double v : values) mu += v;
  mu /= (double)values.size();
  double var = 0.0;
  for (double v : values) var += (v - mu) * (v - mu);
  var /= (double)values.size();
  const double sigma = std::sqrt(var);

  const auto bounds = data::compute_interval_bounds(values);
  CHECK(testing::rel_err(bounds.low_cut, mu - sigma) < 1e-12);
  CHECK(testing::rel_err(bounds.high_cut, mu + sigma) < 1e-12);

  // Category assignment agrees with the arithmetic oracle on 1000 probes.
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-15.0, 15.0);
    data::Category want = data::Category::normal;
    if (v < bounds.low_cut) want = data::Category::low;
    if (v > bounds.high_cut) want = data::Category::high;
    CHECK(data::assign_category(v, bounds) == want);
  }

  CHECK_THROWS_AS(data::compute_interval_bounds({}), TooFewValuesError);
  CHECK_THROWS_AS(data::compute_interval_bounds({1.0}), TooFewValuesError);
}

TEST_CASE("both interval boundaries label as normal") {
  // {0, 0, 2, 2}: mu = 1, sigma = 1, cuts at 0 and 2 exactly.
  const auto bounds = data::compute_interval_bounds({0.0, 0.0, 2.0, 2.0});
  CHECK(bounds.low_cut == doctest::Approx(0.0));
  CHECK(bounds.high_cut == doctest::Approx(2.0));
  CHECK(data::assign_category(0.0, bounds) == data::Category::normal);
  CHECK(data::assign_category(2.0, bounds) == data::Category::normal);
  CHECK(data::assign_category(-1e-9, bounds) == data::Category::low);
  CHECK(data::assign_category(2.0 + 1e-9, bounds) == data::Category::high);
  CHECK(data::assign_category(1.0, bounds) == data::Category::normal);
}

TEST_CASE("corpus bounds cover exactly the labeled attributes") {
  std::vector<data::AttributeRecord> records(3);
  records[0].pitch_mean_hz = 100;
  records[1].pitch_mean_hz = 200;
  records[2].pitch_mean_hz = 300;
  records[0].rms_mean = 0.1;
  records[1].rms_mean = 0.2;
  records[2].rms_mean = 0.3;
  records[0].speech_rate = 2.0;
  records[1].speech_rate = 4.0;
  records[2].speech_rate = 6.0;

  const auto bounds = data::compute_corpus_bounds(records);
  REQUIRE(bounds.by_attribute.size() == 3);
  for (const char* attr : data::kLabeledAttributes) {
    REQUIRE(bounds.by_attribute.count(attr) == 1);
  }
  CHECK(bounds.by_attribute.at("pitch").low_cut ==
        doctest::Approx(200.0 - std::sqrt(20000.0 / 3.0)));

  data::AttributeRecord probe;
  probe.pitch_mean_hz = 500;   // far above
  probe.rms_mean = 0.2;        // middle
  probe.speech_rate = 0.1;     // far below
  probe.gender = "female";
  const auto label = data::assign_label(probe, bounds);
  CHECK(label.pitch == data::Category::high);
  CHECK(label.rms == data::Category::normal);
  CHECK(label.speech_rate == data::Category::low);
  CHECK(label.gender == std::optional<std::string>("female"));
  CHECK(!label.emotion.has_value());

  data::CorpusBounds incomplete;
  incomplete.by_attribute["pitch"] = bounds.by_attribute.at("pitch");
  CHECK_THROWS_AS(data::assign_label(probe, incomplete), MissingBoundsError);
}

TEST_CASE("category names round-trip") {
  for (auto c : {data::Category::low, data::Category::normal,
                 data::Category::high}) {
    CHECK(data::category_from_name(data::category_name(c)) == c);
  }
  CHECK_THROWS_AS(data::category_from_name("medium"), Error);
}

TEST_CASE("the quality gate is strict on scores and counts words") {
  // Exact thresholds fail: the comparison is strictly-greater.
  CHECK(!data::quality_gate(gate_entry(0.6, 4.0, "one two three")).accepted);
  CHECK(!data::quality_gate(gate_entry(0.9, 2.6, "one two three")).accepted);
  CHECK(data::quality_gate(
            gate_entry(0.6 + 1e-9, 2.6 + 1e-9, "one two three"))
            .accepted);
  CHECK(!data::quality_gate(gate_entry(0.9, 4.0, "one two")).accepted);
  CHECK(data::quality_gate(gate_entry(0.9, 4.0, "one two three")).accepted);

  // Every failed criterion is named; accepted entries carry no reasons.
  const auto multi = data::quality_gate(gate_entry(0.1, 1.0, "hi"));
  CHECK(multi.reasons.size() == 3);
  const auto ok = data::quality_gate(gate_entry(0.9, 4.0, "a b c d"));
  CHECK(ok.accepted);
  CHECK(ok.reasons.empty());

  data::ManifestEntry unscored;
  unscored.transcript = "one two three";
  unscored.dnsmos = 4.0;
  CHECK_THROWS_AS(data::quality_gate(unscored), MissingScoreError);

  CHECK(data::count_words("  a \t b\nc  ") == 3);
  CHECK(data::count_words("") == 0);
  CHECK(data::count_words("word") == 1);
}

TEST_CASE("the scoring gate fills missing scores through the clients") {
  clients::OfflineSnrScorer snr;
  clients::OfflineDnsmosScorer dnsmos;
  // Burst fixture: tonal and contrasty, passes both offline heuristics.
  const AudioClip good = testing::make_burst_clip(220.0, 5, 0.15, 0.1);
  data::ManifestEntry e;
  e.transcript = "one two three four five";
  const auto decision = data::quality_gate(e, good, snr, dnsmos);
  CHECK(decision.accepted);
  REQUIRE(e.snr_score.has_value());
  REQUIRE(e.dnsmos.has_value());
  CHECK(*e.snr_score > 0.6);
  CHECK(*e.dnsmos > 2.6);

  // Pure noise fails the perceptual-quality heuristic.
  const AudioClip bad = testing::make_noise(1.0, 3, 0.5);
  data::ManifestEntry ne;
  ne.transcript = "one two three";
  const auto nd = data::quality_gate(ne, bad, snr, dnsmos);
  CHECK(!nd.accepted);
  CHECK(!nd.reasons.empty());
}

TEST_CASE("attribute extraction measures pitch, energy, and rate") {
  // 5 words over exactly 2 s of audio.
  AudioClip clip = testing::make_burst_clip(200.0, 5, 0.2, 0.1, 0.5);
  clip.samples.resize(2 * 16000, 0.0);
  const auto rec =
      data::extract_attributes(clip, "alpha beta gamma delta epsilon");
  CHECK(std::abs(rec.pitch_mean_hz - 200.0) / 200.0 < 0.05);
  CHECK(rec.speech_rate == doctest::Approx(2.5));
  CHECK(rec.rms_mean > 0.0);
  CHECK(rec.pitch_variance >= 0.0);
  CHECK(!rec.gender.has_value());

  AudioClip empty;
  CHECK_THROWS_AS(data::extract_attributes(empty, "hello world"),
                  EmptyAudioError);
  AudioClip silence;
  silence.samples.assign(16000, 0.0);
  CHECK_THROWS_AS(data::extract_attributes(silence, "hello world"),
                  NoVoicedFramesError);
}

TEST_CASE("style captions round-trip for every label and many seeds") {
  const auto table =
      data::SynonymTable::load(testing::assets_dir() + "/style_synonyms.json");
  const data::Category cats[] = {data::Category::low, data::Category::normal,
                                 data::Category::high};
  int rendered = 0;
  for (auto p : cats) {
    for (auto r : cats) {
      for (auto s : cats) {
        data::StyleLabel label;
        label.pitch = p;
        label.rms = r;
        label.speech_rate = s;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
          const std::string caption =
              data::render_style_caption(label, table, seed);
          const auto back = data::parse_style_caption(caption, table);
          CHECK(back == label);
          ++rendered;
        }
      }
    }
  }
  CHECK(rendered == 27 * 5);

  // Gender and emotion ride along when present.
  data::StyleLabel full;
  full.pitch = data::Category::high;
  full.gender = "female";
  full.emotion = "happy";
  const auto back =
      data::parse_style_caption(data::render_style_caption(full, table, 3),
                                table);
  CHECK(back == full);

  // Rendering is deterministic per seed and varies across seeds.
  data::StyleLabel l;
  const auto c0 = data::render_style_caption(l, table, 0);
  CHECK(c0 == data::render_style_caption(l, table, 0));
  bool any_differs = false;
  for (std::uint64_t seed = 1; seed < 8; ++seed) {
    any_differs =
        any_differs || data::render_style_caption(l, table, seed) != c0;
  }
  CHECK(any_differs);
}

TEST_CASE("caption parsing rejects ambiguity and omissions") {
  const auto table =
      data::SynonymTable::load(testing::assets_dir() + "/style_synonyms.json");
  CHECK_THROWS_AS(data::parse_style_caption("", table), EmptyCaptionError);
  // Missing speech rate mention.
  CHECK_THROWS_AS(
      data::parse_style_caption("A voice with a deep pitch and a soft volume.",
                                table),
      MissingSynonymError);
  // Two contradictory pitch categories.
  CHECK_THROWS_AS(
      data::parse_style_caption(
          "The speaker has a deep pitch, a high pitch, a soft volume and "
          "a slow tempo.",
          table),
      MissingSynonymError);

  CHECK_THROWS_AS(table.phrases("pitch", "extreme"), MissingSynonymError);
  CHECK_THROWS_AS(table.phrases("sparkle", "low"), MissingSynonymError);
}

TEST_CASE("synonym tables reject duplicate or nested phrases") {
  CHECK_THROWS_AS(data::SynonymTable::from_json_text(R"({
    "pitch": {"low": ["deep sound"], "high": ["deep sound"]}
  })"),
                  MissingSynonymError);
  // "a deep sound" contains "deep" as a whole word.
  CHECK_THROWS_AS(data::SynonymTable::from_json_text(R"({
    "pitch": {"low": ["deep", "a deep sound"]}
  })"),
                  MissingSynonymError);
  CHECK(data::normalize_phrase("  A   Deep,  SOUND!! ") == "a deep sound");
}

TEST_CASE("face captions combine through the llm client") {
  clients::OfflineCaptionCombiner combiner;
  const std::string joined =
      data::combine_face_captions("a round face", "slow blinking", combiner);
  CHECK(joined == "a round face. While speaking, slow blinking.");
  CHECK_THROWS_AS(data::combine_face_captions("", "x", combiner),
                  EmptyCaptionError);
  CHECK_THROWS_AS(data::combine_face_captions("x", "", combiner),
                  EmptyCaptionError);
}

TEST_CASE("manifest entries survive a json round-trip") {
  data::ManifestEntry e;
  e.audio_path = "/data/a.wav";
  e.transcript = "the quick brown fox";
  e.duration_s = 1.25;
  e.snr_score = 0.88;
  e.dnsmos = 3.4;
  data::AttributeRecord rec;
  rec.pitch_mean_hz = 182.5;
  rec.pitch_variance = 11.0;
  rec.rms_mean = 0.21;
  rec.speech_rate = 3.2;
  rec.gender = "male";
  e.attributes = rec;
  data::StyleLabel label;
  label.pitch = data::Category::high;
  label.gender = "male";
  e.style_label = label;
  e.captions.style_caption = "The speaker has a high pitch.";
  e.captions.face_static_caption = "a round face";
  e.face_image_path = "/data/a.face.ppm";
  e.accepted = true;

  const std::string line = data::manifest_entry_to_json(e);
  CHECK(line.find('\n') == std::string::npos);
  const auto back = data::manifest_entry_from_json(line);
  CHECK(back.audio_path == e.audio_path);
  CHECK(back.transcript == e.transcript);
  CHECK(back.duration_s == doctest::Approx(e.duration_s));
  CHECK(back.snr_score == e.snr_score);
  CHECK(back.dnsmos == e.dnsmos);
  REQUIRE(back.attributes.has_value());
  CHECK(back.attributes->pitch_mean_hz == doctest::Approx(182.5));
  CHECK(back.attributes->gender == std::optional<std::string>("male"));
  REQUIRE(back.style_label.has_value());
  CHECK(*back.style_label == label);
  CHECK(back.captions.style_caption == e.captions.style_caption);
  CHECK(back.captions.face_static_caption == e.captions.face_static_caption);
  CHECK(!back.captions.face_dynamic_caption.has_value());
  CHECK(back.face_image_path == e.face_image_path);
  CHECK(back.accepted);

  // Rejected entries keep their reasons.
  data::ManifestEntry r;
  r.audio_path = "/data/b.wav";
  r.reject_reasons = {"snr 0.20 <= 0.60", "only 1 word(s)"};
  const auto rb = data::manifest_entry_from_json(
      data::manifest_entry_to_json(r));
  CHECK(!rb.accepted);
  CHECK(rb.reject_reasons == r.reject_reasons);

  testing::TempDir tmp("data_manifest");
  data::write_manifest(tmp.file("m.jsonl"), {e, r});
  const auto all = data::read_manifest(tmp.file("m.jsonl"));
  REQUIRE(all.size() == 2);
  CHECK(all[0].audio_path == e.audio_path);
  CHECK(all[1].reject_reasons == r.reject_reasons);
  CHECK_THROWS_AS(data::read_manifest(tmp.file("none.jsonl")), IoError);
}

TEST_CASE("corpus builds label, caption, and gate every clip") {
  testing::TempDir tmp("data_corpus");
  testing::ToyCorpusOptions opt;
  opt.speakers = 3;
  opt.clips_per_speaker = 2;
  const auto corpus = testing::write_toy_corpus(tmp.file("c"), opt);

  // One junk clip that must be rejected by the gate.
  {
    const AudioClip noise = testing::make_noise(1.0, 42, 0.5);
    write_wav(tmp.file("c/noise000.wav"), noise);
    std::ofstream(tmp.file("c/noise000.txt")) << "short bad clip\n";
  }

  data::BuildConfig cfg;
  cfg.input_dir = tmp.file("c");
  cfg.output_manifest = tmp.file("m.jsonl");
  cfg.synonyms_path = testing::assets_dir() + "/style_synonyms.json";
  cfg.seed = 5;
  const auto report = data::build_corpus_manifest(cfg);
  CHECK(report.total == 7);
  CHECK(report.accepted == 6);
  CHECK(report.rejected == 1);
  CHECK(report.labeled == 6);

  const auto entries = data::read_manifest(tmp.file("m.jsonl"));
  REQUIRE(entries.size() == 7);
  const auto table = data::SynonymTable::load(cfg.synonyms_path);
  int accepted = 0;
  for (const auto& e : entries) {
    if (!e.accepted) {
      CHECK(!e.reject_reasons.empty());
      continue;
    }
    ++accepted;
    REQUIRE(e.attributes.has_value());
    REQUIRE(e.style_label.has_value());
    CHECK(!e.captions.style_caption.empty());
    // The stored caption parses back to the stored label.
    CHECK(data::parse_style_caption(e.captions.style_caption, table) ==
          *e.style_label);
    CHECK(e.duration_s > 0.0);
    // Face sidecars flow through.
    REQUIRE(e.face_image_path.has_value());
    REQUIRE(e.captions.face_combined_caption.has_value());
    CHECK(e.captions.face_combined_caption->find("While speaking") !=
          std::string::npos);
  }
  CHECK(accepted == 6);

  // Labeling needs at least two accepted clips; with every clip rejected
  // the build still writes a manifest, just unlabeled.
  testing::TempDir tiny("data_corpus_tiny");
  write_wav(tiny.file("only.wav"), testing::make_noise(0.8, 1, 0.4));
  std::ofstream(tiny.file("only.txt")) << "too noisy to keep\n";
  data::BuildConfig tiny_cfg;
  tiny_cfg.input_dir = tiny.str();
  tiny_cfg.output_manifest = tiny.file("m.jsonl");
  tiny_cfg.synonyms_path = cfg.synonyms_path;
  const auto tiny_report = data::build_corpus_manifest(tiny_cfg);
  CHECK(tiny_report.total == 1);
  CHECK(tiny_report.labeled == 0);

  data::BuildConfig empty_cfg;
  empty_cfg.input_dir = tiny.file("does_not_exist");
  empty_cfg.output_manifest = tiny.file("m2.jsonl");
  empty_cfg.synonyms_path = cfg.synonyms_path;
  CHECK_THROWS_AS(data::build_corpus_manifest(empty_cfg), EmptyInputError);
}

}  // TEST_SUITE("data")
