// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/data/gate.h"

#include <sstream>

#include "flespeech/common/error.h"
#include "flespeech/data/attributes.h"

namespace flespeech {
namespace data {

namespace {

constexpr double kMinSnr = 0.6;
constexpr double kMinDnsmos = 2.6;
constexpr int kMinWords = 3;

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

GateDecision quality_gate(const ManifestEntry& entry) {
  if (!entry.snr_score.has_value()) {
    throw MissingScoreError("entry has no snr_score: " + entry.audio_path);
  }
  if (!entry.dnsmos.has_value()) {
    throw MissingScoreError("entry has no dnsmos: " + entry.audio_path);
  }
  GateDecision d;
  if (!(*entry.snr_score > kMinSnr)) {
    d.reasons.push_back("snr " + fmt(*entry.snr_score) + " not above " +
                        fmt(kMinSnr));
  }
  if (!(*entry.dnsmos > kMinDnsmos)) {
    d.reasons.push_back("dnsmos " + fmt(*entry.dnsmos) + " not above " +
                        fmt(kMinDnsmos));
  }
  const int words = count_words(entry.transcript);
  if (words < kMinWords) {
    d.reasons.push_back("transcript has " + std::to_string(words) +
                        " words, need at least " + std::to_string(kMinWords));
  }
  d.accepted = d.reasons.empty();
  return d;
}

GateDecision quality_gate(ManifestEntry& entry, const AudioClip& audio,
                          clients::ScoreClient& snr_scorer,
                          clients::ScoreClient& dnsmos_scorer) {
  if (!entry.snr_score.has_value()) entry.snr_score = snr_scorer.score(audio);
  if (!entry.dnsmos.has_value()) entry.dnsmos = dnsmos_scorer.score(audio);
  return quality_gate(const_cast<const ManifestEntry&>(entry));
}

}  // namespace data
}  // namespace flespeech
