// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_DATA_GATE_H_
#define FLESPEECH_DATA_GATE_H_

#include <string>
#include <vector>

#include "flespeech/audio/audio_clip.h"
#include "flespeech/clients/clients.h"
#include "flespeech/data/manifest.h"

namespace flespeech {
namespace data {

struct GateDecision {
  bool accepted = false;
  std::vector<std::string> reasons;  // empty when accepted
};

// Accept iff snr > 0.6 AND dnsmos > 2.6 AND word count >= 3, all strict on
// the score side. Throws MissingScore when either score is unset.
GateDecision quality_gate(const ManifestEntry& entry);

// Fills missing scores through the clients, then gates.
GateDecision quality_gate(ManifestEntry& entry, const AudioClip& audio,
                          clients::ScoreClient& snr_scorer,
                          clients::ScoreClient& dnsmos_scorer);

}  // namespace data
}  // namespace flespeech

#endif  // FLESPEECH_DATA_GATE_H_
