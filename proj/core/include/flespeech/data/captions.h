// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_DATA_CAPTIONS_H_
#define FLESPEECH_DATA_CAPTIONS_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flespeech/clients/clients.h"
#include "flespeech/data/labeling.h"

namespace flespeech {
namespace data {

// Lowercase, punctuation to spaces, runs of whitespace collapsed. The
// matching alphabet for inverse synonym lookup.
std::string normalize_phrase(const std::string& text);

// Synonym phrases per (attribute, category), plus the inverse map used to
// parse captions back into labels. Loading validates that no two phrases
// normalize identically and that no phrase contains another as a
// whole-word subsequence, so inverse lookup is unambiguous.
struct SynonymTable {
  std::map<std::string, std::map<std::string, std::vector<std::string>>>
      entries;
  // normalized phrase -> (attribute, category)
  std::map<std::string, std::pair<std::string, std::string>> inverse;

  // JSON: {"pitch": {"low": ["a deep pitch", ...], ...}, ...}
  static SynonymTable from_json_text(const std::string& text);
  static SynonymTable load(const std::string& path);

  // Throws MissingSynonym when the cell is absent or empty.
  const std::vector<std::string>& phrases(const std::string& attribute,
                                          const std::string& category) const;
};

// One sentence naming every labeled attribute exactly once through a seeded
// synonym choice. Deterministic given (label, table, seed).
std::string render_style_caption(const StyleLabel& label,
                                 const SynonymTable& table,
                                 std::uint64_t seed);

// Inverse lookup. Throws EmptyCaption on an empty caption and
// MissingSynonym when any of pitch/rms/speech_rate goes unmentioned.
StyleLabel parse_style_caption(const std::string& caption,
                               const SynonymTable& table);

// Joins a static and dynamic face description through the given client.
// Throws EmptyCaption when either side is empty.
std::string combine_face_captions(const std::string& static_caption,
                                  const std::string& dynamic_caption,
                                  clients::LlmClient& client);

// Registers every synonym phrase under an (attribute, category) canonical
// token so paraphrases of the same label share an embedding in the offline
// text encoder.
void register_synonyms_with_encoder(const SynonymTable& table,
                                    clients::OfflineTextEncoder& encoder);

}  // namespace data
}  // namespace flespeech

#endif  // FLESPEECH_DATA_CAPTIONS_H_
