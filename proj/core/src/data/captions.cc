// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/data/captions.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include "flespeech/common/error.h"
#include "flespeech/common/rng.h"

#include "json.hpp"

namespace flespeech {
namespace data {

std::string normalize_phrase(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool last_space = true;
  for (char c : text) {
    unsigned char u = (unsigned char)c;
    char mapped = std::isalnum(u) ? (char)std::tolower(u) : ' ';
    if (mapped == ' ') {
      if (!last_space) out.push_back(' ');
      last_space = true;
    } else {
      out.push_back(mapped);
      last_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

SynonymTable SynonymTable::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SynonymTable t;
  for (auto it = j.begin(); it != j.end(); ++it) {
    for (auto cit = it.value().begin(); cit != it.value().end(); ++cit) {
      std::vector<std::string>& list = t.entries[it.key()][cit.key()];
      for (const auto& p : cit.value()) {
        list.push_back(p.get<std::string>());
      }
    }
  }
  for (const auto& [attr, cats] : t.entries) {
    for (const auto& [cat, list] : cats) {
      for (const auto& phrase : list) {
        std::string norm = normalize_phrase(phrase);
        if (norm.empty()) {
          throw MissingSynonymError("empty synonym under " + attr + "/" + cat);
        }
        auto [pos, inserted] = t.inverse.emplace(norm, std::make_pair(attr, cat));
        if (!inserted) {
          throw MissingSynonymError("synonym '" + phrase +
                                    "' appears in more than one cell");
        }
      }
    }
  }
  // Whole-word containment between phrases would make the longer phrase
  // parse as two labels at once.
  for (const auto& [a, ignored_a] : t.inverse) {
    (void)ignored_a;
    const std::string padded_a = " " + a + " ";
    for (const auto& [b, ignored_b] : t.inverse) {
      (void)ignored_b;
      if (a == b) continue;
      if (padded_a.find(" " + b + " ") != std::string::npos) {
        throw MissingSynonymError("synonym '" + b + "' is contained in '" + a +
                                  "'");
      }
    }
  }
  return t;
}

SynonymTable SynonymTable::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open synonym table " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str());
}

const std::vector<std::string>& SynonymTable::phrases(
    const std::string& attribute, const std::string& category) const {
  auto ait = entries.find(attribute);
  if (ait != entries.end()) {
    auto cit = ait->second.find(category);
    if (cit != ait->second.end() && !cit->second.empty()) return cit->second;
  }
  throw MissingSynonymError("no synonyms for " + attribute + "/" + category);
}

namespace {

// Sentence frames; the phrase list is inserted verbatim so inverse lookup
// stays template-agnostic. Frame words must not collide with table phrases.
const char* kTemplates[] = {
    "The speaker has %s.",
    "A voice with %s.",
    "This recording carries %s.",
};

std::string join_phrases(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += (i + 1 == parts.size()) ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string render_style_caption(const StyleLabel& label,
                                 const SynonymTable& table,
                                 std::uint64_t seed) {
  Rng rng(seed);
  auto pick = [&rng, &table](const std::string& attr,
                             const std::string& cat) -> std::string {
    const auto& list = table.phrases(attr, cat);
    return list[(size_t)rng.uniform_int((uint64_t)list.size())];
  };

  std::vector<std::string> parts;
  if (label.gender.has_value()) parts.push_back(pick("gender", *label.gender));
  parts.push_back(pick("pitch", category_name(label.pitch)));
  parts.push_back(pick("rms", category_name(label.rms)));
  parts.push_back(pick("speech_rate", category_name(label.speech_rate)));
  if (label.emotion.has_value()) {
    parts.push_back(pick("emotion", *label.emotion));
  }

  const size_t n_templates = sizeof(kTemplates) / sizeof(kTemplates[0]);
  const std::string body = join_phrases(parts);
  std::string tpl = kTemplates[(size_t)rng.uniform_int((uint64_t)n_templates)];
  const size_t slot = tpl.find("%s");
  return tpl.substr(0, slot) + body + tpl.substr(slot + 2);
}

StyleLabel parse_style_caption(const std::string& caption,
                               const SynonymTable& table) {
  if (caption.empty()) throw EmptyCaptionError("cannot parse empty caption");
  const std::string padded = " " + normalize_phrase(caption) + " ";

  StyleLabel label;
  bool got_pitch = false, got_rms = false, got_rate = false;
  for (const auto& [phrase, cell] : table.inverse) {
    if (padded.find(" " + phrase + " ") == std::string::npos) continue;
    const auto& [attr, cat] = cell;
    if (attr == "pitch") {
      if (got_pitch && label.pitch != category_from_name(cat)) {
        throw MissingSynonymError("caption names two pitch categories");
      }
      label.pitch = category_from_name(cat);
      got_pitch = true;
    } else if (attr == "rms") {
      if (got_rms && label.rms != category_from_name(cat)) {
        throw MissingSynonymError("caption names two rms categories");
      }
      label.rms = category_from_name(cat);
      got_rms = true;
    } else if (attr == "speech_rate") {
      if (got_rate && label.speech_rate != category_from_name(cat)) {
        throw MissingSynonymError("caption names two speech_rate categories");
      }
      label.speech_rate = category_from_name(cat);
      got_rate = true;
    } else if (attr == "gender") {
      label.gender = cat;
    } else if (attr == "emotion") {
      label.emotion = cat;
    }
  }
  if (!got_pitch) throw MissingSynonymError("caption does not mention pitch");
  if (!got_rms) throw MissingSynonymError("caption does not mention rms");
  if (!got_rate) {
    throw MissingSynonymError("caption does not mention speech_rate");
  }
  return label;
}

std::string combine_face_captions(const std::string& static_caption,
                                  const std::string& dynamic_caption,
                                  clients::LlmClient& client) {
  if (static_caption.empty()) {
    throw EmptyCaptionError("static face caption is empty");
  }
  if (dynamic_caption.empty()) {
    throw EmptyCaptionError("dynamic face caption is empty");
  }
  return client.combine_captions(static_caption, dynamic_caption);
}

void register_synonyms_with_encoder(const SynonymTable& table,
                                    clients::OfflineTextEncoder& encoder) {
  for (const auto& [phrase, cell] : table.inverse) {
    encoder.add_canonical_phrase(phrase, cell.first + "_" + cell.second);
  }
}

}  // namespace data
}  // namespace flespeech
