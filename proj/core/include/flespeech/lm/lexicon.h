// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_LM_LEXICON_H_
#define FLESPEECH_LM_LEXICON_H_

#include <map>
#include <string>
#include <vector>

namespace flespeech {
namespace lm {

struct PhonemeSequence {
  std::vector<int> ids;  // each in [0, phoneme_count)
};

// Pronunciation lexicon with a fixed phoneme inventory. Out-of-lexicon words
// fall back to per-character graphemes, so the inventory must include the
// single characters a-z and 0-9.
class Lexicon {
 public:
  static Lexicon load(const std::string& path);
  static Lexicon from_json_text(const std::string& text);

  int phoneme_count() const { return (int)inventory_.size(); }
  const std::vector<std::string>& phonemes() const { return inventory_; }
  int word_boundary_id() const { return wb_id_; }

  // -1 when the symbol is not in the inventory.
  int phoneme_id(const std::string& symbol) const;

  bool has_word(const std::string& word) const {
    return words_.count(word) > 0;
  }
  const std::vector<std::string>* pronunciation(const std::string& word) const;

 private:
  std::vector<std::string> inventory_;
  std::map<std::string, int> index_;
  std::map<std::string, std::vector<std::string>> words_;
  int wb_id_ = -1;
};

// Lowercases, maps punctuation to spaces, collapses whitespace.
std::string normalize_text(const std::string& text);

// Per-word pronunciations joined by the word-boundary symbol.
PhonemeSequence text_to_phonemes(const std::string& text, const Lexicon& lex);

}  // namespace lm
}  // namespace flespeech

#endif  // FLESPEECH_LM_LEXICON_H_
