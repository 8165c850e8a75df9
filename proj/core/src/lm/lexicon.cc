// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/lm/lexicon.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "flespeech/common/error.h"

namespace flespeech {
namespace lm {

namespace {

constexpr const char* kWordBoundary = "<wb>";

std::vector<std::string> split_words(const std::string& normalized) {
  std::vector<std::string> words;
  std::istringstream in(normalized);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

Lexicon Lexicon::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Lexicon lex;
  for (const auto& p : j.at("phonemes")) {
    const std::string sym = p.get<std::string>();
    if (lex.index_.count(sym) > 0) {
      throw IoError("duplicate phoneme in inventory: " + sym);
    }
    lex.index_[sym] = (int)lex.inventory_.size();
    lex.inventory_.push_back(sym);
  }
  auto wb = lex.index_.find(kWordBoundary);
  if (wb == lex.index_.end()) {
    throw IoError("lexicon inventory lacks the word-boundary symbol");
  }
  lex.wb_id_ = wb->second;
  for (const auto& [word, prons] : j.at("words").items()) {
    std::vector<std::string> seq;
    for (const auto& p : prons) {
      const std::string sym = p.get<std::string>();
      if (lex.index_.count(sym) == 0) {
        throw IoError("word '" + word + "' uses unknown phoneme " + sym);
      }
      seq.push_back(sym);
    }
    lex.words_[word] = std::move(seq);
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open lexicon " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return from_json_text(buf.str());
}

int Lexicon::phoneme_id(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? -1 : it->second;
}

const std::vector<std::string>* Lexicon::pronunciation(
    const std::string& word) const {
  auto it = words_.find(word);
  return it == words_.end() ? nullptr : &it->second;
}

std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool last_space = true;
  for (char c : text) {
    unsigned char u = (unsigned char)c;
    if (std::isalnum(u)) {
      out.push_back((char)std::tolower(u));
      last_space = false;
    } else if (!last_space) {
      out.push_back(' ');
      last_space = true;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

PhonemeSequence text_to_phonemes(const std::string& text, const Lexicon& lex) {
  const std::string normalized = normalize_text(text);
  const std::vector<std::string> words = split_words(normalized);
  if (words.empty()) throw EmptyTextError("no words after normalization");

  PhonemeSequence seq;
  bool first = true;
  for (const auto& word : words) {
    std::vector<int> ids;
    if (const auto* pron = lex.pronunciation(word)) {
      for (const auto& sym : *pron) ids.push_back(lex.phoneme_id(sym));
    } else {
      for (char c : word) {
        const int id = lex.phoneme_id(std::string(1, c));
        if (id >= 0) ids.push_back(id);
      }
    }
    if (ids.empty()) continue;
    if (!first) seq.ids.push_back(lex.word_boundary_id());
    seq.ids.insert(seq.ids.end(), ids.begin(), ids.end());
    first = false;
  }
  if (seq.ids.empty()) throw EmptyTextError("no pronounceable words");
  return seq;
}

}  // namespace lm
}  // namespace flespeech
