// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_DATA_LABELING_H_
#define FLESPEECH_DATA_LABELING_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flespeech/data/attributes.h"

namespace flespeech {
namespace data {

enum class Category { low, normal, high };

std::string category_name(Category c);
Category category_from_name(const std::string& name);

// Mean-plus/minus-one-standard-deviation split of one attribute over the
// corpus. Uses the population standard deviation.
struct IntervalBounds {
  double low_cut = 0.0;   // mu - sigma
  double high_cut = 0.0;  // mu + sigma
};

// Throws TooFewValues for fewer than two values.
IntervalBounds compute_interval_bounds(const std::vector<double>& values);

// Strictly below low_cut -> low, strictly above high_cut -> high, otherwise
// normal; both boundaries belong to normal.
Category assign_category(double value, const IntervalBounds& bounds);

// The three labeled acoustic attributes, keyed by the names used in the
// synonym table and manifests.
inline constexpr const char* kLabeledAttributes[3] = {"pitch", "rms",
                                                      "speech_rate"};

// Corpus-level bounds per attribute name.
struct CorpusBounds {
  std::map<std::string, IntervalBounds> by_attribute;
};

CorpusBounds compute_corpus_bounds(const std::vector<AttributeRecord>& records);

// Category per attribute plus pass-through gender/emotion.
struct StyleLabel {
  Category pitch = Category::normal;
  Category rms = Category::normal;
  Category speech_rate = Category::normal;
  std::optional<std::string> gender;
  std::optional<std::string> emotion;

  bool operator==(const StyleLabel& o) const {
    return pitch == o.pitch && rms == o.rms && speech_rate == o.speech_rate &&
           gender == o.gender && emotion == o.emotion;
  }
};

// Throws MissingBounds when a labeled attribute has no bounds entry.
StyleLabel assign_label(const AttributeRecord& record,
                        const CorpusBounds& bounds);

}  // namespace data
}  // namespace flespeech

#endif  // FLESPEECH_DATA_LABELING_H_
