// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/data/labeling.h"

#include <cmath>

#include "flespeech/common/error.h"

namespace flespeech {
namespace data {

std::string category_name(Category c) {
  switch (c) {
    case Category::low:
      return "low";
    case Category::normal:
      return "normal";
    case Category::high:
      return "high";
  }
  return "normal";
}

Category category_from_name(const std::string& name) {
  if (name == "low") return Category::low;
  if (name == "normal") return Category::normal;
  if (name == "high") return Category::high;
  throw MissingBoundsError("unknown category name: " + name);
}

IntervalBounds compute_interval_bounds(const std::vector<double>& values) {
  if (values.size() < 2) {
    throw TooFewValuesError("interval bounds need at least two values");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mu = sum / (double)values.size();
  double sq = 0.0;
  for (double v : values) sq += (v - mu) * (v - mu);
  const double sigma = std::sqrt(sq / (double)values.size());
  return IntervalBounds{mu - sigma, mu + sigma};
}

Category assign_category(double value, const IntervalBounds& bounds) {
  if (value < bounds.low_cut) return Category::low;
  if (value > bounds.high_cut) return Category::high;
  return Category::normal;
}

CorpusBounds compute_corpus_bounds(
    const std::vector<AttributeRecord>& records) {
  std::vector<double> pitch, rms, rate;
  pitch.reserve(records.size());
  rms.reserve(records.size());
  rate.reserve(records.size());
  for (const auto& r : records) {
    pitch.push_back(r.pitch_mean_hz);
    rms.push_back(r.rms_mean);
    rate.push_back(r.speech_rate);
  }
  CorpusBounds b;
  b.by_attribute["pitch"] = compute_interval_bounds(pitch);
  b.by_attribute["rms"] = compute_interval_bounds(rms);
  b.by_attribute["speech_rate"] = compute_interval_bounds(rate);
  return b;
}

namespace {

const IntervalBounds& bounds_for(const CorpusBounds& bounds,
                                 const std::string& attribute) {
  auto it = bounds.by_attribute.find(attribute);
  if (it == bounds.by_attribute.end()) {
    throw MissingBoundsError("no interval bounds for " + attribute);
  }
  return it->second;
}

}  // namespace

StyleLabel assign_label(const AttributeRecord& record,
                        const CorpusBounds& bounds) {
  StyleLabel label;
  label.pitch = assign_category(record.pitch_mean_hz, bounds_for(bounds, "pitch"));
  label.rms = assign_category(record.rms_mean, bounds_for(bounds, "rms"));
  label.speech_rate =
      assign_category(record.speech_rate, bounds_for(bounds, "speech_rate"));
  label.gender = record.gender;
  label.emotion = record.emotion;
  return label;
}

}  // namespace data
}  // namespace flespeech
