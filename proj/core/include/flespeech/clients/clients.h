// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_CLIENTS_CLIENTS_H_
#define FLESPEECH_CLIENTS_CLIENTS_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flespeech/audio/audio_clip.h"
#include "flespeech/media/image.h"
#include "flespeech/nn/tensor.h"

namespace flespeech {
namespace clients {

// External pretrained models are out of scope; each appears here as a small
// interface with a deterministic offline stand-in used by the test suite and
// a remote HTTP implementation for real deployments (see remote.h).

class TextEncoderClient {
 public:
  virtual ~TextEncoderClient() = default;
  // One embedding row per sub-token, [n, dim()].
  virtual nn::Tensor embed(const std::string& text) = 0;
  virtual int dim() const = 0;
};

// Hash-bag stand-in: every token maps to a fixed unit vector derived from
// its hash. Synonym phrases can be registered with a canonical token so
// paraphrases of the same style label share an embedding, which is the
// property a real pretrained text encoder would provide.
class OfflineTextEncoder : public TextEncoderClient {
 public:
  explicit OfflineTextEncoder(int dim = 32) : dim_(dim) {}

  void add_canonical_phrase(const std::string& phrase,
                            const std::string& canonical);

  nn::Tensor embed(const std::string& text) override;
  int dim() const override { return dim_; }

 private:
  int dim_;
  // normalized phrase -> canonical token, matched longest-first
  std::map<std::string, std::string> canonical_;
};

class VisionEncoderClient {
 public:
  virtual ~VisionEncoderClient() = default;
  virtual nn::Tensor embed_image(const Image& image) = 0;  // [n, dim()]
  virtual nn::Tensor embed_video(const std::vector<Image>& frames) = 0;
  virtual int dim() const = 0;
};

// Mean-pooled pixel-patch features on a fixed grid, pushed through a frozen
// seeded projection. Crops of the same synthetic face stay close; different
// faces separate by their color statistics.
class OfflineVisionEncoder : public VisionEncoderClient {
 public:
  explicit OfflineVisionEncoder(int dim = 32, int grid = 4);

  nn::Tensor embed_image(const Image& image) override;
  nn::Tensor embed_video(const std::vector<Image>& frames) override;
  int dim() const override { return dim_; }

 private:
  int dim_;
  int grid_;
  nn::Tensor projection_;  // [3, dim]
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string combine_captions(const std::string& static_caption,
                                       const std::string& dynamic_caption) = 0;
};

// Deterministic template join used everywhere in tests.
class OfflineCaptionCombiner : public LlmClient {
 public:
  std::string combine_captions(const std::string& static_caption,
                               const std::string& dynamic_caption) override;
};

class AsrClient {
 public:
  virtual ~AsrClient() = default;
  // Throws TranscriptUnavailable when no transcript can be produced.
  virtual std::string transcribe(const AudioClip& audio) = 0;
};

// Desk-scale path: the caller supplies the transcript up front.
class SuppliedTranscriptAsr : public AsrClient {
 public:
  SuppliedTranscriptAsr() = default;
  explicit SuppliedTranscriptAsr(std::string transcript)
      : transcript_(std::move(transcript)) {}

  std::string transcribe(const AudioClip& audio) override;

 private:
  std::optional<std::string> transcript_;
};

class ScoreClient {
 public:
  virtual ~ScoreClient() = default;
  virtual double score(const AudioClip& audio) = 0;
};

// Energy-contrast heuristic in (0, 1): ratio built from the loudest and
// quietest frame deciles. Clean tonal fixtures score high, noise-only low.
class OfflineSnrScorer : public ScoreClient {
 public:
  double score(const AudioClip& audio) override;
};

// Spectral-flatness heuristic mapped into the 1..5 range of perceptual
// quality scores. Tonal fixtures score high, white noise low.
class OfflineDnsmosScorer : public ScoreClient {
 public:
  double score(const AudioClip& audio) override;
};

}  // namespace clients
}  // namespace flespeech

#endif  // FLESPEECH_CLIENTS_CLIENTS_H_
