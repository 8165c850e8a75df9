// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_CLIENTS_REMOTE_H_
#define FLESPEECH_CLIENTS_REMOTE_H_

#include <string>

#include "flespeech/clients/clients.h"

namespace flespeech {
namespace clients {

// HTTP JSON clients. Every call throws ClientUnavailable when the endpoint
// cannot be reached or answers with a non-200 status. These are deployment
// hooks; the test suite only exercises them against a local fixture server.

struct RemoteEndpoint {
  std::string host = "127.0.0.1";
  int port = 8080;
  int timeout_s = 5;
};

// POST /embed_text {"text": t} -> {"vectors": [[...], ...]}
class RemoteTextEncoder : public TextEncoderClient {
 public:
  RemoteTextEncoder(RemoteEndpoint endpoint, int dim)
      : endpoint_(std::move(endpoint)), dim_(dim) {}

  nn::Tensor embed(const std::string& text) override;
  int dim() const override { return dim_; }

 private:
  RemoteEndpoint endpoint_;
  int dim_;
};

// POST /combine {"static": s, "dynamic": d} -> {"caption": c}
class RemoteCaptionCombiner : public LlmClient {
 public:
  explicit RemoteCaptionCombiner(RemoteEndpoint endpoint)
      : endpoint_(std::move(endpoint)) {}

  std::string combine_captions(const std::string& static_caption,
                               const std::string& dynamic_caption) override;

 private:
  RemoteEndpoint endpoint_;
};

// POST /transcribe {"sample_rate": r, "samples": [...]} -> {"transcript": t}
class RemoteAsrClient : public AsrClient {
 public:
  explicit RemoteAsrClient(RemoteEndpoint endpoint)
      : endpoint_(std::move(endpoint)) {}

  std::string transcribe(const AudioClip& audio) override;

 private:
  RemoteEndpoint endpoint_;
};

// POST /score {"kind": k, "sample_rate": r, "samples": [...]} -> {"score": x}
class RemoteScoreClient : public ScoreClient {
 public:
  RemoteScoreClient(RemoteEndpoint endpoint, std::string kind)
      : endpoint_(std::move(endpoint)), kind_(std::move(kind)) {}

  double score(const AudioClip& audio) override;

 private:
  RemoteEndpoint endpoint_;
  std::string kind_;
};

}  // namespace clients
}  // namespace flespeech

#endif  // FLESPEECH_CLIENTS_REMOTE_H_
