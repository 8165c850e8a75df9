// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/clients/remote.h"

#include "httplib.h"
#include "json.hpp"

#include "flespeech/common/error.h"

namespace flespeech {
namespace clients {

namespace {

using nlohmann::json;

json post_json(const RemoteEndpoint& ep, const std::string& path,
               const json& body) {
  httplib::Client client(ep.host, ep.port);
  client.set_connection_timeout(ep.timeout_s);
  client.set_read_timeout(ep.timeout_s);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res || res->status != 200) {
    throw ClientUnavailableError("endpoint " + ep.host + ":" +
                                 std::to_string(ep.port) + path +
                                 " unreachable or failed");
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw ClientUnavailableError(std::string("malformed response: ") +
                                 e.what());
  }
}

json audio_body(const AudioClip& audio) {
  json body;
  body["sample_rate"] = audio.sample_rate;
  body["samples"] = audio.samples;
  return body;
}

}  // namespace

nn::Tensor RemoteTextEncoder::embed(const std::string& text) {
  if (text.empty()) throw EmptyTextError("text prompt is empty");
  json body;
  body["text"] = text;
  json res = post_json(endpoint_, "/embed_text", body);
  const auto& vectors = res.at("vectors");
  if (vectors.empty()) {
    throw ClientUnavailableError("encoder returned no vectors");
  }
  nn::Tensor out = nn::Tensor::zeros({(int)vectors.size(), dim_});
  for (size_t r = 0; r < vectors.size(); ++r) {
    const auto& row = vectors.at(r);
    if ((int)row.size() != dim_) {
      throw DimensionMismatchError("remote embedding width mismatch");
    }
    for (int c = 0; c < dim_; ++c) out.at((int)r, c) = row.at((size_t)c).get<double>();
  }
  return out;
}

std::string RemoteCaptionCombiner::combine_captions(
    const std::string& static_caption, const std::string& dynamic_caption) {
  if (static_caption.empty()) throw EmptyCaptionError("empty static caption");
  if (dynamic_caption.empty()) throw EmptyCaptionError("empty dynamic caption");
  json body;
  body["static"] = static_caption;
  body["dynamic"] = dynamic_caption;
  json res = post_json(endpoint_, "/combine", body);
  return res.at("caption").get<std::string>();
}

std::string RemoteAsrClient::transcribe(const AudioClip& audio) {
  if (audio.empty()) throw EmptyAudioError("no samples");
  json res = post_json(endpoint_, "/transcribe", audio_body(audio));
  const std::string transcript = res.at("transcript").get<std::string>();
  if (transcript.empty()) {
    throw TranscriptUnavailableError("remote ASR returned empty transcript");
  }
  return transcript;
}

double RemoteScoreClient::score(const AudioClip& audio) {
  if (audio.empty()) throw EmptyAudioError("no samples");
  json body = audio_body(audio);
  body["kind"] = kind_;
  json res = post_json(endpoint_, "/score", body);
  return res.at("score").get<double>();
}

}  // namespace clients
}  // namespace flespeech
