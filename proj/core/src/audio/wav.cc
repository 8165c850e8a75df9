// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/audio/wav.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "flespeech/common/error.h"

namespace flespeech {

namespace {

struct RiffHeader {
  char riff[4];
  std::uint32_t size;
  char wave[4];
};

void write_u32(std::ofstream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

void write_u16(std::ofstream& os, std::uint16_t v) {
  os.write(reinterpret_cast<const char*>(&v), 2);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open wav file: " + path);

  RiffHeader hdr{};
  is.read(reinterpret_cast<char*>(&hdr), sizeof(hdr));
  if (!is || std::memcmp(hdr.riff, "RIFF", 4) != 0 ||
      std::memcmp(hdr.wave, "WAVE", 4) != 0) {
    throw IoError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::vector<char> pcm;
  bool got_fmt = false, got_data = false;

  while (is && !(got_fmt && got_data)) {
    char id[4];
    std::uint32_t chunk_size = 0;
    is.read(id, 4);
    is.read(reinterpret_cast<char*>(&chunk_size), 4);
    if (!is) break;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      std::vector<char> fmt(chunk_size);
      is.read(fmt.data(), chunk_size);
      if (chunk_size < 16) throw IoError("short fmt chunk: " + path);
      std::uint16_t format;
      std::memcpy(&format, fmt.data(), 2);
      std::memcpy(&channels, fmt.data() + 2, 2);
      std::memcpy(&sample_rate, fmt.data() + 4, 4);
      std::memcpy(&bits, fmt.data() + 14, 2);
      if (format != 1) throw IoError("only PCM wav supported: " + path);
      got_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      pcm.resize(chunk_size);
      is.read(pcm.data(), chunk_size);
      got_data = true;
    } else {
      is.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  if (!got_fmt || !got_data) throw IoError("missing fmt/data chunk: " + path);
  if (channels != 1) throw IoError("only mono wav supported: " + path);
  if (bits != 16) throw IoError("only 16-bit wav supported: " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  std::size_t n = pcm.size() / 2;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t s;
    std::memcpy(&s, pcm.data() + 2 * i, 2);
    clip.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open wav file for writing: " + path);

  std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  os.write("RIFF", 4);
  write_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_u32(os, 16);
  write_u16(os, 1);  // PCM
  write_u16(os, 1);  // mono
  write_u32(os, static_cast<std::uint32_t>(clip.sample_rate));
  write_u32(os, static_cast<std::uint32_t>(clip.sample_rate * 2));
  write_u16(os, 2);   // block align
  write_u16(os, 16);  // bits
  os.write("data", 4);
  write_u32(os, data_bytes);
  for (double v : clip.samples) {
    double c = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
    auto s = static_cast<std::int16_t>(std::lrint(c * 32767.0));
    os.write(reinterpret_cast<const char*>(&s), 2);
  }
  if (!os) throw IoError("failed writing wav file: " + path);
}

}  // namespace flespeech
