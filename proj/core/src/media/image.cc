// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/media/image.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "flespeech/common/error.h"

namespace flespeech {

namespace {

// Skips whitespace and '#' comments between PNM header tokens.
int next_header_int(std::istream& is, const std::string& path) {
  int c = is.get();
  while (is) {
    if (c == '#') {
      while (is && c != '\n') c = is.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = is.get();
  }
  std::string tok;
  while (is && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = is.get();
  }
  if (tok.empty()) throw IoError("truncated pnm header: " + path);
  return std::stoi(tok);
}

}  // namespace

Image read_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open image: " + path);
  char p = 0, n = 0;
  is.get(p);
  is.get(n);
  int channels;
  if (p == 'P' && n == '5') {
    channels = 1;
  } else if (p == 'P' && n == '6') {
    channels = 3;
  } else {
    throw IoError("unsupported image format (want P5/P6): " + path);
  }
  int width = next_header_int(is, path);
  int height = next_header_int(is, path);
  int maxval = next_header_int(is, path);
  if (maxval != 255) throw IoError("unsupported pnm maxval: " + path);
  if (width <= 0 || height <= 0) throw IoError("bad pnm dimensions: " + path);

  std::size_t count = static_cast<std::size_t>(width) * height * channels;
  std::vector<char> raw(count);
  is.read(raw.data(), static_cast<std::streamsize>(count));
  if (!is) throw IoError("truncated pnm raster: " + path);

  Image img;
  img.height = height;
  img.width = width;
  img.channels = channels;
  img.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    img.pixels[i] = static_cast<unsigned char>(raw[i]) / 255.0;
  }
  return img;
}

void write_pnm(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw IoError("write_pnm supports 1 or 3 channels");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open image for writing: " + path);
  os << (img.channels == 1 ? "P5" : "P6") << "\n"
     << img.width << " " << img.height << "\n255\n";
  for (double v : img.pixels) {
    double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    os.put(static_cast<char>(static_cast<unsigned char>(std::lrint(c * 255.0))));
  }
  if (!os) throw IoError("failed writing image: " + path);
}

}  // namespace flespeech
