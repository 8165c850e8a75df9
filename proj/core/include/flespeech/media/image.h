// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_MEDIA_IMAGE_H_
#define FLESPEECH_MEDIA_IMAGE_H_

#include <string>
#include <vector>

namespace flespeech {

// 8-bit image decoded to doubles in [0, 1], row-major, interleaved channels.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 (gray) or 3 (rgb)
  std::vector<double> pixels;

  bool empty() const { return pixels.empty(); }
  double at(int y, int x, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// Binary PGM (P5) / PPM (P6) with maxval 255.
Image read_pnm(const std::string& path);
void write_pnm(const std::string& path, const Image& img);

}  // namespace flespeech

#endif  // FLESPEECH_MEDIA_IMAGE_H_
