// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/nn/serialize.h"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "flespeech/common/error.h"

namespace flespeech {
namespace nn {

namespace {

constexpr char kMagic[4] = {'F', 'L', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("truncated tensor file: " + path);
  return v;
}

}  // namespace

void save_tensor_map(const std::string& path,
                     const std::map<std::string, Tensor>& tensors) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os.write(kMagic, 4);
    write_pod(os, kVersion);
    write_pod(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
      write_pod(os, static_cast<std::uint32_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_pod(os, static_cast<std::uint32_t>(t.rank()));
      for (int d : t.shape()) write_pod(os, static_cast<std::uint32_t>(d));
      os.write(reinterpret_cast<const char*>(t.data()),
               static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!os) throw IoError("failed writing tensor file: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("failed renaming " + tmp + " -> " + path);
  }
}

std::map<std::string, Tensor> load_tensor_map(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open tensor file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("bad tensor file magic: " + path);
  }
  auto version = read_pod<std::uint32_t>(is, path);
  if (version != kVersion) throw IoError("unsupported tensor file version");
  auto count = read_pod<std::uint32_t>(is, path);
  std::map<std::string, Tensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name_len = read_pod<std::uint32_t>(is, path);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    auto rank = read_pod<std::uint32_t>(is, path);
    std::vector<int> shape(rank);
    std::int64_t n = 1;
    for (auto& d : shape) {
      d = static_cast<int>(read_pod<std::uint32_t>(is, path));
      n *= d;
    }
    std::vector<double> data(static_cast<std::size_t>(n));
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw IoError("truncated tensor data: " + path);
    out.emplace(std::move(name),
                Tensor::from_vector(std::move(shape), std::move(data)));
  }
  return out;
}

}  // namespace nn
}  // namespace flespeech
