// Copyright 2026 The Posekit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Weight file layout (all integers little-endian):
//   "MVPW" | u32 version (= 1) | u32 tensor count
//   per tensor: u16 name length | UTF-8 name | u8 dtype (0 = f32) | u8 ndim |
//               ndim x u32 dims | raw little-endian f32 data
// Names are "<layer-id>.<weight|bias|bn_gamma|bn_beta|bn_mean|bn_var>".
// Batch-norm tensors are stored unfolded; folding happens when binding.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "posekit/core/error.hpp"
#include "posekit/core/tensor.hpp"
#include "posekit/model/graph.hpp"

namespace posekit::model {

inline constexpr char kWeightMagic[4] = {'M', 'V', 'P', 'W'};
inline constexpr std::uint32_t kWeightVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(char(v)); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) u8(std::uint8_t(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(std::uint8_t(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(const std::string& buf, std::string path) : buf_(buf), path_(std::move(path)) {}

  std::uint8_t u8(const char* what) {
    need(1, what);
    return std::uint8_t(buf_[pos_++]);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= std::uint16_t(std::uint8_t(buf_[pos_++])) << (8 * i);
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf_[pos_++])) << (8 * i);
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (buf_.size() - pos_ < n) {
      throw WeightsError("weights-truncated", "weight file '" + path_ + "' truncated while reading " +
                                                  what + " at byte " + std::to_string(pos_));
    }
  }
  const std::string& buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_weights(const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  detail::ByteWriter w;
  w.bytes(kWeightMagic, 4);
  w.u32(kWeightVersion);
  w.u32(std::uint32_t(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > 0xFFFF) throw ConfigError("tensor name too long: " + name.substr(0, 64));
    w.u16(std::uint16_t(name.size()));
    w.bytes(name.data(), name.size());
    w.u8(0);
    w.u8(std::uint8_t(t->rank()));
    for (auto d : t->shape()) w.u32(std::uint32_t(d));
    for (float v : t->data()) w.f32(v);
  }
  return w.data();
}

inline NamedTensors decode_weights(const std::string& bytes, const std::string& path = "<memory>") {
  detail::ByteReader r(bytes, path);
  const std::string magic = r.str(4, "magic");
  if (std::memcmp(magic.data(), kWeightMagic, 4) != 0) {
    throw WeightsError("weights-bad-magic", "'" + path + "' is not a weight file (bad magic)");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kWeightVersion) {
    throw WeightsError("weights-bad-version", "'" + path + "' has unsupported version " +
                                                  std::to_string(version));
  }
  const std::uint32_t count = r.u32("tensor count");
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16("name length");
    std::string name = r.str(len, "tensor name");
    const std::uint8_t dtype = r.u8("dtype");
    if (dtype != 0) {
      throw WeightsError("weights-bad-dtype", "tensor '" + name + "' has unsupported dtype " +
                                                  std::to_string(dtype));
    }
    const std::uint8_t ndim = r.u8("ndim");
    Shape shape(ndim);
    for (auto& d : shape) d = r.u32("dims");
    for (auto d : shape) {
      if (d == 0) throw WeightsError("weights-shape-mismatch", "tensor '" + name + "' has a zero extent");
    }
    const std::size_t n = shape_numel(shape);
    if (r.remaining() / 4 < n) {
      throw WeightsError("weights-truncated",
                         "weight file '" + path + "' truncated inside tensor '" + name + "'");
    }
    std::vector<float> data(n);
    for (auto& v : data) v = r.f32("tensor data");
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return out;
}

inline NamedTensors read_weight_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw WeightsError("weights-not-found", "cannot open weight file '" + path.string() + "'");
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_weights(bytes, path.string());
}

// Writes the graph's raw (unfolded) tensors in parameter order.
inline void save_weights(const std::filesystem::path& path, const Graph& g) {
  const std::string bytes = encode_weights(g.raw_tensors());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WeightsError("weights-write-failed", "cannot write '" + path.string() + "'");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw WeightsError("weights-write-failed", "short write to '" + path.string() + "'");
}

// Returns a copy of `graph` with every layer bound from the file. Nothing is
// bound unless the whole file parses and every expected tensor is present
// with the right shape. Unknown tensors are reported through `warnings`.
inline Graph load_weights(const std::filesystem::path& path, Graph graph,
                          std::vector<std::string>* warnings = nullptr) {
  std::map<std::string, Tensor> by_name;
  for (auto& [name, t] : read_weight_file(path)) {
    if (!by_name.emplace(name, std::move(t)).second) {
      throw WeightsError("weights-duplicate-tensor", "tensor '" + name + "' appears twice");
    }
  }
  const auto extras = graph.bind(by_name);
  if (warnings != nullptr && !extras.empty()) {
    std::string list;
    for (const auto& e : extras) list += (list.empty() ? "" : ", ") + e;
    warnings->push_back("ignored unknown tensors: " + list);
  }
  return graph;
}

}  // namespace posekit::model
