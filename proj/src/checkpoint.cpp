// Copyright 2026 The Horouf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "horouf/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "horouf/error.hpp"

namespace horouf {

namespace {

void put(std::vector<std::uint8_t>& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint32_t take(int bytes) {
    if (b_.size() - pos_ < static_cast<std::size_t>(bytes)) {
      throw Error(Errc::DimensionMismatch, "checkpoint truncated");
    }
    std::uint32_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b_[pos_ + i];
    pos_ += bytes;
    return v;
  }
  float take_float() {
    const float v = std::bit_cast<float>(take(4));
    if (!std::isfinite(v)) throw Error(Errc::NonFinitePayload, "non-finite parameter in checkpoint");
    return v;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const MlpModel& model) {
  std::vector<std::uint8_t> out{'H', 'R', 'F', 'M'};
  put(out, kCheckpointVersion, 2);
  put(out, static_cast<std::uint32_t>(model.num_layers()), 2);
  for (const auto& layer : model.layers()) {
    put(out, static_cast<std::uint32_t>(layer.fan_in()), 4);
    put(out, static_cast<std::uint32_t>(layer.fan_out()), 4);
    for (float w : layer.weight.values()) {
      if (!std::isfinite(w)) throw Error(Errc::NumericFailure, "non-finite weight");
      put(out, std::bit_cast<std::uint32_t>(w), 4);
    }
    for (float b : layer.bias) {
      if (!std::isfinite(b)) throw Error(Errc::NumericFailure, "non-finite bias");
      put(out, std::bit_cast<std::uint32_t>(b), 4);
    }
  }
  return out;
}

MlpModel decode_checkpoint(std::span<const std::uint8_t> bytes, double dropout) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "HRFM", 4) != 0) {
    throw Error(Errc::BadMagic, "not a model checkpoint");
  }
  Cursor cur(bytes.subspan(4));
  const auto version = cur.take(2);
  if (version != kCheckpointVersion) {
    throw Error(Errc::UnsupportedFormat, "checkpoint version " + std::to_string(version));
  }
  const auto count = cur.take(2);
  if (count == 0) throw Error(Errc::DimensionMismatch, "checkpoint has no layers");
  std::vector<DenseLayer<float>> layers;
  for (std::uint32_t l = 0; l < count; ++l) {
    const auto rows = cur.take(4);
    const auto cols = cur.take(4);
    if (rows == 0 || cols == 0) throw Error(Errc::DimensionMismatch, "zero-sized layer");
    DenseLayer<float> layer{Matrix<float>(rows, cols), std::vector<float>(cols)};
    for (auto& w : layer.weight.values()) w = cur.take_float();
    for (auto& b : layer.bias) b = cur.take_float();
    layers.push_back(std::move(layer));
  }
  if (!cur.done()) throw Error(Errc::DimensionMismatch, "trailing bytes after last layer");
  try {
    return MlpModel(std::move(layers), dropout);
  } catch (const Error& ex) {
    throw Error(Errc::DimensionMismatch, ex.what());
  }
}

void write_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

MlpModel read_checkpoint(const std::filesystem::path& path, double dropout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
  return decode_checkpoint(bytes, dropout);
}

}  // namespace horouf
