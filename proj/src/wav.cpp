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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "horouf/audio.hpp"
#include "horouf/error.hpp"

namespace horouf {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::size_t begin, std::size_t end)
      : bytes_(bytes), pos_(begin), end_(end) {}

  bool has(std::size_t n) const { return end_ - pos_ >= n; }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::string tag() {
    need(4);
    std::string t(reinterpret_cast<const char*>(&bytes_[pos_]), 4);
    pos_ += 4;
    return t;
  }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw Error(Errc::CorruptHeader, "truncated WAV header");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_;
  std::size_t end_;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

AudioClip parse_wav(const std::vector<std::uint8_t>& bytes) {
  ByteReader top(bytes, 0, bytes.size());
  if (top.tag() != "RIFF") throw Error(Errc::CorruptHeader, "missing RIFF tag");
  top.u32();  // riff size; some writers get it wrong, chunks are trusted instead
  if (top.tag() != "WAVE") throw Error(Errc::CorruptHeader, "missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_begin = 0, data_size = 0;
  bool have_data = false;

  while (top.has(8)) {
    const std::string id = top.tag();
    const std::uint32_t size = top.u32();
    if (!top.has(size)) {
      // Streaming writers leave a placeholder data size; accept what is there.
      if (id != "data") throw Error(Errc::CorruptHeader, "chunk '" + id + "' overruns file");
    }
    const std::size_t body = top.pos();
    const std::size_t body_size = std::min<std::size_t>(size, bytes.size() - body);
    if (id == "fmt ") {
      ByteReader fmt(bytes, body, body + body_size);
      format = fmt.u16();
      channels = fmt.u16();
      rate = fmt.u32();
      fmt.u32();  // byte rate
      fmt.u16();  // block align
      bits = fmt.u16();
      if (format == kFormatExtensible) {
        if (!fmt.has(2 + 2 + 4 + 2)) throw Error(Errc::CorruptHeader, "short extensible fmt");
        fmt.u16();  // cb size
        fmt.u16();  // valid bits
        fmt.u32();  // channel mask
        format = fmt.u16();  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data_begin = body;
      data_size = body_size;
      have_data = true;
    }
    top.skip(body_size + (body_size & 1));
    if (have_data && have_fmt) break;
  }

  if (!have_fmt) throw Error(Errc::CorruptHeader, "no fmt chunk");
  if (!have_data) throw Error(Errc::CorruptHeader, "no data chunk");
  if (channels != 1) {
    throw Error(Errc::UnsupportedFormat, "expected mono, got " + std::to_string(channels) + " channels");
  }
  if (rate == 0) throw Error(Errc::CorruptHeader, "zero sample rate");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw Error(Errc::UnsupportedFormat, "format " + std::to_string(format) + " with " +
                                             std::to_string(bits) + " bits per sample");
  }
  const std::size_t width = bits / 8;
  const std::size_t n = data_size / width;
  if (n == 0) throw Error(Errc::CorruptHeader, "empty data chunk");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(n);
  const std::uint8_t* p = bytes.data() + data_begin;
  for (std::size_t i = 0; i < n; ++i, p += width) {
    if (pcm16) {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      clip.samples[i] = static_cast<float>(v) / 32768.0f;
    } else {
      const std::uint32_t raw = p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
      const float v = std::bit_cast<float>(raw);
      if (!std::isfinite(v)) throw Error(Errc::CorruptHeader, "non-finite float sample");
      clip.samples[i] = v;
    }
  }
  return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
  return parse_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding) {
  if (clip.sample_rate <= 0) throw Error(Errc::InvalidSpec, "sample rate must be positive");
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(clip.samples.size() * block);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (float s : clip.samples) {
    if (encoding == WavEncoding::Pcm16) {
      const double scaled = std::nearbyint(static_cast<double>(s) * 32768.0);
      const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      put_u16(out, static_cast<std::uint16_t>(v));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(s));
    }
  }
  return out;
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path, WavEncoding encoding) {
  const auto bytes = encode_wav(clip, encoding);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace horouf
