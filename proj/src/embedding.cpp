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

#include "horouf/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "horouf/error.hpp"

namespace horouf {

namespace {

constexpr std::size_t kHrfHeader = 16;

void put_le(std::vector<std::uint8_t>& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_le(std::span<const std::uint8_t> b, std::size_t pos, int bytes) {
  std::uint32_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[pos + i];
  return v;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  return stem.string() + ext;
}

}  // namespace

std::vector<std::uint8_t> encode_hrf(const FrameEmbeddingMatrix& m) {
  if (m.frames == 0 || m.dim == 0) throw Error(Errc::DimensionMismatch, "HRF needs T >= 1 and D >= 1");
  if (m.data.size() != static_cast<std::size_t>(m.frames) * m.dim) {
    throw Error(Errc::DimensionMismatch, "payload size does not match T x D");
  }
  std::vector<std::uint8_t> out{'H', 'R', 'F', '1'};
  out.reserve(kHrfHeader + m.data.size() * 4);
  put_le(out, kHrfVersion, 2);
  put_le(out, 0, 2);
  put_le(out, m.frames, 4);
  put_le(out, m.dim, 4);
  for (float v : m.data) {
    if (!std::isfinite(v)) throw Error(Errc::NonFinitePayload, "refusing to write NaN/Inf");
    put_le(out, std::bit_cast<std::uint32_t>(v), 4);
  }
  return out;
}

FrameEmbeddingMatrix decode_hrf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "HRF1", 4) != 0) {
    throw Error(Errc::BadMagic, "not an HRF file");
  }
  if (bytes.size() < kHrfHeader) throw Error(Errc::CorruptHeader, "truncated HRF header");
  const auto version = get_le(bytes, 4, 2);
  if (version != kHrfVersion) {
    throw Error(Errc::UnsupportedFormat, "HRF version " + std::to_string(version));
  }
  FrameEmbeddingMatrix m;
  m.frames = get_le(bytes, 8, 4);
  m.dim = get_le(bytes, 12, 4);
  const std::uint64_t expected = static_cast<std::uint64_t>(m.frames) * m.dim * 4;
  const std::uint64_t payload = bytes.size() - kHrfHeader;
  if (m.frames == 0 || m.dim == 0 || payload != expected) {
    throw Error(Errc::DimensionMismatch, "header declares " + std::to_string(m.frames) + "x" +
                                             std::to_string(m.dim) + " but payload has " +
                                             std::to_string(payload / 4) + " floats");
  }
  m.data.resize(static_cast<std::size_t>(m.frames) * m.dim);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const float v = std::bit_cast<float>(get_le(bytes, kHrfHeader + 4 * i, 4));
    if (!std::isfinite(v)) throw Error(Errc::NonFinitePayload, "NaN/Inf at element " + std::to_string(i));
    m.data[i] = v;
  }
  return m;
}

FrameEmbeddingMatrix read_hrf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
  try {
    return decode_hrf(bytes);
  } catch (const Error& ex) {
    throw Error(ex.code(), path.string() + ": " + ex.what());
  }
}

void write_hrf(const FrameEmbeddingMatrix& m, const std::filesystem::path& path) {
  const auto bytes = encode_hrf(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

UtteranceEmbedding mean_pool(const FrameEmbeddingMatrix& m, std::string source_id) {
  if (m.frames == 0 || m.dim == 0 || m.data.size() != std::size_t{m.frames} * m.dim) {
    throw Error(Errc::DimensionMismatch, "cannot pool an empty or malformed matrix");
  }
  std::vector<double> acc(m.dim, 0.0);
  for (std::uint32_t t = 0; t < m.frames; ++t) {
    const auto r = m.row(t);
    for (std::uint32_t j = 0; j < m.dim; ++j) acc[j] += r[j];
  }
  UtteranceEmbedding e;
  e.source_id = std::move(source_id);
  e.vector.resize(m.dim);
  for (std::uint32_t j = 0; j < m.dim; ++j) {
    e.vector[j] = static_cast<float>(acc[j] / static_cast<double>(m.frames));
  }
  return e;
}

void EmbeddingDataset::append(std::span<const float> x, int label, std::string id) {
  if (empty() && dim == 0) dim = x.size();
  if (x.size() != dim) {
    throw Error(Errc::MixedWidth, "row width " + std::to_string(x.size()) + " differs from " +
                                      std::to_string(dim));
  }
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
  ids.push_back(std::move(id));
}

void EmbeddingDataset::validate(int num_classes) const {
  if (ids.size() != labels.size() || features.size() != labels.size() * dim) {
    throw Error(Errc::ShapeMismatch, "dataset arrays are misaligned");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(y) + " outside [0, " +
                                             std::to_string(num_classes) + ")");
    }
  }
}

int EmbeddingDataset::max_label() const {
  int m = -1;
  for (int y : labels) m = std::max(m, y);
  return m;
}

EmbeddingDataset assemble(const Manifest& manifest, Split split,
                          const std::filesystem::path& base_dir) {
  EmbeddingDataset ds;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    if (e.embedding_path.empty()) throw Error(Errc::MissingFile, "entry " + e.id + " has no embedding_path");
    std::filesystem::path p = e.embedding_path;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw Error(Errc::MissingFile, "entry " + e.id + ": " + p.string());
    const auto pooled = mean_pool(read_hrf(p), e.id);
    ds.append(pooled.vector, encode_label(e.label), e.id);
  }
  return ds;
}

void write_dataset(const EmbeddingDataset& ds, const std::filesystem::path& stem) {
  ds.validate(ds.max_label() + 1);
  FrameEmbeddingMatrix m;
  m.frames = static_cast<std::uint32_t>(ds.size());
  m.dim = static_cast<std::uint32_t>(ds.dim);
  m.data = ds.features;
  write_hrf(m, with_suffix(stem, ".hrf"));

  std::ofstream out(with_suffix(stem, ".tsv"), std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + with_suffix(stem, ".tsv").string());
  for (std::size_t i = 0; i < ds.size(); ++i) out << ds.ids[i] << '\t' << ds.labels[i] << '\n';
}

EmbeddingDataset read_dataset(const std::filesystem::path& stem) {
  const auto m = read_hrf(with_suffix(stem, ".hrf"));
  std::ifstream in(with_suffix(stem, ".tsv"));
  if (!in) throw Error(Errc::MissingFile, "cannot open " + with_suffix(stem, ".tsv").string());
  EmbeddingDataset ds;
  ds.dim = m.dim;
  ds.features = m.data;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw Error(Errc::ParseError, "bad dataset row: " + line);
    ds.ids.push_back(line.substr(0, tab));
    try {
      ds.labels.push_back(std::stoi(line.substr(tab + 1)));
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bad class id in row: " + line);
    }
  }
  if (ds.labels.size() != m.frames) {
    throw Error(Errc::DimensionMismatch, "label file has " + std::to_string(ds.labels.size()) +
                                             " rows, feature file " + std::to_string(m.frames));
  }
  return ds;
}

}  // namespace horouf
