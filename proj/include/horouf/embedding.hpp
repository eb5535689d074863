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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "horouf/corpus.hpp"

namespace horouf {

// Frame-level encoder output: `frames` rows of `dim` values, row-major.
struct FrameEmbeddingMatrix {
  std::uint32_t frames = 0;
  std::uint32_t dim = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t t) const { return {data.data() + t * dim, dim}; }
};

// HRF layout, little-endian throughout:
//   "HRF1" | u16 version (=1) | u16 flags (=0) | u32 T | u32 D | T*D f32, row-major
inline constexpr std::uint16_t kHrfVersion = 1;

std::vector<std::uint8_t> encode_hrf(const FrameEmbeddingMatrix& m);
FrameEmbeddingMatrix decode_hrf(std::span<const std::uint8_t> bytes);
FrameEmbeddingMatrix read_hrf(const std::filesystem::path& path);
void write_hrf(const FrameEmbeddingMatrix& m, const std::filesystem::path& path);

struct UtteranceEmbedding {
  std::vector<float> vector;
  std::string source_id;
};

// Arithmetic mean over the time axis, accumulated in double.
UtteranceEmbedding mean_pool(const FrameEmbeddingMatrix& m, std::string source_id = {});

// Pooled feature rows with class ids; `features` is size() x dim, row-major.
struct EmbeddingDataset {
  std::size_t dim = 0;
  std::vector<float> features;
  std::vector<int> labels;
  std::vector<std::string> ids;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const float> row(std::size_t i) const { return {features.data() + i * dim, dim}; }

  void append(std::span<const float> x, int label, std::string id);
  // Throws ShapeMismatch when sizes disagree, LabelOutOfRange when a label
  // falls outside [0, num_classes).
  void validate(int num_classes) const;
  int max_label() const;
};

// Pools every entry of `split` in manifest order. Relative embedding paths
// resolve against `base_dir`.
EmbeddingDataset assemble(const Manifest& manifest, Split split,
                          const std::filesystem::path& base_dir = {});

// A dataset on disk is a pair `<stem>.hrf` (N x D pooled rows) and
// `<stem>.tsv` (one "id<TAB>class" line per row).
void write_dataset(const EmbeddingDataset& ds, const std::filesystem::path& stem);
EmbeddingDataset read_dataset(const std::filesystem::path& stem);

}  // namespace horouf
