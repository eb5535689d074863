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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "horouf/mlp.hpp"

namespace horouf {

// Binary model checkpoint, little-endian:
//   "HRFM" | u16 version (=1) | u16 layer count |
//   per layer: u32 rows (fan-in) | u32 cols (fan-out) | rows*cols f32 weights,
//   row-major | cols f32 biases
// Architecture metadata and training configuration live in a JSON sidecar
// written by the CLI.
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const MlpModel& model);
MlpModel decode_checkpoint(std::span<const std::uint8_t> bytes, double dropout = 0.3);
void write_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel read_checkpoint(const std::filesystem::path& path, double dropout = 0.3);

}  // namespace horouf
