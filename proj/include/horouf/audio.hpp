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
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "horouf/corpus.hpp"

namespace horouf {

inline constexpr int kPipelineSampleRate = 16000;

struct AudioClip {
  std::vector<float> samples;  // amplitudes in [-1, 1]
  int sample_rate = kPipelineSampleRate;
};

enum class WavEncoding { Pcm16, Float32 };

// Mono RIFF/WAVE, 16-bit PCM or 32-bit IEEE float. 16-bit values are
// normalized by 1/32768.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip parse_wav(const std::vector<std::uint8_t>& bytes);
void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::Pcm16);
std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding);

struct TrimConfig {
  std::size_t frame_len = 320;     // 20 ms at 16 kHz
  double energy_threshold = 1e-4;  // mean-square, about -40 dBFS
};

// Half-open sample range [begin, end) kept by trim_silence.
std::pair<std::size_t, std::size_t> voiced_bounds(const AudioClip& clip, const TrimConfig& cfg);

// Keeps the span from the first to the last frame whose mean-square energy
// reaches the threshold. A trailing partial frame is measured over its own
// length. Throws Error(AllSilent) when no frame qualifies.
AudioClip trim_silence(const AudioClip& clip, const TrimConfig& cfg);

struct GaussianNoise {
  double sigma = 0.0;
};
struct PitchShift {
  double semitones = 0.0;
};
struct TimeStretch {
  double rate = 1.0;  // > 1 shortens the clip
};
struct CircularShift {
  std::size_t offset = 0;
};

using AugmentKind = std::variant<GaussianNoise, PitchShift, TimeStretch, CircularShift>;

struct AugmentSpec {
  AugmentKind kind;
  std::uint64_t seed = 0;
};

// Output is clamped to [-1, 1]. Throws Error(InvalidSpec) when the spec's
// parameter is out of range for this clip.
AudioClip augment(const AudioClip& clip, const AugmentSpec& spec);

// Linear-interpolation resampling to round(n / rate) samples (changes pitch).
std::vector<float> resample_linear(const std::vector<float>& in, double rate);
// Waveform-similarity overlap-add (Hann windows) to exactly `out_len`
// samples; keeps pitch.
std::vector<float> stretch_ola(const std::vector<float>& in, std::size_t out_len);

AugmentOrigin describe(const AugmentSpec& spec, std::string source_id);
AugmentSpec spec_from_origin(const AugmentOrigin& origin);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct AugmentRanges {
  Range sigma{0.001, 0.02};
  Range semitones{-2.0, 2.0};
  Range rate{0.85, 1.18};
};

// Draws a kind uniformly among the four, then its parameter from `ranges`.
// Circular shift offsets are uniform over [0, length).
AugmentSpec draw_spec(std::uint64_t seed, const AugmentRanges& ranges, std::size_t length);

struct FanOutResult {
  Manifest manifest;
  std::vector<std::pair<std::string, std::string>> failures;  // (entry id, message)
};

// Adds `per_entry` augmented children for every Train original, writing the
// augmented audio under `out_dir`. Relative audio paths resolve against
// `base_dir`. Val/Test entries are never augmented. Per-entry failures are
// collected rather than thrown.
FanOutResult fan_out(const Manifest& manifest, int per_entry, const AugmentRanges& ranges,
                     std::uint64_t seed, const std::filesystem::path& out_dir,
                     const std::filesystem::path& base_dir = {});

}  // namespace horouf
