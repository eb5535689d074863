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
#include <cmath>
#include <limits>
#include <numbers>

#include "horouf/audio.hpp"
#include "horouf/error.hpp"
#include "horouf/rng.hpp"

namespace horouf {

namespace {

constexpr std::size_t kOlaWindow = 512;

float clamp_sample(double v) {
  if (!std::isfinite(v)) return 0.0f;
  return static_cast<float>(std::clamp(v, -1.0, 1.0));
}

double frame_energy(const std::vector<float>& s, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += static_cast<double>(s[i]) * s[i];
  return acc / static_cast<double>(end - begin);
}

void validate(const AugmentSpec& spec, std::size_t length) {
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GaussianNoise>) {
          if (!(k.sigma >= 0.0) || !std::isfinite(k.sigma)) {
            throw Error(Errc::InvalidSpec, "noise sigma must be finite and >= 0");
          }
        } else if constexpr (std::is_same_v<K, PitchShift>) {
          if (!(std::abs(k.semitones) <= 12.0)) {
            throw Error(Errc::InvalidSpec, "pitch shift must be within 12 semitones");
          }
        } else if constexpr (std::is_same_v<K, TimeStretch>) {
          if (!(k.rate > 0.0) || !std::isfinite(k.rate)) {
            throw Error(Errc::InvalidSpec, "stretch rate must be finite and > 0");
          }
        } else {
          if (k.offset >= length) {
            throw Error(Errc::InvalidSpec, "shift offset " + std::to_string(k.offset) +
                                               " not below length " + std::to_string(length));
          }
        }
      },
      spec.kind);
}

}  // namespace

std::pair<std::size_t, std::size_t> voiced_bounds(const AudioClip& clip, const TrimConfig& cfg) {
  if (cfg.frame_len < 1 || !(cfg.energy_threshold >= 0.0)) {
    throw Error(Errc::InvalidSpec, "trim needs frame_len >= 1 and threshold >= 0");
  }
  const auto& s = clip.samples;
  if (s.empty()) throw Error(Errc::InvalidSpec, "empty clip");
  std::size_t first = s.size();
  std::size_t last_end = 0;
  for (std::size_t begin = 0; begin < s.size(); begin += cfg.frame_len) {
    const std::size_t end = std::min(begin + cfg.frame_len, s.size());
    if (frame_energy(s, begin, end) >= cfg.energy_threshold) {
      first = std::min(first, begin);
      last_end = end;
    }
  }
  if (first == s.size()) throw Error(Errc::AllSilent, "no frame reaches the energy threshold");
  return {first, last_end};
}

AudioClip trim_silence(const AudioClip& clip, const TrimConfig& cfg) {
  const auto [begin, end] = voiced_bounds(clip, cfg);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

std::vector<float> resample_linear(const std::vector<float>& in, double rate) {
  const std::size_t n = in.size();
  const auto m = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(static_cast<double>(n) / rate)));
  std::vector<float> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double pos = static_cast<double>(j) * rate;
    const auto i0 = static_cast<std::size_t>(pos);
    if (i0 + 1 >= n) {
      out[j] = in[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[j] = static_cast<float>(in[i0] + frac * (static_cast<double>(in[i0 + 1]) - in[i0]));
  }
  return out;
}

std::vector<float> stretch_ola(const std::vector<float>& in, std::size_t out_len) {
  const std::size_t n = in.size();
  std::size_t win = kOlaWindow;
  while (win > n || win > out_len) win /= 2;
  if (win < 16) return resample_linear(in, static_cast<double>(n) / static_cast<double>(out_len));

  const std::size_t hop = win / 2;
  const std::size_t tolerance = win / 4;
  std::vector<double> window(win);
  for (std::size_t i = 0; i < win; ++i) {
    // Half-sample offset keeps the edges strictly positive.
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) /
                                     static_cast<double>(win));
  }

  std::vector<double> acc(out_len, 0.0), norm(out_len, 0.0);
  const double scale = static_cast<double>(n - win) / static_cast<double>(std::max<std::size_t>(out_len - win, 1));
  std::size_t prev_a = 0, prev_s = 0;
  for (std::size_t start = 0;; start += hop) {
    const std::size_t s = std::min(start, out_len - win);
    const auto nominal = std::min(static_cast<std::size_t>(std::llround(static_cast<double>(s) * scale)), n - win);
    std::size_t a = nominal;
    if (start > 0) {
      // Pick the analysis frame near the nominal position that best continues
      // the waveform of the previous frame.
      const std::size_t natural = std::min(prev_a + (s - prev_s), n - win);
      const std::size_t lo = nominal > tolerance ? nominal - tolerance : 0;
      const std::size_t hi = std::min(nominal + tolerance, n - win);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t c = lo; c <= hi; ++c) {
        double corr = 0.0;
        for (std::size_t i = 0; i < win; ++i) corr += static_cast<double>(in[c + i]) * in[natural + i];
        if (corr > best) {
          best = corr;
          a = c;
        }
      }
    }
    for (std::size_t i = 0; i < win; ++i) {
      acc[s + i] += window[i] * in[a + i];
      norm[s + i] += window[i];
    }
    prev_a = a;
    prev_s = s;
    if (s == out_len - win) break;
  }
  std::vector<float> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = static_cast<float>(acc[i] / norm[i]);
  return out;
}

AudioClip augment(const AudioClip& clip, const AugmentSpec& spec) {
  if (clip.samples.empty()) throw Error(Errc::InvalidSpec, "cannot augment an empty clip");
  validate(spec, clip.samples.size());
  const auto& in = clip.samples;
  AudioClip out;
  out.sample_rate = clip.sample_rate;

  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GaussianNoise>) {
          Rng rng(spec.seed);
          out.samples.resize(in.size());
          for (std::size_t i = 0; i < in.size(); ++i) {
            out.samples[i] = clamp_sample(static_cast<double>(in[i]) + k.sigma * rng.normal());
          }
        } else if constexpr (std::is_same_v<K, CircularShift>) {
          const std::size_t n = in.size();
          out.samples.resize(n);
          for (std::size_t i = 0; i < n; ++i) out.samples[(i + k.offset) % n] = in[i];
        } else if constexpr (std::is_same_v<K, TimeStretch>) {
          out.samples = resample_linear(in, k.rate);
        } else {
          // Resampling by the pitch factor raises pitch and shortens the clip;
          // a pitch-preserving stretch restores the original length.
          const double factor = std::exp2(k.semitones / 12.0);
          out.samples = stretch_ola(resample_linear(in, factor), in.size());
        }
      },
      spec.kind);

  for (auto& s : out.samples) s = clamp_sample(s);
  return out;
}

AugmentOrigin describe(const AugmentSpec& spec, std::string source_id) {
  AugmentOrigin origin;
  origin.source_id = std::move(source_id);
  origin.seed = spec.seed;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GaussianNoise>) {
          origin.kind = "gaussian_noise";
          origin.param = k.sigma;
        } else if constexpr (std::is_same_v<K, PitchShift>) {
          origin.kind = "pitch_shift";
          origin.param = k.semitones;
        } else if constexpr (std::is_same_v<K, TimeStretch>) {
          origin.kind = "time_stretch";
          origin.param = k.rate;
        } else {
          origin.kind = "circular_shift";
          origin.param = static_cast<double>(k.offset);
        }
      },
      spec.kind);
  return origin;
}

AugmentSpec spec_from_origin(const AugmentOrigin& origin) {
  AugmentSpec spec;
  spec.seed = origin.seed;
  if (origin.kind == "gaussian_noise") {
    spec.kind = GaussianNoise{origin.param};
  } else if (origin.kind == "pitch_shift") {
    spec.kind = PitchShift{origin.param};
  } else if (origin.kind == "time_stretch") {
    spec.kind = TimeStretch{origin.param};
  } else if (origin.kind == "circular_shift") {
    if (!(origin.param >= 0.0)) throw Error(Errc::InvalidSpec, "negative shift offset");
    spec.kind = CircularShift{static_cast<std::size_t>(origin.param)};
  } else {
    throw Error(Errc::InvalidSpec, "unknown augmentation kind '" + origin.kind + "'");
  }
  return spec;
}

AugmentSpec draw_spec(std::uint64_t seed, const AugmentRanges& ranges, std::size_t length) {
  Rng rng(seed);
  AugmentSpec spec;
  spec.seed = mix_seed(seed, std::uint64_t{0x6e6f697365});
  switch (rng.below(4)) {
    case 0:
      spec.kind = GaussianNoise{rng.uniform(ranges.sigma.lo, ranges.sigma.hi)};
      break;
    case 1:
      spec.kind = PitchShift{rng.uniform(ranges.semitones.lo, ranges.semitones.hi)};
      break;
    case 2:
      spec.kind = TimeStretch{rng.uniform(ranges.rate.lo, ranges.rate.hi)};
      break;
    default:
      spec.kind = CircularShift{length == 0 ? 0 : rng.below(length)};
      break;
  }
  return spec;
}

FanOutResult fan_out(const Manifest& manifest, int per_entry, const AugmentRanges& ranges,
                     std::uint64_t seed, const std::filesystem::path& out_dir,
                     const std::filesystem::path& base_dir) {
  if (per_entry < 0) throw Error(Errc::InvalidSpec, "augmentations per entry must be >= 0");
  manifest.validate();
  FanOutResult result;
  if (per_entry > 0) std::filesystem::create_directories(out_dir);

  for (const auto& entry : manifest.entries) {
    result.manifest.entries.push_back(entry);
    if (per_entry == 0 || !entry.is_original() || entry.split != Split::Train) continue;
    try {
      if (entry.audio_path.empty()) throw Error(Errc::MissingFile, "entry has no audio_path");
      std::filesystem::path src = entry.audio_path;
      if (src.is_relative() && !base_dir.empty()) src = base_dir / src;
      const AudioClip clip = read_wav(src);

      std::string stem = entry.id;
      std::replace_if(stem.begin(), stem.end(), [](char c) { return c == '/' || c == '\\' || c == '#'; }, '_');
      const std::uint64_t entry_seed = mix_seed(seed, entry.id);
      std::vector<ManifestEntry> children;
      for (int k = 0; k < per_entry; ++k) {
        const AugmentSpec spec =
            draw_spec(mix_seed(entry_seed, static_cast<std::uint64_t>(k)), ranges, clip.samples.size());
        const AudioClip aug = augment(clip, spec);
        const auto path = out_dir / (stem + "_aug" + std::to_string(k) + ".wav");
        write_wav(aug, path);

        ManifestEntry child = entry;
        child.id = entry.id + "#aug" + std::to_string(k);
        child.audio_path = path.string();
        child.embedding_path.clear();
        child.augmented = describe(spec, entry.id);
        children.push_back(std::move(child));
      }
      for (auto& child : children) result.manifest.entries.push_back(std::move(child));
    } catch (const Error& ex) {
      result.failures.emplace_back(entry.id, ex.what());
    }
  }
  return result;
}

}  // namespace horouf
