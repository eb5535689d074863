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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "horouf/audio.hpp"
#include "horouf/error.hpp"
#include "horouf/rng.hpp"
#include "test_support.hpp"

namespace horouf {
namespace {

using testing::TempDir;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no horouf::Error thrown";
  return Errc::IoError;
}

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}
void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}
void put_tag(std::vector<std::uint8_t>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

// Canonical 44-byte-header WAV assembled byte by byte.
std::vector<std::uint8_t> handmade_wav(std::uint16_t format, std::uint16_t channels, std::uint16_t bits,
                                       const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> b;
  put_tag(b, "RIFF");
  put_u32(b, 36 + static_cast<std::uint32_t>(payload.size()));
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, format);
  put_u16(b, channels);
  put_u32(b, 16000);
  put_u32(b, 16000u * channels * bits / 8);
  put_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(b, bits);
  put_tag(b, "data");
  put_u32(b, static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

AudioClip random_clip(Rng& rng, std::size_t n, double amp = 0.5) {
  AudioClip c;
  c.samples.resize(n);
  for (auto& s : c.samples) s = static_cast<float>(rng.uniform(-amp, amp));
  return c;
}

// Summed in sorted order so the result depends only on the multiset.
double energy(std::vector<float> s) {
  std::sort(s.begin(), s.end());
  double e = 0.0;
  for (float v : s) e += static_cast<double>(v) * v;
  return e;
}

TEST(Wav, Pcm16Normalization) {
  std::vector<std::uint8_t> payload;
  put_u16(payload, 32767);
  put_u16(payload, static_cast<std::uint16_t>(-32768));
  put_u16(payload, 0);
  const AudioClip c = parse_wav(handmade_wav(1, 1, 16, payload));
  ASSERT_EQ(c.samples.size(), 3u);
  EXPECT_EQ(c.samples[0], 32767.0f / 32768.0f);
  EXPECT_EQ(c.samples[1], -1.0f);
  EXPECT_EQ(c.samples[2], 0.0f);
  EXPECT_EQ(c.sample_rate, 16000);
}

TEST(Wav, Float32Payload) {
  std::vector<std::uint8_t> payload(8);
  const float v[2] = {0.25f, -0.75f};
  std::memcpy(payload.data(), v, 8);
  const AudioClip c = parse_wav(handmade_wav(3, 1, 32, payload));
  ASSERT_EQ(c.samples.size(), 2u);
  EXPECT_EQ(c.samples[0], 0.25f);
  EXPECT_EQ(c.samples[1], -0.75f);
}

TEST(Wav, HeaderErrors) {
  EXPECT_EQ(code_of([] { parse_wav(handmade_wav(1, 1, 16, {})); }), Errc::CorruptHeader);
  EXPECT_EQ(code_of([] { parse_wav({'R', 'I', 'F', 'F'}); }), Errc::CorruptHeader);
  auto bad_tag = handmade_wav(1, 1, 16, {0, 0});
  bad_tag[8] = 'X';
  EXPECT_EQ(code_of([&] { parse_wav(bad_tag); }), Errc::CorruptHeader);
  EXPECT_EQ(code_of([] { parse_wav(handmade_wav(1, 2, 16, {0, 0, 0, 0})); }), Errc::UnsupportedFormat);
  EXPECT_EQ(code_of([] { parse_wav(handmade_wav(6, 1, 8, {0, 0})); }), Errc::UnsupportedFormat);
  EXPECT_EQ(code_of([] { parse_wav(handmade_wav(1, 1, 24, {0, 0, 0})); }), Errc::UnsupportedFormat);
}

TEST(Wav, Pcm16RoundTripWithinOneLsb) {
  TempDir dir("wav");
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const AudioClip c = random_clip(rng, 1 + rng.below(4000), 1.0);
    write_wav(c, dir / "c.wav");
    const AudioClip back = read_wav(dir / "c.wav");
    ASSERT_EQ(back.samples.size(), c.samples.size());
    for (std::size_t k = 0; k < c.samples.size(); ++k) {
      worst = std::max(worst, std::abs(static_cast<double>(back.samples[k]) - c.samples[k]));
    }
  }
  EXPECT_LE(worst, std::ldexp(1.0, -15));
}

TEST(Wav, Float32RoundTripIsExact) {
  Rng rng(5);
  const AudioClip c = random_clip(rng, 777, 1.0);
  const AudioClip back = parse_wav(encode_wav(c, WavEncoding::Float32));
  EXPECT_EQ(back.samples, c.samples);
}

TEST(Trim, KeepsVoicedFrame) {
  AudioClip c;
  c.samples = {0, 0, 0, 0, 0.5f, 0.5f, 0, 0, 0, 0};
  const AudioClip t = trim_silence(c, {2, 0.01});
  EXPECT_EQ(t.samples, (std::vector<float>{0.5f, 0.5f}));
}

TEST(Trim, ConstantSignalUnchangedAndSilenceRejected) {
  AudioClip c;
  c.samples.assign(1000, 0.5f);
  EXPECT_EQ(trim_silence(c, {}).samples, c.samples);
  AudioClip z;
  z.samples.assign(1000, 0.0f);
  EXPECT_EQ(code_of([&] { trim_silence(z, {}); }), Errc::AllSilent);
}

TEST(Trim, OutputIsContiguousSliceAndRemovedFramesAreQuiet) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t frame = 1 + rng.below(16);
    const std::size_t n = frame * (2 + rng.below(20)) + rng.below(frame);
    AudioClip c;
    c.samples.resize(n);
    for (auto& s : c.samples) s = rng.bernoulli(0.15) ? static_cast<float>(rng.uniform(-1, 1)) : 0.0f;
    c.samples[rng.below(n)] = 0.9f;
    const TrimConfig cfg{frame, 0.01};
    const auto [begin, end] = voiced_bounds(c, cfg);
    const AudioClip t = trim_silence(c, cfg);
    ASSERT_EQ(t.samples.size(), end - begin);
    EXPECT_TRUE(std::equal(t.samples.begin(), t.samples.end(), c.samples.begin() + static_cast<long>(begin)));
    auto frame_energy = [&](std::size_t s) {
      const std::size_t e = std::min(s + frame, n);
      double acc = 0;
      for (std::size_t k = s; k < e; ++k) acc += static_cast<double>(c.samples[k]) * c.samples[k];
      return acc / static_cast<double>(e - s);
    };
    for (std::size_t s = 0; s < begin; s += frame) EXPECT_LT(frame_energy(s), cfg.energy_threshold);
    for (std::size_t s = (end + frame - 1) / frame * frame; s < n; s += frame) {
      EXPECT_LT(frame_energy(s), cfg.energy_threshold);
    }
  }
}

TEST(Augment, Examples) {
  AudioClip c;
  c.samples = {0.1f, 0.2f, 0.3f, 0.4f};
  EXPECT_EQ(augment(c, {CircularShift{1}, 0}).samples, (std::vector<float>{0.4f, 0.1f, 0.2f, 0.3f}));
  EXPECT_EQ(augment(c, {GaussianNoise{0.0}, 9}).samples, c.samples);

  Rng rng(1);
  const AudioClip big = random_clip(rng, 16000);
  const auto stretched = augment(big, {TimeStretch{2.0}, 0});
  EXPECT_LE(std::abs(static_cast<long>(stretched.samples.size()) - 8000), 1);
}

TEST(Augment, InvalidSpecs) {
  AudioClip c;
  c.samples = {0.1f, 0.2f};
  EXPECT_EQ(code_of([&] { augment(c, {GaussianNoise{-1.0}, 0}); }), Errc::InvalidSpec);
  EXPECT_EQ(code_of([&] { augment(c, {TimeStretch{0.0}, 0}); }), Errc::InvalidSpec);
  EXPECT_EQ(code_of([&] { augment(c, {PitchShift{13.0}, 0}); }), Errc::InvalidSpec);
  EXPECT_EQ(code_of([&] { augment(c, {CircularShift{2}, 0}); }), Errc::InvalidSpec);
}

TEST(Augment, NoiseReproducibleAndStatisticallySane) {
  Rng rng(3);
  AudioClip c;
  c.samples.assign(20000, 0.0f);
  const auto a = augment(c, {GaussianNoise{0.01}, 77});
  const auto b = augment(c, {GaussianNoise{0.01}, 77});
  EXPECT_EQ(a.samples, b.samples);
  const double sd = std::sqrt(energy(a.samples) / static_cast<double>(a.samples.size()));
  EXPECT_NEAR(sd, 0.01, 0.0005);
  EXPECT_NE(augment(c, {GaussianNoise{0.01}, 78}).samples, a.samples);
}

TEST(Augment, ShiftMatchesIndexFormula) {
  Rng rng(8);
  const AudioClip c = random_clip(rng, 101);
  for (std::size_t off : {0u, 1u, 50u, 100u}) {
    const auto s = augment(c, {CircularShift{off}, 0}).samples;
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
      EXPECT_EQ(s[i], c.samples[(i + c.samples.size() - off) % c.samples.size()]);
    }
  }
}

TEST(Augment, PitchShiftKeepsLength) {
  Rng rng(4);
  const AudioClip c = random_clip(rng, 16000, 0.3);
  for (double st : {-12.0, -2.0, -0.5, 0.7, 2.0, 12.0}) {
    const auto out = augment(c, {PitchShift{st}, 0}).samples;
    EXPECT_LE(std::abs(static_cast<double>(out.size()) - 16000.0), 160.0) << st;
    for (float v : out) ASSERT_TRUE(std::isfinite(v) && std::abs(v) <= 1.0f);
  }
}

// Frequency (1 Hz grid) with the largest DFT magnitude.
double dominant_frequency(const std::vector<float>& s, double lo, double hi) {
  double best_f = lo, best_mag = -1.0;
  for (double f = lo; f <= hi; f += 1.0) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double ph = 2 * M_PI * f * static_cast<double>(i) / 16000.0;
      re += s[i] * std::cos(ph);
      im += s[i] * std::sin(ph);
    }
    if (re * re + im * im > best_mag) {
      best_mag = re * re + im * im;
      best_f = f;
    }
  }
  return best_f;
}

TEST(Augment, PitchShiftMovesToneFrequency) {
  AudioClip c;
  c.samples.resize(8000);
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    c.samples[i] = static_cast<float>(0.5 * std::sin(2 * M_PI * 220.0 * static_cast<double>(i) / 16000.0));
  }
  for (double st : {-5.0, 2.0, 7.0, 12.0}) {
    const double expected = 220.0 * std::pow(2.0, st / 12.0);
    const double got = dominant_frequency(augment(c, {PitchShift{st}, 0}).samples, 100.0, 600.0);
    EXPECT_NEAR(got, expected, 0.02 * expected) << st;
  }
}

TEST(Augment, RandomizedInvariants) {
  Rng rng(1000);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(3000);
    const AudioClip c = random_clip(rng, n, rng.uniform(0.01, 1.0));

    const auto shifted = augment(c, {CircularShift{rng.below(n)}, 0}).samples;
    EXPECT_EQ(energy(shifted), energy(c.samples));
    auto sorted_in = c.samples, sorted_out = shifted;
    std::sort(sorted_in.begin(), sorted_in.end());
    std::sort(sorted_out.begin(), sorted_out.end());
    EXPECT_EQ(sorted_in, sorted_out);

    const double rate = rng.uniform(0.5, 2.0);
    const auto stretched = augment(c, {TimeStretch{rate}, 0}).samples;
    EXPECT_LE(std::abs(static_cast<double>(stretched.size()) - std::round(static_cast<double>(n) / rate)), 1.0);

    const auto noisy = augment(c, {GaussianNoise{rng.uniform(0.0, 0.5)}, rng.next()}).samples;
    ASSERT_EQ(noisy.size(), n);
    for (float v : noisy) ASSERT_TRUE(std::isfinite(v) && v >= -1.0f && v <= 1.0f);
  }
}

TEST(Augment, ProvenanceRoundTrip) {
  const std::vector<AugmentSpec> specs{{GaussianNoise{0.0123}, 1}, {PitchShift{-1.5}, 2}, {TimeStretch{1.07}, 3},
                                       {CircularShift{400}, 4}};
  for (const auto& s : specs) {
    const AugmentOrigin o = describe(s, "src");
    EXPECT_EQ(o.source_id, "src");
    const AugmentSpec back = spec_from_origin(o);
    EXPECT_EQ(back.kind.index(), s.kind.index());
    EXPECT_EQ(back.seed, s.seed);
    EXPECT_EQ(describe(back, "src"), o);
  }
}

TEST(Augment, DrawSpecStaysInRanges) {
  const AugmentRanges r;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const AugmentSpec s = draw_spec(seed, r, 1000);
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GaussianNoise>) {
            EXPECT_TRUE(k.sigma >= r.sigma.lo && k.sigma <= r.sigma.hi);
          } else if constexpr (std::is_same_v<K, PitchShift>) {
            EXPECT_TRUE(k.semitones >= r.semitones.lo && k.semitones <= r.semitones.hi);
          } else if constexpr (std::is_same_v<K, TimeStretch>) {
            EXPECT_TRUE(k.rate >= r.rate.lo && k.rate <= r.rate.hi);
          } else {
            EXPECT_LT(k.offset, 1000u);
          }
        },
        s.kind);
  }
}

Manifest fan_out_fixture(const TempDir& dir) {
  Rng rng(12);
  Manifest m;
  const Split splits[] = {Split::Train, Split::Train, Split::Val, Split::Test};
  for (int i = 0; i < 4; ++i) {
    ManifestEntry e;
    e.id = "clip" + std::to_string(i);
    e.audio_path = e.id + ".wav";
    e.label = decode_label(i);
    e.split = splits[i];
    write_wav(random_clip(rng, 2000), dir / e.audio_path);
    m.entries.push_back(e);
  }
  return m;
}

TEST(FanOut, OnlyTrainOriginalsGrow) {
  TempDir dir("fan");
  const Manifest m = fan_out_fixture(dir);
  const auto r = fan_out(m, 3, {}, 5, dir / "aug", dir.path());
  EXPECT_TRUE(r.failures.empty());
  ASSERT_EQ(r.manifest.entries.size(), 4u + 2 * 3);
  int children = 0;
  for (const auto& e : r.manifest.entries) {
    if (e.is_original()) continue;
    ++children;
    const auto* src = m.find(e.augmented->source_id);
    ASSERT_NE(src, nullptr);
    EXPECT_EQ(src->split, Split::Train);
    EXPECT_EQ(e.split, Split::Train);
    EXPECT_EQ(e.label, src->label);
    EXPECT_TRUE(std::filesystem::exists(e.audio_path));
  }
  EXPECT_EQ(children, 6);

  const auto again = fan_out(m, 3, {}, 5, dir / "aug2", dir.path());
  for (std::size_t i = 0; i < r.manifest.entries.size(); ++i) {
    EXPECT_EQ(r.manifest.entries[i].augmented, again.manifest.entries[i].augmented);
  }
}

TEST(FanOut, ZeroPerEntryAndFailures) {
  TempDir dir("fan0");
  Manifest m = fan_out_fixture(dir);
  EXPECT_EQ(fan_out(m, 0, {}, 5, dir / "aug", dir.path()).manifest.entries, m.entries);

  m.entries[0].audio_path = "missing.wav";
  const auto r = fan_out(m, 2, {}, 5, dir / "aug", dir.path());
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].first, "clip0");
  EXPECT_EQ(r.manifest.entries.size(), 4u + 2);
}

}  // namespace
}  // namespace horouf
