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
#include <fstream>
#include <limits>

#include "horouf/embedding.hpp"
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

FrameEmbeddingMatrix random_frames(Rng& rng, std::uint32_t t, std::uint32_t d) {
  FrameEmbeddingMatrix m{t, d, {}};
  m.data.resize(static_cast<std::size_t>(t) * d);
  for (auto& v : m.data) v = static_cast<float>(rng.normal());
  return m;
}

std::vector<std::uint8_t> header(const char* magic, std::uint16_t version, std::uint32_t t, std::uint32_t d) {
  std::vector<std::uint8_t> b(magic, magic + 4);
  auto put = [&](std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) b.push_back((v >> (8 * i)) & 0xff);
  };
  put(version, 2);
  put(0, 2);
  put(t, 4);
  put(d, 4);
  return b;
}

void append_floats(std::vector<std::uint8_t>& b, const std::vector<float>& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
  b.insert(b.end(), p, p + v.size() * 4);
}

TEST(Hrf, LayoutMatchesHandBuiltBytes) {
  FrameEmbeddingMatrix m{2, 3, {1, 2, 3, 4, 5, 6}};
  auto expected = header("HRF1", 1, 2, 3);
  append_floats(expected, m.data);
  EXPECT_EQ(encode_hrf(m), expected);
  EXPECT_EQ(expected.size(), 16u + 24u);
}

TEST(Hrf, RandomRoundTripIsBitwise) {
  TempDir dir("hrf");
  Rng rng(7);
  const auto m = random_frames(rng, 7, 16);
  write_hrf(m, dir / "m.hrf");
  const auto back = read_hrf(dir / "m.hrf");
  EXPECT_EQ(back.frames, 7u);
  EXPECT_EQ(back.dim, 16u);
  EXPECT_EQ(std::memcmp(back.data.data(), m.data.data(), m.data.size() * 4), 0);
}

TEST(Hrf, ExtremeFiniteValuesSurvive) {
  FrameEmbeddingMatrix m{1, 6, {std::numeric_limits<float>::max(), std::numeric_limits<float>::lowest(),
                                std::numeric_limits<float>::denorm_min(), -0.0f, 0.0f,
                                std::numeric_limits<float>::min()}};
  const auto back = decode_hrf(encode_hrf(m));
  EXPECT_EQ(std::memcmp(back.data.data(), m.data.data(), 24), 0);
}

TEST(Hrf, Errors) {
  auto bad_magic = header("XXXX", 1, 1, 1);
  append_floats(bad_magic, {1.0f});
  EXPECT_EQ(code_of([&] { decode_hrf(bad_magic); }), Errc::BadMagic);

  auto short_payload = header("HRF1", 1, 2, 3);
  append_floats(short_payload, {1, 2, 3, 4, 5});
  EXPECT_EQ(code_of([&] { decode_hrf(short_payload); }), Errc::DimensionMismatch);

  auto bad_version = header("HRF1", 2, 1, 1);
  append_floats(bad_version, {1.0f});
  EXPECT_EQ(code_of([&] { decode_hrf(bad_version); }), Errc::UnsupportedFormat);

  auto nan_payload = header("HRF1", 1, 1, 2);
  append_floats(nan_payload, {1.0f, std::nanf("")});
  EXPECT_EQ(code_of([&] { decode_hrf(nan_payload); }), Errc::NonFinitePayload);

  const std::vector<std::uint8_t> truncated{'H', 'R', 'F', '1', 1, 0};
  EXPECT_EQ(code_of([&] { decode_hrf(truncated); }), Errc::CorruptHeader);

  FrameEmbeddingMatrix inf{1, 1, {INFINITY}};
  EXPECT_EQ(code_of([&] { encode_hrf(inf); }), Errc::NonFinitePayload);
}

TEST(MeanPool, Examples) {
  EXPECT_EQ(mean_pool({2, 2, {1, 2, 3, 4}}).vector, (std::vector<float>{2, 3}));
  const FrameEmbeddingMatrix one{1, 4, {0.1f, -2.5f, 3e7f, 1e-30f}};
  EXPECT_EQ(mean_pool(one).vector, one.data);
  EXPECT_EQ(mean_pool(one, "abc").source_id, "abc");
}

TEST(MeanPool, LinearityAndPermutationInvariance) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = static_cast<std::uint32_t>(1 + rng.below(200));
    const auto d = static_cast<std::uint32_t>(1 + rng.below(32));
    const auto m = random_frames(rng, t, d);
    const auto pooled = mean_pool(m).vector;

    // Exact double-precision reference, rounded once.
    for (std::uint32_t j = 0; j < d; ++j) {
      double acc = 0;
      for (std::uint32_t r = 0; r < t; ++r) acc += m.data[r * d + j];
      EXPECT_EQ(pooled[j], static_cast<float>(acc / t));
    }

    // Row permutation: the double accumulation is exact enough that order
    // does not change the rounded result.
    std::vector<std::uint32_t> perm(t);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::uint32_t i = t; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    FrameEmbeddingMatrix shuffled{t, d, std::vector<float>(m.data.size())};
    for (std::uint32_t r = 0; r < t; ++r) {
      std::copy_n(m.data.begin() + perm[r] * d, d, shuffled.data.begin() + r * d);
    }
    EXPECT_EQ(mean_pool(shuffled).vector, pooled);

    const float a = static_cast<float>(rng.uniform(-3, 3));
    FrameEmbeddingMatrix scaled = m;
    for (auto& v : scaled.data) v *= a;
    const auto ps = mean_pool(scaled).vector;
    for (std::uint32_t j = 0; j < d; ++j) EXPECT_NEAR(ps[j], a * pooled[j], 1e-5 * (1 + std::abs(a * pooled[j])));
  }
}

TEST(MeanPool, ConstantRowsReturnTheRow) {
  Rng rng(2);
  std::vector<float> v(64);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  FrameEmbeddingMatrix m{300, 64, {}};
  for (int r = 0; r < 300; ++r) m.data.insert(m.data.end(), v.begin(), v.end());
  const auto p = mean_pool(m).vector;
  for (std::size_t j = 0; j < v.size(); ++j) EXPECT_NEAR(p[j], v[j], 1e-6 * std::abs(v[j]));
}

class AssembleTest : public ::testing::Test {
 protected:
  ManifestEntry entry(const std::string& id, std::uint32_t dim, Split split, int cls) {
    write_hrf(random_frames(rng_, 5, dim), dir_ / (id + ".hrf"));
    ManifestEntry e;
    e.id = id;
    e.embedding_path = id + ".hrf";
    e.label = decode_label(cls);
    e.split = split;
    return e;
  }

  TempDir dir_{"assemble"};
  Rng rng_{77};
};

TEST_F(AssembleTest, RowsFollowManifestOrder) {
  Manifest m;
  m.entries.push_back(entry("a", 1024, Split::Train, 111));
  m.entries.push_back(entry("b", 1024, Split::Test, 3));
  m.entries.push_back(entry("c", 1024, Split::Train, 0));
  m.entries.push_back(entry("d", 1024, Split::Train, 57));
  const auto ds = assemble(m, Split::Train, dir_.path());
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.dim, 1024u);
  EXPECT_EQ(ds.features.size(), 3u * 1024);
  EXPECT_EQ(ds.ids, (std::vector<std::string>{"a", "c", "d"}));
  EXPECT_EQ(ds.labels, (std::vector<int>{111, 0, 57}));
  const auto pooled = mean_pool(read_hrf(dir_ / "c.hrf")).vector;
  EXPECT_TRUE(std::equal(pooled.begin(), pooled.end(), ds.row(1).begin()));
  EXPECT_TRUE(assemble(m, Split::Val, dir_.path()).empty());
}

TEST_F(AssembleTest, MixedWidthAndMissingFile) {
  Manifest m;
  m.entries.push_back(entry("a", 1024, Split::Train, 1));
  m.entries.push_back(entry("b", 512, Split::Train, 2));
  EXPECT_EQ(code_of([&] { assemble(m, Split::Train, dir_.path()); }), Errc::MixedWidth);
  m.entries[1].embedding_path = "nope.hrf";
  EXPECT_EQ(code_of([&] { assemble(m, Split::Train, dir_.path()); }), Errc::MissingFile);
}

TEST(Dataset, FileRoundTripAndValidation) {
  TempDir dir("ds");
  Rng rng(5);
  EmbeddingDataset ds;
  for (int i = 0; i < 20; ++i) {
    std::vector<float> x(8);
    for (auto& v : x) v = static_cast<float>(rng.normal());
    ds.append(x, i % 7, "row" + std::to_string(i));
  }
  write_dataset(ds, dir / "train");
  const auto back = read_dataset(dir / "train");
  EXPECT_EQ(back.dim, ds.dim);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.ids, ds.ids);

  EXPECT_EQ(code_of([&] { ds.validate(6); }), Errc::LabelOutOfRange);
  EXPECT_EQ(code_of([&] { ds.append(std::vector<float>(9), 0, "wide"); }), Errc::MixedWidth);
  EmbeddingDataset broken = ds;
  broken.ids.pop_back();
  EXPECT_EQ(code_of([&] { broken.validate(7); }), Errc::ShapeMismatch);
}

}  // namespace
}  // namespace horouf
