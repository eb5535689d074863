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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace horouf {

// The 28 consonants in alphabetical (hija'i) order. The index of each
// enumerator is part of the class-id format and must not be reordered.
enum class Consonant : std::uint8_t {
  Alif, Ba, Ta, Tha, Jim, Hha, Kha, Dal, Dhal, Ra, Zay, Sin, Shin, Sad,
  Dad, Tta, Zza, Ayn, Ghayn, Fa, Qaf, Kaf, Lam, Mim, Nun, Ha, Waw, Ya,
};

// Index order is frozen: fatha=0, kasra=1, damma=2, sukoon=3.
enum class Diacritic : std::uint8_t { Fatha, Kasra, Damma, Sukoon };

inline constexpr int kNumConsonants = 28;
inline constexpr int kNumDiacritics = 4;
inline constexpr int kNumClasses = kNumConsonants * kNumDiacritics;

struct LetterLabel {
  Consonant consonant = Consonant::Alif;
  Diacritic diacritic = Diacritic::Fatha;

  friend bool operator==(const LetterLabel&, const LetterLabel&) = default;
};

int encode_label(LetterLabel label);
// Throws Error(OutOfRange) outside [0, kNumClasses).
LetterLabel decode_label(int class_id);

std::string_view consonant_name(Consonant c);
char32_t consonant_codepoint(Consonant c);
std::string_view diacritic_name(Diacritic d);
std::optional<Consonant> parse_consonant(std::string_view name);
std::optional<Diacritic> parse_diacritic(std::string_view name);
// e.g. "ba+kasra"
std::string label_string(LetterLabel label);

enum class Gender : std::uint8_t { Male, Female, Unspecified };
enum class AgeBand : std::uint8_t {
  Under10, Teens, Twenties, Thirties, Forties, Fifties, Sixties, SeventyPlus, Unspecified,
};
enum class Continent : std::uint8_t {
  Africa, Asia, Europe, NorthAmerica, SouthAmerica, Oceania, Unspecified,
};

struct SpeakerMeta {
  Gender gender = Gender::Unspecified;
  AgeBand age_band = AgeBand::Unspecified;
  std::optional<bool> native;
  Continent continent = Continent::Unspecified;

  friend bool operator==(const SpeakerMeta&, const SpeakerMeta&) = default;
};

enum class Split : std::uint8_t { Train, Val, Test };

std::string_view split_name(Split s);
std::optional<Split> parse_split(std::string_view name);

// Provenance of an augmented entry. Each augmentation kind carries exactly
// one numeric parameter plus the seed of its generator.
struct AugmentOrigin {
  std::string source_id;
  std::string kind;
  double param = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const AugmentOrigin&, const AugmentOrigin&) = default;
};

struct ManifestEntry {
  std::string id;
  std::string audio_path;
  std::string embedding_path;
  LetterLabel label;
  SpeakerMeta speaker;
  std::optional<Split> split;  // unassigned until split_manifest runs
  std::optional<AugmentOrigin> augmented;  // empty for originals

  bool is_original() const { return !augmented.has_value(); }

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  // Throws Error(InvalidSpec) on duplicate ids or entries without any path.
  void validate() const;
  const ManifestEntry* find(std::string_view id) const;
};

struct ManifestLoad {
  Manifest manifest;
  std::vector<std::string> warnings;
};

// JSON-lines manifest I/O. In strict mode unknown fields are an error;
// otherwise they are skipped and reported in `warnings`.
ManifestEntry parse_manifest_line(std::string_view line, bool strict,
                                  std::vector<std::string>* warnings = nullptr);
std::string format_manifest_line(const ManifestEntry& entry);
ManifestLoad read_manifest(const std::filesystem::path& path, bool strict = false);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Per-class stratified assignment. Within each class the members are ordered
// by a seeded hash of their id, so the result depends on ids and seed only.
// Each class gets round(n * train_frac) Train and round(n * val_frac) Val
// members; the rest go to Test.
std::vector<Split> stratified_split(std::span<const int> classes,
                                    std::span<const std::string> ids,
                                    double train_frac, double val_frac,
                                    std::uint64_t seed);

// Splits originals per class and propagates each assignment to the
// augmented children of that original.
Manifest split_manifest(const Manifest& manifest, double train_frac, double val_frac,
                        std::uint64_t seed);

}  // namespace horouf
