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

#include "horouf/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "horouf/error.hpp"
#include "horouf/rng.hpp"

namespace horouf {

namespace {

using nlohmann::json;

struct ConsonantInfo {
  std::string_view name;
  char32_t codepoint;
};

constexpr std::array<ConsonantInfo, kNumConsonants> kConsonants{{
    {"alif", U'ا'}, {"ba", U'ب'},   {"ta", U'ت'},   {"tha", U'ث'},
    {"jim", U'ج'},  {"hha", U'ح'},  {"kha", U'خ'},  {"dal", U'د'},
    {"dhal", U'ذ'}, {"ra", U'ر'},   {"zay", U'ز'},  {"sin", U'س'},
    {"shin", U'ش'}, {"sad", U'ص'},  {"dad", U'ض'},  {"tta", U'ط'},
    {"zza", U'ظ'},  {"ayn", U'ع'},  {"ghayn", U'غ'}, {"fa", U'ف'},
    {"qaf", U'ق'},  {"kaf", U'ك'},  {"lam", U'ل'},  {"mim", U'م'},
    {"nun", U'ن'},  {"ha", U'ه'},   {"waw", U'و'},  {"ya", U'ي'},
}};

constexpr std::array<std::string_view, kNumDiacritics> kDiacritics{"fatha", "kasra", "damma",
                                                                   "sukoon"};
constexpr std::array<std::string_view, 3> kGenders{"male", "female", "unspecified"};
constexpr std::array<std::string_view, 9> kAgeBands{"0-9",   "10-19", "20-29",
                                                    "30-39", "40-49", "50-59",
                                                    "60-69", "70+",   "unspecified"};
constexpr std::array<std::string_view, 7> kContinents{
    "africa", "asia", "europe", "north_america", "south_america", "oceania", "unspecified"};
constexpr std::array<std::string_view, 3> kSplits{"train", "val", "test"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

[[noreturn]] void parse_fail(const std::string& what) { throw Error(Errc::ParseError, what); }

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where, bool strict, std::vector<std::string>* warnings) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    std::string msg = "unknown field '" + key + "' in " + std::string(where);
    if (strict) parse_fail(msg);
    if (warnings) warnings->push_back(msg);
  }
}

template <typename Enum, std::size_t N>
Enum enum_field(const json& obj, const char* key, const std::array<std::string_view, N>& names,
                Enum fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) parse_fail(std::string("field '") + key + "' must be a string");
  auto parsed = lookup<Enum>(names, it->get<std::string>());
  if (!parsed) parse_fail(std::string("bad value for '") + key + "': " + it->get<std::string>());
  return *parsed;
}

}  // namespace

int encode_label(LetterLabel label) {
  return static_cast<int>(label.consonant) * kNumDiacritics + static_cast<int>(label.diacritic);
}

LetterLabel decode_label(int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw Error(Errc::OutOfRange, "class id " + std::to_string(class_id) + " not in [0, 112)");
  }
  return {static_cast<Consonant>(class_id / kNumDiacritics),
          static_cast<Diacritic>(class_id % kNumDiacritics)};
}

std::string_view consonant_name(Consonant c) { return kConsonants[static_cast<int>(c)].name; }
char32_t consonant_codepoint(Consonant c) { return kConsonants[static_cast<int>(c)].codepoint; }
std::string_view diacritic_name(Diacritic d) { return kDiacritics[static_cast<int>(d)]; }

std::optional<Consonant> parse_consonant(std::string_view name) {
  for (int i = 0; i < kNumConsonants; ++i) {
    if (kConsonants[i].name == name) return static_cast<Consonant>(i);
  }
  return std::nullopt;
}

std::optional<Diacritic> parse_diacritic(std::string_view name) {
  return lookup<Diacritic>(kDiacritics, name);
}

std::string label_string(LetterLabel label) {
  return std::string(consonant_name(label.consonant)) + "+" +
         std::string(diacritic_name(label.diacritic));
}

std::string_view split_name(Split s) { return kSplits[static_cast<int>(s)]; }
std::optional<Split> parse_split(std::string_view name) { return lookup<Split>(kSplits, name); }

void Manifest::validate() const {
  std::set<std::string_view> seen;
  for (const auto& e : entries) {
    if (e.id.empty()) throw Error(Errc::InvalidSpec, "manifest entry with empty id");
    if (!seen.insert(e.id).second) throw Error(Errc::InvalidSpec, "duplicate id " + e.id);
    if (e.audio_path.empty() && e.embedding_path.empty()) {
      throw Error(Errc::InvalidSpec, "entry " + e.id + " has neither audio nor embedding path");
    }
    if (e.augmented && e.augmented->source_id.empty()) {
      throw Error(Errc::InvalidSpec, "augmented entry " + e.id + " has no source");
    }
  }
}

const ManifestEntry* Manifest::find(std::string_view id) const {
  auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.id == id; });
  return it == entries.end() ? nullptr : &*it;
}

ManifestEntry parse_manifest_line(std::string_view line, bool strict,
                                  std::vector<std::string>* warnings) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& ex) {
    parse_fail(ex.what());
  }
  if (!j.is_object()) parse_fail("manifest line is not an object");
  check_keys(j, {"id", "audio_path", "embedding_path", "label", "speaker", "split", "provenance"},
             "entry", strict, warnings);

  ManifestEntry e;
  try {
    e.id = j.at("id").get<std::string>();
    e.audio_path = j.value("audio_path", std::string{});
    e.embedding_path = j.value("embedding_path", std::string{});

    const json& label = j.at("label");
    check_keys(label, {"consonant", "diacritic"}, "label", strict, warnings);
    auto consonant = parse_consonant(label.at("consonant").get<std::string>());
    auto diacritic = parse_diacritic(label.at("diacritic").get<std::string>());
    if (!consonant || !diacritic) parse_fail("unknown label in entry " + e.id);
    e.label = {*consonant, *diacritic};

    if (auto it = j.find("speaker"); it != j.end() && !it->is_null()) {
      const json& sp = *it;
      check_keys(sp, {"gender", "age_band", "native", "continent"}, "speaker", strict, warnings);
      e.speaker.gender = enum_field(sp, "gender", kGenders, Gender::Unspecified);
      e.speaker.age_band = enum_field(sp, "age_band", kAgeBands, AgeBand::Unspecified);
      e.speaker.continent = enum_field(sp, "continent", kContinents, Continent::Unspecified);
      if (auto n = sp.find("native"); n != sp.end() && !n->is_null()) {
        e.speaker.native = n->get<bool>();
      }
    }

    if (auto it = j.find("split"); it != j.end() && !it->is_null()) {
      auto s = parse_split(it->get<std::string>());
      if (!s) parse_fail("bad split in entry " + e.id);
      e.split = s;
    }

    if (auto it = j.find("provenance"); it != j.end() && !it->is_null()) {
      const json& p = *it;
      check_keys(p, {"kind", "source", "augment", "param", "seed"}, "provenance", strict, warnings);
      const auto kind = p.at("kind").get<std::string>();
      if (kind == "augmented") {
        AugmentOrigin origin;
        origin.source_id = p.at("source").get<std::string>();
        origin.kind = p.at("augment").get<std::string>();
        origin.param = p.at("param").get<double>();
        origin.seed = p.at("seed").get<std::uint64_t>();
        e.augmented = std::move(origin);
      } else if (kind != "original") {
        parse_fail("bad provenance kind '" + kind + "'");
      }
    }
  } catch (const json::exception& ex) {
    parse_fail("entry " + e.id + ": " + ex.what());
  }
  if (e.audio_path.empty() && e.embedding_path.empty()) {
    parse_fail("entry " + e.id + " has neither audio_path nor embedding_path");
  }
  return e;
}

std::string format_manifest_line(const ManifestEntry& e) {
  // ordered_json keeps the field order stable in output files
  nlohmann::ordered_json j;
  j["id"] = e.id;
  if (!e.audio_path.empty()) j["audio_path"] = e.audio_path;
  if (!e.embedding_path.empty()) j["embedding_path"] = e.embedding_path;
  j["label"] = {{"consonant", consonant_name(e.label.consonant)},
                {"diacritic", diacritic_name(e.label.diacritic)}};
  nlohmann::ordered_json sp;
  sp["gender"] = kGenders[static_cast<int>(e.speaker.gender)];
  sp["age_band"] = kAgeBands[static_cast<int>(e.speaker.age_band)];
  if (e.speaker.native) {
    sp["native"] = *e.speaker.native;
  } else {
    sp["native"] = nullptr;
  }
  sp["continent"] = kContinents[static_cast<int>(e.speaker.continent)];
  j["speaker"] = sp;
  if (e.split) j["split"] = split_name(*e.split);
  if (e.augmented) {
    j["provenance"] = {{"kind", "augmented"},
                       {"source", e.augmented->source_id},
                       {"augment", e.augmented->kind},
                       {"param", e.augmented->param},
                       {"seed", e.augmented->seed}};
  } else {
    j["provenance"] = {{"kind", "original"}};
  }
  return j.dump();
}

ManifestLoad read_manifest(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, "cannot open manifest " + path.string());
  ManifestLoad load;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      load.manifest.entries.push_back(parse_manifest_line(line, strict, &load.warnings));
    } catch (const Error& ex) {
      throw Error(ex.code(), path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  load.manifest.validate();
  return load;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write manifest " + path.string());
  for (const auto& e : manifest.entries) out << format_manifest_line(e) << '\n';
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::vector<Split> stratified_split(std::span<const int> classes,
                                    std::span<const std::string> ids, double train_frac,
                                    double val_frac, std::uint64_t seed) {
  if (classes.size() != ids.size()) {
    throw Error(Errc::ShapeMismatch, "class and id lists differ in length");
  }
  if (train_frac < 0 || val_frac < 0 || train_frac + val_frac >= 1.0) {
    throw Error(Errc::InvalidSpec, "split fractions must be non-negative with train + val < 1");
  }
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < classes.size(); ++i) members[classes[i]].push_back(i);

  std::vector<Split> out(classes.size(), Split::Test);
  for (auto& [cls, idx] : members) {
    std::vector<std::pair<std::uint64_t, std::string_view>> keyed;
    keyed.reserve(idx.size());
    std::unordered_map<std::string_view, std::size_t> where;
    for (std::size_t i : idx) {
      keyed.emplace_back(mix_seed(seed, ids[i]), ids[i]);
      where.emplace(ids[i], i);
    }
    std::sort(keyed.begin(), keyed.end());
    const auto n = static_cast<double>(idx.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * train_frac));
    const auto n_val =
        std::min(idx.size() - std::min(n_train, idx.size()),
                 static_cast<std::size_t>(std::llround(n * val_frac)));
    for (std::size_t r = 0; r < keyed.size(); ++r) {
      const std::size_t i = where.at(keyed[r].second);
      out[i] = r < n_train ? Split::Train : (r < n_train + n_val ? Split::Val : Split::Test);
    }
  }
  return out;
}

Manifest split_manifest(const Manifest& manifest, double train_frac, double val_frac,
                        std::uint64_t seed) {
  manifest.validate();
  std::vector<int> classes;
  std::vector<std::string> ids;
  std::vector<std::size_t> positions;
  std::set<int> original_classes;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (!e.is_original()) continue;
    classes.push_back(encode_label(e.label));
    ids.push_back(e.id);
    positions.push_back(i);
    original_classes.insert(classes.back());
  }
  for (const auto& e : manifest.entries) {
    if (!e.is_original() && !original_classes.contains(encode_label(e.label))) {
      throw Error(Errc::EmptyClass, "class " + label_string(e.label) + " has no original entries");
    }
  }

  const auto assignment = stratified_split(classes, ids, train_frac, val_frac, seed);
  Manifest out = manifest;
  std::unordered_map<std::string_view, Split> by_id;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    out.entries[positions[k]].split = assignment[k];
    by_id.emplace(manifest.entries[positions[k]].id, assignment[k]);
  }
  for (auto& e : out.entries) {
    if (e.is_original()) continue;
    auto it = by_id.find(e.augmented->source_id);
    if (it == by_id.end()) {
      throw Error(Errc::InvalidSpec,
                  "augmented entry " + e.id + " references unknown source " + e.augmented->source_id);
    }
    e.split = it->second;
  }
  return out;
}

}  // namespace horouf
