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

#include "horouf/error.hpp"

namespace horouf {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptHeader: return "CorruptHeader";
    case Errc::AllSilent: return "AllSilent";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::BadMagic: return "BadMagic";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFinitePayload: return "NonFinitePayload";
    case Errc::MixedWidth: return "MixedWidth";
    case Errc::MissingFile: return "MissingFile";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::StaleTrace: return "StaleTrace";
    case Errc::MeanPlacementFailure: return "MeanPlacementFailure";
    case Errc::DimensionTooLarge: return "DimensionTooLarge";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace horouf
