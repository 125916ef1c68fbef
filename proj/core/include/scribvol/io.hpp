// Copyright 2026 The scribvol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// `.svol` and `.scrib` containers.
//
// An `.svol` file is a UTF-8 text header followed by a raw little-endian
// payload:
//
//   SVOL1
//   kind: scalar | label | probability
//   dims: <nx> <ny> <nz>
//   spacing_mm: <sx> <sy> <sz>          (shortest round-trip decimal)
//   dtype: f32 | f64 | u8 | u32
//   encoding: little-endian
//   order: x-fastest                    (probability: x-fastest,class-fastest)
//   num_labels: <n>                     (label only)
//   num_classes: <K>                    (probability only)
//   simplex: 0 | 1                      (probability only)
//   payload_bytes: <n>
//   end_header
//   <payload>
//
// A `.scrib` file carries the same preamble (kind: scribbles, no dtype) and
// a `count:` line, then one `x y z label` line per entry.

#pragma once

#include <filesystem>
#include <string>

#include "scribvol/volume.hpp"

namespace scribvol {

enum class VolumeKind { kScalar, kLabel, kProbability, kScribbles };

struct SvolHeader {
  VolumeKind kind = VolumeKind::kScalar;
  Dims dims;
  Spacing spacing;
  std::string dtype;
  std::uint32_t num_labels = 0;
  std::size_t num_classes = 0;
  bool simplex = false;
  std::size_t payload_bytes = 0;
  std::size_t count = 0;
};

/// Parses only the header (used to dispatch on kind).
SvolHeader read_header(const std::filesystem::path& path);

ScalarVolume load_volume(const std::filesystem::path& path);
void save_volume(const ScalarVolume& volume, const std::filesystem::path& path);

LabelVolume load_labels(const std::filesystem::path& path);
void save_labels(const LabelVolume& labels, const std::filesystem::path& path);

/// Stored as f64 so load(save(p)) is bit-exact; f32 payloads are accepted on load.
ProbabilityVolume load_probabilities(const std::filesystem::path& path);
void save_probabilities(const ProbabilityVolume& probs, const std::filesystem::path& path);

ScribbleSet load_scribbles(const std::filesystem::path& path);
void save_scribbles(const ScribbleSet& scribbles, const std::filesystem::path& path);

}  // namespace scribvol
