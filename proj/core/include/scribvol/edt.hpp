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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scribvol/volume.hpp"

namespace scribvol {

/// Exact squared Euclidean distance (in mm^2) from every voxel to the nearest
/// voxel with feature != 0, using separable lower envelopes of parabolas
/// (Felzenszwalb & Huttenlocher) with per-axis spacing. Voxels are +inf when
/// the feature set is empty. `feature` is x-fastest over `dims`.
std::vector<double> squared_distance_transform(std::span<const std::uint8_t> feature,
                                               const Dims& dims, const Spacing& spacing);

}  // namespace scribvol
