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

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "scribvol/image2d.hpp"

namespace scribvol::shape {

/// A 1-pixel-wide skeleton of one class region on one axial slice.
struct Skeleton {
  std::size_t slice = 0;
  std::uint32_t label = 0;
  /// Skeleton pixels in raster order, as (x, y) pixel indices.
  std::vector<std::array<std::int64_t, 2>> pixels;
  /// The same points in millimetres (x * sx, y * sy).
  std::vector<std::array<double, 2>> points_mm;
};

/// Topology-preserving thinning (Zhang-Suen border-pixel removal, iterated to
/// a fixed point), then a 3x3 closing clipped to the input mask to bridge
/// 1-pixel gaps, then a final thinning pass so the result stays 1 pixel wide.
/// A region that thins away entirely keeps the pixel nearest its centroid.
/// Throws kInvalidArgument on an empty mask.
Mask2D thin(const Mask2D& mask);

Skeleton skeletonize(const Mask2D& mask, double spacing_x = 1.0, double spacing_y = 1.0,
                     std::size_t slice = 0, std::uint32_t label = 0);

/// Count of 8-neighbours that are set.
int neighbour_count(const Mask2D& mask, std::size_t x, std::size_t y);

}  // namespace scribvol::shape
