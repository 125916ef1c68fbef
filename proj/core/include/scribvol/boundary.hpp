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

// Static pseudo boundary: per-slice Canny-style edges stacked into a binary
// volume. Externally computed edge volumes can be binarized instead.

#pragma once

#include <cstddef>
#include <vector>

#include "scribvol/image2d.hpp"
#include "scribvol/volume.hpp"

namespace scribvol::boundary {

enum class ThresholdMode {
  kAbsolute,  // low/high compared directly with gradient magnitude
  kQuantile,  // low/high are quantiles of the slice's nonzero magnitudes
};

struct EdgeParams {
  double low = 0.7;
  double high = 0.9;
  ThresholdMode mode = ThresholdMode::kQuantile;
  double sigma = 1.0;
};

struct EdgeMap {
  Mask2D edges;
  /// Smoothed gradient magnitude before suppression.
  Image2D<double> strength;
  /// Set for slices with a single row or column; `edges` is then empty.
  bool degenerate = false;
};

/// Gaussian smoothing, central-difference gradient, non-maximum suppression
/// along the gradient direction (quantized to 4 sectors) and hysteresis with
/// 8-connectivity. The slice minimum is subtracted first.
///
/// NMS convention: a pixel survives when its magnitude is >= the neighbour
/// on the negative gradient side and > the one on the positive side, so a
/// rising step between columns c-1 and c yields edges on column c.
EdgeMap edge_slice(const Image2D<double>& slice, const EdgeParams& params = {});
EdgeMap edge_slice(const Image2D<double>& slice, double low, double high,
                   ThresholdMode mode = ThresholdMode::kAbsolute);

struct StaticBoundary {
  LabelVolume y_b;
  ScalarVolume strength;
  std::vector<std::size_t> degenerate_slices;
};

/// Stacks edge_slice over every axial slice. Depends only on the volume.
StaticBoundary static_boundary(const ScalarVolume& volume, const EdgeParams& params = {});

/// y_B from an externally computed edge volume: value >= level becomes 1.
LabelVolume binarize_edges(const ScalarVolume& edges, double level = 0.5);

}  // namespace scribvol::boundary
