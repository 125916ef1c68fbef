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

// Small 2D raster helpers used for per-slice processing (edges, SSIM,
// thinning, morphology).

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scribvol/volume.hpp"

namespace scribvol {

template <typename T>
struct Image2D {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<T> pixels;

  Image2D() = default;
  Image2D(std::size_t w, std::size_t h, T fill = T{}) : width(w), height(h), pixels(w * h, fill) {}

  T& at(std::size_t x, std::size_t y) { return pixels[x + width * y]; }
  const T& at(std::size_t x, std::size_t y) const { return pixels[x + width * y]; }
  bool inside(std::int64_t x, std::int64_t y) const {
    return x >= 0 && y >= 0 && static_cast<std::size_t>(x) < width &&
           static_cast<std::size_t>(y) < height;
  }
  std::size_t size() const { return pixels.size(); }

  friend bool operator==(const Image2D&, const Image2D&) = default;
};

using Mask2D = Image2D<std::uint8_t>;

Image2D<double> extract_slice(const ScalarVolume& volume, std::size_t z);
/// Pixels equal to `label` on slice z.
Mask2D extract_label_mask(const LabelVolume& labels, std::size_t z, std::uint32_t label);

/// Separable Gaussian blur with mirrored borders; sigma <= 0 is identity.
Image2D<double> gaussian_blur(const Image2D<double>& image, double sigma);

/// Binary dilation/erosion with a Euclidean disk of the given radius in pixels.
/// Pixels outside the image count as background for dilation and are ignored
/// for erosion.
Mask2D dilate_disk(const Mask2D& mask, double radius);
Mask2D erode_disk(const Mask2D& mask, double radius);

/// 3x3 square closing; the result is clipped to image bounds.
Mask2D close_3x3(const Mask2D& mask);

/// Connected-component labelling (8- or 4-connected); background is 0 and
/// components are numbered 1..count in raster order of first pixel.
struct Components2D {
  Image2D<std::uint32_t> labels;
  std::uint32_t count = 0;
};
Components2D connected_components(const Mask2D& mask, bool eight_connected = true);

std::size_t count_nonzero(const Mask2D& mask);

}  // namespace scribvol
