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

#include "scribvol/image2d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scribvol/edt.hpp"

namespace scribvol {

Image2D<double> extract_slice(const ScalarVolume& volume, std::size_t z) {
  const auto& d = volume.dims();
  require(z < d.nz, ErrorCode::kOutOfBounds, "slice index out of range");
  Image2D<double> out(d.nx, d.ny);
  const auto data = volume.data().subspan(z * d.slice_size(), d.slice_size());
  std::copy(data.begin(), data.end(), out.pixels.begin());
  return out;
}

Mask2D extract_label_mask(const LabelVolume& labels, std::size_t z, std::uint32_t label) {
  const auto& d = labels.dims();
  require(z < d.nz, ErrorCode::kOutOfBounds, "slice index out of range");
  Mask2D out(d.nx, d.ny);
  const auto data = labels.data().subspan(z * d.slice_size(), d.slice_size());
  for (std::size_t i = 0; i < data.size(); ++i) out.pixels[i] = data[i] == label ? 1 : 0;
  return out;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

// Mirror (reflect-101) index into [0, n).
std::int64_t mirror(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

Image2D<double> squared_distance_2d(const Mask2D& feature) {
  Image2D<double> out(feature.width, feature.height);
  out.pixels = squared_distance_transform(feature.pixels, Dims{feature.width, feature.height, 1},
                                          Spacing{1.0, 1.0, 1.0});
  return out;
}

}  // namespace

Image2D<double> gaussian_blur(const Image2D<double>& image, double sigma) {
  if (sigma <= 0.0 || image.size() == 0) return image;
  const auto k = gaussian_kernel(sigma);
  const std::int64_t r = static_cast<std::int64_t>(k.size() / 2);
  const auto w = static_cast<std::int64_t>(image.width);
  const auto h = static_cast<std::int64_t>(image.height);
  Image2D<double> tmp(image.width, image.height);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::int64_t t = -r; t <= r; ++t) acc += k[t + r] * image.at(mirror(x + t, w), y);
      tmp.at(x, y) = acc;
    }
  }
  Image2D<double> out(image.width, image.height);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::int64_t t = -r; t <= r; ++t) acc += k[t + r] * tmp.at(x, mirror(y + t, h));
      out.at(x, y) = acc;
    }
  }
  return out;
}

Mask2D dilate_disk(const Mask2D& mask, double radius) {
  const auto dist = squared_distance_2d(mask);
  Mask2D out(mask.width, mask.height);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels[i] = dist.pixels[i] <= r2 ? 1 : 0;
  return out;
}

Mask2D erode_disk(const Mask2D& mask, double radius) {
  Mask2D complement(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.size(); ++i) complement.pixels[i] = mask.pixels[i] ? 0 : 1;
  const auto dist = squared_distance_2d(complement);
  Mask2D out(mask.width, mask.height);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.pixels[i] = (mask.pixels[i] && dist.pixels[i] > r2) ? 1 : 0;
  }
  return out;
}

Mask2D close_3x3(const Mask2D& mask) {
  const auto w = static_cast<std::int64_t>(mask.width);
  const auto h = static_cast<std::int64_t>(mask.height);
  Mask2D dilated(mask.width, mask.height);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (std::int64_t dy = -1; dy <= 1 && !v; ++dy) {
        for (std::int64_t dx = -1; dx <= 1 && !v; ++dx) {
          if (mask.inside(x + dx, y + dy) && mask.at(x + dx, y + dy)) v = 1;
        }
      }
      dilated.at(x, y) = v;
    }
  }
  Mask2D out(mask.width, mask.height);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      std::uint8_t v = 1;
      for (std::int64_t dy = -1; dy <= 1 && v; ++dy) {
        for (std::int64_t dx = -1; dx <= 1 && v; ++dx) {
          if (dilated.inside(x + dx, y + dy) && !dilated.at(x + dx, y + dy)) v = 0;
        }
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

Components2D connected_components(const Mask2D& mask, bool eight_connected) {
  Components2D cc;
  cc.labels = Image2D<std::uint32_t>(mask.width, mask.height, 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask.pixels[start] || cc.labels.pixels[start]) continue;
    const std::uint32_t id = ++cc.count;
    cc.labels.pixels[start] = id;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const auto x = static_cast<std::int64_t>(p % mask.width);
      const auto y = static_cast<std::int64_t>(p / mask.width);
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (!eight_connected && dx != 0 && dy != 0) continue;
          if (!mask.inside(x + dx, y + dy)) continue;
          const std::size_t q = static_cast<std::size_t>(x + dx) + mask.width * static_cast<std::size_t>(y + dy);
          if (mask.pixels[q] && !cc.labels.pixels[q]) {
            cc.labels.pixels[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
  }
  return cc;
}

std::size_t count_nonzero(const Mask2D& mask) {
  return static_cast<std::size_t>(std::count_if(mask.pixels.begin(), mask.pixels.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

}  // namespace scribvol
