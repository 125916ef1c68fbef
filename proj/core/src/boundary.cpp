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

#include "scribvol/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scribvol/numeric.hpp"

namespace scribvol::boundary {

namespace {

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

}  // namespace

EdgeMap edge_slice(const Image2D<double>& slice, const EdgeParams& params) {
  require(params.high >= params.low && params.low >= 0.0, ErrorCode::kInvalidArgument,
          "edge thresholds need high >= low >= 0");
  if (params.mode == ThresholdMode::kQuantile) {
    require(params.high <= 1.0, ErrorCode::kInvalidArgument, "quantile thresholds must be <= 1");
  }
  EdgeMap out;
  out.edges = Mask2D(slice.width, slice.height);
  out.strength = Image2D<double>(slice.width, slice.height);
  if (slice.width < 2 || slice.height < 2) {
    out.degenerate = true;
    return out;
  }
  const std::size_t w = slice.width;
  const std::size_t h = slice.height;

  Image2D<double> shifted = slice;
  const double lo = *std::min_element(slice.pixels.begin(), slice.pixels.end());
  for (double& v : shifted.pixels) v -= lo;
  const auto smooth = gaussian_blur(shifted, params.sigma);

  Image2D<double> gx(w, h), gy(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t x0 = x > 0 ? x - 1 : x, x1 = x + 1 < w ? x + 1 : x;
      const std::size_t y0 = y > 0 ? y - 1 : y, y1 = y + 1 < h ? y + 1 : y;
      gx.at(x, y) = (smooth.at(x1, y) - smooth.at(x0, y)) / static_cast<double>(x1 - x0);
      gy.at(x, y) = (smooth.at(x, y1) - smooth.at(x, y0)) / static_cast<double>(y1 - y0);
      out.strength.at(x, y) = std::hypot(gx.at(x, y), gy.at(x, y));
    }
  }
  const auto& mag = out.strength;
  const double peak = *std::max_element(mag.pixels.begin(), mag.pixels.end());
  if (peak <= 0.0) return out;
  // Ties at rounding level count as equal, both for suppression and for the
  // thresholds (a quantile can land one ulp above its mirror-image twin).
  const double tol = 1e-9 * peak;

  double t_low = params.low;
  double t_high = params.high;
  if (params.mode == ThresholdMode::kQuantile) {
    std::vector<double> nonzero;
    for (double v : mag.pixels) {
      if (v > 0.0) nonzero.push_back(v);
    }
    t_low = quantile(nonzero, params.low);
    t_high = quantile(nonzero, params.high);
  }

  // 0 = suppressed, 1 = weak, 2 = strong.
  Mask2D state(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double m = mag.at(x, y);
      if (m <= 0.0 || m < t_low - tol) continue;
      const double theta = std::atan2(gy.at(x, y), gx.at(x, y));
      const double q = std::round(theta / (std::numbers::pi / 4.0)) * (std::numbers::pi / 4.0);
      const auto dx = static_cast<std::int64_t>(std::lround(std::cos(q)));
      const auto dy = static_cast<std::int64_t>(std::lround(std::sin(q)));
      const auto ix = static_cast<std::int64_t>(x);
      const auto iy = static_cast<std::int64_t>(y);
      auto sample = [&](std::int64_t sx, std::int64_t sy) {
        return mag.inside(sx, sy) ? mag.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy)) : 0.0;
      };
      const double behind = sample(ix - dx, iy - dy);
      const double ahead = sample(ix + dx, iy + dy);
      if (m >= behind - tol && m > ahead + tol) state.at(x, y) = m >= t_high - tol ? 2 : 1;
    }
  }

  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.pixels[i] == 2) {
      out.edges.pixels[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t p = stack.back();
    stack.pop_back();
    const auto x = static_cast<std::int64_t>(p % w);
    const auto y = static_cast<std::int64_t>(p / w);
    for (std::int64_t ny = y - 1; ny <= y + 1; ++ny) {
      for (std::int64_t nx = x - 1; nx <= x + 1; ++nx) {
        if (!state.inside(nx, ny)) continue;
        const std::size_t q = static_cast<std::size_t>(nx) + w * static_cast<std::size_t>(ny);
        if (state.pixels[q] && !out.edges.pixels[q]) {
          out.edges.pixels[q] = 1;
          stack.push_back(q);
        }
      }
    }
  }
  return out;
}

EdgeMap edge_slice(const Image2D<double>& slice, double low, double high, ThresholdMode mode) {
  EdgeParams p;
  p.low = low;
  p.high = high;
  p.mode = mode;
  return edge_slice(slice, p);
}

StaticBoundary static_boundary(const ScalarVolume& volume, const EdgeParams& params) {
  const Dims& d = volume.dims();
  std::vector<EdgeMap> maps(d.nz);
  parallel_for(d.nz, [&](std::size_t z) { maps[z] = edge_slice(extract_slice(volume, z), params); });
  std::vector<std::uint32_t> yb(volume.size());
  std::vector<float> strength(volume.size());
  std::vector<std::size_t> degenerate;
  const std::size_t plane = d.slice_size();
  for (std::size_t z = 0; z < d.nz; ++z) {
    if (maps[z].degenerate) degenerate.push_back(z);
    for (std::size_t i = 0; i < plane; ++i) {
      yb[z * plane + i] = maps[z].edges.pixels[i];
      strength[z * plane + i] = static_cast<float>(maps[z].strength.pixels[i]);
    }
  }
  return {LabelVolume(volume.geometry(), std::move(yb), 2),
          ScalarVolume(volume.geometry(), std::move(strength)), std::move(degenerate)};
}

LabelVolume binarize_edges(const ScalarVolume& edges, double level) {
  std::vector<std::uint32_t> yb(edges.size());
  for (std::size_t i = 0; i < yb.size(); ++i) yb[i] = edges[i] >= level ? 1 : 0;
  return LabelVolume(edges.geometry(), std::move(yb), 2);
}

}  // namespace scribvol::boundary
