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

#include "scribvol/skeleton.hpp"

#include <limits>

namespace scribvol::shape {

namespace {

std::uint8_t px(const Mask2D& m, std::int64_t x, std::int64_t y) {
  return m.inside(x, y) ? (m.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) ? 1 : 0) : 0;
}

// One Zhang-Suen sub-iteration; returns the number of deleted pixels.
std::size_t zhang_suen_pass(Mask2D& m, int step) {
  std::vector<std::size_t> doomed;
  for (std::size_t y = 0; y < m.height; ++y) {
    for (std::size_t x = 0; x < m.width; ++x) {
      if (!m.at(x, y)) continue;
      const auto ix = static_cast<std::int64_t>(x);
      const auto iy = static_cast<std::int64_t>(y);
      // P2..P9 clockwise from north.
      const std::uint8_t p[8] = {px(m, ix, iy - 1),     px(m, ix + 1, iy - 1), px(m, ix + 1, iy),
                                 px(m, ix + 1, iy + 1), px(m, ix, iy + 1),     px(m, ix - 1, iy + 1),
                                 px(m, ix - 1, iy),     px(m, ix - 1, iy - 1)};
      int b = 0;
      int a = 0;
      for (int i = 0; i < 8; ++i) {
        b += p[i];
        a += (p[i] == 0 && p[(i + 1) % 8] == 1);
      }
      if (b < 2 || b > 6 || a != 1) continue;
      const std::uint8_t n = p[0], e = p[2], s = p[4], w = p[6];
      const bool ok = step == 0 ? (n * e * s == 0 && e * s * w == 0) : (n * e * w == 0 && n * s * w == 0);
      if (ok) doomed.push_back(x + m.width * y);
    }
  }
  for (std::size_t i : doomed) m.pixels[i] = 0;
  return doomed.size();
}

Mask2D zhang_suen(const Mask2D& mask) {
  Mask2D m = mask;
  while (true) {
    const std::size_t removed = zhang_suen_pass(m, 0) + zhang_suen_pass(m, 1);
    if (removed == 0) break;
  }
  return m;
}

// Components of `original` that lost every pixel get back the pixel nearest
// to their centroid.
void restore_vanished(const Mask2D& original, Mask2D& thinned) {
  const auto cc = connected_components(original, true);
  if (cc.count == 0) return;
  std::vector<std::uint8_t> survived(cc.count + 1, 0);
  std::vector<double> sx(cc.count + 1, 0.0), sy(cc.count + 1, 0.0), sn(cc.count + 1, 0.0);
  for (std::size_t y = 0; y < original.height; ++y) {
    for (std::size_t x = 0; x < original.width; ++x) {
      const std::uint32_t id = cc.labels.at(x, y);
      if (!id) continue;
      if (thinned.at(x, y)) survived[id] = 1;
      sx[id] += static_cast<double>(x);
      sy[id] += static_cast<double>(y);
      sn[id] += 1.0;
    }
  }
  std::vector<double> best(cc.count + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_at(cc.count + 1, 0);
  for (std::size_t y = 0; y < original.height; ++y) {
    for (std::size_t x = 0; x < original.width; ++x) {
      const std::uint32_t id = cc.labels.at(x, y);
      if (!id || survived[id]) continue;
      const double dx = static_cast<double>(x) - sx[id] / sn[id];
      const double dy = static_cast<double>(y) - sy[id] / sn[id];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best[id]) {
        best[id] = d2;
        best_at[id] = x + original.width * y;
      }
    }
  }
  for (std::uint32_t id = 1; id <= cc.count; ++id) {
    if (!survived[id]) thinned.pixels[best_at[id]] = 1;
  }
}

}  // namespace

int neighbour_count(const Mask2D& mask, std::size_t x, std::size_t y) {
  int n = 0;
  const auto ix = static_cast<std::int64_t>(x);
  const auto iy = static_cast<std::int64_t>(y);
  for (std::int64_t dy = -1; dy <= 1; ++dy) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      if (dx || dy) n += px(mask, ix + dx, iy + dy);
    }
  }
  return n;
}

Mask2D thin(const Mask2D& mask) {
  require(count_nonzero(mask) > 0, ErrorCode::kInvalidArgument, "cannot skeletonize an empty mask");
  Mask2D skel = zhang_suen(mask);
  Mask2D closed = close_3x3(skel);
  for (std::size_t i = 0; i < closed.size(); ++i) closed.pixels[i] &= mask.pixels[i] ? 1 : 0;
  skel = zhang_suen(closed);
  restore_vanished(mask, skel);
  return skel;
}

Skeleton skeletonize(const Mask2D& mask, double spacing_x, double spacing_y, std::size_t slice,
                     std::uint32_t label) {
  const Mask2D skel = thin(mask);
  Skeleton out;
  out.slice = slice;
  out.label = label;
  for (std::size_t y = 0; y < skel.height; ++y) {
    for (std::size_t x = 0; x < skel.width; ++x) {
      if (!skel.at(x, y)) continue;
      out.pixels.push_back({static_cast<std::int64_t>(x), static_cast<std::int64_t>(y)});
      out.points_mm.push_back({static_cast<double>(x) * spacing_x, static_cast<double>(y) * spacing_y});
    }
  }
  return out;
}

}  // namespace scribvol::shape
