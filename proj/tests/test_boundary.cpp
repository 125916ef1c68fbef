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

#include "doctest.h"
#include "oracles.hpp"
#include "scribvol/boundary.hpp"
#include "scribvol/evalsim.hpp"
#include "scribvol/image2d.hpp"

using namespace scribvol;
using namespace scribvol::boundary;

namespace {

Image2D<double> step_image(std::size_t w, std::size_t h, std::size_t column) {
  Image2D<double> img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = column; x < w; ++x) img.at(x, y) = 1.0;
  }
  return img;
}

// Fills [lo, hi) x [lo, hi) with `value`.
void fill_square(Image2D<double>& img, std::size_t lo, std::size_t hi, double value) {
  for (std::size_t y = lo; y < hi; ++y) {
    for (std::size_t x = lo; x < hi; ++x) img.at(x, y) = value;
  }
}

}  // namespace

TEST_CASE("constant slice has no edges") {
  const auto e = edge_slice(Image2D<double>(12, 9, 0.7));
  CHECK(count_nonzero(e.edges) == 0);
  CHECK_FALSE(e.degenerate);
}

TEST_CASE("vertical step lands on the high side") {
  const std::size_t c = 9;
  for (auto mode : {ThresholdMode::kQuantile, ThresholdMode::kAbsolute}) {
    EdgeParams p;
    p.mode = mode;
    if (mode == ThresholdMode::kAbsolute) {
      p.low = 0.05;
      p.high = 0.1;
    }
    const auto e = edge_slice(step_image(20, 12, c), p);
    for (std::size_t y = 0; y < 12; ++y) {
      for (std::size_t x = 0; x < 20; ++x) {
        CAPTURE(x);
        CAPTURE(y);
        CHECK(static_cast<bool>(e.edges.at(x, y)) == (x == c));
      }
    }
  }
}

TEST_CASE("nested squares give two closed contours") {
  Image2D<double> img(40, 40, 0.0);
  fill_square(img, 5, 35, 0.5);
  fill_square(img, 14, 26, 1.0);
  const auto e = edge_slice(img);
  const auto rings = connected_components(e.edges, true);
  CHECK(rings.count == 2);
  // Closed contours split the plane into outside, the band and the core.
  Mask2D free(40, 40);
  for (std::size_t i = 0; i < free.size(); ++i) free.pixels[i] = !e.edges.pixels[i];
  CHECK(connected_components(free, false).count == 3);
}

TEST_CASE("quantile thresholds are invariant to affine rescaling") {
  oracle::Rng rng(61);
  Image2D<double> img(24, 20);
  // Quarter-integer values keep the rescaling exact in binary.
  for (auto& v : img.pixels) v = static_cast<double>(oracle::pick(rng, 0, 8)) / 4.0;
  Image2D<double> scaled = img;
  for (auto& v : scaled.pixels) v = 4.0 * v + 3.0;
  CHECK(edge_slice(img).edges == edge_slice(scaled).edges);
}

TEST_CASE("degenerate slices") {
  const auto e = edge_slice(Image2D<double>(1, 7, 0.3));
  CHECK(e.degenerate);
  CHECK(count_nonzero(e.edges) == 0);
  CHECK_THROWS_AS(edge_slice(Image2D<double>(4, 4), 0.9, 0.5), Error);
}

TEST_CASE("static boundary") {
  SUBCASE("constant volume") {
    const auto sb = static_boundary(ScalarVolume::filled(Geometry({8, 8, 3}, {}), 2.0f));
    for (std::size_t i = 0; i < sb.y_b.size(); ++i) CHECK(sb.y_b[i] == 0);
  }
  SUBCASE("sphere cross-sections") {
    const Dims d{48, 48, 12};
    const Spacing s{1.0, 1.0, 4.0};
    const auto ph = eval::make_phantom(eval::PhantomKind::kSphere, d, s, 0.0, 1);
    const auto sb = static_boundary(ph.volume);
    const double cx = 0.5 * 47.0, cz = 0.5 * 11.0 * 4.0;
    const double radius = 0.35 * 44.0;  // 0.35 of the smallest extent (z: 11 * 4 mm)
    std::size_t measured = 0;
    for (std::size_t z = 0; z < d.nz; ++z) {
      const double dz = static_cast<double>(z) * s.z - cz;
      if (radius * radius - dz * dz < 16.0) continue;  // too small to resolve
      const double r = std::sqrt(radius * radius - dz * dz);
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t y = 0; y < d.ny; ++y) {
        for (std::size_t x = 0; x < d.nx; ++x) {
          if (!sb.y_b.at(x, y, z)) continue;
          sum += std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cx);
          ++n;
        }
      }
      REQUIRE(n > 0);
      CAPTURE(z);
      CHECK(std::abs(sum / static_cast<double>(n) - r) <= 1.0);
      ++measured;
    }
    CHECK(measured >= 3);
  }
  SUBCASE("external edges are binarized at 0.5") {
    const Geometry g({2, 2, 1}, {});
    const auto y = binarize_edges(ScalarVolume(g, {0.2f, 0.5f, 0.9f, 0.49f}));
    CHECK(y[0] == 0);
    CHECK(y[1] == 1);
    CHECK(y[2] == 1);
    CHECK(y[3] == 0);
  }
}
