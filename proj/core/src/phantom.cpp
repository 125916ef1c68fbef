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

#include <array>
#include <cmath>
#include <random>

#include "scribvol/evalsim.hpp"

namespace scribvol::eval {

namespace {

struct Ellipsoid {
  std::array<double, 3> centre;  // fraction of the extent
  std::array<double, 3> semi;    // fraction of the extent
  float intensity;
};

// Disjoint organs, one per quadrant, with staggered z ranges.
constexpr std::array<Ellipsoid, 4> kOrgans = {{
    {{0.28, 0.30, 0.50}, {0.17, 0.15, 0.36}, 0.80f},
    {{0.72, 0.28, 0.46}, {0.15, 0.16, 0.30}, 0.60f},
    {{0.30, 0.72, 0.54}, {0.16, 0.14, 0.30}, 0.40f},
    {{0.70, 0.71, 0.50}, {0.14, 0.16, 0.40}, 0.95f},
}};

}  // namespace

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "sphere") return PhantomKind::kSphere;
  if (name == "two_region") return PhantomKind::kTwoRegion;
  if (name == "multi_organ") return PhantomKind::kMultiOrgan;
  fail(ErrorCode::kInvalidArgument,
       "unknown phantom kind '" + name + "' (expected sphere, two_region or multi_organ)");
}

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::kSphere:
      return "sphere";
    case PhantomKind::kTwoRegion:
      return "two_region";
    case PhantomKind::kMultiOrgan:
      return "multi_organ";
  }
  return "unknown";
}

Phantom make_phantom(PhantomKind kind, const Dims& dims, const Spacing& spacing, double noise_sigma,
                     std::uint64_t seed) {
  require(dims.nx >= 8 && dims.ny >= 8 && dims.nz >= 8, ErrorCode::kInvalidArgument,
          "phantom dims must be >= 8 along every axis");
  require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, ErrorCode::kInvalidArgument,
          "noise sigma must be finite and >= 0");
  const Geometry g(dims, spacing);
  const std::array<double, 3> extent = {static_cast<double>(dims.nx - 1) * spacing.x,
                                        static_cast<double>(dims.ny - 1) * spacing.y,
                                        static_cast<double>(dims.nz - 1) * spacing.z};
  std::vector<float> data(g.voxel_count());
  std::vector<std::uint32_t> labels(g.voxel_count(), 0);

  for (std::size_t i = 0; i < data.size(); ++i) {
    const Index3 p = g.coords(i);
    const std::array<double, 3> mm = {static_cast<double>(p.x) * spacing.x,
                                      static_cast<double>(p.y) * spacing.y,
                                      static_cast<double>(p.z) * spacing.z};
    switch (kind) {
      case PhantomKind::kSphere: {
        const double r = 0.35 * std::min({extent[0], extent[1], extent[2]});
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) d2 += (mm[a] - 0.5 * extent[a]) * (mm[a] - 0.5 * extent[a]);
        labels[i] = d2 <= r * r ? 1 : 0;
        data[i] = labels[i] ? 0.8f : 0.2f;
        break;
      }
      case PhantomKind::kTwoRegion:
        labels[i] = static_cast<std::size_t>(p.x) >= dims.nx / 2 ? 1 : 0;
        data[i] = labels[i] ? 1.0f : 0.0f;
        break;
      case PhantomKind::kMultiOrgan: {
        data[i] = 0.1f;
        for (std::size_t o = 0; o < kOrgans.size(); ++o) {
          double q = 0.0;
          for (int a = 0; a < 3; ++a) {
            const double t = (mm[a] - kOrgans[o].centre[a] * extent[a]) / (kOrgans[o].semi[a] * extent[a]);
            q += t * t;
          }
          if (q <= 1.0) {
            labels[i] = static_cast<std::uint32_t>(o + 1);
            data[i] = kOrgans[o].intensity;
            break;
          }
        }
        break;
      }
    }
  }
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (float& v : data) v = static_cast<float>(static_cast<double>(v) + noise(rng));
  }
  const std::uint32_t num_labels = kind == PhantomKind::kMultiOrgan ? 5 : 2;
  return {ScalarVolume(g, std::move(data)), LabelVolume(g, std::move(labels), num_labels)};
}

}  // namespace scribvol::eval
