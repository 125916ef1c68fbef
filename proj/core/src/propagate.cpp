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

#include "scribvol/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "scribvol/edt.hpp"

namespace scribvol::propagate {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

std::uint32_t infer_classes(const ScribbleSet& scribbles, std::uint32_t num_classes) {
  std::uint32_t top = 0;
  for (const auto& s : scribbles.entries()) top = std::max(top, s.label + 1);
  if (num_classes == 0) return std::max<std::uint32_t>(top, 1);
  require(top <= num_classes, ErrorCode::kInvalidArgument,
          "scribble label " + std::to_string(top - 1) + " >= num_classes " +
              std::to_string(num_classes));
  return num_classes;
}

}  // namespace

PseudoLabels pseudo_labels(const LabelVolume& supervoxels, const ScribbleSet& scribbles,
                           std::uint32_t num_classes) {
  require_same_geometry(supervoxels.geometry(), scribbles.geometry(), "supervoxels vs scribbles");
  const std::uint32_t n = infer_classes(scribbles, num_classes);
  const std::uint32_t unknown = n;
  constexpr std::uint32_t kConflict = kNone - 1;

  // Per supervoxel: kNone (no scribble), a class, or kConflict.
  std::vector<std::uint32_t> owner(supervoxels.num_labels(), kNone);
  for (const auto& s : scribbles.entries()) {
    std::uint32_t& o = owner[supervoxels[supervoxels.geometry().linear(s.voxel)]];
    if (o == kNone) {
      o = s.label;
    } else if (o != s.label) {
      o = kConflict;
    }
  }
  std::vector<std::uint32_t> pseudo(supervoxels.size(), unknown);
  std::vector<std::uint32_t> conf(supervoxels.size(), 0);
  for (std::size_t i = 0; i < supervoxels.size(); ++i) {
    const std::uint32_t o = owner[supervoxels[i]];
    if (o != kNone && o != kConflict) {
      pseudo[i] = o;
      conf[i] = 1;
    }
  }
  return {LabelVolume(supervoxels.geometry(), std::move(pseudo), n + 1),
          LabelVolume(supervoxels.geometry(), std::move(conf), 2), n, unknown};
}

PseudoLabels pseudo_labels(const supervoxel::SupervoxelMap& sv, const ScribbleSet& scribbles,
                           std::uint32_t num_classes) {
  return pseudo_labels(sv.labels(), scribbles, num_classes);
}

std::vector<double> gradient_magnitude(const ScalarVolume& volume) {
  const Dims& d = volume.dims();
  const Spacing& sp = volume.spacing();
  std::vector<double> out(volume.size());
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t c[3] = {x, y, z};
        double g2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          if (d[a] < 2) continue;
          std::size_t lo[3] = {x, y, z};
          std::size_t hi[3] = {x, y, z};
          if (c[a] > 0) --lo[a];
          if (c[a] + 1 < d[a]) ++hi[a];
          const double diff = static_cast<double>(volume.at(hi[0], hi[1], hi[2])) -
                              static_cast<double>(volume.at(lo[0], lo[1], lo[2]));
          const double g = diff / (static_cast<double>(hi[a] - lo[a]) * sp[a]);
          g2 += g * g;
        }
        out[volume.geometry().linear(x, y, z)] = std::sqrt(g2);
      }
    }
  }
  return out;
}

LabelVolume watershed_flood(const ScalarVolume& volume, const ScribbleSet& markers) {
  require_same_geometry(volume.geometry(), markers.geometry(), "volume vs markers");
  require(!markers.empty(), ErrorCode::kInvalidArgument, "watershed needs at least one marker");
  const Geometry& g = volume.geometry();
  const Spacing& sp = g.spacing();
  const auto landscape = gradient_magnitude(volume);

  using Key = std::tuple<double, double, std::uint64_t, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  std::vector<std::uint32_t> label(g.voxel_count(), kNone);
  std::vector<double> dist(g.voxel_count(), 0.0);
  std::uint64_t counter = 0;
  std::uint32_t top = 0;
  for (const auto& s : markers.entries()) {
    const std::size_t i = g.linear(s.voxel);
    top = std::max(top, s.label + 1);
    if (label[i] != kNone) continue;
    label[i] = s.label;
    heap.emplace(landscape[i], 0.0, counter++, i);
  }
  while (!heap.empty()) {
    const auto [level, geo, order, i] = heap.top();
    heap.pop();
    const Index3 p = g.coords(i);
    for (int a = 0; a < 3; ++a) {
      for (int step : {-1, 1}) {
        Index3 q = p;
        (a == 0 ? q.x : a == 1 ? q.y : q.z) += step;
        if (!g.contains(q)) continue;
        const std::size_t j = g.linear(q);
        if (label[j] != kNone) continue;
        label[j] = label[i];
        dist[j] = dist[i] + sp[a];
        heap.emplace(std::max(level, landscape[j]), dist[j], counter++, j);
      }
    }
  }
  return LabelVolume(g, std::move(label), top);
}

ScribbleSet expand_watershed(const ScalarVolume& volume, const ScribbleSet& scribbles,
                             double erosion_radius) {
  require_same_geometry(volume.geometry(), scribbles.geometry(), "volume vs scribbles");
  require(scribbles.labels().size() >= 2, ErrorCode::kInvalidArgument,
          "watershed expansion needs scribbles of at least two labels");
  require(std::isfinite(erosion_radius) && erosion_radius >= 0.0, ErrorCode::kInvalidArgument,
          "erosion radius must be finite and >= 0");
  const Geometry& g = volume.geometry();
  const Spacing& sp = g.spacing();
  const double r_mm = erosion_radius * std::min({sp.x, sp.y, sp.z});
  const auto annotated = scribbles.annotated_slices();

  std::vector<std::size_t> targets;
  for (std::size_t z = 0; z < g.dims().nz; ++z) {
    if (!annotated.count(z)) targets.push_back(z);
  }
  std::vector<Scribble> out = scribbles.entries();
  if (targets.empty()) return ScribbleSet(g, std::move(out));

  const LabelVolume flooded = watershed_flood(volume, scribbles);
  std::vector<std::uint8_t> keep(g.voxel_count(), 0);
  std::vector<std::uint8_t> other(g.voxel_count());
  for (std::uint32_t l : scribbles.labels()) {
    for (std::size_t i = 0; i < other.size(); ++i) other[i] = flooded[i] != l;
    const auto d2 = squared_distance_transform(other, g.dims(), sp);
    for (std::size_t i = 0; i < other.size(); ++i) {
      if (!other[i] && std::sqrt(d2[i]) > r_mm) keep[i] = 1;
    }
  }
  const std::size_t plane = g.dims().slice_size();
  for (std::size_t z : targets) {
    for (std::size_t i = z * plane; i < (z + 1) * plane; ++i) {
      if (keep[i]) out.push_back({g.coords(i), flooded[i]});
    }
  }
  return ScribbleSet(g, std::move(out));
}

}  // namespace scribvol::propagate
