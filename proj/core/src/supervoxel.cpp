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

#include "scribvol/supervoxel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

namespace scribvol::supervoxel {

namespace {

constexpr double kChangeFraction = 0.001;

struct Center {
  std::array<double, 3> pos{};
  double intensity = 0.0;
};

double gradient_sq(const ScalarVolume& v, std::int64_t x, std::int64_t y, std::int64_t z) {
  const auto& d = v.dims();
  const std::int64_t n[3] = {static_cast<std::int64_t>(d.nx), static_cast<std::int64_t>(d.ny),
                             static_cast<std::int64_t>(d.nz)};
  const std::int64_t p[3] = {x, y, z};
  double g2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    std::int64_t lo[3] = {x, y, z};
    std::int64_t hi[3] = {x, y, z};
    lo[a] = std::max<std::int64_t>(0, p[a] - 1);
    hi[a] = std::min<std::int64_t>(n[a] - 1, p[a] + 1);
    if (hi[a] == lo[a]) continue;
    const double diff = v.at(hi[0], hi[1], hi[2]) - v.at(lo[0], lo[1], lo[2]);
    const double g = diff / (static_cast<double>(hi[a] - lo[a]) * v.spacing()[a]);
    g2 += g * g;
  }
  return g2;
}

template <typename Fn>
void for_each_neighbour26(const Dims& d, std::size_t linear, Fn&& fn) {
  const auto x = static_cast<std::int64_t>(linear % d.nx);
  const auto y = static_cast<std::int64_t>((linear / d.nx) % d.ny);
  const auto z = static_cast<std::int64_t>(linear / d.slice_size());
  for (std::int64_t dz = -1; dz <= 1; ++dz) {
    const std::int64_t zz = z + dz;
    if (zz < 0 || zz >= static_cast<std::int64_t>(d.nz)) continue;
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      const std::int64_t yy = y + dy;
      if (yy < 0 || yy >= static_cast<std::int64_t>(d.ny)) continue;
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const std::int64_t xx = x + dx;
        if (xx < 0 || xx >= static_cast<std::int64_t>(d.nx)) continue;
        fn(static_cast<std::size_t>(xx) + d.nx * (static_cast<std::size_t>(yy) + d.ny * static_cast<std::size_t>(zz)));
      }
    }
  }
}

// Labels every 26-connected component; returns component ids per voxel
// (raster order of first voxel) and their sizes.
std::vector<std::uint32_t> label_components(const LabelVolume& labels,
                                            std::vector<std::size_t>& sizes) {
  const auto& d = labels.dims();
  constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(labels.size(), kUnset);
  sizes.clear();
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (comp[s] != kUnset) continue;
    const auto id = static_cast<std::uint32_t>(sizes.size());
    sizes.push_back(0);
    comp[s] = id;
    stack.assign(1, s);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++sizes[id];
      for_each_neighbour26(d, p, [&](std::size_t q) {
        if (comp[q] == kUnset && labels[q] == labels[p]) {
          comp[q] = id;
          stack.push_back(q);
        }
      });
    }
  }
  return comp;
}

}  // namespace

SupervoxelMap::SupervoxelMap(LabelVolume labels, const ScalarVolume& volume)
    : labels_(std::move(labels)) {
  require_same_geometry(labels_.geometry(), volume.geometry(), "supervoxels vs volume");
  records_.assign(labels_.num_labels(), SupervoxelRecord{});
  std::vector<std::array<double, 4>> acc(labels_.num_labels(), {0, 0, 0, 0});
  const auto& g = labels_.geometry();
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const Index3 p = g.coords(i);
    auto& a = acc[labels_[i]];
    a[0] += p.x * g.spacing().x;
    a[1] += p.y * g.spacing().y;
    a[2] += p.z * g.spacing().z;
    a[3] += volume[i];
    ++records_[labels_[i]].voxel_count;
  }
  for (std::size_t s = 0; s < records_.size(); ++s) {
    const double n = static_cast<double>(records_[s].voxel_count);
    if (n == 0) continue;
    records_[s].centroid_mm = {acc[s][0] / n, acc[s][1] / n, acc[s][2] / n};
    records_[s].mean_intensity = acc[s][3] / n;
  }
}

SeedLayout seed_layout(const Geometry& geometry, std::size_t k) {
  require(k >= 1, ErrorCode::kInvalidArgument, "supervoxel count k must be >= 1");
  SeedLayout layout;
  const auto& d = geometry.dims();
  const auto& s = geometry.spacing();
  const double extent[3] = {d.nx * s.x, d.ny * s.y, d.nz * s.z};
  layout.stride_mm = std::cbrt(extent[0] * extent[1] * extent[2] / static_cast<double>(k));
  double cell[3];
  for (int a = 0; a < 3; ++a) {
    const double raw = std::round(extent[a] / layout.stride_mm);
    layout.counts[a] = static_cast<std::size_t>(std::clamp(raw, 1.0, static_cast<double>(d[a])));
    cell[a] = extent[a] / static_cast<double>(layout.counts[a]);
    layout.step_voxels[a] = cell[a] / s[a];
  }
  for (std::size_t iz = 0; iz < layout.counts[2]; ++iz) {
    for (std::size_t iy = 0; iy < layout.counts[1]; ++iy) {
      for (std::size_t ix = 0; ix < layout.counts[0]; ++ix) {
        // Cell centre, shifted so voxel centres at index * spacing tile the cells evenly.
        layout.centers_mm.push_back({(ix + 0.5) * cell[0] - 0.5 * s.x, (iy + 0.5) * cell[1] - 0.5 * s.y,
                                     (iz + 0.5) * cell[2] - 0.5 * s.z});
      }
    }
  }
  return layout;
}

SupervoxelMap slic3d(const ScalarVolume& volume, std::size_t k, double compactness,
                     std::size_t max_iters) {
  const auto& g = volume.geometry();
  const auto& d = g.dims();
  const auto& sp = g.spacing();
  require(k >= 1 && k <= g.voxel_count(), ErrorCode::kInvalidArgument,
          "supervoxel count k=" + std::to_string(k) + " must be in [1, " +
              std::to_string(g.voxel_count()) + "]");
  require(max_iters >= 1, ErrorCode::kInvalidArgument, "max_iters must be >= 1");
  require(std::isfinite(compactness) && compactness >= 0.0, ErrorCode::kInvalidArgument,
          "compactness must be finite and >= 0");

  const SeedLayout layout = seed_layout(g, k);
  const double stride = layout.stride_mm;
  const std::int64_t n[3] = {static_cast<std::int64_t>(d.nx), static_cast<std::int64_t>(d.ny),
                             static_cast<std::int64_t>(d.nz)};

  // Seeds move to the lowest-gradient voxel of their 3x3x3 neighbourhood
  // when that is strictly lower than at the nearest voxel.
  std::vector<Center> centers;
  centers.reserve(layout.centers_mm.size());
  for (const auto& c : layout.centers_mm) {
    std::int64_t base[3];
    for (int a = 0; a < 3; ++a) {
      base[a] = std::clamp<std::int64_t>(std::llround(c[a] / sp[a]), 0, n[a] - 1);
    }
    double best = gradient_sq(volume, base[0], base[1], base[2]);
    std::int64_t best_p[3] = {-1, -1, -1};
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const std::int64_t p[3] = {base[0] + dx, base[1] + dy, base[2] + dz};
          if (p[0] < 0 || p[1] < 0 || p[2] < 0 || p[0] >= n[0] || p[1] >= n[1] || p[2] >= n[2]) continue;
          const double gsq = gradient_sq(volume, p[0], p[1], p[2]);
          if (gsq < best) {
            best = gsq;
            std::copy(p, p + 3, best_p);
          }
        }
      }
    }
    Center center;
    if (best_p[0] >= 0) {
      for (int a = 0; a < 3; ++a) center.pos[a] = best_p[a] * sp[a];
      center.intensity = volume.at(best_p[0], best_p[1], best_p[2]);
    } else {
      center.pos = c;
      center.intensity = volume.at(base[0], base[1], base[2]);
    }
    centers.push_back(center);
  }

  constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> assign(g.voxel_count(), kUnassigned);
  std::vector<double> best_dist(g.voxel_count());
  const double spatial_weight = compactness / stride;

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    std::fill(best_dist.begin(), best_dist.end(), std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> next(g.voxel_count(), kUnassigned);
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const Center& ctr = centers[c];
      std::int64_t lo[3], hi[3];
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((ctr.pos[a] - stride) / sp[a])));
        hi[a] = std::min<std::int64_t>(n[a] - 1, static_cast<std::int64_t>(std::ceil((ctr.pos[a] + stride) / sp[a])));
      }
      for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
        const double dz = z * sp.z - ctr.pos[2];
        for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
          const double dy = y * sp.y - ctr.pos[1];
          for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
            const double dx = x * sp.x - ctr.pos[0];
            const std::size_t i = g.linear(x, y, z);
            const double dist = std::abs(volume[i] - ctr.intensity) +
                                spatial_weight * std::sqrt(dx * dx + dy * dy + dz * dz);
            if (dist < best_dist[i]) {
              best_dist[i] = dist;
              next[i] = static_cast<std::uint32_t>(c);
            }
          }
        }
      }
    }

    // Voxels outside every window take the label of the nearest assigned
    // voxel (breadth-first, 6-connected, raster-ordered sources).
    std::deque<std::size_t> frontier;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (next[i] != kUnassigned) frontier.push_back(i);
    }
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      const Index3 c = g.coords(p);
      for (int a = 0; a < 3; ++a) {
        for (int step : {-1, 1}) {
          Index3 q = c;
          (a == 0 ? q.x : a == 1 ? q.y : q.z) += step;
          if (!g.contains(q)) continue;
          const std::size_t qi = g.linear(q);
          if (next[qi] == kUnassigned) {
            next[qi] = next[p];
            frontier.push_back(qi);
          }
        }
      }
    }

    std::size_t changed = 0;
    for (std::size_t i = 0; i < next.size(); ++i) changed += next[i] != assign[i];
    assign.swap(next);

    std::vector<std::array<double, 4>> acc(centers.size(), {0, 0, 0, 0});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t i = 0; i < assign.size(); ++i) {
      const Index3 p = g.coords(i);
      auto& a = acc[assign[i]];
      a[0] += p.x * sp.x;
      a[1] += p.y * sp.y;
      a[2] += p.z * sp.z;
      a[3] += volume[i];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;
      const double m = static_cast<double>(counts[c]);
      centers[c].pos = {acc[c][0] / m, acc[c][1] / m, acc[c][2] / m};
      centers[c].intensity = acc[c][3] / m;
    }
    if (iter > 0 && static_cast<double>(changed) < kChangeFraction * static_cast<double>(assign.size())) {
      break;
    }
  }

  LabelVolume raw(g, std::move(assign), static_cast<std::uint32_t>(centers.size()));
  return SupervoxelMap(enforce_connectivity(raw), volume);
}

LabelVolume enforce_connectivity(const LabelVolume& labels) {
  const auto& d = labels.dims();
  std::vector<std::size_t> sizes;
  const auto comp = label_components(labels, sizes);
  const std::size_t ncomp = sizes.size();

  std::vector<std::uint32_t> comp_label(ncomp);
  for (std::size_t i = 0; i < labels.size(); ++i) comp_label[comp[i]] = labels[i];

  // Largest component per label is kept; ties go to the first in raster order.
  std::vector<std::int64_t> best_of_label(labels.num_labels(), -1);
  for (std::size_t c = 0; c < ncomp; ++c) {
    auto& b = best_of_label[comp_label[c]];
    if (b < 0 || sizes[c] > sizes[static_cast<std::size_t>(b)]) b = static_cast<std::int64_t>(c);
  }
  std::vector<std::int64_t> region(ncomp, -1);
  std::vector<std::size_t> region_size(ncomp, 0);
  for (auto b : best_of_label) {
    if (b >= 0) {
      region[b] = b;
      region_size[b] = sizes[b];
    }
  }

  std::vector<std::set<std::uint32_t>> adjacency(ncomp);
  bool any_orphan = false;
  for (std::size_t c = 0; c < ncomp; ++c) any_orphan |= region[c] < 0;
  if (any_orphan) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for_each_neighbour26(d, i, [&](std::size_t q) {
        if (comp[q] != comp[i]) adjacency[comp[i]].insert(comp[q]);
      });
    }
  }

  bool pending = any_orphan;
  while (pending) {
    pending = false;
    bool progressed = false;
    for (std::size_t c = 0; c < ncomp; ++c) {
      if (region[c] >= 0) continue;
      std::int64_t target = -1;
      for (std::uint32_t nb : adjacency[c]) {
        const std::int64_t r = region[nb];
        if (r < 0) continue;
        if (target < 0 || region_size[r] > region_size[target] ||
            (region_size[r] == region_size[target] && r < target)) {
          target = r;
        }
      }
      if (target < 0) {
        pending = true;
        continue;
      }
      region[c] = target;
      region_size[target] += sizes[c];
      progressed = true;
    }
    require(!pending || progressed, ErrorCode::kDegenerate, "connectivity enforcement stalled");
  }

  // Dense ids in raster order of each region's first voxel.
  std::vector<std::int64_t> dense(ncomp, -1);
  std::uint32_t next_id = 0;
  std::vector<std::uint32_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = static_cast<std::size_t>(region[comp[i]]);
    if (dense[r] < 0) dense[r] = next_id++;
    out[i] = static_cast<std::uint32_t>(dense[r]);
  }
  return LabelVolume(labels.geometry(), std::move(out), next_id);
}

std::vector<std::size_t> component_counts(const LabelVolume& labels) {
  std::vector<std::size_t> sizes;
  const auto comp = label_components(labels, sizes);
  std::vector<std::size_t> per_label(labels.num_labels(), 0);
  std::vector<std::uint8_t> seen(sizes.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!seen[comp[i]]) {
      seen[comp[i]] = 1;
      ++per_label[labels[i]];
    }
  }
  return per_label;
}

}  // namespace scribvol::supervoxel
