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

// Spacing-aware 3D SLIC supervoxels.
//
// Physical coordinates: voxel (x, y, z) sits at (x * sx, y * sy, z * sz) mm.
// Seeds start on a regular grid with stride S = (extent_mm / k)^(1/3) and the
// clustering distance is
//
//   D = |I - I_c| + compactness * ||p - p_c||_mm / S
//
// so compactness stays unit-free across anisotropic spacings.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "scribvol/volume.hpp"

namespace scribvol::supervoxel {

struct SlicParams {
  std::size_t k = 2000;
  double compactness = 0.1;
  std::size_t max_iters = 10;
};

struct SupervoxelRecord {
  std::array<double, 3> centroid_mm{};
  double mean_intensity = 0.0;
  std::size_t voxel_count = 0;
};

class SupervoxelMap {
 public:
  /// Records are recomputed from `labels` and `volume`; ids must already be
  /// dense (labels.num_labels() supervoxels).
  SupervoxelMap(LabelVolume labels, const ScalarVolume& volume);

  const LabelVolume& labels() const { return labels_; }
  const std::vector<SupervoxelRecord>& records() const { return records_; }
  std::size_t count() const { return records_.size(); }

 private:
  LabelVolume labels_;
  std::vector<SupervoxelRecord> records_;
};

/// The unperturbed seed grid for k supervoxels on the given geometry.
struct SeedLayout {
  double stride_mm = 0.0;
  std::array<std::size_t, 3> counts{};      // seeds per axis
  std::array<double, 3> step_voxels{};      // grid step along each axis, voxel units
  std::vector<std::array<double, 3>> centers_mm;
};
SeedLayout seed_layout(const Geometry& geometry, std::size_t k);

/// Throws kInvalidArgument when k == 0, k exceeds the voxel count or max_iters == 0.
SupervoxelMap slic3d(const ScalarVolume& volume, std::size_t k, double compactness,
                     std::size_t max_iters = 10);
inline SupervoxelMap slic3d(const ScalarVolume& volume, const SlicParams& p) {
  return slic3d(volume, p.k, p.compactness, p.max_iters);
}

/// Relabels an arbitrary partition so every id is one 26-connected component:
/// each label keeps its largest component and orphan components are merged
/// into the largest adjacent region. Ids come out dense, in raster order.
LabelVolume enforce_connectivity(const LabelVolume& labels);

/// Number of 26-connected components formed by each label.
std::vector<std::size_t> component_counts(const LabelVolume& labels);

}  // namespace scribvol::supervoxel
