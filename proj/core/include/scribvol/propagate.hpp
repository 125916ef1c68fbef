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

// Scribble propagation: supervoxel pseudo masks, SSIM-driven slice
// selection and expansion of partial annotations to unannotated slices.

#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include "scribvol/image2d.hpp"
#include "scribvol/supervoxel.hpp"
#include "scribvol/volume.hpp"

namespace scribvol::propagate {

/// m_pseudo holds classes 0..num_classes-1 plus `unknown_label`
/// (== num_classes) wherever no unique class was found. m_voxel is 1 exactly
/// where a supervoxel met scribbles of a single class.
struct PseudoLabels {
  LabelVolume m_pseudo;
  LabelVolume m_voxel;
  std::uint32_t num_classes = 0;
  std::uint32_t unknown_label = 0;
};

/// num_classes == 0 infers max(scribble label) + 1.
PseudoLabels pseudo_labels(const LabelVolume& supervoxels, const ScribbleSet& scribbles,
                           std::uint32_t num_classes = 0);
PseudoLabels pseudo_labels(const supervoxel::SupervoxelMap& sv, const ScribbleSet& scribbles,
                           std::uint32_t num_classes = 0);

// --- slice ranking ---------------------------------------------------------

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over all fully-contained Gaussian windows. Windows shrink to the
/// largest odd size that fits when a slice is smaller than `window`.
double ssim(const Image2D<double>& a, const Image2D<double>& b, double data_range,
            const SsimParams& params = {});

/// Greedy selection: repeatedly moves the candidate with the highest SSIM to
/// any annotated slice (max aggregate) into the annotated group. Ties go to
/// the lower slice index. Candidates default to every slice.
std::vector<std::size_t> rank_slices(const ScalarVolume& volume,
                                     const std::set<std::size_t>& annotated, std::size_t budget);
std::vector<std::size_t> rank_slices(const ScalarVolume& volume,
                                     const std::set<std::size_t>& annotated, std::size_t budget,
                                     const std::vector<std::size_t>& candidates);

enum class SliceRanking { kSsim, kEqualInterval };

/// Chooses round(fraction * |candidates|) slices (at least one) among the
/// slices that carry scribbles in `full`. SSIM ranking starts from the
/// candidate nearest the central slice; equal-interval ranking takes evenly
/// spaced candidates.
std::set<std::size_t> select_annotated_slices(const ScalarVolume& volume, const ScribbleSet& full,
                                              double fraction, SliceRanking ranking);

ScribbleSet restrict_to_slices(const ScribbleSet& scribbles, const std::set<std::size_t>& slices);

// --- expansion ---------------------------------------------------------------

/// Marker-based watershed over the spacing-aware 3D gradient magnitude.
/// Plateaus flood in order of physical (mm) geodesic distance from the
/// markers. Returns the dense label map.
LabelVolume watershed_flood(const ScalarVolume& volume, const ScribbleSet& markers);

/// Watershed expansion. erosion_radius is in voxels of the finest spacing
/// and becomes an ellipsoidal structuring element of that radius in mm.
/// New scribbles only land on slices without input scribbles; input
/// scribbles are returned verbatim first.
ScribbleSet expand_watershed(const ScalarVolume& volume, const ScribbleSet& scribbles,
                             double erosion_radius);

struct RandomWalkerParams {
  double beta = 130.0;
  double threshold = 0.9;
  /// Added to exp(-beta * d^2) before dividing by edge length; 0 disables.
  double weight_floor = 1e-6;
  double tolerance = 1e-8;
  std::size_t max_iterations = 50000;
};

struct RandomWalkerResult {
  /// Class c corresponds to labels[c].
  ProbabilityVolume probabilities;
  std::vector<std::uint32_t> labels;
  std::vector<std::size_t> iterations;
};

/// Solves the combinatorial Dirichlet problem on the 6-connected grid with
/// edge weights (exp(-beta * dI^2) + weight_floor) / edge_length_mm, one
/// conjugate-gradient solve per label. Throws kSingularSystem when an
/// unseeded voxel cannot reach any seed through positive-weight edges.
RandomWalkerResult random_walker(const ScalarVolume& volume, const ScribbleSet& scribbles,
                                 const RandomWalkerParams& params);

/// Voxels whose winning probability is >= threshold are skeletonized per
/// slice and label, then emitted on previously unannotated slices.
ScribbleSet expand_random_walker(const ScalarVolume& volume, const ScribbleSet& scribbles,
                                 const RandomWalkerParams& params);
ScribbleSet expand_random_walker(const ScalarVolume& volume, const ScribbleSet& scribbles,
                                 double beta, double threshold);

/// Spacing-aware central-difference gradient magnitude.
std::vector<double> gradient_magnitude(const ScalarVolume& volume);

}  // namespace scribvol::propagate
