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

// Segmentation metrics, scribble simulation and synthetic phantoms.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scribvol/volume.hpp"

namespace scribvol::eval {

struct DiceResult {
  double value = 0.0;  // percent
  /// Both sets empty; value is then 100 by convention.
  bool empty = false;
};

DiceResult dice(const LabelVolume& pred, const LabelVolume& gt, std::uint32_t label);

/// |P & G| / |P| in percent; nullopt when the prediction is empty.
std::optional<double> precision(const LabelVolume& pred, const LabelVolume& gt, std::uint32_t label);

/// Voxels of the class with a 6-neighbour outside the class (or outside the
/// grid), in raster order.
std::vector<std::size_t> boundary_voxels(const LabelVolume& labels, std::uint32_t label);

/// Max of the two directed nearest-rank 95th percentiles of boundary-to-
/// boundary distances (mm). nullopt when either side lacks the class.
std::optional<double> hd95(const LabelVolume& pred, const LabelVolume& gt, std::uint32_t label);

/// Foreground: per slice and class, the thinned class region. Background:
/// per slice, the thinned complement inside a 10-pixel dilation band around
/// the foreground union. The output does not depend on `seed`; it is kept
/// so callers can thread a per-stage seed uniformly.
ScribbleSet simulate_scribbles(const LabelVolume& mask, std::uint64_t seed = 0);

inline constexpr double kBackgroundBandPixels = 10.0;

enum class PhantomKind { kSphere, kTwoRegion, kMultiOrgan };

PhantomKind parse_phantom_kind(const std::string& name);
std::string to_string(PhantomKind kind);

struct Phantom {
  ScalarVolume volume;
  LabelVolume labels;
};

/// Piecewise-constant intensities plus N(0, noise_sigma) noise drawn from
/// mt19937_64(seed).
///   sphere      label 1 inside a centred sphere (intensity 0.8 on 0.2)
///   two_region  label 1 where x >= nx / 2 (intensity 1 on 0)
///   multi_organ four disjoint ellipsoids, labels 1..4
Phantom make_phantom(PhantomKind kind, const Dims& dims, const Spacing& spacing, double noise_sigma,
                     std::uint64_t seed);

}  // namespace scribvol::eval
