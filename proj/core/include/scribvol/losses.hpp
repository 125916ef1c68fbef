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

// Loss kernels with analytic gradients. Each has a ProbabilityVolume entry
// point and a raw-span entry point; the span form accepts arbitrary values
// so finite-difference checks can perturb a single coordinate.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scribvol/propagate.hpp"
#include "scribvol/volume.hpp"

namespace scribvol::losses {

inline constexpr double kEpsilon = 1e-7;

struct LossConfig {
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  double beta1 = 0.3;
  double beta2 = 0.3;
  double beta3 = 0.3;
  std::uint32_t num_classes = 0;
  /// Weight the outside volume term by u instead of (1 - u).
  bool literal_volume_out = false;

  void validate() const;
};

struct LossValue {
  double value = 0.0;
  /// d(value)/d(input), laid out like the input data.
  std::optional<std::vector<double>> gradient;
  std::map<std::string, double> terms;
};

/// Mean binary cross entropy with predictions clamped to [eps, 1 - eps].
/// Coordinates outside that interval get zero gradient.
LossValue bce(std::span<const double> pred, std::span<const std::uint32_t> target);
LossValue bce_boundary(const ProbabilityVolume& pred, const LabelVolume& y_b);

/// -sum_i m_voxel(i) log pred_{m_pseudo(i)}(i) / sum_i m_voxel(i); 0 when
/// nothing is supervised. `pred` is voxel-major with `num_classes` entries
/// per voxel.
LossValue partial_ce(std::span<const double> pred, std::size_t num_classes,
                     std::span<const std::uint32_t> m_pseudo, std::span<const std::uint32_t> m_voxel);
LossValue partial_ce(const ProbabilityVolume& pred, const propagate::PseudoLabels& labels);

struct RegionMeans {
  double c1 = 0.0;  // mean intensity weighted by u
  double c2 = 0.0;  // mean intensity weighted by 1 - u
};

/// Throws kDegenerate naming the collapsed side when sum u or sum (1 - u)
/// is zero.
RegionMeans region_means(std::span<const double> u, const ScalarVolume& v);

/// Surface + lambda1 * Volume_In + lambda2 * Volume_Out. Surface sums the
/// Euclidean norm of spacing-scaled forward differences (zero across the far
/// border). c1 and c2 are constants in the gradient; `frozen` supplies them
/// instead of recomputing.
LossValue active_boundary(std::span<const double> u, const ScalarVolume& v, const LossConfig& cfg,
                          std::optional<RegionMeans> frozen = std::nullopt);
LossValue active_boundary(const ProbabilityVolume& u, const ScalarVolume& v, const LossConfig& cfg);

/// seg_init + seg_final + beta1 * bry + beta2 * ab + beta3 * sp. Value only.
LossValue total_loss(const LossValue& seg_init, const LossValue& seg_final, const LossValue& bry,
                     const LossValue& ab, const LossValue& sp, const LossConfig& cfg);

}  // namespace scribvol::losses
