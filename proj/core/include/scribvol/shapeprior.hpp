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

// Shape priors: moment descriptors (class ratio, centroid spread), skeleton
// context histograms, K-medoids prototypes and the losses built on them.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "scribvol/losses.hpp"
#include "scribvol/skeleton.hpp"
#include "scribvol/volume.hpp"

namespace scribvol::shape {

// --- moments -----------------------------------------------------------------

enum class SpreadMode {
  kWeighted,  // sum_i s(i) |x_i - xbar| / sum_i s(i)
  kLiteral,   // sum_i |x_i - xbar| / |Omega|, xbar still probability-weighted
};

/// R(k) = sum_i s_k(i) / |Omega| for every class.
std::vector<double> class_ratio(const ProbabilityVolume& pred);
std::vector<double> class_ratio(std::span<const double> pred, std::size_t num_classes);

/// Per-class, per-axis spread in mm; std::nullopt for zero-mass classes.
using Spread = std::optional<std::array<double, 3>>;
std::vector<Spread> centroid_spread(const ProbabilityVolume& pred,
                                    SpreadMode mode = SpreadMode::kWeighted);
std::vector<Spread> centroid_spread(std::span<const double> pred, std::size_t num_classes,
                                    const Geometry& geometry, SpreadMode mode = SpreadMode::kWeighted);

struct ShapeMoments {
  std::vector<double> ratio;
  std::vector<Spread> spread;          // SpreadMode::kWeighted
  std::vector<Spread> spread_literal;  // SpreadMode::kLiteral

  const std::vector<Spread>& spread_for(SpreadMode mode) const {
    return mode == SpreadMode::kWeighted ? spread : spread_literal;
  }
  friend bool operator==(const ShapeMoments&, const ShapeMoments&) = default;
};
ShapeMoments shape_moments(const LabelVolume& mask, std::size_t num_classes);

// --- skeleton context --------------------------------------------------------

inline constexpr std::size_t kRadialBins = 4;
inline constexpr std::size_t kAngularBins = 12;
inline constexpr std::size_t kBins = kRadialBins * kAngularBins;
inline constexpr std::size_t kDefaultSamples = 32;

using Histogram = std::array<std::uint32_t, kBins>;  // index = shell * 12 + sector

struct SkeletonContext {
  std::vector<std::array<double, 2>> points;  // sampled points, mm
  std::vector<Histogram> histograms;          // one per sampled point
  double r_max = 0.0;                          // outer shell radius, mm

  friend bool operator==(const SkeletonContext&, const SkeletonContext&) = default;
};

/// Takes min(samples, n) points at indices floor(i * n / samples), then bins
/// every other sampled point by distance (shell 0 below r_max / 16, three
/// log-spaced shells up to r_max = 2 * mean pairwise distance, overflow in
/// the last shell) and angle (12 sectors from the +x axis).
SkeletonContext skeleton_context(const std::vector<std::array<double, 2>>& points,
                                 std::size_t samples = kDefaultSamples);
SkeletonContext skeleton_context(const Skeleton& skeleton, std::size_t samples = kDefaultSamples);

/// 0.5 * sum_b (h_b - g_b)^2 / (h_b + g_b), empty bins contributing 0.
double point_cost(const Histogram& h, const Histogram& g);

/// Minimum-cost assignment for a square matrix (row-major, n x n).
/// Returns the column matched to each row.
std::vector<std::size_t> linear_assignment(const std::vector<double>& cost, std::size_t n);

/// Sum of point costs over an optimal one-to-one matching. With unequal
/// point counts, each unmatched point pays its cheapest available cost.
double match_cost(const SkeletonContext& a, const SkeletonContext& b);

// --- prototypes --------------------------------------------------------------

struct KMedoidsResult {
  std::vector<std::size_t> medoids;     // indices into the corpus
  std::vector<std::size_t> assignment;  // position in `medoids` per item
  std::vector<double> cost_history;     // total cost after each assignment step
  std::size_t iterations = 0;
};

/// K-medoids on a symmetric distance matrix. The first medoid is drawn from
/// mt19937_64(seed); the rest are chosen farthest-first. Ties go to the
/// lowest index. Stops when medoids are stable or after 50 iterations.
KMedoidsResult kmedoids(const std::vector<std::vector<double>>& distance, std::size_t k_p,
                        std::uint64_t seed);
KMedoidsResult kmedoids(const std::vector<SkeletonContext>& descriptors, std::size_t k_p,
                        std::uint64_t seed);

std::vector<std::vector<double>> distance_matrix(const std::vector<SkeletonContext>& descriptors);

struct PrototypeBank {
  std::size_t num_classes = 0;  // including background
  std::size_t samples = kDefaultSamples;
  /// Medoid descriptors per foreground class label.
  std::map<std::uint32_t, std::vector<SkeletonContext>> prototypes;
  /// Moments of every corpus mask.
  std::vector<ShapeMoments> moments;

  friend bool operator==(const PrototypeBank&, const PrototypeBank&) = default;
};

struct BankParams {
  std::size_t k_p = 4;
  std::uint64_t seed = 7;
  std::size_t samples = kDefaultSamples;
  /// Restrict prototypes to these labels; empty means every foreground label.
  std::vector<std::uint32_t> classes;
};

/// Per-class skeleton contexts of every slice where the class is present.
std::map<std::uint32_t, std::vector<SkeletonContext>> slice_contexts(const LabelVolume& mask,
                                                                     std::size_t samples);

/// k_p is clamped to the number of descriptors available for a class.
PrototypeBank build_bank(const std::vector<LabelVolume>& masks, std::size_t num_classes,
                         const BankParams& params = {});

void save_bank(const PrototypeBank& bank, const std::filesystem::path& path);
PrototypeBank load_bank(const std::filesystem::path& path);

// --- losses ------------------------------------------------------------------

inline constexpr double kSpreadTolerance = 0.1;

/// KL(renormalized R-hat || reference R) + lambda * sum_k F(d-hat_k, d_k),
/// F(m1, m2) = (m1 - 0.9 m2)^2 + (1.1 m2 - m1)^2, where d is the per-axis
/// mean spread of a foreground class. The reference averages the corpus
/// shapes whose spreads lie within kSpreadTolerance (summed over classes),
/// falling back to the single nearest shape.
losses::LossValue shape_moment_loss(std::span<const double> pred, std::size_t num_classes,
                                    const Geometry& geometry, const PrototypeBank& bank,
                                    double lambda = 1.0, SpreadMode mode = SpreadMode::kWeighted);
losses::LossValue shape_moment_loss(const ProbabilityVolume& pred, const PrototypeBank& bank,
                                    double lambda = 1.0, SpreadMode mode = SpreadMode::kWeighted);

struct SkeletonScore {
  double value = 0.0;
  /// Slice-mean matching cost per class; nullopt when the class is absent.
  std::map<std::uint32_t, std::optional<double>> per_class;
};

/// Non-differentiable score: for each foreground class and slice, the
/// cheapest match against that class's prototypes, averaged over slices
/// and summed over classes.
SkeletonScore skeleton_prior_loss(const LabelVolume& pred, const PrototypeBank& bank);

}  // namespace scribvol::shape
