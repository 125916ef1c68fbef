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

// Core data model: anisotropic voxel grids and sparse scribble annotations.
//
// All containers are immutable once constructed and validate their
// invariants in the constructor, so an instance is always well formed.
// Voxel data is stored x-fastest: linear = x + nx * (y + ny * z).

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "scribvol/error.hpp"

namespace scribvol {

struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const { return nx * ny * nz; }
  std::size_t slice_size() const { return nx * ny; }
  std::size_t operator[](int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Physical voxel size in millimetres along x, y and z.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }

  friend bool operator==(const Spacing&, const Spacing&) = default;
};

struct Index3 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  std::int64_t operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }

  friend auto operator<=>(const Index3&, const Index3&) = default;
};

/// Validated dims + spacing pair shared by every volume kind.
class Geometry {
 public:
  Geometry(Dims dims, Spacing spacing);

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t voxel_count() const { return dims_.count(); }

  bool contains(const Index3& p) const {
    return p.x >= 0 && p.y >= 0 && p.z >= 0 && static_cast<std::size_t>(p.x) < dims_.nx &&
           static_cast<std::size_t>(p.y) < dims_.ny && static_cast<std::size_t>(p.z) < dims_.nz;
  }
  std::size_t linear(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims_.nx * (y + dims_.ny * z);
  }
  std::size_t linear(const Index3& p) const {
    return linear(static_cast<std::size_t>(p.x), static_cast<std::size_t>(p.y),
                  static_cast<std::size_t>(p.z));
  }
  Index3 coords(std::size_t linear) const;

  friend bool operator==(const Geometry&, const Geometry&) = default;

 private:
  Dims dims_;
  Spacing spacing_;
};

/// Real-valued intensity grid (images, edge strengths).
class ScalarVolume {
 public:
  ScalarVolume(Geometry geometry, std::vector<float> data);
  static ScalarVolume filled(const Geometry& geometry, float value);

  const Geometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims(); }
  const Spacing& spacing() const { return geometry_.spacing(); }
  std::size_t size() const { return data_.size(); }

  float operator[](std::size_t i) const { return data_[i]; }
  float at(std::size_t x, std::size_t y, std::size_t z) const {
    return data_[geometry_.linear(x, y, z)];
  }
  std::span<const float> data() const { return data_; }

  friend bool operator==(const ScalarVolume&, const ScalarVolume&) = default;

 private:
  Geometry geometry_;
  std::vector<float> data_;
};

/// Non-negative integer labels with a declared label-space size.
class LabelVolume {
 public:
  /// Throws unless every label < num_labels.
  LabelVolume(Geometry geometry, std::vector<std::uint32_t> data, std::uint32_t num_labels);
  /// num_labels inferred as max(label) + 1.
  LabelVolume(Geometry geometry, std::vector<std::uint32_t> data);

  const Geometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims(); }
  const Spacing& spacing() const { return geometry_.spacing(); }
  std::size_t size() const { return data_.size(); }
  std::uint32_t num_labels() const { return num_labels_; }

  std::uint32_t operator[](std::size_t i) const { return data_[i]; }
  std::uint32_t at(std::size_t x, std::size_t y, std::size_t z) const {
    return data_[geometry_.linear(x, y, z)];
  }
  std::span<const std::uint32_t> data() const { return data_; }

  friend bool operator==(const LabelVolume&, const LabelVolume&) = default;

 private:
  Geometry geometry_;
  std::vector<std::uint32_t> data_;
  std::uint32_t num_labels_;
};

/// Per-voxel K-vector of probabilities, stored class-fastest:
/// element (voxel i, class c) lives at i * K + c.
class ProbabilityVolume {
 public:
  static constexpr double kSimplexTolerance = 1e-6;

  /// Values must lie in [0, 1]; with `simplex` each voxel must sum to 1.
  ProbabilityVolume(Geometry geometry, std::size_t num_classes, std::vector<double> data,
                    bool simplex);

  /// One-hot encoding of a label volume (always simplex).
  static ProbabilityVolume one_hot(const LabelVolume& labels, std::size_t num_classes);

  const Geometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims(); }
  const Spacing& spacing() const { return geometry_.spacing(); }
  std::size_t voxel_count() const { return geometry_.voxel_count(); }
  std::size_t num_classes() const { return num_classes_; }
  bool simplex() const { return simplex_; }

  double at(std::size_t voxel, std::size_t cls) const { return data_[voxel * num_classes_ + cls]; }
  std::span<const double> voxel(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * num_classes_, num_classes_);
  }
  std::span<const double> data() const { return data_; }

  /// Per-voxel arg-max (lowest class index wins ties).
  LabelVolume argmax() const;

  friend bool operator==(const ProbabilityVolume&, const ProbabilityVolume&) = default;

 private:
  Geometry geometry_;
  std::size_t num_classes_;
  std::vector<double> data_;
  bool simplex_;
};

/// Label 0 is background; foreground classes are 1..K.
struct Scribble {
  Index3 voxel;
  std::uint32_t label = 0;

  friend bool operator==(const Scribble&, const Scribble&) = default;
};

class ScribbleSet {
 public:
  /// Throws kOutOfBounds for voxels outside the grid and kLabelConflict when
  /// one voxel carries two different labels. Exact duplicates are kept.
  ScribbleSet(Geometry geometry, std::vector<Scribble> entries);

  const Geometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims(); }
  const std::vector<Scribble>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::set<std::size_t> annotated_slices() const;
  std::set<std::uint32_t> labels() const;

  friend bool operator==(const ScribbleSet&, const ScribbleSet&) = default;

 private:
  Geometry geometry_;
  std::vector<Scribble> entries_;
};

/// Checks scribbles against the volume they annotate and returns them unchanged.
ScribbleSet validate_scribbles(const ScribbleSet& scribbles, const ScalarVolume& volume);

/// Throws kGeometryMismatch naming `what` when the two geometries differ.
void require_same_geometry(const Geometry& a, const Geometry& b, const char* what);

/// Min-max rescale to [0, 1]; constant volumes map to 0.
ScalarVolume normalize_intensities(const ScalarVolume& volume);

}  // namespace scribvol
