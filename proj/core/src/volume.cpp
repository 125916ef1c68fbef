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

#include "scribvol/volume.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace scribvol {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kGeometryMismatch: return "geometry_mismatch";
    case ErrorCode::kOutOfBounds: return "out_of_bounds";
    case ErrorCode::kLabelConflict: return "label_conflict";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kPayloadMismatch: return "payload_mismatch";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kSingularSystem: return "singular_system";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kStage: return "stage";
  }
  return "unknown";
}

namespace {

std::string describe(const Index3& p) {
  std::ostringstream os;
  os << "(" << p.x << "," << p.y << "," << p.z << ")";
  return os.str();
}

std::string describe(const Dims& d) {
  std::ostringstream os;
  os << d.nx << "x" << d.ny << "x" << d.nz;
  return os.str();
}

}  // namespace

Geometry::Geometry(Dims dims, Spacing spacing) : dims_(dims), spacing_(spacing) {
  require(dims.nx > 0 && dims.ny > 0 && dims.nz > 0, ErrorCode::kInvalidArgument,
          "volume dims must be positive, got " + describe(dims));
  for (int a = 0; a < 3; ++a) {
    require(std::isfinite(spacing[a]) && spacing[a] > 0.0, ErrorCode::kInvalidArgument,
            "voxel spacing must be finite and > 0");
  }
}

Index3 Geometry::coords(std::size_t linear) const {
  const std::size_t x = linear % dims_.nx;
  const std::size_t rest = linear / dims_.nx;
  return Index3{static_cast<std::int64_t>(x), static_cast<std::int64_t>(rest % dims_.ny),
                static_cast<std::int64_t>(rest / dims_.ny)};
}

ScalarVolume::ScalarVolume(Geometry geometry, std::vector<float> data)
    : geometry_(geometry), data_(std::move(data)) {
  require(data_.size() == geometry_.voxel_count(), ErrorCode::kPayloadMismatch,
          "scalar volume expects " + std::to_string(geometry_.voxel_count()) + " values, got " +
              std::to_string(data_.size()));
  for (float v : data_) {
    require(std::isfinite(v), ErrorCode::kNonFinite, "scalar volume contains a non-finite value");
  }
}

ScalarVolume ScalarVolume::filled(const Geometry& geometry, float value) {
  return ScalarVolume(geometry, std::vector<float>(geometry.voxel_count(), value));
}

LabelVolume::LabelVolume(Geometry geometry, std::vector<std::uint32_t> data,
                         std::uint32_t num_labels)
    : geometry_(geometry), data_(std::move(data)), num_labels_(num_labels) {
  require(data_.size() == geometry_.voxel_count(), ErrorCode::kPayloadMismatch,
          "label volume expects " + std::to_string(geometry_.voxel_count()) + " values, got " +
              std::to_string(data_.size()));
  for (std::uint32_t v : data_) {
    require(v < num_labels_, ErrorCode::kInvalidArgument,
            "label " + std::to_string(v) + " >= num_labels " + std::to_string(num_labels_));
  }
}

LabelVolume::LabelVolume(Geometry geometry, std::vector<std::uint32_t> data)
    : LabelVolume(geometry, data,
                  data.empty() ? 1u : *std::max_element(data.begin(), data.end()) + 1u) {}

ProbabilityVolume::ProbabilityVolume(Geometry geometry, std::size_t num_classes,
                                     std::vector<double> data, bool simplex)
    : geometry_(geometry), num_classes_(num_classes), data_(std::move(data)), simplex_(simplex) {
  require(num_classes_ >= 1, ErrorCode::kInvalidArgument, "probability volume needs K >= 1");
  require(data_.size() == geometry_.voxel_count() * num_classes_, ErrorCode::kPayloadMismatch,
          "probability volume expects " + std::to_string(geometry_.voxel_count() * num_classes_) +
              " values, got " + std::to_string(data_.size()));
  for (double v : data_) {
    require(std::isfinite(v), ErrorCode::kNonFinite, "probability volume contains a non-finite value");
    require(v >= 0.0 && v <= 1.0, ErrorCode::kInvalidArgument,
            "probability outside [0,1]: " + std::to_string(v));
  }
  if (simplex_) {
    for (std::size_t i = 0; i < geometry_.voxel_count(); ++i) {
      double sum = 0.0;
      for (std::size_t c = 0; c < num_classes_; ++c) sum += data_[i * num_classes_ + c];
      require(std::abs(sum - 1.0) <= kSimplexTolerance, ErrorCode::kInvalidArgument,
              "voxel " + std::to_string(i) + " does not sum to 1 (sum=" + std::to_string(sum) + ")");
    }
  }
}

ProbabilityVolume ProbabilityVolume::one_hot(const LabelVolume& labels, std::size_t num_classes) {
  std::vector<double> data(labels.size() * num_classes, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] < num_classes, ErrorCode::kInvalidArgument,
            "label " + std::to_string(labels[i]) + " does not fit in " + std::to_string(num_classes) +
                " classes");
    data[i * num_classes + labels[i]] = 1.0;
  }
  return ProbabilityVolume(labels.geometry(), num_classes, std::move(data), true);
}

LabelVolume ProbabilityVolume::argmax() const {
  std::vector<std::uint32_t> out(voxel_count());
  for (std::size_t i = 0; i < voxel_count(); ++i) {
    auto v = voxel(i);
    out[i] = static_cast<std::uint32_t>(std::max_element(v.begin(), v.end()) - v.begin());
  }
  return LabelVolume(geometry_, std::move(out), static_cast<std::uint32_t>(num_classes_));
}

namespace {

void check_entries(const Geometry& geometry, const std::vector<Scribble>& entries) {
  std::map<Index3, std::uint32_t> seen;
  for (const auto& s : entries) {
    require(geometry.contains(s.voxel), ErrorCode::kOutOfBounds,
            "scribble voxel " + describe(s.voxel) + " outside " + describe(geometry.dims()));
    auto [it, inserted] = seen.emplace(s.voxel, s.label);
    require(inserted || it->second == s.label, ErrorCode::kLabelConflict,
            "scribble voxel " + describe(s.voxel) + " labeled both " + std::to_string(it->second) +
                " and " + std::to_string(s.label));
  }
}

}  // namespace

ScribbleSet::ScribbleSet(Geometry geometry, std::vector<Scribble> entries)
    : geometry_(geometry), entries_(std::move(entries)) {
  check_entries(geometry_, entries_);
}

std::set<std::size_t> ScribbleSet::annotated_slices() const {
  std::set<std::size_t> out;
  for (const auto& s : entries_) out.insert(static_cast<std::size_t>(s.voxel.z));
  return out;
}

std::set<std::uint32_t> ScribbleSet::labels() const {
  std::set<std::uint32_t> out;
  for (const auto& s : entries_) out.insert(s.label);
  return out;
}

void require_same_geometry(const Geometry& a, const Geometry& b, const char* what) {
  require(a.dims() == b.dims(), ErrorCode::kGeometryMismatch,
          std::string(what) + ": dims " + describe(a.dims()) + " vs " + describe(b.dims()));
  require(a.spacing() == b.spacing(), ErrorCode::kGeometryMismatch,
          std::string(what) + ": voxel spacing differs");
}

ScribbleSet validate_scribbles(const ScribbleSet& scribbles, const ScalarVolume& volume) {
  require_same_geometry(scribbles.geometry(), volume.geometry(), "scribbles vs volume");
  check_entries(volume.geometry(), scribbles.entries());
  return scribbles;
}

ScalarVolume normalize_intensities(const ScalarVolume& volume) {
  auto [lo, hi] = std::minmax_element(volume.data().begin(), volume.data().end());
  const float lo_v = *lo;
  const float range = *hi - *lo;
  std::vector<float> out(volume.size(), 0.0f);
  if (range > 0.0f) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (volume[i] - lo_v) / range;
  }
  return ScalarVolume(volume.geometry(), std::move(out));
}

}  // namespace scribvol
