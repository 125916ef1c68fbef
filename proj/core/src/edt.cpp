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

#include "scribvol/edt.hpp"

#include <limits>

namespace scribvol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One pass of the 1D squared distance transform along a strided line.
// f holds the input samples; d receives the result.
void edt_line(const std::vector<double>& f, std::vector<double>& d, double spacing,
              std::vector<std::size_t>& v, std::vector<double>& z) {
  const std::size_t n = f.size();
  const double s2 = spacing * spacing;
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (!any) {
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      any = true;
      continue;
    }
    const double sq = static_cast<double>(q);
    double s;
    while (true) {
      const double vp = static_cast<double>(v[k]);
      s = ((f[q] + s2 * sq * sq) - (f[v[k]] + s2 * vp * vp)) / (2.0 * s2 * (sq - vp));
      // z[0] is -inf, so k never underflows.
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (!any) {
    for (std::size_t q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double diff = (static_cast<double>(q) - static_cast<double>(v[k])) * spacing;
    d[q] = diff * diff + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(std::span<const std::uint8_t> feature,
                                               const Dims& dims, const Spacing& spacing) {
  require(feature.size() == dims.count(), ErrorCode::kGeometryMismatch,
          "distance transform input does not match dims");
  std::vector<double> out(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) out[i] = feature[i] ? 0.0 : kInf;

  const std::size_t n[3] = {dims.nx, dims.ny, dims.nz};
  const std::size_t stride[3] = {1, dims.nx, dims.nx * dims.ny};
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t len = n[axis];
    if (len <= 1) continue;
    std::vector<double> f(len), d(len), z(len + 1);
    std::vector<std::size_t> v(len);
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    for (std::size_t j = 0; j < n[a2]; ++j) {
      for (std::size_t i = 0; i < n[a1]; ++i) {
        const std::size_t base = i * stride[a1] + j * stride[a2];
        for (std::size_t q = 0; q < len; ++q) f[q] = out[base + q * stride[axis]];
        edt_line(f, d, spacing[axis], v, z);
        for (std::size_t q = 0; q < len; ++q) out[base + q * stride[axis]] = d[q];
      }
    }
  }
  return out;
}

}  // namespace scribvol
