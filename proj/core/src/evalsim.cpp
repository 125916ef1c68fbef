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

#include "scribvol/evalsim.hpp"

#include <algorithm>
#include <cmath>

#include "scribvol/edt.hpp"
#include "scribvol/image2d.hpp"
#include "scribvol/skeleton.hpp"

namespace scribvol::eval {

namespace {

struct Counts {
  std::size_t p = 0;
  std::size_t g = 0;
  std::size_t both = 0;
};

Counts count(const LabelVolume& pred, const LabelVolume& gt, std::uint32_t label) {
  require_same_geometry(pred.geometry(), gt.geometry(), "prediction vs ground truth");
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == label;
    const bool g = gt[i] == label;
    c.p += p;
    c.g += g;
    c.both += p && g;
  }
  return c;
}

double directed_p95(const LabelVolume& from, const std::vector<std::size_t>& from_surface,
                    const std::vector<std::uint8_t>& to_surface) {
  const auto d2 = squared_distance_transform(to_surface, from.dims(), from.spacing());
  std::vector<double> d;
  d.reserve(from_surface.size());
  for (std::size_t i : from_surface) d.push_back(std::sqrt(d2[i]));
  std::sort(d.begin(), d.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(d.size())));
  return d[std::clamp<std::size_t>(rank, 1, d.size()) - 1];
}

}  // namespace

DiceResult dice(const LabelVolume& pred, const LabelVolume& gt, std::uint32_t label) {
  const Counts c = count(pred, gt, label);
  if (c.p + c.g == 0) return {100.0, true};
  return {200.0 * static_cast<double>(c.both) / static_cast<double>(c.p + c.g), false};
}

std::optional<double> precision(const LabelVolume& pred, const LabelVolume& gt, std::uint32_t label) {
  const Counts c = count(pred, gt, label);
  if (c.p == 0) return std::nullopt;
  return 100.0 * static_cast<double>(c.both) / static_cast<double>(c.p);
}

std::vector<std::size_t> boundary_voxels(const LabelVolume& labels, std::uint32_t label) {
  const Geometry& g = labels.geometry();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != label) continue;
    const Index3 p = g.coords(i);
    bool edge = false;
    for (int a = 0; a < 3 && !edge; ++a) {
      for (int step : {-1, 1}) {
        Index3 q = p;
        (a == 0 ? q.x : a == 1 ? q.y : q.z) += step;
        if (!g.contains(q) || labels[g.linear(q)] != label) {
          edge = true;
          break;
        }
      }
    }
    if (edge) out.push_back(i);
  }
  return out;
}

std::optional<double> hd95(const LabelVolume& pred, const LabelVolume& gt, std::uint32_t label) {
  require_same_geometry(pred.geometry(), gt.geometry(), "prediction vs ground truth");
  const auto sp = boundary_voxels(pred, label);
  const auto sg = boundary_voxels(gt, label);
  if (sp.empty() || sg.empty()) return std::nullopt;
  std::vector<std::uint8_t> mp(pred.size(), 0), mg(pred.size(), 0);
  for (std::size_t i : sp) mp[i] = 1;
  for (std::size_t i : sg) mg[i] = 1;
  return std::max(directed_p95(pred, sp, mg), directed_p95(gt, sg, mp));
}

ScribbleSet simulate_scribbles(const LabelVolume& mask, std::uint64_t /*seed*/) {
  const Geometry& g = mask.geometry();
  const Dims& d = g.dims();
  bool any = false;
  for (std::size_t i = 0; i < mask.size() && !any; ++i) any = mask[i] != 0;
  require(any, ErrorCode::kInvalidArgument, "simulate_scribbles: mask has no foreground");

  std::vector<Scribble> out;
  auto emit = [&](const Mask2D& skel, std::size_t z, std::uint32_t label) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        if (skel.at(x, y)) {
          out.push_back({{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y),
                          static_cast<std::int64_t>(z)},
                         label});
        }
      }
    }
  };
  for (std::size_t z = 0; z < d.nz; ++z) {
    Mask2D fg(d.nx, d.ny);
    for (std::uint32_t label = 1; label < mask.num_labels(); ++label) {
      const Mask2D region = extract_label_mask(mask, z, label);
      if (count_nonzero(region) == 0) continue;
      for (std::size_t i = 0; i < region.size(); ++i) fg.pixels[i] |= region.pixels[i];
      emit(shape::thin(region), z, label);
    }
    if (count_nonzero(fg) == 0) continue;
    Mask2D band = dilate_disk(fg, kBackgroundBandPixels);
    for (std::size_t i = 0; i < band.size(); ++i) band.pixels[i] = band.pixels[i] && !fg.pixels[i];
    if (count_nonzero(band) == 0) continue;
    emit(shape::thin(band), z, 0);
  }
  return ScribbleSet(g, std::move(out));
}

}  // namespace scribvol::eval
