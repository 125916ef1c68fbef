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

#include <algorithm>
#include <cmath>
#include <limits>

#include "scribvol/numeric.hpp"
#include "scribvol/propagate.hpp"

namespace scribvol::propagate {

namespace {

// "Valid" separable filtering: output is (w - k + 1) x (h - k + 1).
Image2D<double> filter_valid(const Image2D<double>& img, const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = img.width - n + 1;
  const std::size_t oh = img.height - n + 1;
  Image2D<double> tmp(ow, img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += k[t] * img.at(x + t, y);
      tmp.at(x, y) = acc;
    }
  }
  Image2D<double> out(ow, oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += k[t] * tmp.at(x, y + t);
      out.at(x, y) = acc;
    }
  }
  return out;
}

double data_range_of(const ScalarVolume& volume) {
  auto [lo, hi] = std::minmax_element(volume.data().begin(), volume.data().end());
  const double r = static_cast<double>(*hi) - static_cast<double>(*lo);
  return r > 0.0 ? r : 1.0;
}

}  // namespace

double ssim(const Image2D<double>& a, const Image2D<double>& b, double data_range,
            const SsimParams& params) {
  require(a.width == b.width && a.height == b.height, ErrorCode::kGeometryMismatch,
          "ssim: slice sizes differ");
  require(a.size() > 0, ErrorCode::kInvalidArgument, "ssim: empty slice");
  std::size_t win = std::min({params.window, a.width, a.height});
  if (win % 2 == 0) --win;
  std::vector<double> k(win);
  const double half = static_cast<double>(win / 2);
  for (std::size_t i = 0; i < win; ++i) {
    const double d = static_cast<double>(i) - half;
    k[i] = std::exp(-0.5 * d * d / (params.sigma * params.sigma));
  }
  double ksum = 0.0;
  for (double v : k) ksum += v;
  for (double& v : k) v /= ksum;

  Image2D<double> aa(a.width, a.height), bb(a.width, a.height), ab(a.width, a.height);
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa.pixels[i] = a.pixels[i] * a.pixels[i];
    bb.pixels[i] = b.pixels[i] * b.pixels[i];
    ab.pixels[i] = a.pixels[i] * b.pixels[i];
  }
  const auto mu_a = filter_valid(a, k);
  const auto mu_b = filter_valid(b, k);
  const auto e_aa = filter_valid(aa, k);
  const auto e_bb = filter_valid(bb, k);
  const auto e_ab = filter_valid(ab, k);

  const double c1 = (params.k1 * data_range) * (params.k1 * data_range);
  const double c2 = (params.k2 * data_range) * (params.k2 * data_range);
  std::vector<double> map(mu_a.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double ma = mu_a.pixels[i];
    const double mb = mu_b.pixels[i];
    const double va = e_aa.pixels[i] - ma * ma;
    const double vb = e_bb.pixels[i] - mb * mb;
    const double cov = e_ab.pixels[i] - ma * mb;
    map[i] = ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return pairwise_sum(map) / static_cast<double>(map.size());
}

std::vector<std::size_t> rank_slices(const ScalarVolume& volume,
                                     const std::set<std::size_t>& annotated, std::size_t budget) {
  std::vector<std::size_t> all(volume.dims().nz);
  for (std::size_t z = 0; z < all.size(); ++z) all[z] = z;
  return rank_slices(volume, annotated, budget, all);
}

std::vector<std::size_t> rank_slices(const ScalarVolume& volume,
                                     const std::set<std::size_t>& annotated, std::size_t budget,
                                     const std::vector<std::size_t>& candidates) {
  require(!annotated.empty(), ErrorCode::kInvalidArgument, "rank_slices: annotated set is empty");
  const std::size_t nz = volume.dims().nz;
  for (std::size_t z : annotated) {
    require(z < nz, ErrorCode::kOutOfBounds, "rank_slices: annotated slice out of range");
  }
  std::vector<std::size_t> pool;
  for (std::size_t z : std::set<std::size_t>(candidates.begin(), candidates.end())) {
    require(z < nz, ErrorCode::kOutOfBounds, "rank_slices: candidate slice out of range");
    if (!annotated.count(z)) pool.push_back(z);
  }
  require(budget <= pool.size(), ErrorCode::kInvalidArgument,
          "rank_slices: budget " + std::to_string(budget) + " exceeds " +
              std::to_string(pool.size()) + " unannotated slices");

  const double range = data_range_of(volume);
  std::vector<Image2D<double>> slices(nz);
  std::vector<std::uint8_t> needed(nz, 0);
  for (std::size_t z : annotated) needed[z] = 1;
  for (std::size_t z : pool) needed[z] = 1;
  for (std::size_t z = 0; z < nz; ++z) {
    if (needed[z]) slices[z] = extract_slice(volume, z);
  }

  // score[i]: best SSIM of pool[i] against the annotated group so far.
  std::vector<double> score(pool.size(), -std::numeric_limits<double>::infinity());
  auto absorb = [&](std::size_t member) {
    std::vector<double> s(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) { s[i] = ssim(slices[pool[i]], slices[member], range); });
    for (std::size_t i = 0; i < pool.size(); ++i) score[i] = std::max(score[i], s[i]);
  };
  for (std::size_t z : annotated) absorb(z);

  std::vector<std::size_t> order;
  std::vector<std::uint8_t> taken(pool.size(), 0);
  while (order.size() < budget) {
    std::size_t best = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      if (best == pool.size() || score[i] > score[best]) best = i;
    }
    taken[best] = 1;
    order.push_back(pool[best]);
    if (order.size() < budget) absorb(pool[best]);
  }
  return order;
}

std::set<std::size_t> select_annotated_slices(const ScalarVolume& volume, const ScribbleSet& full,
                                              double fraction, SliceRanking ranking) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::kInvalidArgument,
          "annotation budget fraction must be in (0, 1]");
  require_same_geometry(full.geometry(), volume.geometry(), "scribbles vs volume");
  const auto slice_set = full.annotated_slices();
  const std::vector<std::size_t> candidates(slice_set.begin(), slice_set.end());
  require(!candidates.empty(), ErrorCode::kInvalidArgument, "no annotated slices to select from");
  const auto count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(candidates.size()))), 1,
      candidates.size());

  std::set<std::size_t> chosen;
  if (ranking == SliceRanking::kEqualInterval) {
    for (std::size_t j = 0; j < count; ++j) {
      const auto idx = static_cast<std::size_t>(std::floor((static_cast<double>(j) + 0.5) *
                                                           static_cast<double>(candidates.size()) /
                                                           static_cast<double>(count)));
      chosen.insert(candidates[std::min(idx, candidates.size() - 1)]);
    }
    return chosen;
  }

  const std::size_t centre = volume.dims().nz / 2;
  std::size_t start = candidates.front();
  for (std::size_t z : candidates) {
    const auto dist = [&](std::size_t s) { return s > centre ? s - centre : centre - s; };
    if (dist(z) < dist(start)) start = z;
  }
  chosen.insert(start);
  for (std::size_t z : rank_slices(volume, chosen, count - 1, candidates)) chosen.insert(z);
  return chosen;
}

ScribbleSet restrict_to_slices(const ScribbleSet& scribbles, const std::set<std::size_t>& slices) {
  std::vector<Scribble> kept;
  for (const auto& s : scribbles.entries()) {
    if (slices.count(static_cast<std::size_t>(s.voxel.z))) kept.push_back(s);
  }
  return ScribbleSet(scribbles.geometry(), std::move(kept));
}

}  // namespace scribvol::propagate
