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

#include "doctest.h"
#include "oracles.hpp"
#include "scribvol/evalsim.hpp"
#include "scribvol/image2d.hpp"
#include "scribvol/propagate.hpp"
#include "test_util.hpp"

using namespace scribvol;
using namespace scribvol::propagate;
using testutil::throws_code;

namespace {

// Textbook SSIM: 2D Gaussian window evaluated directly at every valid offset.
double ssim_direct(const Image2D<double>& a, const Image2D<double>& b, double range) {
  const int win = 11;
  const double sigma = 1.5;
  double w[win][win];
  double total = 0.0;
  for (int i = 0; i < win; ++i) {
    for (int j = 0; j < win; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * sigma * sigma));
      total += w[i][j];
    }
  }
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  double acc = 0.0;
  int count = 0;
  for (std::size_t y = 0; y + win <= a.height; ++y) {
    for (std::size_t x = 0; x + win <= a.width; ++x) {
      double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
      for (int j = 0; j < win; ++j) {
        for (int i = 0; i < win; ++i) {
          const double wt = w[j][i] / total;
          const double va = a.at(x + i, y + j);
          const double vb = b.at(x + i, y + j);
          ma += wt * va;
          mb += wt * vb;
          aa += wt * va * va;
          bb += wt * vb * vb;
          ab += wt * va * vb;
        }
      }
      acc += ((2 * ma * mb + c1) * (2 * (ab - ma * mb) + c2)) /
             ((ma * ma + mb * mb + c1) * (aa - ma * ma + bb - mb * mb + c2));
      ++count;
    }
  }
  return acc / count;
}

ScalarVolume two_region(const Dims& d, const Spacing& s = {}) {
  const Geometry g(d, s);
  std::vector<float> v(g.voxel_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.coords(i).x >= static_cast<std::int64_t>(d.nx / 2) ? 1.0f : 0.0f;
  return ScalarVolume(g, v);
}

}  // namespace

TEST_CASE("pseudo labels: hand cases") {
  const Geometry g({4, 1, 1}, {});
  const LabelVolume sv(g, {0, 0, 1, 1}, 2);

  SUBCASE("one scribble paints its supervoxel") {
    const auto pl = pseudo_labels(sv, ScribbleSet(g, {{{0, 0, 0}, 1}}), 2);
    CHECK(pl.m_pseudo.at(0, 0, 0) == 1);
    CHECK(pl.m_pseudo.at(1, 0, 0) == 1);
    CHECK(pl.m_voxel.at(1, 0, 0) == 1);
    CHECK(pl.m_voxel.at(2, 0, 0) == 0);
    CHECK(pl.m_voxel.at(3, 0, 0) == 0);
    CHECK(pl.m_pseudo.at(2, 0, 0) == pl.unknown_label);
  }
  SUBCASE("two classes in one supervoxel cancel") {
    const auto pl = pseudo_labels(sv, ScribbleSet(g, {{{2, 0, 0}, 1}, {{3, 0, 0}, 2}}));
    CHECK(pl.m_voxel.at(2, 0, 0) == 0);
    CHECK(pl.m_voxel.at(3, 0, 0) == 0);
  }
  SUBCASE("no scribbles, no supervision") {
    const auto pl = pseudo_labels(sv, ScribbleSet(g, {}), 3);
    for (std::size_t i = 0; i < 4; ++i) CHECK(pl.m_voxel[i] == 0);
  }
  SUBCASE("label beyond the declared class count") {
    CHECK(throws_code([&] { pseudo_labels(sv, ScribbleSet(g, {{{0, 0, 0}, 3}}), 3); },
                      ErrorCode::kInvalidArgument));
  }
}

TEST_CASE("pseudo labels match the per-voxel oracle") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Geometry g(oracle::random_dims(rng, 1, 16), oracle::random_spacing(rng));
    const auto sv = oracle::random_labels(rng, g, static_cast<std::uint32_t>(oracle::pick(rng, 1, 30)));
    const auto k = static_cast<std::uint32_t>(oracle::pick(rng, 2, 5));
    const auto s = oracle::random_scribbles(rng, g, oracle::pick(rng, 0, 60), k);
    const auto pl = pseudo_labels(sv, s, k);
    const auto want = oracle::pseudo_labels(sv, s, k);
    CAPTURE(trial);
    CHECK(std::equal(want.m_pseudo.begin(), want.m_pseudo.end(), pl.m_pseudo.data().begin()));
    CHECK(std::equal(want.m_voxel.begin(), want.m_voxel.end(), pl.m_voxel.data().begin()));
    // Invariant: supervised voxels carry a definite class.
    for (std::size_t i = 0; i < pl.m_voxel.size(); ++i) {
      if (pl.m_voxel[i]) CHECK(pl.m_pseudo[i] < k);
    }
  }
}

TEST_CASE("ssim agrees with a direct window computation") {
  oracle::Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    Image2D<double> a(16, 14), b(16, 14);
    for (auto& v : a.pixels) v = oracle::uniform(rng, 0, 1);
    for (std::size_t i = 0; i < b.size(); ++i) b.pixels[i] = 0.6 * a.pixels[i] + 0.4 * oracle::uniform(rng, 0, 1);
    CHECK(ssim(a, b, 1.0) == doctest::Approx(ssim_direct(a, b, 1.0)).epsilon(1e-10));
    CHECK(ssim(a, a, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rank_slices") {
  oracle::Rng rng(43);
  const Geometry g({16, 16, 5}, {});

  SUBCASE("identical slices tie-break ascending") {
    std::vector<float> v(g.voxel_count());
    for (std::size_t i = 0; i < g.dims().slice_size(); ++i) v[i] = static_cast<float>(oracle::uniform(rng, 0, 1));
    for (std::size_t z = 1; z < 5; ++z) {
      std::copy_n(v.begin(), g.dims().slice_size(), v.begin() + static_cast<std::ptrdiff_t>(z * g.dims().slice_size()));
    }
    CHECK(rank_slices(ScalarVolume(g, v), {2}, 2) == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("A A B picks the copy") {
    const Geometry g3({16, 16, 3}, {});
    std::vector<float> v(g3.voxel_count());
    const std::size_t s = g3.dims().slice_size();
    for (std::size_t i = 0; i < s; ++i) v[i] = v[s + i] = static_cast<float>(oracle::uniform(rng, 0, 1));
    for (std::size_t i = 0; i < s; ++i) v[2 * s + i] = static_cast<float>(oracle::uniform(rng, 0, 1));
    const ScalarVolume vol(g3, v);
    const double range = 1.0 * (*std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end()));
    CHECK(ssim_direct(extract_slice(vol, 1), extract_slice(vol, 0), range) >
          ssim_direct(extract_slice(vol, 2), extract_slice(vol, 0), range));
    CHECK(rank_slices(vol, {0}, 1) == std::vector<std::size_t>{1});
  }
  SUBCASE("full budget is a permutation") {
    const auto vol = oracle::random_volume(rng, g);
    auto order = rank_slices(vol, {1, 3}, 3);
    std::sort(order.begin(), order.end());
    CHECK(order == std::vector<std::size_t>{0, 2, 4});
  }
  SUBCASE("errors") {
    const auto vol = oracle::random_volume(rng, g);
    CHECK_THROWS_AS(rank_slices(vol, {}, 1), Error);
    CHECK_THROWS_AS(rank_slices(vol, {0}, 5), Error);
  }
}

TEST_CASE("select_annotated_slices") {
  const Geometry g({16, 16, 12}, {});
  std::vector<Scribble> s;
  for (std::int64_t z = 0; z < 12; ++z) s.push_back({{3, 3, z}, 1});
  const ScribbleSet full(g, s);
  oracle::Rng rng(47);
  const auto vol = oracle::random_volume(rng, g);
  // Equal interval: floor((j + 0.5) * 12 / 3) = 2, 6, 10.
  CHECK(select_annotated_slices(vol, full, 0.25, SliceRanking::kEqualInterval) == std::set<std::size_t>{2, 6, 10});
  CHECK(select_annotated_slices(vol, full, 1.0, SliceRanking::kSsim).size() == 12);
  const auto ssim_pick = select_annotated_slices(vol, full, 0.25, SliceRanking::kSsim);
  CHECK(ssim_pick.size() == 3);
  CHECK(ssim_pick.count(6) == 1);  // starts at the middle slice
  CHECK_THROWS_AS(select_annotated_slices(vol, full, 0.0, SliceRanking::kSsim), Error);
  CHECK(restrict_to_slices(full, {2, 6}).size() == 2);
}

TEST_CASE("watershed expansion") {
  const auto vol = two_region({12, 10, 6}, {1.0, 1.0, 3.0});
  const Geometry& g = vol.geometry();
  const ScribbleSet seeds(g, {{{2, 5, 0}, 1}, {{9, 5, 0}, 2}});

  SUBCASE("never crosses the intensity boundary") {
    const auto out = expand_watershed(vol, seeds, 1.0);
    CHECK(out.size() > seeds.size());
    for (const auto& s : out.entries()) {
      const bool right = vol.at(static_cast<std::size_t>(s.voxel.x), static_cast<std::size_t>(s.voxel.y),
                                static_cast<std::size_t>(s.voxel.z)) > 0.5f;
      CHECK((s.label == 2) == right);
    }
  }
  SUBCASE("zero erosion floods whole slices") {
    const auto out = expand_watershed(vol, seeds, 0.0);
    std::size_t on_new = 0;
    for (const auto& s : out.entries()) on_new += s.voxel.z != 0;
    CHECK(on_new == g.dims().slice_size() * (g.dims().nz - 1));
  }
  SUBCASE("scribbles on every slice pass through") {
    std::vector<Scribble> all;
    for (std::int64_t z = 0; z < 6; ++z) {
      all.push_back({{1, 1, z}, 1});
      all.push_back({{10, 1, z}, 2});
    }
    const ScribbleSet full(g, all);
    CHECK(expand_watershed(vol, full, 1.0) == full);
  }
  SUBCASE("single label is rejected") {
    CHECK_THROWS_AS(expand_watershed(vol, ScribbleSet(g, {{{2, 5, 0}, 1}}), 1.0), Error);
  }
}

TEST_CASE("random walker solves the 1D Laplace problem") {
  const std::size_t n = 11;
  const Geometry g({n, 1, 1}, {});
  const auto vol = ScalarVolume::filled(g, 0.5f);
  const ScribbleSet seeds(g, {{{0, 0, 0}, 0}, {{static_cast<std::int64_t>(n - 1), 0, 0}, 1}});
  RandomWalkerParams p;
  p.tolerance = 1e-12;
  const auto r = random_walker(vol, seeds, p);
  for (std::size_t x = 0; x < n; ++x) {
    CHECK(r.probabilities.at(x, 1) == doctest::Approx(static_cast<double>(x) / (n - 1)).epsilon(1e-8));
    CHECK(r.probabilities.at(x, 0) + r.probabilities.at(x, 1) == doctest::Approx(1.0));
  }
}

TEST_CASE("random walker expansion") {
  SUBCASE("threshold 1 keeps only certain voxels") {
    const auto vol = two_region({10, 8, 4});
    const ScribbleSet seeds(vol.geometry(), {{{1, 4, 0}, 1}, {{8, 4, 0}, 2}});
    CHECK(expand_random_walker(vol, seeds, 130.0, 1.0) == seeds);
  }
  SUBCASE("sphere interior seeds stay inside") {
    const auto ph = eval::make_phantom(eval::PhantomKind::kSphere, {16, 16, 8}, {1.0, 1.0, 2.0}, 0.0, 1);
    const Geometry& g = ph.volume.geometry();
    const ScribbleSet seeds(g, {{{7, 7, 4}, 1}, {{8, 8, 4}, 1}, {{1, 1, 4}, 0}, {{14, 14, 4}, 0}});
    const auto out = expand_random_walker(ph.volume, seeds, 2000.0, 0.9);
    std::size_t fg = 0;
    for (const auto& s : out.entries()) {
      if (s.voxel.z == 4 || s.label != 1) continue;
      ++fg;
      CHECK(ph.labels[g.linear(s.voxel)] == 1);
    }
    CHECK(fg > 0);
  }
  SUBCASE("disconnected voxels are reported") {
    // Zero floor and a wall whose edge weights underflow to 0.
    const Geometry g({5, 1, 1}, {});
    const ScalarVolume vol(g, {0.0f, 0.0f, 1.0f, 0.0f, 0.0f});
    RandomWalkerParams p;
    p.beta = 1e6;
    p.weight_floor = 0.0;
    const ScribbleSet seeds(g, {{{0, 0, 0}, 0}, {{1, 0, 0}, 1}});
    CHECK(throws_code([&] { random_walker(vol, seeds, p); }, ErrorCode::kSingularSystem));
  }
  SUBCASE("threshold range") {
    const auto vol = two_region({10, 8, 4});
    const ScribbleSet seeds(vol.geometry(), {{{1, 4, 0}, 1}, {{8, 4, 0}, 2}});
    CHECK_THROWS_AS(expand_random_walker(vol, seeds, 130.0, 0.5), Error);
    CHECK_THROWS_AS(expand_random_walker(vol, seeds, -1.0, 0.9), Error);
  }
}

TEST_CASE("gradient magnitude is spacing aware") {
  // Linear ramp along z: central difference gives slope / spacing.
  const Geometry g({3, 3, 5}, {1.0, 1.0, 4.0});
  std::vector<float> v(g.voxel_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(g.coords(i).z);
  const auto gm = gradient_magnitude(ScalarVolume(g, v));
  CHECK(gm[g.linear(1, 1, 2)] == doctest::Approx(0.25));
}
