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

#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "scribvol/evalsim.hpp"
#include "test_util.hpp"

using namespace scribvol;
using namespace scribvol::eval;
using testutil::throws_code;

namespace {

LabelVolume block(const Geometry& g, std::array<std::size_t, 3> lo, std::array<std::size_t, 3> hi) {
  std::vector<std::uint32_t> v(g.voxel_count(), 0);
  for (std::size_t z = lo[2]; z < hi[2]; ++z) {
    for (std::size_t y = lo[1]; y < hi[1]; ++y) {
      for (std::size_t x = lo[0]; x < hi[0]; ++x) v[g.linear(x, y, z)] = 1;
    }
  }
  return LabelVolume(g, v, 2);
}

}  // namespace

TEST_CASE("dice and precision") {
  const Geometry g({16, 1, 1}, {});
  std::vector<std::uint32_t> p(16, 0), t(16, 0);
  for (std::size_t i = 0; i < 8; ++i) p[i] = 1;
  for (std::size_t i = 4; i < 12; ++i) t[i] = 1;
  const LabelVolume pred(g, p, 2), gt(g, t, 2);
  CHECK(dice(pred, pred, 1).value == 100.0);
  CHECK(dice(pred, gt, 1).value == 50.0);
  CHECK(*precision(pred, gt, 1) == 50.0);
  const LabelVolume empty(g, std::vector<std::uint32_t>(16, 0), 2);
  CHECK(dice(empty, gt, 1).value == 0.0);
  const auto both_empty = dice(empty, empty, 1);
  CHECK(both_empty.empty);
  CHECK(both_empty.value == 100.0);
  CHECK_FALSE(precision(empty, gt, 1).has_value());

  std::vector<std::uint32_t> ten(16, 0);
  for (std::size_t i = 0; i < 10; ++i) ten[i] = 1;
  std::vector<std::uint32_t> seven(16, 0);
  for (std::size_t i = 3; i < 10; ++i) seven[i] = 1;
  CHECK(*precision(LabelVolume(g, ten, 2), LabelVolume(g, seven, 2), 1) == doctest::Approx(70.0));

  const LabelVolume other(Geometry({8, 2, 1}, {}), t, 2);
  CHECK(throws_code([&] { dice(pred, other, 1); }, ErrorCode::kGeometryMismatch));
}

TEST_CASE("hd95") {
  const Geometry g({10, 10, 10}, {3.0, 3.0, 2.0});
  const auto a = block(g, {2, 2, 2}, {8, 8, 6});
  CHECK(*hd95(a, a, 1) == 0.0);

  SUBCASE("one-slice shift") {
    const auto b = block(g, {2, 2, 3}, {8, 8, 7});
    CHECK(*hd95(a, b, 1) == 2.0);
    CHECK(*hd95(b, a, 1) == 2.0);
  }
  SUBCASE("a single stray voxel does not move the 95th percentile") {
    const Geometry big({24, 24, 24}, {});
    const auto gt = block(big, {4, 4, 4}, {14, 14, 14});
    std::vector<std::uint32_t> v(gt.data().begin(), gt.data().end());
    v[big.linear(22, 22, 22)] = 1;
    CHECK(*hd95(LabelVolume(big, v, 2), gt, 1) == 0.0);
  }
  SUBCASE("empty side") {
    const LabelVolume empty(g, std::vector<std::uint32_t>(g.voxel_count(), 0), 2);
    CHECK_FALSE(hd95(empty, a, 1).has_value());
  }
  SUBCASE("matches brute force") {
    oracle::Rng rng(111);
    for (int trial = 0; trial < 8; ++trial) {
      const Geometry r(oracle::random_dims(rng, 2, 8), oracle::random_spacing(rng));
      const auto p = oracle::random_labels(rng, r, 3);
      const auto t = oracle::random_labels(rng, r, 3);
      for (std::uint32_t c = 1; c < 3; ++c) {
        const auto got = hd95(p, t, c);
        const auto want = oracle::hd95(p, t, c);
        REQUIRE(got.has_value() == want.has_value());
        if (got) CHECK(*got == doctest::Approx(*want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("metrics ignore label names") {
  oracle::Rng rng(113);
  const Geometry g({6, 5, 4}, {1.0, 1.0, 2.5});
  const auto p = oracle::random_labels(rng, g, 3);
  const auto t = oracle::random_labels(rng, g, 3);
  // Swap labels 1 and 2 in both volumes.
  auto swap = [&](const LabelVolume& l) {
    std::vector<std::uint32_t> v(l.data().begin(), l.data().end());
    for (auto& x : v) x = x == 0 ? 0 : 3 - x;
    return LabelVolume(g, v, 3);
  };
  const auto ps = swap(p), ts = swap(t);
  CHECK(dice(p, t, 1).value == dice(ps, ts, 2).value);
  CHECK(precision(p, t, 2) == precision(ps, ts, 1));
  CHECK(hd95(p, t, 1) == hd95(ps, ts, 2));
}

TEST_CASE("scribble simulation") {
  const auto ph = make_phantom(PhantomKind::kSphere, {32, 32, 8}, {1.0, 1.0, 3.0}, 0.0, 3);
  const auto s = simulate_scribbles(ph.labels);
  CHECK_NOTHROW(validate_scribbles(s, ph.volume));
  CHECK(s.labels() == std::set<std::uint32_t>{0, 1});
  std::size_t fg = 0;
  for (const auto& e : s.entries()) {
    const std::size_t i = ph.labels.geometry().linear(e.voxel);
    if (e.label != 0) {
      ++fg;
      CHECK(ph.labels[i] == e.label);
    } else {
      CHECK(ph.labels[i] == 0);
    }
  }
  CHECK(fg > 0);
  CHECK(static_cast<double>(s.size()) < 0.15 * static_cast<double>(ph.labels.size()));
  CHECK(simulate_scribbles(ph.labels, 99) == s);

  const LabelVolume empty(ph.labels.geometry(), std::vector<std::uint32_t>(ph.labels.size(), 0), 2);
  CHECK_THROWS_AS(simulate_scribbles(empty), Error);
}

TEST_CASE("phantoms") {
  const Dims d{32, 32, 8};
  const Spacing sp{1.0, 1.0, 4.0};
  SUBCASE("deterministic per seed") {
    const auto a = make_phantom(PhantomKind::kMultiOrgan, d, sp, 0.05, 5);
    const auto b = make_phantom(PhantomKind::kMultiOrgan, d, sp, 0.05, 5);
    const auto c = make_phantom(PhantomKind::kMultiOrgan, d, sp, 0.05, 6);
    CHECK(a.volume == b.volume);
    CHECK(a.labels == b.labels);
    CHECK_FALSE(a.volume == c.volume);
  }
  SUBCASE("noise-free two-region has two intensities") {
    const auto p = make_phantom(PhantomKind::kTwoRegion, d, sp, 0.0, 1);
    std::set<float> values(p.volume.data().begin(), p.volume.data().end());
    CHECK(values.size() == 2);
    std::set<std::uint32_t> labels(p.labels.data().begin(), p.labels.data().end());
    CHECK(labels == std::set<std::uint32_t>{0, 1});
  }
  SUBCASE("multi-organ labels") {
    const auto p = make_phantom(PhantomKind::kMultiOrgan, d, sp, 0.0, 1);
    std::set<std::uint32_t> labels(p.labels.data().begin(), p.labels.data().end());
    CHECK(labels == std::set<std::uint32_t>{0, 1, 2, 3, 4});
  }
  SUBCASE("names and bad arguments") {
    for (auto k : {PhantomKind::kSphere, PhantomKind::kTwoRegion, PhantomKind::kMultiOrgan}) {
      CHECK(parse_phantom_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_phantom_kind("torus"), Error);
    CHECK_THROWS_AS(make_phantom(PhantomKind::kSphere, {4, 32, 8}, sp, 0.0, 1), Error);
    CHECK_THROWS_AS(make_phantom(PhantomKind::kSphere, d, sp, -1.0, 1), Error);
  }
}
