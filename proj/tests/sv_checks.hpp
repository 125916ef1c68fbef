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

// Independent checks of supervoxel-map invariants.

#pragma once

#include <deque>
#include <set>
#include <vector>

#include "scribvol/volume.hpp"

namespace svcheck {

using scribvol::Index3;
using scribvol::LabelVolume;

// Ids are exactly 0..S-1 with none missing.
inline bool dense_labels(const LabelVolume& l) {
  std::set<std::uint32_t> ids(l.data().begin(), l.data().end());
  return !ids.empty() && *ids.begin() == 0 && *ids.rbegin() + 1 == ids.size() && ids.size() == l.num_labels();
}

// Every id forms one 26-connected component.
inline bool connected26(const LabelVolume& l) {
  const auto& g = l.geometry();
  std::vector<std::uint8_t> seen(l.size(), 0);
  std::set<std::uint32_t> started;
  for (std::size_t s = 0; s < l.size(); ++s) {
    if (seen[s]) continue;
    if (!started.insert(l[s]).second) return false;
    std::deque<std::size_t> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      const Index3 p = g.coords(q.front());
      q.pop_front();
      for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const Index3 n{p.x + dx, p.y + dy, p.z + dz};
            if (!g.contains(n)) continue;
            const std::size_t j = g.linear(n);
            if (seen[j] || l[j] != l[s]) continue;
            seen[j] = 1;
            q.push_back(j);
          }
        }
      }
    }
  }
  return true;
}

// Fraction of supervoxels whose voxels all share one intensity.
inline double pure_fraction(const LabelVolume& l, const scribvol::ScalarVolume& v) {
  std::vector<std::set<float>> values(l.num_labels());
  for (std::size_t i = 0; i < l.size(); ++i) values[l[i]].insert(v[i]);
  std::size_t pure = 0;
  for (const auto& s : values) pure += s.size() == 1;
  return static_cast<double>(pure) / static_cast<double>(values.size());
}

}  // namespace svcheck
