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

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "scribvol/numeric.hpp"
#include "scribvol/propagate.hpp"
#include "scribvol/skeleton.hpp"

namespace scribvol::propagate {

namespace {

constexpr std::size_t kSeed = std::numeric_limits<std::size_t>::max();

struct Edge {
  std::size_t a;
  std::size_t b;
  double w;
};

std::vector<Edge> grid_edges(const ScalarVolume& volume, const RandomWalkerParams& p) {
  const Geometry& g = volume.geometry();
  const Dims& d = g.dims();
  std::vector<Edge> edges;
  edges.reserve(3 * g.voxel_count());
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t i = g.linear(x, y, z);
        const std::size_t nb[3] = {x + 1 < d.nx ? g.linear(x + 1, y, z) : kSeed,
                                   y + 1 < d.ny ? g.linear(x, y + 1, z) : kSeed,
                                   z + 1 < d.nz ? g.linear(x, y, z + 1) : kSeed};
        for (int a = 0; a < 3; ++a) {
          if (nb[a] == kSeed) continue;
          const double di = static_cast<double>(volume[nb[a]]) - static_cast<double>(volume[i]);
          const double w = (std::exp(-p.beta * di * di) + p.weight_floor) / g.spacing()[a];
          edges.push_back({i, nb[a], w});
        }
      }
    }
  }
  return edges;
}

// Every unseeded voxel must reach a seed through positive-weight edges,
// otherwise the reduced Laplacian is singular.
void check_reachability(const Geometry& g, const std::vector<Edge>& edges,
                        const std::vector<std::size_t>& seed_class) {
  std::vector<std::vector<std::size_t>> adj(g.voxel_count());
  for (const auto& e : edges) {
    if (e.w > 0.0) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
  }
  std::vector<std::uint8_t> seen(g.voxel_count(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < seed_class.size(); ++i) {
    if (seed_class[i] != kSeed) {
      seen[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t j : adj[i]) {
      if (!seen[j]) {
        seen[j] = 1;
        queue.push_back(j);
      }
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      const Index3 p = g.coords(i);
      fail(ErrorCode::kSingularSystem,
           "random walker: unseeded component containing voxel (" + std::to_string(p.x) + ", " +
               std::to_string(p.y) + ", " + std::to_string(p.z) + ") cannot reach any seed");
    }
  }
}

}  // namespace

RandomWalkerResult random_walker(const ScalarVolume& volume, const ScribbleSet& scribbles,
                                 const RandomWalkerParams& params) {
  require_same_geometry(volume.geometry(), scribbles.geometry(), "volume vs scribbles");
  require(params.beta > 0.0 && std::isfinite(params.beta), ErrorCode::kInvalidArgument,
          "random walker beta must be > 0");
  require(params.weight_floor >= 0.0 && params.tolerance > 0.0, ErrorCode::kInvalidArgument,
          "random walker weight floor must be >= 0 and tolerance > 0");
  const auto label_set = scribbles.labels();
  require(label_set.size() >= 2, ErrorCode::kInvalidArgument,
          "random walker needs scribbles of at least two labels");
  const Geometry& g = volume.geometry();
  const std::size_t n = g.voxel_count();
  const std::vector<std::uint32_t> labels(label_set.begin(), label_set.end());
  const std::size_t k = labels.size();
  std::map<std::uint32_t, std::size_t> class_of;
  for (std::size_t c = 0; c < k; ++c) class_of[labels[c]] = c;

  std::vector<std::size_t> seed_class(n, kSeed);
  for (const auto& s : scribbles.entries()) seed_class[g.linear(s.voxel)] = class_of[s.label];

  const auto edges = grid_edges(volume, params);
  check_reachability(g, edges, seed_class);

  // Unknowns are the unseeded voxels in raster order.
  std::vector<std::size_t> unknown_index(n, kSeed);
  std::vector<std::size_t> unknowns;
  for (std::size_t i = 0; i < n; ++i) {
    if (seed_class[i] == kSeed) {
      unknown_index[i] = unknowns.size();
      unknowns.push_back(i);
    }
  }
  const auto m = static_cast<Eigen::Index>(unknowns.size());

  std::vector<double> prob(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (seed_class[i] != kSeed) prob[i * k + seed_class[i]] = 1.0;
  }
  std::vector<std::size_t> iterations(k, 0);

  if (m > 0) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(edges.size() * 4);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(k));
    for (const auto& e : edges) {
      const std::size_t ua = unknown_index[e.a];
      const std::size_t ub = unknown_index[e.b];
      if (ua != kSeed) trips.emplace_back(ua, ua, e.w);
      if (ub != kSeed) trips.emplace_back(ub, ub, e.w);
      if (ua != kSeed && ub != kSeed) {
        trips.emplace_back(ua, ub, -e.w);
        trips.emplace_back(ub, ua, -e.w);
      } else if (ua != kSeed) {
        rhs(static_cast<Eigen::Index>(ua), static_cast<Eigen::Index>(seed_class[e.b])) += e.w;
      } else if (ub != kSeed) {
        rhs(static_cast<Eigen::Index>(ub), static_cast<Eigen::Index>(seed_class[e.a])) += e.w;
      }
    }
    Eigen::SparseMatrix<double> lap(m, m);
    lap.setFromTriplets(trips.begin(), trips.end());

    std::vector<Eigen::VectorXd> solutions(k);
    parallel_for(k, [&](std::size_t c) {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(params.tolerance);
      cg.setMaxIterations(static_cast<Eigen::Index>(params.max_iterations));
      cg.compute(lap);
      const Eigen::VectorXd b = rhs.col(static_cast<Eigen::Index>(c));
      solutions[c] = cg.solve(b);
      iterations[c] = static_cast<std::size_t>(cg.iterations());
      if (cg.info() != Eigen::Success) {
        fail(ErrorCode::kSingularSystem,
             "random walker: conjugate gradient did not converge for label " +
                 std::to_string(labels[c]) + " (residual " + std::to_string(cg.error()) + ")");
      }
    });
    // Project each voxel back onto the simplex; solver residue is ~tolerance.
    for (Eigen::Index u = 0; u < m; ++u) {
      const std::size_t i = unknowns[static_cast<std::size_t>(u)];
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double v = std::clamp(solutions[c](u), 0.0, 1.0);
        prob[i * k + c] = v;
        total += v;
      }
      if (total <= 0.0) {
        for (std::size_t c = 0; c < k; ++c) prob[i * k + c] = 1.0 / static_cast<double>(k);
      } else {
        for (std::size_t c = 0; c < k; ++c) prob[i * k + c] /= total;
      }
    }
  }
  ProbabilityVolume pv(g, k, std::move(prob), true);
  return {std::move(pv), labels, std::move(iterations)};
}

ScribbleSet expand_random_walker(const ScalarVolume& volume, const ScribbleSet& scribbles,
                                 const RandomWalkerParams& params) {
  require(params.threshold > 0.5 && params.threshold <= 1.0, ErrorCode::kInvalidArgument,
          "random walker threshold must lie in (0.5, 1]");
  const Geometry& g = volume.geometry();
  const auto annotated = scribbles.annotated_slices();
  std::vector<Scribble> out = scribbles.entries();
  std::vector<std::size_t> targets;
  for (std::size_t z = 0; z < g.dims().nz; ++z) {
    if (!annotated.count(z)) targets.push_back(z);
  }
  // Validation (labels, beta) happens in random_walker even without targets.
  if (targets.empty()) {
    require(scribbles.labels().size() >= 2, ErrorCode::kInvalidArgument,
            "random walker needs scribbles of at least two labels");
    return ScribbleSet(g, std::move(out));
  }
  const auto rw = random_walker(volume, scribbles, params);
  const std::size_t k = rw.labels.size();
  const Dims& d = g.dims();

  std::vector<std::vector<Scribble>> per_slice(targets.size());
  parallel_for(targets.size(), [&](std::size_t t) {
    const std::size_t z = targets[t];
    for (std::size_t c = 0; c < k; ++c) {
      Mask2D mask(d.nx, d.ny);
      std::size_t hits = 0;
      for (std::size_t y = 0; y < d.ny; ++y) {
        for (std::size_t x = 0; x < d.nx; ++x) {
          const auto p = rw.probabilities.voxel(g.linear(x, y, z));
          const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
          if (best == c && p[c] >= params.threshold) {
            mask.at(x, y) = 1;
            ++hits;
          }
        }
      }
      if (hits == 0) continue;
      const Mask2D skel = shape::thin(mask);
      for (std::size_t y = 0; y < d.ny; ++y) {
        for (std::size_t x = 0; x < d.nx; ++x) {
          if (skel.at(x, y)) {
            per_slice[t].push_back({{static_cast<std::int64_t>(x), static_cast<std::int64_t>(y),
                                     static_cast<std::int64_t>(z)},
                                    rw.labels[c]});
          }
        }
      }
    }
  });
  for (auto& s : per_slice) out.insert(out.end(), s.begin(), s.end());
  return ScribbleSet(g, std::move(out));
}

ScribbleSet expand_random_walker(const ScalarVolume& volume, const ScribbleSet& scribbles,
                                 double beta, double threshold) {
  RandomWalkerParams p;
  p.beta = beta;
  p.threshold = threshold;
  return expand_random_walker(volume, scribbles, p);
}

}  // namespace scribvol::propagate
