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

#include "scribvol/shapeprior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "scribvol/numeric.hpp"

namespace scribvol::shape {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Per-class spread with the intermediates the gradient needs.
struct SpreadDetail {
  double mass = 0.0;
  std::array<double, 3> centroid{};
  std::array<double, 3> spread{};
  std::array<double, 3> sign_sum{};  // sum_i w_i sign(x_i - xbar)
};

SpreadDetail spread_detail(std::span<const double> pred, std::size_t k, std::size_t cls,
                           const Geometry& g, SpreadMode mode) {
  const std::size_t n = g.voxel_count();
  const Dims& d = g.dims();
  const Spacing& sp = g.spacing();
  SpreadDetail out;
  std::vector<double> w(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = pred[i * k + cls];
  out.mass = pairwise_sum(w);
  if (out.mass <= 0.0) return out;
  auto coord = [&](std::size_t i, int a) {
    const std::size_t idx = a == 0 ? i % d.nx : (a == 1 ? (i / d.nx) % d.ny : i / d.slice_size());
    return static_cast<double>(idx) * sp[a];
  };
  for (int a = 0; a < 3; ++a) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = w[i] * coord(i, a);
    const double c = pairwise_sum(buf) / out.mass;
    out.centroid[a] = c;
    if (mode == SpreadMode::kWeighted) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = w[i] * std::abs(coord(i, a) - c);
      out.spread[a] = pairwise_sum(buf) / out.mass;
      for (std::size_t i = 0; i < n; ++i) buf[i] = w[i] * sign(coord(i, a) - c);
      out.sign_sum[a] = pairwise_sum(buf);
    } else {
      for (std::size_t i = 0; i < n; ++i) buf[i] = std::abs(coord(i, a) - c);
      out.spread[a] = pairwise_sum(buf) / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) buf[i] = sign(coord(i, a) - c);
      out.sign_sum[a] = pairwise_sum(buf);
    }
  }
  return out;
}

double mean3(const std::array<double, 3>& v) { return (v[0] + v[1] + v[2]) / 3.0; }

double shell_edge(double r_max, std::size_t m) {
  // Edges: r_max/16, then log-spaced up to r_max.
  const double r_min = r_max / 16.0;
  return r_min * std::pow(16.0, static_cast<double>(m) / 3.0);
}

bool context_less(const SkeletonContext& a, const SkeletonContext& b) {
  if (a.histograms.size() != b.histograms.size()) return a.histograms.size() < b.histograms.size();
  if (a.histograms != b.histograms) return a.histograms < b.histograms;
  if (a.points != b.points) return a.points < b.points;
  return a.r_max < b.r_max;
}

}  // namespace

std::vector<double> class_ratio(std::span<const double> pred, std::size_t num_classes) {
  require(num_classes >= 1 && pred.size() % num_classes == 0 && !pred.empty(),
          ErrorCode::kInvalidArgument, "class_ratio: bad prediction layout");
  const std::size_t n = pred.size() / num_classes;
  std::vector<double> out(num_classes), buf(n);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = pred[i * num_classes + c];
    out[c] = pairwise_sum(buf) / static_cast<double>(n);
  }
  return out;
}

std::vector<double> class_ratio(const ProbabilityVolume& pred) {
  require(pred.simplex(), ErrorCode::kInvalidArgument, "class_ratio expects a simplex prediction");
  return class_ratio(pred.data(), pred.num_classes());
}

std::vector<Spread> centroid_spread(std::span<const double> pred, std::size_t num_classes,
                                    const Geometry& geometry, SpreadMode mode) {
  require(pred.size() == geometry.voxel_count() * num_classes, ErrorCode::kGeometryMismatch,
          "centroid_spread: prediction size does not match geometry");
  std::vector<Spread> out(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto det = spread_detail(pred, num_classes, c, geometry, mode);
    if (det.mass > 0.0) out[c] = det.spread;
  }
  return out;
}

std::vector<Spread> centroid_spread(const ProbabilityVolume& pred, SpreadMode mode) {
  require(pred.simplex(), ErrorCode::kInvalidArgument, "centroid_spread expects a simplex prediction");
  return centroid_spread(pred.data(), pred.num_classes(), pred.geometry(), mode);
}

ShapeMoments shape_moments(const LabelVolume& mask, std::size_t num_classes) {
  const auto onehot = ProbabilityVolume::one_hot(mask, num_classes);
  return {class_ratio(onehot), centroid_spread(onehot, SpreadMode::kWeighted),
          centroid_spread(onehot, SpreadMode::kLiteral)};
}

// --- skeleton context --------------------------------------------------------

SkeletonContext skeleton_context(const std::vector<std::array<double, 2>>& points,
                                 std::size_t samples) {
  require(points.size() >= 2, ErrorCode::kInvalidArgument,
          "skeleton context needs at least two points");
  require(samples >= 2, ErrorCode::kInvalidArgument, "skeleton context needs samples >= 2");
  SkeletonContext ctx;
  const std::size_t n = points.size();
  if (n <= samples) {
    ctx.points = points;
  } else {
    for (std::size_t i = 0; i < samples; ++i) ctx.points.push_back(points[i * n / samples]);
  }
  const std::size_t m = ctx.points.size();
  std::vector<double> pair;
  pair.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      pair.push_back(std::hypot(ctx.points[j][0] - ctx.points[i][0], ctx.points[j][1] - ctx.points[i][1]));
    }
  }
  ctx.r_max = 2.0 * pairwise_sum(pair) / static_cast<double>(pair.size());
  const double edges[3] = {shell_edge(ctx.r_max, 0), shell_edge(ctx.r_max, 1), shell_edge(ctx.r_max, 2)};
  const double sector = std::numbers::pi / 6.0;

  ctx.histograms.assign(m, Histogram{});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double dx = ctx.points[j][0] - ctx.points[i][0];
      const double dy = ctx.points[j][1] - ctx.points[i][1];
      const double r = std::hypot(dx, dy);
      std::size_t shell = kRadialBins - 1;
      for (std::size_t e = 0; e < 3; ++e) {
        if (r < edges[e]) {
          shell = e;
          break;
        }
      }
      double theta = std::atan2(dy, dx);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      const auto bin = static_cast<std::size_t>(std::floor(theta / sector + 1e-9)) % kAngularBins;
      ++ctx.histograms[i][shell * kAngularBins + bin];
    }
  }
  return ctx;
}

SkeletonContext skeleton_context(const Skeleton& skeleton, std::size_t samples) {
  return skeleton_context(skeleton.points_mm, samples);
}

double point_cost(const Histogram& h, const Histogram& g) {
  double acc = 0.0;
  for (std::size_t b = 0; b < kBins; ++b) {
    const double s = static_cast<double>(h[b]) + static_cast<double>(g[b]);
    if (s == 0.0) continue;
    const double diff = static_cast<double>(h[b]) - static_cast<double>(g[b]);
    acc += diff * diff / s;
  }
  return 0.5 * acc;
}

std::vector<std::size_t> linear_assignment(const std::vector<double>& cost, std::size_t n) {
  require(cost.size() == n * n, ErrorCode::kInvalidArgument, "assignment: matrix is not n x n");
  if (n == 0) return {};
  // Shortest augmenting path with potentials; 1-based internal indexing.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<std::uint8_t> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double match_cost(const SkeletonContext& a_in, const SkeletonContext& b_in) {
  require(!a_in.histograms.empty() && !b_in.histograms.empty(), ErrorCode::kInvalidArgument,
          "match_cost needs nonempty contexts");
  // Canonical operand order makes the result exactly symmetric.
  const bool swap = context_less(b_in, a_in);
  const SkeletonContext& a = swap ? b_in : a_in;
  const SkeletonContext& b = swap ? a_in : b_in;
  const std::size_t na = a.histograms.size();
  const std::size_t nb = b.histograms.size();
  const std::size_t n = std::max(na, nb);
  std::vector<double> c(na * nb);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) c[i * nb + j] = point_cost(a.histograms[i], b.histograms[j]);
  }
  std::vector<double> full(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      if (i < na && j < nb) {
        v = c[i * nb + j];
      } else if (i < na) {
        v = *std::min_element(c.begin() + static_cast<std::ptrdiff_t>(i * nb),
                              c.begin() + static_cast<std::ptrdiff_t>((i + 1) * nb));
      } else if (j < nb) {
        v = kInf;
        for (std::size_t r = 0; r < na; ++r) v = std::min(v, c[r * nb + j]);
      }
      full[i * n + j] = v;
    }
  }
  const auto match = linear_assignment(full, n);
  std::vector<double> picked(n);
  for (std::size_t i = 0; i < n; ++i) picked[i] = full[i * n + match[i]];
  std::sort(picked.begin(), picked.end());
  return pairwise_sum(picked);
}

// --- prototypes --------------------------------------------------------------

std::vector<std::vector<double>> distance_matrix(const std::vector<SkeletonContext>& descriptors) {
  const std::size_t n = descriptors.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = match_cost(descriptors[i], descriptors[j]);
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) d[i][j] = d[j][i];
  }
  return d;
}

KMedoidsResult kmedoids(const std::vector<std::vector<double>>& dist, std::size_t k_p,
                        std::uint64_t seed) {
  const std::size_t n = dist.size();
  require(k_p >= 1, ErrorCode::kInvalidArgument, "kmedoids: k_p must be >= 1");
  require(k_p <= n, ErrorCode::kInvalidArgument,
          "kmedoids: k_p " + std::to_string(k_p) + " exceeds population " + std::to_string(n));
  for (const auto& row : dist) {
    require(row.size() == n, ErrorCode::kInvalidArgument, "kmedoids: distance matrix is not square");
  }
  KMedoidsResult res;
  std::mt19937_64 rng(seed);
  res.medoids.push_back(static_cast<std::size_t>(rng() % n));
  std::vector<std::uint8_t> is_medoid(n, 0);
  is_medoid[res.medoids[0]] = 1;
  while (res.medoids.size() < k_p) {
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_medoid[i]) continue;
      double nearest = kInf;
      for (std::size_t m : res.medoids) nearest = std::min(nearest, dist[i][m]);
      if (nearest > best_d) {
        best_d = nearest;
        best = i;
      }
    }
    is_medoid[best] = 1;
    res.medoids.push_back(best);
  }

  res.assignment.assign(n, 0);
  constexpr std::size_t kMaxIterations = 50;
  for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
    ++res.iterations;
    std::vector<double> costs(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t m = 1; m < k_p; ++m) {
        if (dist[i][res.medoids[m]] < dist[i][res.medoids[best]]) best = m;
      }
      // A medoid always stays with itself.
      for (std::size_t m = 0; m < k_p; ++m) {
        if (res.medoids[m] == i) best = m;
      }
      res.assignment[i] = best;
      costs[i] = dist[i][res.medoids[best]];
    }
    res.cost_history.push_back(pairwise_sum(costs));

    bool changed = false;
    for (std::size_t m = 0; m < k_p; ++m) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.assignment[i] == m) members.push_back(i);
      }
      auto within = [&](std::size_t c) {
        std::vector<double> s;
        s.reserve(members.size());
        for (std::size_t i : members) s.push_back(dist[c][i]);
        return pairwise_sum(s);
      };
      std::size_t best = res.medoids[m];
      double best_cost = within(best);
      for (std::size_t c : members) {
        const double v = within(c);
        if (v < best_cost) {
          best_cost = v;
          best = c;
        }
      }
      if (best != res.medoids[m]) {
        res.medoids[m] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return res;
}

KMedoidsResult kmedoids(const std::vector<SkeletonContext>& descriptors, std::size_t k_p,
                        std::uint64_t seed) {
  return kmedoids(distance_matrix(descriptors), k_p, seed);
}

std::map<std::uint32_t, std::vector<SkeletonContext>> slice_contexts(const LabelVolume& mask,
                                                                     std::size_t samples) {
  std::map<std::uint32_t, std::vector<SkeletonContext>> out;
  const Dims& d = mask.dims();
  const Spacing& sp = mask.spacing();
  for (std::uint32_t label = 1; label < mask.num_labels(); ++label) {
    for (std::size_t z = 0; z < d.nz; ++z) {
      const Mask2D m = extract_label_mask(mask, z, label);
      if (count_nonzero(m) == 0) continue;
      const Skeleton skel = skeletonize(m, sp.x, sp.y, z, label);
      if (skel.points_mm.size() < 2) continue;
      out[label].push_back(skeleton_context(skel, samples));
    }
  }
  return out;
}

PrototypeBank build_bank(const std::vector<LabelVolume>& masks, std::size_t num_classes,
                         const BankParams& params) {
  require(!masks.empty(), ErrorCode::kInvalidArgument, "prototype bank needs at least one mask");
  require(num_classes >= 2, ErrorCode::kInvalidArgument, "prototype bank needs a foreground class");
  PrototypeBank bank;
  bank.num_classes = num_classes;
  bank.samples = params.samples;
  std::map<std::uint32_t, std::vector<SkeletonContext>> corpus;
  for (const auto& mask : masks) {
    require(mask.num_labels() <= num_classes, ErrorCode::kInvalidArgument,
            "mask label exceeds the declared class count");
    bank.moments.push_back(shape_moments(mask, num_classes));
    for (auto& [label, ctxs] : slice_contexts(mask, params.samples)) {
      auto& dst = corpus[label];
      dst.insert(dst.end(), ctxs.begin(), ctxs.end());
    }
  }
  for (auto& [label, ctxs] : corpus) {
    if (!params.classes.empty() &&
        std::find(params.classes.begin(), params.classes.end(), label) == params.classes.end()) {
      continue;
    }
    const std::size_t k = std::min(params.k_p, ctxs.size());
    const auto km = kmedoids(ctxs, k, derive_seed(params.seed, "class-" + std::to_string(label)));
    auto& protos = bank.prototypes[label];
    for (std::size_t m : km.medoids) protos.push_back(ctxs[m]);
  }
  return bank;
}

// --- losses ------------------------------------------------------------------

losses::LossValue shape_moment_loss(std::span<const double> pred, std::size_t k,
                                    const Geometry& geometry, const PrototypeBank& bank,
                                    double lambda, SpreadMode mode) {
  require(!bank.moments.empty(), ErrorCode::kInvalidArgument, "shape prior bank has no shapes");
  require(bank.num_classes == k, ErrorCode::kInvalidArgument,
          "shape prior bank has " + std::to_string(bank.num_classes) + " classes, prediction has " +
              std::to_string(k));
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::kInvalidArgument,
          "shape loss lambda must be finite and >= 0");
  require(pred.size() == geometry.voxel_count() * k, ErrorCode::kGeometryMismatch,
          "shape loss: prediction size does not match geometry");
  const std::size_t n = geometry.voxel_count();
  const Dims& d = geometry.dims();
  const Spacing& sp = geometry.spacing();

  const auto ratio = class_ratio(pred, k);
  std::vector<SpreadDetail> det(k);
  std::vector<std::optional<double>> dhat(k);
  for (std::size_t c = 1; c < k; ++c) {
    det[c] = spread_detail(pred, k, c, geometry, mode);
    if (det[c].mass > 0.0) dhat[c] = mean3(det[c].spread);
  }

  // Reference selection by summed spread difference.
  std::vector<double> gap(bank.moments.size(), 0.0);
  std::vector<std::size_t> admissible;
  for (std::size_t j = 0; j < bank.moments.size(); ++j) {
    const auto& ref = bank.moments[j].spread_for(mode);
    for (std::size_t c = 1; c < k; ++c) {
      if (dhat[c] && ref[c]) gap[j] += std::abs(*dhat[c] - mean3(*ref[c]));
    }
    if (gap[j] <= kSpreadTolerance) admissible.push_back(j);
  }
  if (admissible.empty()) {
    admissible.push_back(static_cast<std::size_t>(std::min_element(gap.begin(), gap.end()) - gap.begin()));
  }
  std::vector<double> rbar(k, 0.0);
  std::vector<std::optional<double>> dref(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> rs, ds;
    for (std::size_t j : admissible) {
      rs.push_back(bank.moments[j].ratio[c]);
      const auto& ref = bank.moments[j].spread_for(mode);
      if (c > 0 && ref[c]) ds.push_back(mean3(*ref[c]));
    }
    rbar[c] = pairwise_sum(rs) / static_cast<double>(rs.size());
    if (!ds.empty()) dref[c] = pairwise_sum(ds) / static_cast<double>(ds.size());
  }

  // KL between eps-smoothed, renormalized ratio vectors.
  std::vector<double> p(k), q(k);
  for (std::size_t c = 0; c < k; ++c) {
    p[c] = ratio[c] + losses::kEpsilon;
    q[c] = rbar[c] + losses::kEpsilon;
  }
  const double zp = pairwise_sum(p);
  const double zq = pairwise_sum(q);
  std::vector<double> kl_terms(k);
  for (std::size_t c = 0; c < k; ++c) {
    p[c] /= zp;
    q[c] /= zq;
    kl_terms[c] = p[c] * std::log(p[c] / q[c]);
  }
  const double kl = pairwise_sum(kl_terms);

  std::vector<double> f_terms;
  std::vector<double> df(k, 0.0);
  for (std::size_t c = 1; c < k; ++c) {
    if (!dhat[c] || !dref[c]) continue;
    const double m1 = *dhat[c];
    const double m2 = *dref[c];
    f_terms.push_back((m1 - 0.9 * m2) * (m1 - 0.9 * m2) + (1.1 * m2 - m1) * (1.1 * m2 - m1));
    df[c] = lambda * (4.0 * m1 - 4.0 * m2);
  }
  const double penalty = f_terms.empty() ? 0.0 : pairwise_sum(f_terms);

  std::vector<double> grad(pred.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < k; ++c) {
    const double g_ratio = (std::log(p[c] / q[c]) - kl) / zp * inv_n;
    for (std::size_t i = 0; i < n; ++i) grad[i * k + c] = g_ratio;
  }
  for (std::size_t c = 1; c < k; ++c) {
    if (df[c] == 0.0) continue;
    const SpreadDetail& s = det[c];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx[3] = {i % d.nx, (i / d.nx) % d.ny, i / d.slice_size()};
      double dd = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double dx = static_cast<double>(idx[a]) * sp[a] - s.centroid[a];
        if (mode == SpreadMode::kWeighted) {
          dd += (std::abs(dx) - s.spread[a]) / s.mass - dx * s.sign_sum[a] / (s.mass * s.mass);
        } else {
          dd -= s.sign_sum[a] * dx * inv_n / s.mass;
        }
      }
      grad[i * k + c] += df[c] * dd / 3.0;
    }
  }

  losses::LossValue out;
  out.value = kl + lambda * penalty;
  out.gradient = std::move(grad);
  out.terms = {{"kl", kl},
               {"penalty", penalty},
               {"admissible_shapes", static_cast<double>(admissible.size())}};
  return out;
}

losses::LossValue shape_moment_loss(const ProbabilityVolume& pred, const PrototypeBank& bank,
                                    double lambda, SpreadMode mode) {
  require(pred.simplex(), ErrorCode::kInvalidArgument, "shape loss expects a simplex prediction");
  return shape_moment_loss(pred.data(), pred.num_classes(), pred.geometry(), bank, lambda, mode);
}

SkeletonScore skeleton_prior_loss(const LabelVolume& pred, const PrototypeBank& bank) {
  SkeletonScore score;
  const auto contexts = slice_contexts(pred, bank.samples);
  for (const auto& [label, protos] : bank.prototypes) {
    if (!contexts.count(label)) score.per_class[label] = std::nullopt;
  }
  for (const auto& [label, ctxs] : contexts) {
    const auto it = bank.prototypes.find(label);
    require(it != bank.prototypes.end() && !it->second.empty(), ErrorCode::kInvalidArgument,
            "no prototypes for predicted class " + std::to_string(label));
    std::vector<double> per_slice(ctxs.size());
    parallel_for(ctxs.size(), [&](std::size_t s) {
      double best = kInf;
      for (const auto& proto : it->second) best = std::min(best, match_cost(ctxs[s], proto));
      per_slice[s] = best;
    });
    const double mean = pairwise_sum(per_slice) / static_cast<double>(per_slice.size());
    score.per_class[label] = mean;
  }
  std::vector<double> present;
  for (const auto& [label, v] : score.per_class) {
    if (v) present.push_back(*v);
  }
  score.value = present.empty() ? 0.0 : pairwise_sum(present);
  return score;
}

}  // namespace scribvol::shape
