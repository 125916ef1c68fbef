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

#include "scribvol/losses.hpp"

#include <algorithm>
#include <cmath>

#include "scribvol/numeric.hpp"

namespace scribvol::losses {

namespace {

void require_weight(double w, const char* name) {
  require(std::isfinite(w) && w >= 0.0, ErrorCode::kInvalidArgument,
          std::string("loss weight ") + name + " must be finite and >= 0");
}

bool clamped(double p) { return p < kEpsilon || p > 1.0 - kEpsilon; }

}  // namespace

void LossConfig::validate() const {
  require_weight(lambda1, "lambda1");
  require_weight(lambda2, "lambda2");
  require_weight(beta1, "beta1");
  require_weight(beta2, "beta2");
  require_weight(beta3, "beta3");
}

LossValue bce(std::span<const double> pred, std::span<const std::uint32_t> target) {
  require(pred.size() == target.size(), ErrorCode::kGeometryMismatch,
          "bce: prediction and target sizes differ");
  require(!pred.empty(), ErrorCode::kInvalidArgument, "bce: empty input");
  const auto n = static_cast<double>(pred.size());
  std::vector<double> terms(pred.size());
  std::vector<double> grad(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require(target[i] <= 1, ErrorCode::kInvalidArgument, "bce: target must be binary");
    const double p = std::clamp(pred[i], kEpsilon, 1.0 - kEpsilon);
    const double y = target[i];
    terms[i] = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    if (!clamped(pred[i])) grad[i] = (-y / p + (1.0 - y) / (1.0 - p)) / n;
  }
  LossValue out;
  out.value = pairwise_sum(terms) / n;
  out.gradient = std::move(grad);
  out.terms["bce"] = out.value;
  return out;
}

LossValue bce_boundary(const ProbabilityVolume& pred, const LabelVolume& y_b) {
  require_same_geometry(pred.geometry(), y_b.geometry(), "boundary prediction vs y_B");
  require(pred.num_classes() == 1, ErrorCode::kInvalidArgument,
          "bce_boundary expects a single-channel prediction");
  return bce(pred.data(), y_b.data());
}

LossValue partial_ce(std::span<const double> pred, std::size_t num_classes,
                     std::span<const std::uint32_t> m_pseudo, std::span<const std::uint32_t> m_voxel) {
  require(num_classes >= 1, ErrorCode::kInvalidArgument, "partial_ce: no classes");
  require(m_pseudo.size() == m_voxel.size() && pred.size() == m_pseudo.size() * num_classes,
          ErrorCode::kGeometryMismatch, "partial_ce: prediction and label sizes differ");
  std::vector<double> terms;
  std::size_t supervised = 0;
  for (std::size_t i = 0; i < m_voxel.size(); ++i) {
    if (m_voxel[i]) {
      require(m_pseudo[i] < num_classes, ErrorCode::kInvalidArgument,
              "partial_ce: supervised voxel carries no definite class");
      ++supervised;
    }
  }
  LossValue out;
  std::vector<double> grad(pred.size(), 0.0);
  if (supervised == 0) {
    out.gradient = std::move(grad);
    out.terms["pce"] = 0.0;
    return out;
  }
  const auto norm = static_cast<double>(supervised);
  terms.reserve(supervised);
  for (std::size_t i = 0; i < m_voxel.size(); ++i) {
    if (!m_voxel[i]) continue;
    const std::size_t at = i * num_classes + m_pseudo[i];
    const double p = std::clamp(pred[at], kEpsilon, 1.0 - kEpsilon);
    terms.push_back(-std::log(p));
    if (!clamped(pred[at])) grad[at] = -1.0 / (p * norm);
  }
  out.value = pairwise_sum(terms) / norm;
  out.gradient = std::move(grad);
  out.terms["pce"] = out.value;
  return out;
}

LossValue partial_ce(const ProbabilityVolume& pred, const propagate::PseudoLabels& labels) {
  require_same_geometry(pred.geometry(), labels.m_pseudo.geometry(), "prediction vs pseudo labels");
  require(pred.num_classes() == labels.num_classes, ErrorCode::kInvalidArgument,
          "partial_ce: prediction has " + std::to_string(pred.num_classes()) +
              " classes, pseudo labels have " + std::to_string(labels.num_classes));
  return partial_ce(pred.data(), pred.num_classes(), labels.m_pseudo.data(), labels.m_voxel.data());
}

RegionMeans region_means(std::span<const double> u, const ScalarVolume& v) {
  require(u.size() == v.size(), ErrorCode::kGeometryMismatch, "active boundary: u and v sizes differ");
  std::vector<double> in_mass(u.size()), out_mass(u.size()), in_v(u.size()), out_v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    in_mass[i] = u[i];
    out_mass[i] = 1.0 - u[i];
    in_v[i] = u[i] * v[i];
    out_v[i] = (1.0 - u[i]) * v[i];
  }
  const double si = pairwise_sum(in_mass);
  const double so = pairwise_sum(out_mass);
  require(si > 0.0, ErrorCode::kDegenerate,
          "active boundary: inside region collapsed (sum of u is 0), c1 undefined");
  require(so > 0.0, ErrorCode::kDegenerate,
          "active boundary: outside region collapsed (sum of 1 - u is 0), c2 undefined");
  return {pairwise_sum(in_v) / si, pairwise_sum(out_v) / so};
}

LossValue active_boundary(std::span<const double> u, const ScalarVolume& v, const LossConfig& cfg,
                          std::optional<RegionMeans> frozen) {
  cfg.validate();
  require(u.size() == v.size(), ErrorCode::kGeometryMismatch, "active boundary: u and v sizes differ");
  const RegionMeans means = frozen ? *frozen : region_means(u, v);
  const Geometry& g = v.geometry();
  const Dims& d = g.dims();
  const Spacing& sp = g.spacing();
  const std::size_t n = u.size();
  const std::size_t stride[3] = {1, d.nx, d.slice_size()};

  std::vector<double> grad(n, 0.0);
  std::vector<double> surface(n, 0.0), vin(n), vout(n);
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t i = g.linear(x, y, z);
        const std::size_t c[3] = {x, y, z};
        double fd[3] = {0.0, 0.0, 0.0};
        double norm2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          if (c[a] + 1 < d[a]) fd[a] = (u[i + stride[a]] - u[i]) / sp[a];
          norm2 += fd[a] * fd[a];
        }
        if (norm2 <= 0.0) continue;
        const double norm = std::sqrt(norm2);
        surface[i] = norm;
        for (int a = 0; a < 3; ++a) {
          if (fd[a] == 0.0) continue;
          const double t = fd[a] / (sp[a] * norm);
          grad[i] -= t;
          grad[i + stride[a]] += t;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double di = means.c1 - v[i];
    const double dout = means.c2 - v[i];
    vin[i] = di * di * u[i];
    grad[i] += cfg.lambda1 * di * di;
    if (cfg.literal_volume_out) {
      vout[i] = dout * dout * u[i];
      grad[i] += cfg.lambda2 * dout * dout;
    } else {
      vout[i] = dout * dout * (1.0 - u[i]);
      grad[i] -= cfg.lambda2 * dout * dout;
    }
  }
  LossValue out;
  const double s = pairwise_sum(surface);
  const double a = pairwise_sum(vin);
  const double b = pairwise_sum(vout);
  out.value = s + cfg.lambda1 * a + cfg.lambda2 * b;
  out.gradient = std::move(grad);
  out.terms = {{"surface", s}, {"volume_in", a}, {"volume_out", b}, {"c1", means.c1}, {"c2", means.c2}};
  return out;
}

LossValue active_boundary(const ProbabilityVolume& u, const ScalarVolume& v, const LossConfig& cfg) {
  require_same_geometry(u.geometry(), v.geometry(), "u vs v");
  require(u.num_classes() == 1, ErrorCode::kInvalidArgument,
          "active boundary expects a single-channel u");
  return active_boundary(u.data(), v, cfg);
}

LossValue total_loss(const LossValue& seg_init, const LossValue& seg_final, const LossValue& bry,
                     const LossValue& ab, const LossValue& sp, const LossConfig& cfg) {
  cfg.validate();
  const std::pair<const char*, double> parts[] = {{"seg_init", seg_init.value},
                                                  {"seg_final", seg_final.value},
                                                  {"bry", bry.value},
                                                  {"ab", ab.value},
                                                  {"sp", sp.value}};
  LossValue out;
  for (const auto& [name, value] : parts) {
    require(std::isfinite(value), ErrorCode::kNonFinite,
            std::string("total_loss: component ") + name + " is not finite");
    out.terms[name] = value;
  }
  const double weighted = cfg.beta1 * bry.value + cfg.beta2 * ab.value + cfg.beta3 * sp.value;
  out.value = (seg_init.value + seg_final.value) + weighted;
  return out;
}

}  // namespace scribvol::losses
