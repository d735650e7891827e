/*
 * Copyright (c) 2026 The hullcap Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hullcap/supervision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hullcap {

void Scan::validate() const {
  if (points.empty()) throw ValidationError("scan has no points");
  if (!regions.empty() && regions.size() != points.size())
    throw ShapeError("scan has " + std::to_string(regions.size()) + " region labels for " +
                     std::to_string(points.size()) + " points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) throw ValidationError("scan point " + std::to_string(i) + " is not finite");
  }
}

std::size_t MaskedLoss::kept() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<std::uint8_t> v2v_mask(std::span<const Vec3> a, std::span<const Vec3> b, std::span<const Vec3> reg) {
  if (a.size() != b.size() || a.size() != reg.size())
    throw ShapeError("vertex counts disagree: " + std::to_string(a.size()) + ", " + std::to_string(b.size()) +
                     ", " + std::to_string(reg.size()));
  std::vector<std::uint8_t> mask(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    mask[i] = (b[i] - a[i]).norm() >= (b[i] - reg[i]).norm() ? 1 : 0;
  }
  return mask;
}

double masked_v2v(std::span<const Vec3> v, std::span<const Vec3> reg, std::span<const std::uint8_t> mask,
                  std::vector<Vec3>* grad) {
  if (v.size() != reg.size() || v.size() != mask.size()) throw ShapeError("v2v inputs disagree in length");
  const auto kept = static_cast<double>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
  if (kept == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mask[i]) continue;
    const Vec3 diff = v[i] - reg[i];
    const double n = diff.norm();
    sum += n;
    if (grad != nullptr && n > 0.0) (*grad)[i] += diff / (n * kept);
  }
  return sum / kept;
}

MaskedLoss robust_v2v_loss(std::span<const Vec3> a, std::span<const Vec3> b, std::span<const Vec3> reg) {
  MaskedLoss out;
  out.mask = v2v_mask(a, b, reg);
  out.starved = out.kept() == 0;
  out.loss = masked_v2v(a, reg, out.mask, nullptr);
  return out;
}

std::vector<std::uint8_t> p2s_mask(std::span<const double> d_a, std::span<const double> d_b,
                                   std::span<const double> d_reg) {
  if (d_a.size() != d_b.size() || d_a.size() != d_reg.size())
    throw ShapeError("distance lists disagree in length: " + std::to_string(d_a.size()) + ", " +
                     std::to_string(d_b.size()) + ", " + std::to_string(d_reg.size()));
  std::vector<std::uint8_t> mask(d_a.size());
  for (std::size_t i = 0; i < d_a.size(); ++i) {
    const bool outlier = d_b[i] < d_reg[i] && std::abs(d_b[i] - d_a[i]) < std::abs(d_b[i] - d_reg[i]);
    mask[i] = outlier ? 0 : 1;
  }
  return mask;
}

double masked_p2s(const Scan& scan, const TriMesh& mesh, std::span<const ClosestPoint> closest,
                  std::span<const std::uint8_t> mask, std::vector<Vec3>* grad) {
  if (closest.size() != scan.size() || mask.size() != scan.size()) throw ShapeError("p2s inputs disagree in length");
  const auto kept = static_cast<double>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
  if (kept == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (!mask[i]) continue;
    const double d = closest[i].distance();
    sum += d;
    if (grad == nullptr || d <= 0.0) continue;
    // The closest point moves with the triangle; its own motion within the
    // triangle does not change d to first order.
    const Vec3 dir = (closest[i].point - scan.points[i]) / (d * kept);
    const Triangle& tri = mesh.triangles[static_cast<std::size_t>(closest[i].triangle)];
    for (int k = 0; k < 3; ++k) (*grad)[static_cast<std::size_t>(tri[k])] += closest[i].barycentric[k] * dir;
  }
  return sum / kept;
}

MaskedLoss robust_p2s_loss(const Scan& scan, const TriMesh& mesh_a, const TriMesh& mesh_b, const TriMesh& mesh_reg) {
  scan.validate();
  if (mesh_a.triangles != mesh_b.triangles || mesh_a.triangles != mesh_reg.triangles)
    throw ShapeError("robust p2s loss needs meshes of one topology");
  const std::vector<double> d_a = p2s_distances(scan.points, mesh_a);
  const std::vector<double> d_b = p2s_distances(scan.points, mesh_b);
  const std::vector<double> d_reg = p2s_distances(scan.points, mesh_reg);
  MaskedLoss out;
  out.mask = p2s_mask(d_a, d_b, d_reg);
  out.starved = out.kept() == 0;
  if (!out.starved) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d_a.size(); ++i) {
      if (out.mask[i]) sum += d_a[i];
    }
    out.loss = sum / static_cast<double>(out.kept());
  }
  return out;
}

LaplacianTerm::LaplacianTerm(const TriMesh& rest) : neighbors_(vertex_neighbors(rest)) {
  reference_ = apply(rest.vertices);
}

std::vector<Vec3> LaplacianTerm::apply(std::span<const Vec3> v) const {
  if (v.size() != neighbors_.size())
    throw ShapeError("Laplacian built for " + std::to_string(neighbors_.size()) + " vertices, got " +
                     std::to_string(v.size()));
  std::vector<Vec3> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Vec3 mean = Vec3::Zero();
    for (int j : neighbors_[i]) mean += v[static_cast<std::size_t>(j)];
    if (!neighbors_[i].empty()) mean /= static_cast<double>(neighbors_[i].size());
    out[i] = neighbors_[i].empty() ? Vec3::Zero() : Vec3(v[i] - mean);
  }
  return out;
}

double LaplacianTerm::evaluate(std::span<const Vec3> v, std::vector<Vec3>* grad) const {
  const std::vector<Vec3> lv = apply(v);
  const double n = static_cast<double>(v.size());
  double energy = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (neighbors_[i].empty()) continue;
    const Vec3 e = lv[i] - reference_[i];
    energy += e.squaredNorm();
    if (grad == nullptr) continue;
    const Vec3 g = (2.0 / n) * e;
    (*grad)[i] += g;
    const double share = 1.0 / static_cast<double>(neighbors_[i].size());
    for (int j : neighbors_[i]) (*grad)[static_cast<std::size_t>(j)] -= share * g;
  }
  return energy / n;
}

}  // namespace hullcap
