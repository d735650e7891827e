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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hullcap/distance.hpp"
#include "hullcap/mesh.hpp"

namespace hullcap {

// Unstructured scan points, optionally labeled by region.
struct Scan {
  std::vector<Vec3> points;
  std::vector<Region> regions;  // empty or one per point

  std::size_t size() const { return points.size(); }
  void validate() const;
};

// A masked mean; `starved` marks an all-zero mask (loss reported as 0).
struct MaskedLoss {
  double loss = 0.0;
  std::vector<std::uint8_t> mask;
  bool starved = false;

  std::size_t kept() const;
};

// delta_i = 1 iff |b_i - a_i| >= |b_i - reg_i|: supervision for `a` is kept
// unless its peer `b` agrees with it more closely than with the label.
std::vector<std::uint8_t> v2v_mask(std::span<const Vec3> a, std::span<const Vec3> b, std::span<const Vec3> reg);

// Mean of |a_i - reg_i| over delta_i = 1, with delta from v2v_mask(a, b, reg).
MaskedLoss robust_v2v_loss(std::span<const Vec3> a, std::span<const Vec3> b, std::span<const Vec3> reg);

// omega_i = 0 iff d_b < d_reg and |d_b - d_a| < |d_b - d_reg|: both
// predictions sit together, closer to the point than the label mesh does.
std::vector<std::uint8_t> p2s_mask(std::span<const double> d_a, std::span<const double> d_b,
                                   std::span<const double> d_reg);

// Mean of d_a over omega_i = 1, distances measured against the three meshes.
MaskedLoss robust_p2s_loss(const Scan& scan, const TriMesh& mesh_a, const TriMesh& mesh_b, const TriMesh& mesh_reg);

// Masked mean of |v_i - reg_i|; adds its gradient w.r.t. v into `grad` when
// given. An all-zero mask yields 0 and no gradient.
double masked_v2v(std::span<const Vec3> v, std::span<const Vec3> reg, std::span<const std::uint8_t> mask,
                  std::vector<Vec3>* grad);

// Masked mean of point-to-surface distances given each point's closest point
// on the mesh; adds the gradient w.r.t. the mesh vertices into `grad`.
double masked_p2s(const Scan& scan, const TriMesh& mesh, std::span<const ClosestPoint> closest,
                  std::span<const std::uint8_t> mask, std::vector<Vec3>* grad);

// (1/n) sum_i |(L v)_i - r_i|^2 with the uniform umbrella operator
// (L v)_i = v_i - mean of the one-ring, and r = L applied to a rest shape.
class LaplacianTerm {
 public:
  explicit LaplacianTerm(const TriMesh& rest);

  double evaluate(std::span<const Vec3> v, std::vector<Vec3>* grad) const;
  std::vector<Vec3> apply(std::span<const Vec3> v) const;

 private:
  std::vector<std::vector<int>> neighbors_;
  std::vector<Vec3> reference_;
};

}  // namespace hullcap
