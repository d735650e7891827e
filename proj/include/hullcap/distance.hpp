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

#include <span>
#include <vector>

#include "hullcap/mesh.hpp"

namespace hullcap {

struct ClosestPoint {
  double squared_distance = 0.0;
  Vec3 point = Vec3::Zero();
  int triangle = -1;
  Vec3 barycentric = Vec3::Zero();  // weights of the triangle's three corners

  double distance() const;
};

// Closest point of triangle abc to p (face, edge or vertex region).
ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Exhaustive search over every triangle.
ClosestPoint brute_force_closest(const Vec3& p, const TriMesh& mesh);

// Median-split AABB tree over the triangles of a mesh, leaf size 4. Queries
// are exact: the subtree pruning only skips boxes strictly farther than the
// best candidate, so results equal brute_force_closest bit for bit.
class TriangleBvh {
 public:
  explicit TriangleBvh(const TriMesh& mesh);

  ClosestPoint closest(const Vec3& p) const;
  double distance(const Vec3& p) const { return closest(p).distance(); }

 private:
  struct Node {
    Aabb box;
    int first = 0;  // leaf: offset into order_; inner: left child index
    int count = 0;  // leaf: triangle count; inner: 0
    int right = -1;
  };

  int build(int begin, int end, const std::vector<Vec3>& centroids);

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Aabb> boxes_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// Point-to-surface distance from one point to a mesh.
double p2s_distance(const Vec3& point, const TriMesh& mesh);

// Distances of many points against one mesh (single tree, parallel queries).
std::vector<double> p2s_distances(std::span<const Vec3> points, const TriMesh& mesh);

// Closest points of many points against one mesh.
std::vector<ClosestPoint> closest_points(std::span<const Vec3> points, const TriMesh& mesh);

}  // namespace hullcap
