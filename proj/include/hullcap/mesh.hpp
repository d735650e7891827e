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

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "hullcap/common.hpp"

namespace hullcap {

using Triangle = std::array<int, 3>;

// Evaluation regions of a head scan.
enum class Region : std::uint8_t { unlabeled = 0, face = 1, scalp = 2, neck = 3 };

std::string_view region_name(Region r);

// Indexed triangle mesh. Used both for the visual hull and for fixed-topology
// template meshes; `regions` is either empty or one label per vertex.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Region> regions;

  bool empty() const { return triangles.empty(); }

  // Indices in range, regions sized to match when present.
  void validate() const;
};

using HullMesh = TriMesh;
using TemplateMesh = TriMesh;

// Copy of `mesh` with its vertex positions replaced; the topology is shared.
TriMesh with_vertices(const TriMesh& mesh, std::vector<Vec3> vertices);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// Area-weighted average of incident face normals, normalized.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

// Sorted one-ring neighbors of each vertex.
std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh);

// Enclosed volume via the divergence theorem (positive for outward faces).
double signed_volume(const TriMesh& mesh);

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 size() const { return max - min; }
  // Squared distance from p to the box (0 inside).
  double squared_distance(const Vec3& p) const {
    return (min - p).cwiseMax(p - max).cwiseMax(0.0).squaredNorm();
  }
};

Aabb bounding_box(const std::vector<Vec3>& points);

// Icosahedron refined `levels` times with vertices on the unit sphere.
// Levels 0..3 give 12, 42, 162 and 642 vertices.
TriMesh icosphere(int levels);

}  // namespace hullcap
