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

#include "hullcap/carving.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

#include "marching_cubes_tables.hpp"

namespace hullcap {

OccupancyGrid carve_occupancy(std::span<const BinaryMask> masks, const CameraRig& rig, const GridSpec& spec) {
  spec.validate();
  if (masks.size() != rig.n_views())
    throw ShapeError("carving needs one mask per camera: " + std::to_string(masks.size()) + " masks for " +
                     std::to_string(rig.n_views()) + " cameras");
  for (std::size_t v = 0; v < masks.size(); ++v) {
    if (masks[v].width != rig[v].width || masks[v].height != rig[v].height)
      throw ShapeError("mask " + std::to_string(v) + " is " + std::to_string(masks[v].width) + "x" +
                       std::to_string(masks[v].height) + " but camera '" + rig[v].id + "' is " +
                       std::to_string(rig[v].width) + "x" + std::to_string(rig[v].height));
  }

  OccupancyGrid occ;
  occ.spec = spec;
  occ.n_views = static_cast<int>(rig.n_views());
  occ.counts.assign(spec.voxel_count(), 0);

  // Projection is affine in the voxel index along each axis, so each view is
  // reduced to a 3x4 matrix applied to the voxel center.
  std::vector<Eigen::Matrix<double, 3, 4>> projections;
  for (const auto& cam : rig.cameras) {
    Eigen::Matrix<double, 3, 4> p;
    p.leftCols<3>() = cam.intrinsics * cam.rotation;
    p.col(3) = cam.intrinsics * cam.translation;
    projections.push_back(p);
  }
  // Depth is row 2 of R x + t, which equals row 2 of K (R x + t) since K's bottom row is [0 0 1].

  const int d = spec.resolution;
  parallel_for(static_cast<std::size_t>(d) * d, [&](std::size_t begin, std::size_t end) {
    for (std::size_t slab = begin; slab < end; ++slab) {
      const int l = static_cast<int>(slab / d);
      const int k = static_cast<int>(slab % d);
      for (int j = 0; j < d; ++j) {
        const Vec3 c = spec.voxel_center(j, k, l);
        std::uint16_t count = 0;
        for (std::size_t v = 0; v < projections.size(); ++v) {
          const Vec3 h = projections[v].leftCols<3>() * c + projections[v].col(3);
          if (!(h.z() > kMinDepth)) continue;
          const auto px = nearest_pixel(Vec2(h.x() / h.z(), h.y() / h.z()), masks[v].width, masks[v].height);
          if (px && masks[v].foreground(px->first, px->second)) ++count;
        }
        occ.counts[spec.index(j, k, l)] = count;
      }
    }
  });
  return occ;
}

std::size_t inside_voxel_count(const OccupancyGrid& occ, int threshold) {
  return static_cast<std::size_t>(std::count_if(occ.counts.begin(), occ.counts.end(),
                                                [threshold](std::uint16_t c) { return c >= threshold; }));
}

namespace {

constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};
constexpr std::array<std::array<int, 2>, 12> kEdge = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

}  // namespace

HullMesh extract_hull(const OccupancyGrid& occ, int threshold) {
  if (threshold < 1) throw ValidationError("hull threshold must be >= 1, got " + std::to_string(threshold));
  if (inside_voxel_count(occ, threshold) == 0)
    throw EmptyHullError("no voxel is seen by " + std::to_string(threshold) + " views");

  const int d = occ.spec.resolution;
  const double iso = threshold - 0.5;
  // Sample s in [-1, d] along each axis; samples outside the grid read 0.
  auto value = [&](int j, int k, int l) -> double {
    if (j < 0 || k < 0 || l < 0 || j >= d || k >= d || l >= d) return 0.0;
    return occ.counts[occ.spec.index(j, k, l)];
  };
  const auto span = static_cast<std::int64_t>(d) + 2;
  auto sample_id = [&](int j, int k, int l) -> std::int64_t {
    return ((static_cast<std::int64_t>(l) + 1) * span + (k + 1)) * span + (j + 1);
  };

  HullMesh mesh;
  std::unordered_map<std::int64_t, int> edge_vertex;
  auto vertex_on_edge = [&](const std::array<int, 3>& a, const std::array<int, 3>& b) {
    std::int64_t ia = sample_id(a[0], a[1], a[2]);
    std::int64_t ib = sample_id(b[0], b[1], b[2]);
    if (ia > ib) std::swap(ia, ib);
    const std::int64_t key = ia * 4 + (ib - ia == 1 ? 0 : ib - ia == span ? 1 : 2);
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const double va = value(a[0], a[1], a[2]);
    const double vb = value(b[0], b[1], b[2]);
    const double t = (iso - va) / (vb - va);
    const Vec3 pa = occ.spec.voxel_center(a[0], a[1], a[2]);
    const Vec3 pb = occ.spec.voxel_center(b[0], b[1], b[2]);
    mesh.vertices.push_back(pa + t * (pb - pa));
    const int id = static_cast<int>(mesh.vertices.size()) - 1;
    edge_vertex.emplace(key, id);
    return id;
  };

  for (int l = -1; l < d; ++l) {
    for (int k = -1; k < d; ++k) {
      for (int j = -1; j < d; ++j) {
        std::array<std::array<int, 3>, 8> corner;
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          corner[c] = {j + kCorner[c][0], k + kCorner[c][1], l + kCorner[c][2]};
          if (value(corner[c][0], corner[c][1], corner[c][2]) < iso) cube |= 1 << c;
        }
        if (detail::kMcEdgeTable[cube] == 0) continue;
        const auto& tri = detail::kMcTriTable[cube];
        for (int m = 0; m < 16 && tri[m] != -1; m += 3) {
          Triangle t;
          for (int q = 0; q < 3; ++q) {
            const auto& e = kEdge[tri[m + q]];
            t[q] = vertex_on_edge(corner[e[0]], corner[e[1]]);
          }
          const double area = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
          if (area > 1e-12) mesh.triangles.push_back(t);
        }
      }
    }
  }
  return mesh;
}

GridSpec hull_bounds(const HullMesh& hull, double padding, int resolution) {
  if (hull.vertices.empty() || hull.triangles.empty()) throw EmptyHullError("hull_bounds needs a non-empty hull");
  const Aabb box = bounding_box(hull.vertices);
  const double extent = box.size().maxCoeff() + 2.0 * padding;
  return GridSpec::centered(box.center(), resolution, extent / resolution);
}

}  // namespace hullcap
