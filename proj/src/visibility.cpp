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

#include "hullcap/visibility.hpp"

#include <algorithm>
#include <cmath>

namespace hullcap {

Raster rasterize(const TriMesh& mesh, const Camera& camera) {
  Raster out{DepthMap(camera.width, camera.height),
             std::vector<int>(static_cast<std::size_t>(camera.width) * camera.height, -1)};

  std::vector<Vec3> screen(mesh.vertices.size());  // (u, v, z)
  std::vector<std::uint8_t> ok(mesh.vertices.size(), 0);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (auto p = try_project(mesh.vertices[i], camera)) {
      screen[i] = Vec3(p->pixel.x(), p->pixel.y(), p->depth);
      ok[i] = 1;
    }
  }

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (!ok[tri[0]] || !ok[tri[1]] || !ok[tri[2]]) continue;
    const Vec3& a = screen[tri[0]];
    const Vec3& b = screen[tri[1]];
    const Vec3& c = screen[tri[2]];
    const double area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (std::abs(area) < 1e-14) continue;

    const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({a.x(), b.x(), c.x()}))));
    const int x1 = std::min(camera.width - 1, static_cast<int>(std::floor(std::max({a.x(), b.x(), c.x()}))));
    const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({a.y(), b.y(), c.y()}))));
    const int y1 = std::min(camera.height - 1, static_cast<int>(std::floor(std::max({a.y(), b.y(), c.y()}))));
    if (x0 > x1 || y0 > y1) continue;

    // Small slack so pixel centers exactly on shared edges are not dropped
    // by both neighbors.
    const double slack = -1e-9 * std::abs(area);
    const double inv_area = 1.0 / area;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double w0 = ((b.x() - x) * (c.y() - y) - (b.y() - y) * (c.x() - x));
        const double w1 = ((c.x() - x) * (a.y() - y) - (c.y() - y) * (a.x() - x));
        const double w2 = ((a.x() - x) * (b.y() - y) - (a.y() - y) * (b.x() - x));
        const bool inside = area > 0 ? (w0 >= slack && w1 >= slack && w2 >= slack)
                                     : (w0 <= -slack && w1 <= -slack && w2 <= -slack);
        if (!inside) continue;
        const double l0 = w0 * inv_area;
        const double l1 = w1 * inv_area;
        const double l2 = w2 * inv_area;
        // Inverse depth is affine in screen space.
        const double z = 1.0 / (l0 / a.z() + l1 / b.z() + l2 / c.z());
        float& slot = out.depth.at(x, y);
        const auto zf = static_cast<float>(z);
        if (zf < slot) {
          slot = zf;
          out.triangle[static_cast<std::size_t>(y) * camera.width + x] = static_cast<int>(t);
        }
      }
    }
  }
  return out;
}

DepthMap render_depth(const TriMesh& mesh, const Camera& camera) { return rasterize(mesh, camera).depth; }

int voxel_visibility(const Vec3& voxel_center, const Camera& camera, const DepthMap& depth, const DepthRange& range,
                     double rho, VisibilityMode mode) {
  const auto proj = try_project(voxel_center, camera);
  if (!proj) return 0;
  const auto px = nearest_pixel(proj->pixel, depth.width, depth.height);
  if (!px) return 0;
  const float hull = depth.at(px->first, px->second);
  if (!(hull < DepthMap::kBackground)) return 0;
  const double nd_voxel = range.normalize(proj->depth);
  const double nd_hull = range.normalize(hull);
  if (mode == VisibilityMode::band) return std::abs(nd_voxel - nd_hull) <= rho ? 1 : 0;
  return nd_voxel <= nd_hull + rho ? 1 : 0;
}

int voxel_visibility(const Vec3& voxel_center, const Camera& camera, const DepthMap& depth, const GridSpec& grid,
                     double rho, VisibilityMode mode) {
  return voxel_visibility(voxel_center, camera, depth, DepthRange::of_grid(camera, grid), rho, mode);
}

std::size_t VisibilityMask::visible_count(int view) const {
  const std::size_t n = spec.voxel_count();
  const auto begin = indicators.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(view) * n);
  return static_cast<std::size_t>(std::count(begin, begin + static_cast<std::ptrdiff_t>(n), std::uint8_t{1}));
}

VisibilityMask grid_visibility(const GridSpec& grid, const CameraRig& rig, std::span<const DepthMap> depths,
                               double rho, VisibilityMode mode) {
  grid.validate();
  if (depths.size() != rig.n_views())
    throw ShapeError("visibility needs one depth map per camera: " + std::to_string(depths.size()) + " for " +
                     std::to_string(rig.n_views()) + " cameras");
  for (std::size_t v = 0; v < depths.size(); ++v) {
    if (depths[v].width != rig[v].width || depths[v].height != rig[v].height)
      throw ShapeError("depth map " + std::to_string(v) + " does not match camera '" + rig[v].id + "' size");
  }
  VisibilityMask mask;
  mask.spec = grid;
  mask.n_views = static_cast<int>(rig.n_views());
  const std::size_t n = grid.voxel_count();
  mask.indicators.assign(n * rig.n_views(), 0);
  for (std::size_t v = 0; v < rig.n_views(); ++v) {
    const DepthRange range = DepthRange::of_grid(rig[v], grid);
    std::uint8_t* row = mask.indicators.data() + v * n;
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        row[i] = static_cast<std::uint8_t>(voxel_visibility(grid.voxel_center(i), rig[v], depths[v], range, rho, mode));
      }
    });
  }
  return mask;
}

}  // namespace hullcap
