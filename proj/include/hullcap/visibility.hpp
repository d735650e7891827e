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

#include "hullcap/camera.hpp"
#include "hullcap/grid.hpp"
#include "hullcap/image.hpp"
#include "hullcap/mesh.hpp"

namespace hullcap {

// Z-buffer of a mesh plus the id of the front-most triangle per pixel (-1
// for background).
struct Raster {
  DepthMap depth;
  std::vector<int> triangle;
};

// Rasterizes triangles at pixel centers with perspective-correct depth and
// keeps the minimum camera-frame depth. Triangles with a vertex closer than
// kMinDepth to the image plane are skipped (no near-plane clipping).
Raster rasterize(const TriMesh& mesh, const Camera& camera);

DepthMap render_depth(const TriMesh& mesh, const Camera& camera);

enum class VisibilityMode {
  // Visible when the voxel is in front of the hull or behind it by at most rho.
  front_margin,
  // Visible when |nd_voxel - nd_hull| <= rho, the literal absolute-difference test.
  band,
};

// 1 when the voxel center projects in front of the camera, inside the image,
// onto a finite hull depth, and passes the depth test in normalized depth
// (normalization range from the corners of `grid`); otherwise 0.
int voxel_visibility(const Vec3& voxel_center, const Camera& camera, const DepthMap& depth, const GridSpec& grid,
                     double rho, VisibilityMode mode = VisibilityMode::front_margin);

// Same test with a precomputed depth range.
int voxel_visibility(const Vec3& voxel_center, const Camera& camera, const DepthMap& depth, const DepthRange& range,
                     double rho, VisibilityMode mode = VisibilityMode::front_margin);

// n_views x voxel_count indicators.
struct VisibilityMask {
  GridSpec spec;
  int n_views = 0;
  std::vector<std::uint8_t> indicators;

  std::uint8_t at(int view, std::size_t voxel) const {
    return indicators[static_cast<std::size_t>(view) * spec.voxel_count() + voxel];
  }
  std::size_t visible_count(int view) const;
};

// Throws ShapeError unless there is one depth map per camera, sized like it.
VisibilityMask grid_visibility(const GridSpec& grid, const CameraRig& rig, std::span<const DepthMap> depths,
                               double rho, VisibilityMode mode = VisibilityMode::front_margin);

}  // namespace hullcap
