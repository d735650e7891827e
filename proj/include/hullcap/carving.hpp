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

// Number of views that saw each voxel, laid out by GridSpec::index.
struct OccupancyGrid {
  GridSpec spec;
  int n_views = 0;
  std::vector<std::uint16_t> counts;

  std::uint16_t at(int j, int k, int l) const { return counts[spec.index(j, k, l)]; }
};

// A voxel is seen by a view when its center lies in front of the camera and
// the nearest pixel of its projection is foreground. Projections falling
// outside the image count as not seen. Throws ShapeError when the mask count
// or a mask size disagrees with the rig.
OccupancyGrid carve_occupancy(std::span<const BinaryMask> masks, const CameraRig& rig, const GridSpec& spec);

// Voxels with count >= threshold.
std::size_t inside_voxel_count(const OccupancyGrid& occ, int threshold);

// Marching-cubes isosurface of the counts at isovalue threshold - 0.5, in
// world coordinates. The field is padded with zeros outside the grid so the
// surface is closed, and faces are oriented outward. Throws ValidationError
// for a threshold below 1 and EmptyHullError when no voxel reaches it.
HullMesh extract_hull(const OccupancyGrid& occ, int threshold);

// Cubic grid centered on the hull's bounding-box center, sized to the largest
// bounding-box extent plus `padding` on every side.
GridSpec hull_bounds(const HullMesh& hull, double padding, int resolution = 32);

}  // namespace hullcap
