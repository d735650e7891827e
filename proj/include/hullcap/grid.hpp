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
#include <cstddef>

#include "hullcap/common.hpp"

namespace hullcap {

// Axis-aligned cubic voxel grid. Voxel (j, k, l) has its center at
// origin + (j + 0.5, k + 0.5, l + 0.5) * voxel_edge; linear indices run
// with j fastest: index = (l * d + k) * d + j.
struct GridSpec {
  Vec3 origin = Vec3::Zero();
  int resolution = 2;
  double voxel_edge = 1.0;

  void validate() const;

  std::size_t voxel_count() const {
    const auto d = static_cast<std::size_t>(resolution);
    return d * d * d;
  }
  double extent() const { return resolution * voxel_edge; }
  Vec3 center() const { return origin + Vec3::Constant(0.5 * extent()); }

  std::size_t index(int j, int k, int l) const {
    const auto d = static_cast<std::size_t>(resolution);
    return (static_cast<std::size_t>(l) * d + static_cast<std::size_t>(k)) * d + static_cast<std::size_t>(j);
  }

  Vec3 voxel_center(int j, int k, int l) const {
    return origin + Vec3(j + 0.5, k + 0.5, l + 0.5) * voxel_edge;
  }

  Vec3 voxel_center(std::size_t index) const {
    const auto d = static_cast<std::size_t>(resolution);
    const auto j = static_cast<int>(index % d);
    const auto k = static_cast<int>((index / d) % d);
    const auto l = static_cast<int>(index / (d * d));
    return voxel_center(j, k, l);
  }

  // The eight corners of the grid's bounding box (not voxel centers).
  std::array<Vec3, 8> corners() const;

  // Grid of `resolution` voxels of size `voxel_edge` centered on `center`.
  static GridSpec centered(const Vec3& center, int resolution, double voxel_edge);
};

}  // namespace hullcap
