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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hullcap/common.hpp"
#include "hullcap/grid.hpp"

namespace hullcap {

// Calibrated pinhole camera, world-to-camera convention x_cam = R x + t.
// The camera looks down +z, image x to the right, image y down. Pixel
// centers sit at integer coordinates.
struct Camera {
  std::string id;
  Mat3 intrinsics = Mat3::Identity();
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  int width = 0;
  int height = 0;

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  Vec3 to_world(const Vec3& cam) const { return rotation.transpose() * (cam - translation); }
  // Optical center in world coordinates.
  Vec3 center() const { return -(rotation.transpose() * translation); }

  // Throws ValidationError if R is not a proper rotation within `tolerance`,
  // K has non-positive focal entries or a bottom row other than [0 0 1], or
  // the image size is not positive.
  void validate(double tolerance = 1e-9) const;
};

struct Projection {
  Vec2 pixel;
  double depth = 0.0;  // z in the camera frame, meters
};

// Minimum camera-frame depth for a projectable point.
inline constexpr double kMinDepth = 1e-9;

// Throws GeometryError when depth <= kMinDepth.
Projection project(const Vec3& point, const Camera& camera);

// Same as project() but reports a behind-camera point as nullopt.
std::optional<Projection> try_project(const Vec3& point, const Camera& camera) noexcept;

// Inverse of project(): the world point on the pixel's ray at `depth`.
Vec3 back_project(const Vec2& pixel, double depth, const Camera& camera);

// Nearest pixel to a continuous image location, or nullopt outside the image.
std::optional<std::pair<int, int>> nearest_pixel(const Vec2& pixel, int width, int height) noexcept;

// Camera at `eye` looking at `target`; `up` fixes the roll.
Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width,
               int height, std::string id);

struct CameraRig {
  std::vector<Camera> cameras;

  std::size_t n_views() const { return cameras.size(); }
  const Camera& operator[](std::size_t i) const { return cameras[i]; }

  // At least two cameras, unique ids, every camera valid.
  void validate(double tolerance = 1e-9) const;
};

// Rig file: JSON document {"cameras": [{"id", "K", "R", "t", "width", "height"}]}
// with K and R as 9 row-major numbers and t as 3.
CameraRig parse_rig(std::string_view text);
CameraRig load_rig(const std::filesystem::path& path);
std::string format_rig(const CameraRig& rig);
void save_rig(const CameraRig& rig, const std::filesystem::path& path);

// Least-squares point closest to every optical axis of the rig.
Vec3 rig_focus_point(const CameraRig& rig);

// Per-view depth normalization range taken from the 8 corners of a grid.
struct DepthRange {
  double near = 0.0;
  double far = 1.0;

  // Throws GeometryError when far - near < 1e-9.
  static DepthRange of_grid(const Camera& camera, const GridSpec& grid);

  // (depth - near) / (far - near), clamped to [0, 1].
  double normalize(double depth) const;
};

double normalized_depth(double depth, const Camera& camera, const GridSpec& grid);

}  // namespace hullcap
