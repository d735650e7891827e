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
#include <string>
#include <vector>

#include "hullcap/camera.hpp"
#include "hullcap/image.hpp"
#include "hullcap/mesh.hpp"
#include "hullcap/supervision.hpp"

namespace hullcap {

enum class ShapeKind : std::uint8_t { sphere, ellipsoid, bumpy_head };
enum class NoiseRegion : std::uint8_t { back, uniform };

std::string shape_kind_name(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& name);
std::string noise_region_name(NoiseRegion region);
NoiseRegion parse_noise_region(const std::string& name);

struct RegNoise {
  double fraction = 0.0;
  double magnitude = 0.0;  // meters
};

struct ScanNoise {
  NoiseRegion region = NoiseRegion::back;
  double fraction = 0.0;
  double magnitude = 0.0;  // meters
};

// Synthetic capture. Heads face +y with z up; the camera ring lies in the
// horizontal plane through the object centroid (plus camera_height).
struct SceneSpec {
  ShapeKind shape = ShapeKind::bumpy_head;
  double radius = 0.1;                        // sphere
  Vec3 semi_axes = Vec3(0.075, 0.095, 0.11);  // ellipsoid and head
  double bump_amplitude = 0.05;               // relative radial bump height
  Vec3 center = Vec3::Zero();
  int subdivision = 3;  // icosphere levels; 3 gives 642 vertices

  int n_views = 8;
  double ring_radius = 1.0;
  double ring_arc_degrees = 360.0;  // below 360 the arc is centered on +y
  double camera_height = 0.0;
  int image_size = 600;
  double focal_px = 1200.0;

  std::uint64_t seed = 0;
  RegNoise reg_noise;
  ScanNoise scan_noise;
  int scan_density = 20;  // scan points per template vertex

  void validate() const;
};

struct Scene {
  TemplateMesh gt_mesh;
  TemplateMesh reg_mesh;
  TemplateMesh template_mesh;  // rest shape of the topology, without bumps
  Scan scan;
  CameraRig rig;
  std::vector<int> corrupted_vertex_ids;
  std::vector<int> outlier_point_ids;
  Vec3 view_direction = Vec3::UnitY();  // mean direction from the object to the cameras
};

struct SurfaceSamples {
  Scan scan;
  std::vector<Vec3> normals;  // face normal at every sample
};

// Ground-truth surface of `spec` in the icosphere topology.
TemplateMesh make_shape(const SceneSpec& spec);

// Rest shape used as template: the shape without bumps.
TemplateMesh make_template(const SceneSpec& spec);

CameraRig make_ring_rig(const SceneSpec& spec, const Vec3& target);

// Mean unit direction from `target` to the camera centers; +y when the
// cameras surround the target so evenly that the mean vanishes.
Vec3 mean_view_direction(const CameraRig& rig, const Vec3& target);

// Area-uniform samples: triangle chosen with probability proportional to its
// area, then a uniform barycentric point. Regions follow the nearest corner.
SurfaceSamples sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed);

struct NoisyScan {
  Scan scan;
  std::vector<int> outlier_ids;  // sorted
};

// Displaces floor(fraction * n) points by magnitude along random unit
// vectors with positive normal component. The back region only draws from
// points whose normal faces away from `view_direction`.
NoisyScan inject_scan_noise(const SurfaceSamples& samples, const Vec3& view_direction, const ScanNoise& noise,
                            std::uint64_t seed);

// Deterministic for a given spec.
Scene make_scene(const SceneSpec& spec);

struct ViewRender {
  BinaryMask mask;
  DepthMap depth;
  RgbImage image;
};

// Exact silhouettes, z-buffers and flat Lambertian renders of `mesh`.
std::vector<ViewRender> render_views(const TriMesh& mesh, const CameraRig& rig);
std::vector<ViewRender> rasterize_views(const Scene& scene);

}  // namespace hullcap
