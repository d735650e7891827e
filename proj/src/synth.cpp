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

#include "hullcap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hullcap/random.hpp"
#include "hullcap/visibility.hpp"

namespace hullcap {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent PCG32 streams per noise source keep each one stable when the
// others change.
constexpr std::uint64_t kStreamRegNoise = 11;
constexpr std::uint64_t kStreamScanSamples = 12;
constexpr std::uint64_t kStreamScanNoise = 13;

Region region_of_direction(const Vec3& u) {
  if (u.z() < -0.6) return Region::neck;
  if (u.y() > 0.3) return Region::face;
  return Region::scalp;
}

// k distinct indices out of [0, n) by a partial Fisher-Yates shuffle, sorted.
std::vector<int> choose_distinct(std::vector<int> pool, std::size_t k, Pcg32& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + rng.below(static_cast<std::uint32_t>(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Vec3 face_normal(const TriMesh& mesh, const Triangle& t) {
  const Vec3& a = mesh.vertices[t[0]];
  const Vec3& b = mesh.vertices[t[1]];
  const Vec3& c = mesh.vertices[t[2]];
  return (b - a).cross(c - a).normalized();
}

}  // namespace

std::string shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::sphere:
      return "sphere";
    case ShapeKind::ellipsoid:
      return "ellipsoid";
    case ShapeKind::bumpy_head:
      return "bumpy_head";
  }
  return "unknown";
}

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "sphere") return ShapeKind::sphere;
  if (name == "ellipsoid") return ShapeKind::ellipsoid;
  if (name == "bumpy_head") return ShapeKind::bumpy_head;
  throw ConfigError("unknown shape '" + name + "' (sphere, ellipsoid, bumpy_head)");
}

std::string noise_region_name(NoiseRegion region) { return region == NoiseRegion::back ? "back" : "uniform"; }

NoiseRegion parse_noise_region(const std::string& name) {
  if (name == "back") return NoiseRegion::back;
  if (name == "uniform") return NoiseRegion::uniform;
  throw ConfigError("unknown noise region '" + name + "' (back, uniform)");
}

void SceneSpec::validate() const {
  auto fraction_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (n_views < 2) throw ValidationError("scene needs at least 2 views");
  if (!fraction_ok(reg_noise.fraction) || !fraction_ok(scan_noise.fraction))
    throw ValidationError("noise fractions must lie in [0, 1]");
  if (reg_noise.magnitude < 0.0 || scan_noise.magnitude < 0.0)
    throw ValidationError("noise magnitudes must be non-negative");
  if (radius <= 0.0 || (semi_axes.array() <= 0.0).any()) throw ValidationError("shape sizes must be positive");
  if (subdivision < 0 || subdivision > 6) throw ValidationError("subdivision must lie in [0, 6]");
  if (ring_radius <= 0.0 || image_size < 2 || focal_px <= 0.0)
    throw ValidationError("camera ring needs a positive radius, focal length and image size");
  if (ring_arc_degrees <= 0.0 || ring_arc_degrees > 360.0)
    throw ValidationError("ring arc must lie in (0, 360] degrees");
  if (scan_density < 1) throw ValidationError("scan density must be at least 1");
}

TemplateMesh make_shape(const SceneSpec& spec) {
  TemplateMesh mesh = icosphere(spec.subdivision);
  mesh.regions.resize(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 u = mesh.vertices[i];
    mesh.regions[i] = region_of_direction(u);
    Vec3 p;
    switch (spec.shape) {
      case ShapeKind::sphere:
        p = spec.radius * u;
        break;
      case ShapeKind::ellipsoid:
        p = spec.semi_axes.cwiseProduct(u);
        break;
      case ShapeKind::bumpy_head:
        p = spec.semi_axes.cwiseProduct(u) *
            (1.0 + spec.bump_amplitude * std::sin(3.0 * u.x()) * std::cos(2.0 * u.y()));
        break;
    }
    mesh.vertices[i] = spec.center + p;
  }
  return mesh;
}

TemplateMesh make_template(const SceneSpec& spec) {
  SceneSpec plain = spec;
  if (plain.shape == ShapeKind::bumpy_head) plain.shape = ShapeKind::ellipsoid;
  return make_shape(plain);
}

CameraRig make_ring_rig(const SceneSpec& spec, const Vec3& target) {
  CameraRig rig;
  const bool full = spec.ring_arc_degrees >= 360.0;
  for (int i = 0; i < spec.n_views; ++i) {
    const double deg = full ? 360.0 * i / spec.n_views
                            : -0.5 * spec.ring_arc_degrees + spec.ring_arc_degrees * i / (spec.n_views - 1);
    const double theta = deg * kPi / 180.0;
    const Vec3 eye = target + Vec3(spec.ring_radius * std::sin(theta), spec.ring_radius * std::cos(theta),
                                   spec.camera_height);
    char id[16];
    std::snprintf(id, sizeof(id), "cam%02d", i);
    rig.cameras.push_back(
        look_at(eye, target, Vec3::UnitZ(), spec.focal_px, spec.image_size, spec.image_size, id));
  }
  return rig;
}

Vec3 mean_view_direction(const CameraRig& rig, const Vec3& target) {
  Vec3 sum = Vec3::Zero();
  for (const auto& cam : rig.cameras) sum += (cam.center() - target).normalized();
  if (rig.n_views() == 0 || sum.norm() < 1e-6 * static_cast<double>(rig.n_views())) return Vec3::UnitY();
  return sum.normalized();
}

SurfaceSamples sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (mesh.empty()) throw ValidationError("cannot sample an empty mesh");
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    total += triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    cumulative[t] = total;
  }
  Pcg32 rng(seed, kStreamScanSamples);
  SurfaceSamples out;
  out.scan.points.reserve(count);
  out.normals.reserve(count);
  const bool labeled = !mesh.regions.empty();
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform01() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& tri = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(rng.uniform01());
    const double r2 = rng.uniform01();
    const Vec3 bary(1.0 - r1, r1 * (1.0 - r2), r1 * r2);
    out.scan.points.push_back(bary.x() * mesh.vertices[tri[0]] + bary.y() * mesh.vertices[tri[1]] +
                              bary.z() * mesh.vertices[tri[2]]);
    out.normals.push_back(face_normal(mesh, tri));
    if (labeled) {
      int corner = 0;
      bary.maxCoeff(&corner);
      out.scan.regions.push_back(mesh.regions[tri[corner]]);
    }
  }
  return out;
}

NoisyScan inject_scan_noise(const SurfaceSamples& samples, const Vec3& view_direction, const ScanNoise& noise,
                            std::uint64_t seed) {
  NoisyScan out{samples.scan, {}};
  const std::size_t n = samples.scan.size();
  const auto k = static_cast<std::size_t>(std::floor(noise.fraction * static_cast<double>(n)));
  if (k == 0 || noise.magnitude == 0.0) return out;
  std::vector<int> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (noise.region == NoiseRegion::uniform || samples.normals[i].dot(view_direction) < 0.0)
      pool.push_back(static_cast<int>(i));
  }
  Pcg32 rng(seed, kStreamScanNoise);
  out.outlier_ids = choose_distinct(std::move(pool), k, rng);
  for (int id : out.outlier_ids) {
    const Vec3& normal = samples.normals[static_cast<std::size_t>(id)];
    Vec3 dir = rng.unit_vector();
    while (std::abs(dir.dot(normal)) < 1e-6) dir = rng.unit_vector();
    if (dir.dot(normal) < 0.0) dir = -dir;
    out.scan.points[static_cast<std::size_t>(id)] += noise.magnitude * dir;
  }
  return out;
}

Scene make_scene(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.gt_mesh = make_shape(spec);
  scene.template_mesh = make_template(spec);
  const Vec3 centroid = bounding_box(scene.gt_mesh.vertices).center();
  scene.rig = make_ring_rig(spec, centroid);
  scene.view_direction = mean_view_direction(scene.rig, centroid);

  scene.reg_mesh = scene.gt_mesh;
  const std::size_t nv = scene.gt_mesh.vertices.size();
  const auto n_corrupt = static_cast<std::size_t>(std::floor(spec.reg_noise.fraction * static_cast<double>(nv)));
  if (n_corrupt > 0 && spec.reg_noise.magnitude > 0.0) {
    Pcg32 rng(spec.seed, kStreamRegNoise);
    std::vector<int> all(nv);
    std::iota(all.begin(), all.end(), 0);
    scene.corrupted_vertex_ids = choose_distinct(std::move(all), n_corrupt, rng);
    for (int id : scene.corrupted_vertex_ids) {
      scene.reg_mesh.vertices[static_cast<std::size_t>(id)] += spec.reg_noise.magnitude * rng.unit_vector();
    }
  }

  const SurfaceSamples samples =
      sample_surface(scene.gt_mesh, nv * static_cast<std::size_t>(spec.scan_density), spec.seed);
  NoisyScan noisy = inject_scan_noise(samples, scene.view_direction, spec.scan_noise, spec.seed);
  scene.scan = std::move(noisy.scan);
  scene.outlier_point_ids = std::move(noisy.outlier_ids);
  return scene;
}

std::vector<ViewRender> render_views(const TriMesh& mesh, const CameraRig& rig) {
  std::vector<ViewRender> out(rig.n_views());
  const Vec3 light = Vec3(0.3, 0.6, 0.75).normalized();
  const Vec3 albedo(0.85, 0.7, 0.6);
  std::vector<double> shade(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    shade[t] = 0.15 + 0.85 * std::max(0.0, face_normal(mesh, mesh.triangles[t]).dot(light));
  }
  parallel_for(rig.n_views(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const Camera& cam = rig[v];
      Raster raster = rasterize(mesh, cam);
      ViewRender& r = out[v];
      r.mask = BinaryMask(cam.width, cam.height);
      r.image = RgbImage(cam.width, cam.height);
      for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
          const int t = raster.triangle[static_cast<std::size_t>(y) * cam.width + x];
          if (t < 0) continue;
          r.mask.set(x, y, true);
          for (int c = 0; c < 3; ++c) {
            r.image.at(x, y, c) = static_cast<std::uint8_t>(std::lround(255.0 * albedo[c] * shade[t]));
          }
        }
      }
      r.depth = std::move(raster.depth);
    }
  });
  return out;
}

std::vector<ViewRender> rasterize_views(const Scene& scene) { return render_views(scene.gt_mesh, scene.rig); }

}  // namespace hullcap
