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

#include <doctest.h>

#include <algorithm>
#include <set>

#include "hullcap/carving.hpp"
#include "hullcap/distance.hpp"
#include "hullcap/synth.hpp"
#include "test_support.hpp"

using namespace hullcap;
namespace ht = hullcap::testing;

namespace {

SceneSpec sphere_spec() {
  SceneSpec spec;
  spec.shape = ShapeKind::sphere;
  spec.radius = 0.1;
  spec.subdivision = 2;
  spec.image_size = 200;
  spec.focal_px = 500;
  spec.scan_density = 10;
  return spec;
}

}  // namespace

TEST_SUITE("synth_harness") {
  TEST_CASE("a noise-free scene has identical labels and an on-surface scan") {
    const Scene s = make_scene(sphere_spec());
    CHECK(s.reg_mesh.vertices == s.gt_mesh.vertices);
    CHECK(s.corrupted_vertex_ids.empty());
    CHECK(s.outlier_point_ids.empty());
    CHECK(s.scan.size() == s.gt_mesh.vertices.size() * 10);
    CHECK(s.scan.regions.size() == s.scan.size());
    for (const auto& v : s.gt_mesh.vertices) CHECK(std::abs(v.norm() - 0.1) < 1e-12);
    const TriangleBvh bvh(s.gt_mesh);
    for (const auto& p : s.scan.points) CHECK(bvh.distance(p) < 1e-9);
    CHECK(s.rig.n_views() == 8);
    CHECK(s.template_mesh.triangles == s.gt_mesh.triangles);
  }

  TEST_CASE("shapes and templates") {
    SceneSpec spec;
    spec.subdivision = 2;
    const TemplateMesh head = make_shape(spec);
    const TemplateMesh plain = make_template(spec);
    const TemplateMesh icos = icosphere(2);
    double max_bump = 0;
    for (std::size_t i = 0; i < head.vertices.size(); ++i) {
      const Vec3 e = spec.semi_axes.cwiseProduct(icos.vertices[i]);
      CHECK((plain.vertices[i] - e).norm() < 1e-12);
      max_bump = std::max(max_bump, (head.vertices[i] - e).norm() / e.norm());
    }
    CHECK(max_bump > 0.01);
    CHECK(max_bump <= spec.bump_amplitude + 1e-12);
    CHECK(parse_shape_kind(shape_kind_name(ShapeKind::ellipsoid)) == ShapeKind::ellipsoid);
    CHECK_THROWS_AS(parse_shape_kind("torus"), ConfigError);
    CHECK(parse_noise_region("back") == NoiseRegion::back);
  }

  TEST_CASE("scenes are deterministic in the seed") {
    SceneSpec spec = sphere_spec();
    spec.reg_noise = {0.2, 0.02};
    spec.scan_noise = {NoiseRegion::uniform, 0.1, 0.01};
    spec.seed = 7;
    const Scene a = make_scene(spec), b = make_scene(spec);
    CHECK(a.reg_mesh.vertices == b.reg_mesh.vertices);
    CHECK(a.scan.points == b.scan.points);
    CHECK(a.outlier_point_ids == b.outlier_point_ids);
    spec.seed = 8;
    const Scene c = make_scene(spec);
    CHECK(c.scan.points != a.scan.points);
    CHECK(c.corrupted_vertex_ids != a.corrupted_vertex_ids);
  }

  TEST_CASE("label noise corrupts the requested vertices by the requested amount") {
    SceneSpec spec = sphere_spec();
    spec.subdivision = 3;  // 642 vertices
    spec.reg_noise = {0.2, 0.05};
    const Scene s = make_scene(spec);
    CHECK(s.corrupted_vertex_ids.size() == 128);  // floor(0.2 * 642)
    CHECK(std::is_sorted(s.corrupted_vertex_ids.begin(), s.corrupted_vertex_ids.end()));
    const std::set<int> ids(s.corrupted_vertex_ids.begin(), s.corrupted_vertex_ids.end());
    CHECK(ids.size() == 128);
    for (std::size_t i = 0; i < s.gt_mesh.vertices.size(); ++i) {
      const double moved = (s.reg_mesh.vertices[i] - s.gt_mesh.vertices[i]).norm();
      if (ids.count(static_cast<int>(i)))
        CHECK(moved == doctest::Approx(0.05).epsilon(1e-12));
      else
        CHECK(moved == 0.0);
    }
  }

  TEST_CASE("scan noise on the back hemisphere") {
    SceneSpec spec = sphere_spec();
    spec.ring_arc_degrees = 90;
    spec.n_views = 4;
    spec.scan_noise = {NoiseRegion::back, 0.1, 0.05};
    const Scene s = make_scene(spec);
    CHECK(s.view_direction.dot(Vec3::UnitY()) > 0.99);
    CHECK(s.outlier_point_ids.size() == s.scan.size() / 10);
    const Scene clean = make_scene(sphere_spec());
    const std::set<int> ids(s.outlier_point_ids.begin(), s.outlier_point_ids.end());
    for (std::size_t i = 0; i < s.scan.size(); ++i) {
      const Vec3& p = s.scan.points[i];
      if (ids.count(static_cast<int>(i))) {
        const double d = p.norm() - 0.1;
        CHECK(d > 0.0);
        CHECK(d <= 0.05 + 1e-12);
        CHECK(clean.scan.points[i].dot(s.view_direction) < 0.02);  // from a back-facing triangle
      } else {
        CHECK(p == clean.scan.points[i]);
      }
    }
  }

  TEST_CASE("zero scan noise leaves the samples alone") {
    const SurfaceSamples samples = sample_surface(ht::sphere_mesh(0.1, 2), 500, 3);
    const NoisyScan out = inject_scan_noise(samples, Vec3::UnitY(), {NoiseRegion::uniform, 0.0, 0.05}, 3);
    CHECK(out.scan.points == samples.scan.points);
    CHECK(out.outlier_ids.empty());
    CHECK(samples.normals.size() == 500);
  }

  TEST_CASE("surface samples are area-uniform") {
    // Two triangles of area 1 and 3: about a quarter of the samples land on the first.
    TriMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(6, 0, 1), Vec3(0, 1, 1)};
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    const SurfaceSamples s = sample_surface(m, 20000, 4);
    const auto first = std::count_if(s.scan.points.begin(), s.scan.points.end(), [](const Vec3& p) { return p.z() == 0.0; });
    CHECK(std::abs(static_cast<double>(first) / 20000 - 0.25) < 0.015);
  }

  TEST_CASE("rendered silhouettes match the projected disc") {
    const Scene s = make_scene(sphere_spec());
    const auto views = rasterize_views(s);
    REQUIRE(views.size() == 8);
    const double dist = 1.0;
    const double radius_px = 500 * 0.1 / std::sqrt(dist * dist - 0.01);
    const Vec2 pp(99.5, 99.5);
    for (const auto& v : views) {
      for (int y = 0; y < 200; ++y) {
        for (int x = 0; x < 200; ++x) {
          const double r = (Vec2(x, y) - pp).norm();
          if (r < radius_px - 1) CHECK(v.mask.foreground(x, y));
          if (r > radius_px + 1) CHECK_FALSE(v.mask.foreground(x, y));
          CHECK(v.mask.foreground(x, y) == v.depth.covered(x, y));
        }
      }
      CHECK(v.image.width == 200);
    }
  }

  TEST_CASE("an object outside every view renders empty") {
    TriMesh ball = ht::sphere_mesh(0.1, 2, Vec3(0, 0, 50));
    const auto views = render_views(ball, ht::ring_rig(3, 1.0, 300, 100));
    for (const auto& v : views) {
      CHECK(v.mask.foreground_count() == 0);
      CHECK(std::all_of(v.image.rgb.begin(), v.image.rgb.end(), [](auto c) { return c == 0; }));
    }
  }

  TEST_CASE("carving the rendered silhouettes contains the ground truth") {
    const Scene s = make_scene(sphere_spec());
    std::vector<BinaryMask> masks;
    for (auto& v : rasterize_views(s)) masks.push_back(std::move(v.mask));
    const GridSpec grid = GridSpec::centered(Vec3::Zero(), 64, 0.004);
    const HullMesh hull = extract_hull(carve_occupancy(masks, s.rig, grid), 8);
    const TriangleBvh bvh(hull);
    for (const auto& v : s.gt_mesh.vertices) CHECK((ht::inside_mesh(hull, v) || bvh.distance(v) <= grid.voxel_edge));
  }

  TEST_CASE("scene validation") {
    SceneSpec spec = sphere_spec();
    spec.n_views = 1;
    CHECK_THROWS_AS(make_scene(spec), ValidationError);
    spec = sphere_spec();
    spec.reg_noise.fraction = 1.5;
    CHECK_THROWS_AS(make_scene(spec), ValidationError);
    spec = sphere_spec();
    spec.scan_noise.magnitude = -1;
    CHECK_THROWS_AS(make_scene(spec), ValidationError);
  }
}
