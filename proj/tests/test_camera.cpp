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

#include <Eigen/Geometry>

#include "hullcap/camera.hpp"
#include "hullcap/io.hpp"
#include "test_support.hpp"

using namespace hullcap;
using hullcap::testing::random_point;

namespace {

Camera simple_camera(double f, double cx, double cy) {
  Camera cam;
  cam.id = "c";
  cam.intrinsics << f, 0, cx, 0, f, cy, 0, 0, 1;
  cam.width = 600;
  cam.height = 600;
  return cam;
}

Camera random_camera(Pcg32& rng) {
  const double a = rng.uniform(0, 6.28);
  const Vec3 eye(2.0 * std::cos(a), 2.0 * std::sin(a), rng.uniform(-1, 1));
  Camera cam = look_at(eye, random_point(rng, -0.1, 0.1), Vec3::UnitZ(), rng.uniform(300, 1500), 640, 480, "r");
  return cam;
}

}  // namespace

TEST_SUITE("camera_rig") {
  TEST_CASE("projection of an on-axis point lands on the principal point") {
    const Camera cam = simple_camera(600, 300, 300);
    const Projection p = project(Vec3(0, 0, 2), cam);
    CHECK(p.pixel.x() == doctest::Approx(300));
    CHECK(p.pixel.y() == doctest::Approx(300));
    CHECK(p.depth == 2.0);
  }

  TEST_CASE("similar triangles") {
    const Camera cam = simple_camera(600, 300, 300);
    CHECK(project(Vec3(0.1, 0, 1), cam).pixel.x() == doctest::Approx(360));
  }

  TEST_CASE("points at or behind the camera are rejected") {
    const Camera cam = simple_camera(600, 300, 300);
    CHECK_THROWS_AS(project(Vec3(0, 0, 0), cam), GeometryError);
    CHECK_THROWS_AS(project(Vec3(0, 0, -1), cam), GeometryError);
    CHECK_FALSE(try_project(Vec3(1, 1, -2), cam).has_value());
  }

  TEST_CASE("projection matches a homogeneous 3x4 matrix") {
    Pcg32 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const Camera cam = random_camera(rng);
      Eigen::Matrix<double, 3, 4> rt;
      rt << cam.rotation, cam.translation;
      const Eigen::Matrix<double, 3, 4> p = cam.intrinsics * rt;
      const Vec3 x = random_point(rng, -0.3, 0.3);
      const Vec3 h = p * x.homogeneous();
      const Projection got = project(x, cam);
      CHECK((got.pixel - h.hnormalized()).norm() <= 1e-9);
      CHECK(std::abs(got.depth - h.z()) <= 1e-9);
    }
  }

  TEST_CASE("back projection inverts projection") {
    Pcg32 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
      const Camera cam = random_camera(rng);
      const Vec3 x = random_point(rng, -0.3, 0.3);
      const Projection p = project(x, cam);
      CHECK((back_project(p.pixel, p.depth, cam) - x).norm() <= 1e-9);
    }
  }

  TEST_CASE("a rigid motion of world and cameras leaves pixels unchanged") {
    Pcg32 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const Camera cam = random_camera(rng);
      const Mat3 q = Eigen::AngleAxisd(rng.uniform(0, 6), rng.unit_vector()).toRotationMatrix();
      const Vec3 s = random_point(rng, -1, 1);
      Camera moved = cam;
      moved.rotation = cam.rotation * q.transpose();
      moved.translation = cam.translation - moved.rotation * s;
      const Vec3 x = random_point(rng, -0.3, 0.3);
      CHECK((project(q * x + s, moved).pixel - project(x, cam).pixel).norm() <= 1e-9);
    }
  }

  TEST_CASE("nearest pixel rounds half up and rejects outside pixels") {
    CHECK(nearest_pixel(Vec2(2.49, 3.5), 10, 10) == std::make_pair(2, 4));
    CHECK(nearest_pixel(Vec2(-0.5, 0), 10, 10) == std::make_pair(0, 0));
    CHECK_FALSE(nearest_pixel(Vec2(-0.51, 0), 10, 10).has_value());
    CHECK_FALSE(nearest_pixel(Vec2(9.5, 0), 10, 10).has_value());
  }

  TEST_CASE("normalized depth spans the grid corners") {
    const Camera cam = look_at(Vec3(0, -3, 0), Vec3::Zero(), Vec3::UnitZ(), 600, 600, 600, "c");
    const GridSpec grid = GridSpec::centered(Vec3::Zero(), 8, 0.1);
    const DepthRange r = DepthRange::of_grid(cam, grid);
    CHECK(r.near == doctest::Approx(2.6));
    CHECK(r.far == doctest::Approx(3.4));
    CHECK(normalized_depth(r.near, cam, grid) == 0.0);
    CHECK(normalized_depth(r.far, cam, grid) == 1.0);
    CHECK(normalized_depth(0.5 * (r.near + r.far), cam, grid) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(normalized_depth(0.0, cam, grid) == 0.0);
    CHECK(normalized_depth(10.0, cam, grid) == 1.0);
    double prev = -1.0;
    for (double d = 2.0; d < 4.0; d += 0.01) {
      const double n = normalized_depth(d, cam, grid);
      CHECK(n >= prev);
      prev = n;
    }
  }

  TEST_CASE("a flat grid seen edge-on has a degenerate depth range") {
    Camera cam = simple_camera(600, 300, 300);
    GridSpec grid = GridSpec::centered(Vec3(0, 0, 2), 4, 0.1);
    grid.voxel_edge = 1e-12;
    CHECK_THROWS_AS(DepthRange::of_grid(cam, grid), GeometryError);
  }

  TEST_CASE("rig file round trip") {
    const CameraRig rig = hullcap::testing::ring_rig(8, 1.0, 1200, 600);
    const CameraRig back = parse_rig(format_rig(rig));
    REQUIRE(back.n_views() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(back[i].id == rig[i].id);
      CHECK(back[i].rotation == rig[i].rotation);
      CHECK(back[i].translation == rig[i].translation);
      CHECK(back[i].intrinsics == rig[i].intrinsics);
    }
    const auto dir = hullcap::testing::scratch_dir("rig");
    save_rig(rig, dir / "rig.json");
    CHECK(load_rig(dir / "rig.json").n_views() == 8);
  }

  TEST_CASE("identity camera loads and images the origin at the principal point with zero depth") {
    const std::string text = R"({"cameras": [
      {"id": "id", "K": [600,0,300, 0,600,300, 0,0,1], "R": [1,0,0, 0,1,0, 0,0,1], "t": [0,0,0], "width": 600, "height": 600},
      {"id": "b", "K": [600,0,300, 0,600,300, 0,0,1], "R": [1,0,0, 0,1,0, 0,0,1], "t": [0,0,1], "width": 600, "height": 600}]})";
    const CameraRig rig = parse_rig(text);
    CHECK(rig[0].to_camera(Vec3::Zero()).z() == 0.0);
    CHECK_THROWS_AS(project(Vec3::Zero(), rig[0]), GeometryError);
    const Projection p = project(Vec3(0, 0, 1), rig[0]);
    CHECK(p.pixel == Vec2(300, 300));
  }

  TEST_CASE("reflections, skewed rotations and malformed cameras are rejected") {
    const std::string good = R"({"id": "a", "K": [600,0,300, 0,600,300, 0,0,1], "R": [1,0,0, 0,1,0, 0,0,1], "t": [0,0,3], "width": 600, "height": 600})";
    const std::string reflected = R"({"id": "mirror", "K": [600,0,300, 0,600,300, 0,0,1], "R": [1,0,0, 0,1,0, 0,0,-1], "t": [0,0,3], "width": 600, "height": 600})";
    const std::string skewed = R"({"id": "skew", "K": [600,0,300, 0,600,300, 0,0,1], "R": [1,0.001,0, 0,1,0, 0,0,1], "t": [0,0,3], "width": 600, "height": 600})";
    const std::string broken = R"({"id": "broken", "K": [600,0,300], "R": [1,0,0, 0,1,0, 0,0,1], "t": [0,0,3], "width": 600, "height": 600})";
    CHECK_THROWS_AS(parse_rig("{\"cameras\": [" + good + "," + reflected + "]}"), ValidationError);
    CHECK_THROWS_AS(parse_rig("{\"cameras\": [" + good + "," + skewed + "]}"), ValidationError);
    try {
      parse_rig("{\"cameras\": [" + good + "," + broken + "]}");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_rig("{\"cameras\": [" + good), ParseError);
  }

  TEST_CASE("ring cameras look at the focus point") {
    const CameraRig rig = hullcap::testing::ring_rig(8, 1.0, 1200, 600, Vec3(0.1, 0.2, 0.3));
    CHECK((rig_focus_point(rig) - Vec3(0.1, 0.2, 0.3)).norm() < 1e-9);
    for (const auto& cam : rig.cameras) {
      const Projection p = project(Vec3(0.1, 0.2, 0.3), cam);
      CHECK((p.pixel - Vec2(299.5, 299.5)).norm() < 1e-9);
      CHECK(p.depth == doctest::Approx(1.0));
    }
  }
}
