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
#include <numeric>

#include "hullcap/carving.hpp"
#include "hullcap/distance.hpp"
#include "test_support.hpp"

using namespace hullcap;
namespace ht = hullcap::testing;

namespace {

struct SphereCarve {
  CameraRig rig;
  std::vector<BinaryMask> masks;
  GridSpec grid;
  OccupancyGrid occ;
};

// Sphere of radius 0.1 seen by a small ring; grid of 2.5 mm voxels.
SphereCarve carve_sphere(int n_views) {
  SphereCarve s;
  s.rig = ht::ring_rig(n_views, 1.0, 400, 160);
  for (const auto& cam : s.rig.cameras) s.masks.push_back(ht::analytic_sphere_mask(cam, Vec3::Zero(), 0.1));
  s.grid = GridSpec::centered(Vec3::Zero(), 96, 0.0025);
  s.occ = carve_occupancy(s.masks, s.rig, s.grid);
  return s;
}

OccupancyGrid box_occupancy(int d, int lo, int hi, int n_views) {
  OccupancyGrid occ;
  occ.spec = GridSpec::centered(Vec3::Zero(), d, 1.0);
  occ.n_views = n_views;
  occ.counts.assign(occ.spec.voxel_count(), 0);
  for (int l = lo; l < hi; ++l)
    for (int k = lo; k < hi; ++k)
      for (int j = lo; j < hi; ++j) occ.counts[occ.spec.index(j, k, l)] = static_cast<std::uint16_t>(n_views);
  return occ;
}

}  // namespace

TEST_SUITE("silhouette_carving") {
  TEST_CASE("all-white and all-black masks") {
    const CameraRig rig = ht::ring_rig(6, 1.0, 400, 120);
    const GridSpec grid = GridSpec::centered(Vec3::Zero(), 16, 0.01);
    std::vector<BinaryMask> white(6, BinaryMask(120, 120, 255));
    std::vector<BinaryMask> black(6, BinaryMask(120, 120, 0));
    const OccupancyGrid w = carve_occupancy(white, rig, grid);
    const OccupancyGrid b = carve_occupancy(black, rig, grid);
    CHECK(std::all_of(w.counts.begin(), w.counts.end(), [](auto c) { return c == 6; }));
    CHECK(std::all_of(b.counts.begin(), b.counts.end(), [](auto c) { return c == 0; }));
  }

  TEST_CASE("mask and camera sizes must agree") {
    const CameraRig rig = ht::ring_rig(4, 1.0, 400, 120);
    const GridSpec grid = GridSpec::centered(Vec3::Zero(), 8, 0.01);
    std::vector<BinaryMask> masks(4, BinaryMask(120, 120, 255));
    masks[2] = BinaryMask(100, 120, 255);
    CHECK_THROWS_AS(carve_occupancy(masks, rig, grid), ShapeError);
    masks.pop_back();
    CHECK_THROWS_AS(carve_occupancy(masks, rig, grid), ShapeError);
  }

  TEST_CASE("voxels inside the sphere are seen by every view") {
    const SphereCarve s = carve_sphere(8);
    // Rounding to the nearest pixel can push a rim voxel one pixel (2.5 mm at
    // this range) outside the silhouette.
    const double pixel_footprint = 1.0 / 400.0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < s.grid.voxel_count(); ++i) {
      if (s.grid.voxel_center(i).norm() < 0.1 - 2.0 * pixel_footprint) {
        CHECK_EQ(s.occ.counts[i], 8);
        ++checked;
      }
    }
    CHECK(checked > 1000);
  }

  TEST_CASE("more views never enlarge the hull, and view order is irrelevant") {
    const SphereCarve s4 = carve_sphere(4);
    const SphereCarve s8 = carve_sphere(8);
    CHECK(inside_voxel_count(s8.occ, 8) <= inside_voxel_count(s4.occ, 4));
    // Every 4-view camera is also in the 8-view ring, so membership is nested.
    for (std::size_t i = 0; i < s8.occ.counts.size(); ++i) {
      if (s8.occ.counts[i] == 8) CHECK_EQ(s4.occ.counts[i], 4);
    }

    CameraRig shuffled = s8.rig;
    std::vector<BinaryMask> masks = s8.masks;
    std::reverse(shuffled.cameras.begin(), shuffled.cameras.end());
    std::reverse(masks.begin(), masks.end());
    CHECK(carve_occupancy(masks, shuffled, s8.grid).counts == s8.occ.counts);
  }

  TEST_CASE("a box of full voxels yields a box hull") {
    const OccupancyGrid occ = box_occupancy(10, 3, 7, 5);
    const HullMesh hull = extract_hull(occ, 5);
    hull.validate();
    const Aabb box = bounding_box(hull.vertices);
    // Voxel centers 3..6 lie at -1.5..1.5; the iso level sits half a voxel outside them.
    CHECK((box.min - Vec3::Constant(-2.0)).norm() <= 1.0);
    CHECK((box.max - Vec3::Constant(2.0)).norm() <= 1.0);
    for (const auto& v : hull.vertices) {
      const double outer = v.cwiseAbs().maxCoeff();
      CHECK(outer >= 1.5 - 1e-9);
      CHECK(outer <= 2.5 + 1e-9);
    }
    CHECK(signed_volume(hull) > 0.0);
  }

  TEST_CASE("hull encloses the sphere") {
    const SphereCarve s = carve_sphere(8);
    const HullMesh hull = extract_hull(s.occ, 8);
    const TriangleBvh bvh(hull);
    const TriMesh ball = ht::sphere_mesh(0.1, 3);
    int bad = 0;
    for (const auto& v : ball.vertices) {
      if (!ht::inside_mesh(hull, v) && bvh.distance(v) > s.grid.voxel_edge) ++bad;
    }
    CHECK(bad == 0);
  }

  TEST_CASE("unreachable thresholds are an error") {
    const SphereCarve s = carve_sphere(4);
    CHECK_THROWS_AS(extract_hull(s.occ, 5), EmptyHullError);
    CHECK_THROWS_AS(extract_hull(s.occ, 0), ValidationError);
  }

  TEST_CASE("hull bounds") {
    TriMesh cube;
    for (int i = 0; i < 8; ++i) cube.vertices.push_back(Vec3((i & 1) - 0.5, ((i >> 1) & 1) - 0.5, ((i >> 2) & 1) - 0.5));
    cube.triangles = {{0, 1, 3}, {0, 3, 2}, {4, 6, 7}, {4, 7, 5}, {0, 4, 5}, {0, 5, 1},
                      {2, 3, 7}, {2, 7, 6}, {0, 2, 6}, {0, 6, 4}, {1, 5, 7}, {1, 7, 3}};
    const GridSpec g = hull_bounds(cube, 0.0, 32);
    CHECK((g.origin - Vec3::Constant(-0.5)).norm() < 1e-12);
    CHECK(g.extent() == doctest::Approx(1.0));
    CHECK(g.resolution == 32);

    TriMesh moved = cube;
    for (auto& v : moved.vertices) v += Vec3(1, 2, 3);
    CHECK((hull_bounds(moved, 0.0, 32).center() - g.center() - Vec3(1, 2, 3)).norm() < 1e-12);

    const TriMesh ball = ht::sphere_mesh(0.1, 3);
    const GridSpec gb = hull_bounds(ball, 0.02, 32);
    const double oracle = bounding_box(ball.vertices).size().maxCoeff() + 0.04;
    CHECK(std::abs(gb.extent() - oracle) < 1e-12);
    CHECK(std::abs(gb.extent() - 0.24) <= gb.voxel_edge);
  }
}
