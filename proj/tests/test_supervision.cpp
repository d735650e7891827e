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

#include "hullcap/distance.hpp"
#include "hullcap/supervision.hpp"
#include "test_support.hpp"

using namespace hullcap;
namespace ht = hullcap::testing;

namespace {

TriMesh plane_at(double z, double half = 1.0) {
  TriMesh m;
  m.vertices = {Vec3(-half, -half, z), Vec3(half, -half, z), Vec3(half, half, z), Vec3(-half, half, z)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

TriMesh random_mesh(Pcg32& rng, int n_triangles) {
  TriMesh m;
  for (int t = 0; t < n_triangles; ++t) {
    const Vec3 c = ht::random_point(rng, -1, 1);
    for (int k = 0; k < 3; ++k) m.vertices.push_back(c + ht::random_point(rng, -0.15, 0.15));
    m.triangles.push_back({3 * t, 3 * t + 1, 3 * t + 2});
  }
  return m;
}

std::vector<Vec3> random_points(Pcg32& rng, int n, double scale) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(ht::random_point(rng, -scale, scale));
  return out;
}

}  // namespace

TEST_SUITE("robust_supervision") {
  TEST_CASE("point-to-surface distance hand cases") {
    const TriMesh tri = plane_at(0.0);
    CHECK(p2s_distance(Vec3(0.2, -0.3, 0), tri) <= 1e-15);
    CHECK(p2s_distance(Vec3(0.2, -0.3, 0.7), tri) == doctest::Approx(0.7));
    CHECK(p2s_distance(Vec3(2, 0, 0), tri) == doctest::Approx(1.0));
    CHECK(p2s_distance(Vec3(2, 2, 0), tri) == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("BVH queries equal brute force bit for bit") {
    Pcg32 rng(17);
    const TriMesh mesh = random_mesh(rng, 500);
    const TriangleBvh bvh(mesh);
    for (int q = 0; q < 1000; ++q) {
      const Vec3 p = ht::random_point(rng, -1.5, 1.5);
      const ClosestPoint fast = bvh.closest(p);
      const ClosestPoint slow = brute_force_closest(p, mesh);
      CHECK(std::abs(fast.distance() - slow.distance()) <= 1e-9);
      CHECK(fast.triangle == slow.triangle);
    }
  }

  TEST_CASE("distance vanishes exactly on the surface and is 1-Lipschitz") {
    Pcg32 rng(18);
    const TriMesh mesh = random_mesh(rng, 60);
    for (int q = 0; q < 200; ++q) {
      const auto& t = mesh.triangles[rng.below(60)];
      double a = rng.uniform01(), b = rng.uniform01();
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      const Vec3 on = mesh.vertices[t[0]] + a * (mesh.vertices[t[1]] - mesh.vertices[t[0]]) +
                      b * (mesh.vertices[t[2]] - mesh.vertices[t[0]]);
      CHECK(p2s_distance(on, mesh) <= 1e-9);
      const Vec3 p = ht::random_point(rng, -1.5, 1.5);
      const Vec3 r = p + ht::random_point(rng, -0.2, 0.2);
      CHECK(std::abs(p2s_distance(p, mesh) - p2s_distance(r, mesh)) <= (p - r).norm() + 1e-12);
    }
  }

  TEST_CASE("closest-point barycentrics reconstruct the closest point") {
    Pcg32 rng(19);
    const TriMesh mesh = random_mesh(rng, 40);
    const std::vector<Vec3> pts = random_points(rng, 100, 1.5);
    const auto cps = closest_points(pts, mesh);
    for (const auto& cp : cps) {
      const auto& t = mesh.triangles[static_cast<std::size_t>(cp.triangle)];
      const Vec3 rebuilt = cp.barycentric[0] * mesh.vertices[t[0]] + cp.barycentric[1] * mesh.vertices[t[1]] +
                           cp.barycentric[2] * mesh.vertices[t[2]];
      CHECK((rebuilt - cp.point).norm() < 1e-12);
      CHECK(cp.barycentric.sum() == doctest::Approx(1.0));
    }
  }

  TEST_CASE("v2v mask hand cases") {
    const std::vector<Vec3> same = {Vec3(1, 2, 3)};
    CHECK(v2v_mask(same, same, same)[0] == 1);
    const std::vector<Vec3> a = {Vec3(0, 0, 0)}, b = {Vec3(0, 0, 0.1)}, reg = {Vec3(0, 0, 5)};
    CHECK(v2v_mask(a, b, reg)[0] == 0);
    CHECK_THROWS_AS(v2v_mask(a, b, std::vector<Vec3>{}), ShapeError);
  }

  TEST_CASE("v2v mask matches the inequality on random triples") {
    Pcg32 rng(20);
    const auto a = random_points(rng, 500, 1), b = random_points(rng, 500, 1), reg = random_points(rng, 500, 1);
    const auto mask = v2v_mask(a, b, reg);
    for (int i = 0; i < 500; ++i) {
      const bool keep = (b[i] - a[i]).norm() >= (b[i] - reg[i]).norm();
      CHECK(mask[i] == (keep ? 1 : 0));
    }
    const auto all = v2v_mask(a, reg, reg);
    CHECK(std::count(all.begin(), all.end(), 1) == 500);
  }

  TEST_CASE("robust v2v loss") {
    std::vector<Vec3> reg(10), a(10), b(10);
    for (int i = 0; i < 10; ++i) {
      reg[i] = Vec3(i, 0, 0);
      a[i] = reg[i] + Vec3(0, 0.001, 0);
      b[i] = reg[i];
    }
    for (int i : {3, 7}) {
      a[i] = reg[i] + Vec3(0, 0, 0.5);
      b[i] = a[i] + Vec3(0, 0, 0.01);
    }
    const MaskedLoss out = robust_v2v_loss(a, b, reg);
    CHECK(out.kept() == 8);
    CHECK(out.mask[3] == 0);
    CHECK(out.mask[7] == 0);
    CHECK(out.loss == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(robust_v2v_loss(reg, b, reg).loss == 0.0);

    Pcg32 rng(21);
    const auto ra = random_points(rng, 200, 1), rb = random_points(rng, 200, 1), rr = random_points(rng, 200, 1);
    const MaskedLoss r = robust_v2v_loss(ra, rb, rr);
    double sum = 0;
    int kept = 0;
    for (int i = 0; i < 200; ++i) {
      if ((rb[i] - ra[i]).norm() >= (rb[i] - rr[i]).norm()) {
        sum += (ra[i] - rr[i]).norm();
        ++kept;
      }
    }
    CHECK(std::abs(r.loss - sum / kept) <= 1e-12);
  }

  TEST_CASE("p2s mask hand cases and random triples") {
    const std::vector<double> da = {0.0012}, db = {0.001}, dreg = {0.050};
    CHECK(p2s_mask(da, db, dreg)[0] == 0);
    const std::vector<double> far_b = {0.06};
    CHECK(p2s_mask(da, far_b, dreg)[0] == 1);
    CHECK(p2s_mask(std::vector<double>{5.0}, far_b, dreg)[0] == 1);
    CHECK_THROWS_AS(p2s_mask(da, db, std::vector<double>{}), ShapeError);

    Pcg32 rng(22);
    std::vector<double> a(500), b(500), r(500);
    for (int i = 0; i < 500; ++i) {
      a[i] = rng.uniform(0, 0.1);
      b[i] = rng.uniform(0, 0.1);
      r[i] = rng.uniform(0, 0.1);
    }
    const auto mask = p2s_mask(a, b, r);
    for (int i = 0; i < 500; ++i) {
      const bool drop = b[i] < r[i] && std::abs(b[i] - a[i]) < std::abs(b[i] - r[i]);
      CHECK(mask[i] == (drop ? 0 : 1));
    }
  }

  TEST_CASE("robust p2s loss") {
    Scan scan;
    for (int i = 0; i < 20; ++i) scan.points.push_back(Vec3(-0.5 + 0.05 * i, 0.1, 0.0));
    CHECK(robust_p2s_loss(scan, plane_at(0), plane_at(0.01), plane_at(0.02)).loss == 0.0);

    // Predictions half a millimeter off the clean surface; the label sits on it.
    scan.points.push_back(Vec3(0.0, 0.0, 0.05));
    const MaskedLoss out = robust_p2s_loss(scan, plane_at(0.0004), plane_at(0.0005), plane_at(0.0));
    CHECK(out.mask.back() == 0);
    CHECK(out.kept() == 20);
    CHECK(out.loss == doctest::Approx(0.0004));

    const TriMesh far_a = plane_at(0.3), far_b = plane_at(-0.3);
    const MaskedLoss plain = robust_p2s_loss(scan, far_a, far_b, plane_at(0.0));
    CHECK(plain.kept() == scan.size());
    double mean = 0;
    for (const auto& p : scan.points) mean += p2s_distance(p, far_a) / static_cast<double>(scan.size());
    CHECK(std::abs(plain.loss - mean) < 1e-15);
  }

  TEST_CASE("masks are invariant under a rigid motion") {
    Pcg32 rng(23);
    const TriMesh reg = ht::sphere_mesh(0.1, 2);
    TriMesh a = reg, b = reg;
    for (auto& v : a.vertices) v += ht::random_point(rng, -0.01, 0.01);
    for (auto& v : b.vertices) v += ht::random_point(rng, -0.01, 0.01);
    Scan scan;
    scan.points = random_points(rng, 300, 0.15);
    const Mat3 q = Eigen::AngleAxisd(1.1, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    const Vec3 s(0.3, -2, 5);
    auto move = [&](TriMesh m) {
      for (auto& v : m.vertices) v = q * v + s;
      return m;
    };
    Scan moved = scan;
    for (auto& p : moved.points) p = q * p + s;
    const TriMesh ma = move(a), mb = move(b), mr = move(reg);
    CHECK(v2v_mask(a.vertices, b.vertices, reg.vertices) == v2v_mask(ma.vertices, mb.vertices, mr.vertices));
    const auto w0 = robust_p2s_loss(scan, a, b, reg);
    const auto w1 = robust_p2s_loss(moved, ma, mb, mr);
    CHECK(w0.mask == w1.mask);
    CHECK(std::abs(w0.loss - w1.loss) < 1e-9);
  }

  TEST_CASE("random estimators keep more supervision than converged ones far from noisy labels") {
    double random_keep = 0, converged_keep = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Pcg32 rng(seed);
      const auto reg = random_points(rng, 200, 0.1);
      const auto a = random_points(rng, 200, 0.1);
      const auto b = random_points(rng, 200, 0.1);
      std::vector<Vec3> conv_a(200), conv_b(200);
      for (int i = 0; i < 200; ++i) {
        conv_a[i] = reg[i] + Vec3(0.05, 0, 0);
        conv_b[i] = conv_a[i] + ht::random_point(rng, -1e-4, 1e-4);
      }
      random_keep += robust_v2v_loss(a, b, reg).kept();
      converged_keep += robust_v2v_loss(conv_a, conv_b, reg).kept();
    }
    CHECK(random_keep > converged_keep);
  }

  TEST_CASE("masked losses and their gradients") {
    Pcg32 rng(24);
    const TriMesh mesh = ht::sphere_mesh(0.1, 1);
    const auto reg = random_points(rng, static_cast<int>(mesh.vertices.size()), 0.1);
    std::vector<std::uint8_t> mask(mesh.vertices.size(), 1);
    mask[0] = 0;
    std::vector<Vec3> grad(mesh.vertices.size(), Vec3::Zero());
    const double e = masked_v2v(mesh.vertices, reg, mask, &grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < 5; ++i) {
      for (int k = 0; k < 3; ++k) {
        std::vector<Vec3> up = mesh.vertices, down = mesh.vertices;
        up[i][k] += h;
        down[i][k] -= h;
        const double fd = (masked_v2v(up, reg, mask, nullptr) - masked_v2v(down, reg, mask, nullptr)) / (2 * h);
        CHECK(std::abs(fd - grad[i][k]) < 1e-7);
      }
    }
    CHECK(e > 0);
    const std::vector<std::uint8_t> none(mesh.vertices.size(), 0);
    CHECK(masked_v2v(mesh.vertices, reg, none, nullptr) == 0.0);
  }

  TEST_CASE("Laplacian term vanishes on the rest shape and has the right gradient") {
    const TriMesh rest = ht::sphere_mesh(0.1, 1);
    const LaplacianTerm lap(rest);
    std::vector<Vec3> g(rest.vertices.size(), Vec3::Zero());
    CHECK(lap.evaluate(rest.vertices, &g) == 0.0);
    Pcg32 rng(25);
    std::vector<Vec3> v = rest.vertices;
    for (auto& p : v) p += ht::random_point(rng, -0.01, 0.01);
    std::fill(g.begin(), g.end(), Vec3::Zero());
    lap.evaluate(v, &g);
    const double h = 1e-6;
    for (std::size_t i = 0; i < v.size(); i += 5) {
      for (int k = 0; k < 3; ++k) {
        std::vector<Vec3> up = v, down = v;
        up[i][k] += h;
        down[i][k] -= h;
        const double fd = (lap.evaluate(up, nullptr) - lap.evaluate(down, nullptr)) / (2 * h);
        CHECK(std::abs(fd - g[i][k]) < 1e-8);
      }
    }
    std::vector<Vec3> shifted = rest.vertices;
    for (auto& p : shifted) p += Vec3(1, 2, 3);
    CHECK(lap.evaluate(shifted, nullptr) < 1e-20);
  }
}
