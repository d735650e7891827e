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

#include <cmath>

#include "hullcap/features.hpp"
#include "hullcap/visibility.hpp"
#include "test_support.hpp"

using namespace hullcap;
namespace ht = hullcap::testing;

namespace {

RgbImage random_image(Pcg32& rng, int w, int h) {
  RgbImage img(w, h);
  for (auto& c : img.rgb) c = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

FeatureMap random_fmap(Pcg32& rng, int w, int h, int c) {
  FeatureMap f(w, h, c);
  for (auto& v : f.values) v = rng.uniform(-1, 1);
  return f;
}

FeatureMap constant_fmap(int w, int h, double value) {
  FeatureMap f(w, h, 1);
  for (auto& v : f.values) v = value;
  return f;
}

// Covered everywhere far behind any voxel, so visibility never blocks.
DepthMap far_depth(int w, int h) {
  DepthMap d(w, h);
  for (auto& v : d.values) v = 100.0f;
  return d;
}

struct Moments {
  Eigen::VectorXd mean, var;
};

Moments two_pass(const Eigen::MatrixXd& f, const std::vector<std::uint8_t>& ind, const std::vector<double>& w) {
  const auto c = f.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(c), var = Eigen::VectorXd::Zero(c);
  double total = 0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    if (!ind[i]) continue;
    mean += w[i] * f.row(i).transpose();
    total += w[i];
  }
  mean /= total;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    if (!ind[i]) continue;
    var += w[i] * (f.row(i).transpose() - mean).cwiseAbs2();
  }
  return {mean, var / total};
}

}  // namespace

TEST_SUITE("feature_volume") {
  TEST_CASE("constant image has zero gradients and zero local spread") {
    const FeatureMap f = extract_features(RgbImage(20, 15, 128));
    for (int y = 0; y < 15; ++y) {
      for (int x = 0; x < 20; ++x) {
        CHECK(f.at(x, y, 0) == doctest::Approx(128.0 / 255.0));
        CHECK(f.at(x, y, 1) == 0.0);
        CHECK(f.at(x, y, 2) == 0.0);
        CHECK(f.at(x, y, 4) == doctest::Approx(0.0));
      }
    }
  }

  TEST_CASE("vertical step edge") {
    RgbImage img(20, 10, 0);
    for (int y = 0; y < 10; ++y)
      for (int x = 10; x < 20; ++x)
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = 255;
    const FeatureMap f = extract_features(img);
    for (int y = 0; y < 10; ++y) {
      double best = -1;
      int arg = -1;
      for (int x = 0; x < 20; ++x) {
        CHECK(f.at(x, y, 2) == 0.0);
        if (f.at(x, y, 1) > best) {
          best = f.at(x, y, 1);
          arg = x;
        }
      }
      CHECK((arg == 9 || arg == 10));
      CHECK(f.at(9, y, 1) == f.at(10, y, 1));
    }
  }

  TEST_CASE("features match a per-pixel recomputation") {
    Pcg32 rng(3);
    const RgbImage img = random_image(rng, 13, 9);
    const FeatureMap f = extract_features(img);
    auto gray = [&](int x, int y) {
      x = x < 0 ? 0 : x > 12 ? 12 : x;
      y = y < 0 ? 0 : y > 8 ? 8 : y;
      return (0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2)) / 255.0;
    };
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 13; ++x) {
        std::vector<double> nb;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) nb.push_back(gray(x + dx, y + dy));
        double mean = 0;
        for (double v : nb) mean += v / 9.0;
        double var = 0;
        for (double v : nb) var += (v - mean) * (v - mean) / 9.0;
        CHECK(f.at(x, y, 0) == gray(x, y));
        CHECK(f.at(x, y, 1) == (gray(x + 1, y) - gray(x - 1, y)) / 2.0);
        CHECK(f.at(x, y, 2) == (gray(x, y + 1) - gray(x, y - 1)) / 2.0);
        CHECK(std::abs(f.at(x, y, 3) - mean) < 1e-12);
        CHECK(std::abs(f.at(x, y, 4) - std::sqrt(var)) < 1e-12);
      }
    }
  }

  TEST_CASE("bilinear sampling") {
    Pcg32 rng(4);
    const FeatureMap f = random_fmap(rng, 11, 7, 3);
    CHECK((sample_bilinear(f, Vec2(4, 3)) - Eigen::Vector3d(f.at(4, 3, 0), f.at(4, 3, 1), f.at(4, 3, 2))).norm() == 0.0);
    const Eigen::VectorXd mid = sample_bilinear(f, Vec2(4.5, 3));
    for (int c = 0; c < 3; ++c) CHECK(std::abs(mid[c] - 0.5 * (f.at(4, 3, c) + f.at(5, 3, c))) < 1e-15);
    for (int trial = 0; trial < 1000; ++trial) {
      const double x = rng.uniform(0, 10), y = rng.uniform(0, 6);
      const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
      const double a = x - x0, b = y - y0;
      const Eigen::VectorXd got = sample_bilinear(f, Vec2(x, y));
      for (int c = 0; c < 3; ++c) {
        const double oracle = f.at(x0, y0, c) * (1 - a) * (1 - b) + f.at(x0 + 1, y0, c) * a * (1 - b) +
                              f.at(x0, y0 + 1, c) * (1 - a) * b + f.at(x0 + 1, y0 + 1, c) * a * b;
        CHECK(std::abs(got[c] - oracle) <= 1e-12);
      }
    }
  }

  TEST_CASE("fusion hand cases") {
    Eigen::MatrixXd same(3, 2);
    same << 0.5, -1, 0.5, -1, 0.5, -1;
    const std::vector<std::uint8_t> all = {1, 1, 1};
    const std::vector<double> ones = {1, 1, 1};
    FusedFeature r = fuse_mean_variance(same, all, ones);
    CHECK(r.valid);
    CHECK(r.mean == Eigen::Vector2d(0.5, -1));
    CHECK(r.variance.norm() == 0.0);

    Eigen::MatrixXd two(2, 1);
    two << 1, 3;
    r = fuse_mean_variance(two, std::vector<std::uint8_t>{1, 1}, std::vector<double>{1, 1});
    CHECK(r.mean[0] == 2.0);
    CHECK(r.variance[0] == 1.0);

    r = fuse_mean_variance(two, std::vector<std::uint8_t>{0, 1}, std::vector<double>{1, 1});
    CHECK(r.valid);
    CHECK(r.mean[0] == 3.0);
    CHECK(r.variance[0] == 0.0);

    r = fuse_mean_variance(two, std::vector<std::uint8_t>{0, 0}, std::vector<double>{1, 1});
    CHECK_FALSE(r.valid);
    CHECK_THROWS_AS(fuse_mean_variance(two, std::vector<std::uint8_t>{1}, std::vector<double>{1, 1}), ShapeError);
  }

  TEST_CASE("fusion laws on random cases") {
    Pcg32 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(7));
      const int c = 1 + static_cast<int>(rng.below(5));
      Eigen::MatrixXd f(n, c);
      for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.uniform(-2, 2);
      std::vector<std::uint8_t> ind(n);
      std::vector<double> w(n);
      for (int i = 0; i < n; ++i) {
        ind[i] = rng.below(4) != 0;
        w[i] = rng.uniform(0.1, 2.0);
      }
      ind[0] = 1;
      const FusedFeature base = fuse_mean_variance(f, ind, w);
      const Moments oracle = two_pass(f, ind, w);
      CHECK((base.mean - oracle.mean).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((base.variance - oracle.var).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(base.variance.minCoeff() >= 0.0);

      std::vector<double> scaled = w;
      for (auto& x : scaled) x *= 7.25;
      const FusedFeature s = fuse_mean_variance(f, ind, scaled);
      CHECK((s.mean - base.mean).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((s.variance - base.variance).cwiseAbs().maxCoeff() <= 1e-12);

      Eigen::MatrixXd more(n + 1, c);
      more << f, Eigen::RowVectorXd::Constant(c, 1e6);
      std::vector<std::uint8_t> ind2 = ind;
      ind2.push_back(0);
      std::vector<double> w2 = w;
      w2.push_back(3.0);
      const FusedFeature m = fuse_mean_variance(more, ind2, w2);
      CHECK(m.mean == base.mean);
      CHECK(m.variance == base.variance);
    }
  }

  TEST_CASE("global volume of a single camera has zero variance") {
    Pcg32 rng(11);
    CameraRig rig;
    rig.cameras.push_back(look_at(Vec3(0, -2, 0), Vec3::Zero(), Vec3::UnitZ(), 100, 64, 64, "only"));
    const GridSpec grid = GridSpec::centered(Vec3::Zero(), 6, 0.05);
    VisibilityMask vis;
    vis.spec = grid;
    vis.n_views = 1;
    vis.indicators.assign(grid.voxel_count(), 1);
    const std::vector<FeatureMap> fmaps = {random_fmap(rng, 64, 64, 2)};
    const FeatureVolume vol = build_global_volume(fmaps, rig, grid, vis);
    CHECK(vol.valid_count() == grid.voxel_count());
    for (std::size_t i = 0; i < grid.voxel_count(); ++i) {
      const Eigen::VectorXd s = sample_bilinear(fmaps[0], project(grid.voxel_center(i), rig[0]).pixel);
      CHECK(vol.variance_at(i)[0] == 0.0);
      CHECK(vol.mean_at(i)[0] == s[0]);
      CHECK(vol.mean_at(i)[1] == s[1]);
    }
  }

  TEST_CASE("identical constant views fuse with zero variance") {
    const CameraRig rig = ht::ring_rig(6, 1.0, 200, 96);
    const GridSpec grid = GridSpec::centered(Vec3::Zero(), 8, 0.03);
    std::vector<DepthMap> depths(6, far_depth(96, 96));
    const VisibilityMask vis = grid_visibility(grid, rig, depths, 0.1);
    const std::vector<RgbImage> images(6, RgbImage(96, 96, 140));
    const FeatureVolume vol = build_global_volume(images, AnalyticFeatureExtractor{}, rig, grid, vis);
    REQUIRE(vol.valid_count() > 0);
    for (std::size_t i = 0; i < grid.voxel_count(); ++i) {
      if (!vol.valid[i]) continue;
      for (int c = 0; c < vol.channels; ++c) CHECK(vol.variance_at(i)[c] <= 1e-9);
    }
  }

  TEST_CASE("back voxels of a sphere seen only from the front are invalid") {
    SceneSpec spec;
    spec.n_views = 4;
    spec.ring_arc_degrees = 60;
    spec.image_size = 128;
    spec.focal_px = 300;
    const CameraRig rig = make_ring_rig(spec, Vec3::Zero());
    const TriMesh ball = ht::sphere_mesh(0.1, 3);
    const GridSpec grid = GridSpec::centered(Vec3::Zero(), 12, 0.02);
    std::vector<DepthMap> depths;
    std::vector<FeatureMap> fmaps;
    for (const auto& cam : rig.cameras) {
      depths.push_back(render_depth(ball, cam));
      fmaps.push_back(constant_fmap(128, 128, 1.0));
    }
    const VisibilityMask vis = grid_visibility(grid, rig, depths, 0.02);
    const FeatureVolume vol = build_global_volume(fmaps, rig, grid, vis);
    int back = 0;
    for (std::size_t i = 0; i < grid.voxel_count(); ++i) {
      const Vec3 c = grid.voxel_center(i);
      if (c.y() < -0.05 && c.norm() < 0.09) {
        CHECK_FALSE(vol.valid[i]);
        ++back;
      }
    }
    CHECK(back > 10);
    CHECK(vol.valid_count() > 0);

    VisibilityMask other = vis;
    other.spec.voxel_edge *= 2;
    CHECK_THROWS_AS(build_global_volume(fmaps, rig, grid, other), ShapeError);
  }

  TEST_CASE("local volume weights follow the vertex normal") {
    CameraRig rig;
    rig.cameras.push_back(look_at(Vec3(0, 0, 1), Vec3::Zero(), Vec3::UnitY(), 300, 64, 64, "front"));
    rig.cameras.push_back(look_at(Vec3(0, 0, -1), Vec3::Zero(), Vec3::UnitY(), 300, 64, 64, "back"));
    rig.cameras.push_back(look_at(Vec3(1, 0, 0), Vec3::Zero(), Vec3::UnitY(), 300, 64, 64, "side"));
    const std::vector<DepthMap> depths(3, far_depth(64, 64));
    const GridSpec global = GridSpec::centered(Vec3::Zero(), 16, 0.02);
    const LocalGridParams params;

    const std::vector<double> w = local_view_weights(Vec3::Zero(), Vec3::UnitZ(), rig, depths, global, params);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == 0.0);
    CHECK(w[2] == doctest::Approx(0.0));

    Pcg32 rng(2);
    const std::vector<FeatureMap> fmaps = {random_fmap(rng, 64, 64, 2), random_fmap(rng, 64, 64, 2),
                                           random_fmap(rng, 64, 64, 2)};
    const FeatureVolume vol = build_local_volume(Vec3::Zero(), Vec3::UnitZ(), fmaps, rig, depths, global, params);
    CHECK(vol.spec.resolution == 8);
    CHECK((vol.spec.center() - Vec3::Zero()).norm() < 1e-15);
    for (std::size_t i = 0; i < vol.spec.voxel_count(); ++i) {
      const Eigen::VectorXd s = sample_bilinear(fmaps[0], project(vol.spec.voxel_center(i), rig[0]).pixel);
      CHECK(vol.valid[i]);
      CHECK(vol.mean_at(i)[0] == s[0]);
      CHECK(vol.variance_at(i)[1] == 0.0);
    }
    CHECK_THROWS_AS(build_local_volume(Vec3::Zero(), Vec3(0, 0, 2), fmaps, rig, depths, global, params),
                    ValidationError);
  }

  TEST_CASE("two symmetric views average their features") {
    const double s = std::sqrt(0.5);
    CameraRig rig;
    rig.cameras.push_back(look_at(Vec3(s, 0, s), Vec3::Zero(), Vec3::UnitY(), 300, 64, 64, "left"));
    rig.cameras.push_back(look_at(Vec3(-s, 0, s), Vec3::Zero(), Vec3::UnitY(), 300, 64, 64, "right"));
    const std::vector<DepthMap> depths(2, far_depth(64, 64));
    const GridSpec global = GridSpec::centered(Vec3::Zero(), 16, 0.02);
    const std::vector<FeatureMap> fmaps = {constant_fmap(64, 64, 0.25), constant_fmap(64, 64, 1.75)};
    const std::vector<double> w = local_view_weights(Vec3::Zero(), Vec3::UnitZ(), rig, depths, global, {});
    CHECK(w[0] == doctest::Approx(s));
    CHECK(w[1] == doctest::Approx(s));
    const FeatureVolume vol = build_local_volume(Vec3::Zero(), Vec3::UnitZ(), fmaps, rig, depths, global);
    const std::size_t center = vol.spec.index(4, 4, 4);
    CHECK(vol.mean_at(center)[0] == doctest::Approx(1.0));
  }
}
