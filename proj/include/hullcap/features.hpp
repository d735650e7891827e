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
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hullcap/camera.hpp"
#include "hullcap/grid.hpp"
#include "hullcap/image.hpp"
#include "hullcap/visibility.hpp"

namespace hullcap {

// Dense per-pixel feature vectors, values[(y * width + x) * channels + c].
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int w, int h, int c)
      : width(w), height(h), channels(c), values(static_cast<std::size_t>(w) * h * c, 0.0) {}

  double& at(int x, int y, int c) { return values[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  double at(int x, int y, int c) const { return values[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

// 2D feature backbone. The library ships the analytic extractor below; a
// learned network can be plugged in behind the same interface.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int channels() const = 0;
  virtual FeatureMap extract(const RgbImage& image) const = 0;
};

// Five channels per pixel: gray, x-gradient, y-gradient, 3x3 mean, 3x3 std.
// gray = (0.299 R + 0.587 G + 0.114 B) / 255; gradients are central
// differences and windows replicate the border.
class AnalyticFeatureExtractor final : public FeatureExtractor {
 public:
  static constexpr int kChannels = 5;
  int channels() const override { return kChannels; }
  FeatureMap extract(const RgbImage& image) const override;
};

FeatureMap extract_features(const RgbImage& image);

// Bilinear interpolation of the four neighboring pixels; coordinates outside
// the image clamp to the border.
Eigen::VectorXd sample_bilinear(const FeatureMap& fmap, const Vec2& pixel);

struct FusedFeature {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  bool valid = false;
};

// Weighted mean and (biased) variance over views with effective weight
// indicator * weight. No effective weight yields zeros and valid = false.
// `features` is n_views x C.
FusedFeature fuse_mean_variance(const Eigen::MatrixXd& features, std::span<const std::uint8_t> indicators,
                                std::span<const double> weights);

// Fused features over a grid: per voxel C means, then C variances.
struct FeatureVolume {
  GridSpec spec;
  int channels = 0;
  std::vector<double> mean;      // voxel_count x channels
  std::vector<double> variance;  // voxel_count x channels
  std::vector<std::uint8_t> valid;

  FeatureVolume() = default;
  FeatureVolume(const GridSpec& g, int c)
      : spec(g),
        channels(c),
        mean(g.voxel_count() * c, 0.0),
        variance(g.voxel_count() * c, 0.0),
        valid(g.voxel_count(), 0) {}

  const double* mean_at(std::size_t voxel) const { return mean.data() + voxel * channels; }
  const double* variance_at(std::size_t voxel) const { return variance.data() + voxel * channels; }
  std::size_t valid_count() const;
};

// Global cube: each voxel projects into every view, samples bilinearly and
// fuses with unit weights and the voxel's visibility indicators.
FeatureVolume build_global_volume(std::span<const FeatureMap> fmaps, const CameraRig& rig, const GridSpec& grid,
                                  const VisibilityMask& vis);

FeatureVolume build_global_volume(std::span<const RgbImage> images, const FeatureExtractor& extractor,
                                  const CameraRig& rig, const GridSpec& grid, const VisibilityMask& vis);

struct LocalGridParams {
  int resolution = 8;
  double voxel_edge = 0.002;
  double rho = 0.1;
  VisibilityMode mode = VisibilityMode::front_margin;
};

// Per-view weights of the local stage: visibility tested once at the vertex
// (depth normalized against `global_grid`) times max(0, cos) between the
// normal and the direction from the vertex to the camera center.
std::vector<double> local_view_weights(const Vec3& vertex, const Vec3& normal, const CameraRig& rig,
                                       std::span<const DepthMap> hull_depths, const GridSpec& global_grid,
                                       const LocalGridParams& params);

// Local cube centered on the vertex. Throws ValidationError unless |normal| = 1 within 1e-6.
FeatureVolume build_local_volume(const Vec3& vertex, const Vec3& normal, std::span<const FeatureMap> fmaps,
                                 const CameraRig& rig, std::span<const DepthMap> hull_depths,
                                 const GridSpec& global_grid, const LocalGridParams& params = {});

GridSpec local_grid(const Vec3& vertex, const LocalGridParams& params);

}  // namespace hullcap
