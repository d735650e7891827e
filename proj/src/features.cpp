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

#include "hullcap/features.hpp"

#include <algorithm>
#include <cmath>

namespace hullcap {

FeatureMap AnalyticFeatureExtractor::extract(const RgbImage& image) const {
  const int w = image.width;
  const int h = image.height;
  std::vector<double> gray(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      gray[static_cast<std::size_t>(y) * w + x] =
          (0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2)) / 255.0;
    }
  }
  auto g = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return gray[static_cast<std::size_t>(y) * w + x];
  };

  FeatureMap out(w, h, kChannels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) sum += g(x + dx, y + dy);
      }
      const double mean = sum / 9.0;
      double sq = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double r = g(x + dx, y + dy) - mean;
          sq += r * r;
        }
      }
      out.at(x, y, 0) = g(x, y);
      out.at(x, y, 1) = 0.5 * (g(x + 1, y) - g(x - 1, y));
      out.at(x, y, 2) = 0.5 * (g(x, y + 1) - g(x, y - 1));
      out.at(x, y, 3) = mean;
      out.at(x, y, 4) = std::sqrt(sq / 9.0);
    }
  }
  return out;
}

FeatureMap extract_features(const RgbImage& image) { return AnalyticFeatureExtractor{}.extract(image); }

namespace {

// Accumulates sum(w f), sum(w f^2) and sum(w) for one voxel.
class WeightedMoments {
 public:
  explicit WeightedMoments(int channels) : first_(channels, 0.0), second_(channels, 0.0), last_(channels, 0.0) {}

  void add(const double* f, double w) {
    if (!(w > 0.0)) return;
    for (std::size_t c = 0; c < first_.size(); ++c) {
      first_[c] += w * f[c];
      second_[c] += w * f[c] * f[c];
      last_[c] = f[c];
    }
    total_ += w;
    ++count_;
  }

  bool valid() const { return total_ > 0.0; }

  void finish(double* mean, double* variance) const {
    const std::size_t n = first_.size();
    if (!valid()) {
      std::fill(mean, mean + n, 0.0);
      std::fill(variance, variance + n, 0.0);
      return;
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (count_ == 1) {
        mean[c] = last_[c];
        variance[c] = 0.0;
        continue;
      }
      const double m = first_[c] / total_;
      mean[c] = m;
      variance[c] = std::max(0.0, second_[c] / total_ - m * m);
    }
  }

 private:
  std::vector<double> first_;
  std::vector<double> second_;
  std::vector<double> last_;
  double total_ = 0.0;
  int count_ = 0;
};

void sample_into(const FeatureMap& fmap, const Vec2& pixel, double* out) {
  const double x = std::clamp(pixel.x(), 0.0, static_cast<double>(fmap.width - 1));
  const double y = std::clamp(pixel.y(), 0.0, static_cast<double>(fmap.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, fmap.width - 1);
  const int y1 = std::min(y0 + 1, fmap.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double w00 = (1.0 - fx) * (1.0 - fy);
  const double w10 = fx * (1.0 - fy);
  const double w01 = (1.0 - fx) * fy;
  const double w11 = fx * fy;
  for (int c = 0; c < fmap.channels; ++c) {
    out[c] = w00 * fmap.at(x0, y0, c) + w10 * fmap.at(x1, y0, c) + w01 * fmap.at(x0, y1, c) +
             w11 * fmap.at(x1, y1, c);
  }
}

void check_maps(std::span<const FeatureMap> fmaps, const CameraRig& rig) {
  if (fmaps.size() != rig.n_views())
    throw ShapeError("need one feature map per camera: " + std::to_string(fmaps.size()) + " for " +
                     std::to_string(rig.n_views()) + " cameras");
  for (std::size_t v = 0; v < fmaps.size(); ++v) {
    if (fmaps[v].width != rig[v].width || fmaps[v].height != rig[v].height)
      throw ShapeError("feature map " + std::to_string(v) + " does not match camera '" + rig[v].id + "' size");
    if (fmaps[v].channels != fmaps.front().channels) throw ShapeError("feature maps disagree on channel count");
  }
}

}  // namespace

Eigen::VectorXd sample_bilinear(const FeatureMap& fmap, const Vec2& pixel) {
  Eigen::VectorXd out(fmap.channels);
  sample_into(fmap, pixel, out.data());
  return out;
}

FusedFeature fuse_mean_variance(const Eigen::MatrixXd& features, std::span<const std::uint8_t> indicators,
                                std::span<const double> weights) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (indicators.size() != n || weights.size() != n)
    throw ShapeError("fusion inputs disagree on the number of views");
  const auto channels = static_cast<int>(features.cols());
  WeightedMoments acc(channels);
  Eigen::VectorXd row(channels);
  for (std::size_t i = 0; i < n; ++i) {
    if (!indicators[i]) continue;
    row = features.row(static_cast<Eigen::Index>(i)).transpose();
    acc.add(row.data(), weights[i]);
  }
  FusedFeature out{Eigen::VectorXd(channels), Eigen::VectorXd(channels), acc.valid()};
  acc.finish(out.mean.data(), out.variance.data());
  return out;
}

std::size_t FeatureVolume::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

FeatureVolume build_global_volume(std::span<const FeatureMap> fmaps, const CameraRig& rig, const GridSpec& grid,
                                  const VisibilityMask& vis) {
  grid.validate();
  check_maps(fmaps, rig);
  if (vis.n_views != static_cast<int>(rig.n_views()) || vis.spec.resolution != grid.resolution ||
      vis.spec.voxel_edge != grid.voxel_edge || vis.spec.origin != grid.origin)
    throw ShapeError("visibility mask was computed for a different grid or rig");
  const int channels = fmaps.front().channels;
  FeatureVolume vol(grid, channels);
  parallel_for(grid.voxel_count(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> sample(channels);
    for (std::size_t i = begin; i < end; ++i) {
      WeightedMoments acc(channels);
      const Vec3 center = grid.voxel_center(i);
      for (std::size_t v = 0; v < rig.n_views(); ++v) {
        if (!vis.at(static_cast<int>(v), i)) continue;
        const auto proj = try_project(center, rig[v]);
        if (!proj) continue;
        sample_into(fmaps[v], proj->pixel, sample.data());
        acc.add(sample.data(), 1.0);
      }
      vol.valid[i] = acc.valid() ? 1 : 0;
      acc.finish(vol.mean.data() + i * channels, vol.variance.data() + i * channels);
    }
  });
  return vol;
}

FeatureVolume build_global_volume(std::span<const RgbImage> images, const FeatureExtractor& extractor,
                                  const CameraRig& rig, const GridSpec& grid, const VisibilityMask& vis) {
  std::vector<FeatureMap> fmaps;
  fmaps.reserve(images.size());
  for (const auto& img : images) fmaps.push_back(extractor.extract(img));
  return build_global_volume(fmaps, rig, grid, vis);
}

GridSpec local_grid(const Vec3& vertex, const LocalGridParams& params) {
  return GridSpec::centered(vertex, params.resolution, params.voxel_edge);
}

std::vector<double> local_view_weights(const Vec3& vertex, const Vec3& normal, const CameraRig& rig,
                                       std::span<const DepthMap> hull_depths, const GridSpec& global_grid,
                                       const LocalGridParams& params) {
  if (hull_depths.size() != rig.n_views()) throw ShapeError("need one hull depth map per camera");
  std::vector<double> weights(rig.n_views(), 0.0);
  for (std::size_t v = 0; v < rig.n_views(); ++v) {
    const int visible = voxel_visibility(vertex, rig[v], hull_depths[v], global_grid, params.rho, params.mode);
    if (!visible) continue;
    const Vec3 to_camera = rig[v].center() - vertex;
    const double len = to_camera.norm();
    if (len <= 0.0) continue;
    weights[v] = std::max(0.0, normal.dot(to_camera / len));
  }
  return weights;
}

FeatureVolume build_local_volume(const Vec3& vertex, const Vec3& normal, std::span<const FeatureMap> fmaps,
                                 const CameraRig& rig, std::span<const DepthMap> hull_depths,
                                 const GridSpec& global_grid, const LocalGridParams& params) {
  if (std::abs(normal.norm() - 1.0) > 1e-6) throw ValidationError("local volume needs a unit normal");
  check_maps(fmaps, rig);
  const GridSpec grid = local_grid(vertex, params);
  const std::vector<double> weights = local_view_weights(vertex, normal, rig, hull_depths, global_grid, params);
  const int channels = fmaps.front().channels;
  FeatureVolume vol(grid, channels);
  std::vector<double> sample(channels);
  for (std::size_t i = 0; i < grid.voxel_count(); ++i) {
    WeightedMoments acc(channels);
    const Vec3 center = grid.voxel_center(i);
    for (std::size_t v = 0; v < rig.n_views(); ++v) {
      if (!(weights[v] > 0.0)) continue;
      const auto proj = try_project(center, rig[v]);
      if (!proj) continue;
      sample_into(fmaps[v], proj->pixel, sample.data());
      acc.add(sample.data(), weights[v]);
    }
    vol.valid[i] = acc.valid() ? 1 : 0;
    acc.finish(vol.mean.data() + i * channels, vol.variance.data() + i * channels);
  }
  return vol;
}

}  // namespace hullcap
