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

#include "hullcap/prediction.hpp"

#include <cmath>

#include "hullcap/random.hpp"

namespace hullcap {

HeatmapSupport::HeatmapSupport(const GridSpec& shared) : HeatmapSupport(std::vector<GridSpec>{shared}) {}

HeatmapSupport::HeatmapSupport(std::vector<GridSpec> per_vertex) : grids_(std::move(per_vertex)) {
  if (grids_.empty()) throw ShapeError("heatmap support needs at least one grid");
  const GridSpec& first = grids_.front();
  first.validate();
  for (const auto& g : grids_) {
    if (g.resolution != first.resolution || g.voxel_edge != first.voxel_edge)
      throw ShapeError("per-vertex heatmap grids must share resolution and voxel edge");
    origins_.push_back(g.origin);
  }
  resolution_ = first.resolution;
  const std::size_t n = first.voxel_count();
  offsets_.resize(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    offsets_.row(static_cast<Eigen::Index>(i)) = (first.voxel_center(i) - first.origin).transpose();
  }
}

LogitMatrix softmax_rows(const LogitMatrix& logits) {
  LogitMatrix p(logits.rows(), logits.cols());
  for (Eigen::Index v = 0; v < logits.rows(); ++v) {
    const double m = logits.row(v).maxCoeff();
    p.row(v) = (logits.row(v).array() - m).exp();
    p.row(v) /= p.row(v).sum();
  }
  return p;
}

namespace {

std::vector<Vec3> expected_positions(const LogitMatrix& p, const HeatmapSupport& support) {
  std::vector<Vec3> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index v = 0; v < p.rows(); ++v) {
    const Vec3 rel = (p.row(v) * support.offsets()).transpose();
    out[static_cast<std::size_t>(v)] = support.origin(static_cast<int>(v)) + rel;
  }
  return out;
}

void check_support(const CostVolume& cost, const HeatmapSupport& support) {
  if (static_cast<std::size_t>(cost.logits.cols()) != support.voxel_count())
    throw ShapeError("cost volume has " + std::to_string(cost.logits.cols()) + " voxels, grid has " +
                     std::to_string(support.voxel_count()));
  if (!support.shared() && static_cast<std::size_t>(cost.n_vertices()) != support.grid_count())
    throw ShapeError("cost volume has " + std::to_string(cost.n_vertices()) + " vertices but " +
                     std::to_string(support.grid_count()) + " local grids");
  if (!cost.logits.allFinite()) throw ValidationError("cost volume contains non-finite logits");
}

}  // namespace

std::vector<Vec3> softargmax_vertices(const CostVolume& cost, const HeatmapSupport& support) {
  check_support(cost, support);
  return expected_positions(softmax_rows(cost.logits), support);
}

std::vector<Vec3> softargmax_vertices(const CostVolume& cost, const GridSpec& grid) {
  return softargmax_vertices(cost, HeatmapSupport(grid));
}

LogitMatrix softargmax_backward(const LogitMatrix& probabilities, const HeatmapSupport& support,
                                const std::vector<Vec3>& positions, const std::vector<Vec3>& grad_positions) {
  const Eigen::Index n = probabilities.rows();
  LogitMatrix grad(n, probabilities.cols());
  // Work relative to each grid's origin; the origin cancels in c_k - position.
  const Eigen::VectorXd proj_x = support.offsets().col(0);
  const Eigen::VectorXd proj_y = support.offsets().col(1);
  const Eigen::VectorXd proj_z = support.offsets().col(2);
  for (Eigen::Index v = 0; v < n; ++v) {
    const auto idx = static_cast<std::size_t>(v);
    const Vec3& g = grad_positions[idx];
    const double base = (positions[idx] - support.origin(static_cast<int>(v))).dot(g);
    grad.row(v) = probabilities.row(v).array() *
                  ((g.x() * proj_x + g.y() * proj_y + g.z() * proj_z).array().transpose() - base);
  }
  return grad;
}

std::string predictor_kind_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::direct_vertex:
      return "direct_vertex";
    case PredictorKind::linear_heatmap:
      return "linear_heatmap";
  }
  return "unknown";
}

PredictorKind parse_predictor_kind(const std::string& name) {
  if (name == "direct_vertex") return PredictorKind::direct_vertex;
  if (name == "linear_heatmap") return PredictorKind::linear_heatmap;
  throw ConfigError("unknown predictor kind '" + name + "'");
}

std::size_t PredictorShape::parameter_count() const {
  const auto n = static_cast<std::size_t>(n_vertices);
  if (kind == PredictorKind::direct_vertex) {
    const auto d = static_cast<std::size_t>(resolution);
    return n * d * d * d;
  }
  return n * (2 * static_cast<std::size_t>(channels) + 1);
}

Predictor make_predictor(const PredictorShape& shape, std::uint64_t seed, double init_scale) {
  if (shape.n_vertices < 1 || shape.resolution < 2) throw ConfigError("predictor needs vertices and a grid of d >= 2");
  if (shape.kind == PredictorKind::linear_heatmap && shape.channels < 1)
    throw ConfigError("linear_heatmap predictor needs at least one feature channel");
  Predictor p{shape, seed, Eigen::VectorXd(static_cast<Eigen::Index>(shape.parameter_count()))};
  Pcg32 rng(seed);
  for (Eigen::Index i = 0; i < p.parameters.size(); ++i) p.parameters[i] = rng.uniform(-init_scale, init_scale);
  return p;
}

std::pair<Predictor, Predictor> make_dual_pair(const PredictorShape& shape, std::uint64_t seed_a,
                                               std::uint64_t seed_b, double init_scale) {
  if (seed_a == seed_b) throw ConfigError("dual predictors need distinct seeds, both are " + std::to_string(seed_a));
  return {make_predictor(shape, seed_a, init_scale), make_predictor(shape, seed_b, init_scale)};
}

namespace {

void check_predictor(const Predictor& predictor, std::span<const FeatureVolume> volumes) {
  const PredictorShape& s = predictor.shape;
  if (static_cast<std::size_t>(predictor.parameters.size()) != s.parameter_count())
    throw ConfigError("predictor has " + std::to_string(predictor.parameters.size()) + " parameters, shape needs " +
                      std::to_string(s.parameter_count()));
  if (s.kind != PredictorKind::linear_heatmap) return;
  if (volumes.size() != 1 && volumes.size() != static_cast<std::size_t>(s.n_vertices))
    throw ConfigError("linear_heatmap predictor needs one shared feature volume or one per vertex");
  for (const auto& vol : volumes) {
    if (vol.channels != s.channels)
      throw ConfigError("feature volume has " + std::to_string(vol.channels) + " channels, predictor expects " +
                        std::to_string(s.channels));
    if (vol.spec.resolution != s.resolution)
      throw ConfigError("feature volume resolution " + std::to_string(vol.spec.resolution) +
                        " does not match predictor resolution " + std::to_string(s.resolution));
  }
}

}  // namespace

CostVolume predictor_logits(const Predictor& predictor, std::span<const FeatureVolume> volumes) {
  check_predictor(predictor, volumes);
  const PredictorShape& s = predictor.shape;
  const auto d = static_cast<Eigen::Index>(s.resolution);
  const Eigen::Index voxels = d * d * d;
  CostVolume cost{LogitMatrix(s.n_vertices, voxels)};
  if (s.kind == PredictorKind::direct_vertex) {
    cost.logits = Eigen::Map<const LogitMatrix>(predictor.parameters.data(), s.n_vertices, voxels);
    return cost;
  }
  const int c = s.channels;
  const Eigen::Index stride = 2 * c + 1;
  parallel_for(static_cast<std::size_t>(s.n_vertices), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const FeatureVolume& vol = volumes.size() == 1 ? volumes[0] : volumes[v];
      const double* w = predictor.parameters.data() + static_cast<Eigen::Index>(v) * stride;
      const double bias = w[2 * c];
      for (Eigen::Index x = 0; x < voxels; ++x) {
        const auto xi = static_cast<std::size_t>(x);
        double acc = bias;
        if (vol.valid[xi]) {
          const double* mu = vol.mean_at(xi);
          const double* var = vol.variance_at(xi);
          for (int ch = 0; ch < c; ++ch) acc += w[ch] * mu[ch] + w[c + ch] * var[ch];
        } else {
          acc += kInvalidVoxelBias;
        }
        cost.logits(static_cast<Eigen::Index>(v), x) = acc;
      }
    }
  });
  return cost;
}

Eigen::VectorXd logits_backward(const Predictor& predictor, std::span<const FeatureVolume> volumes,
                                const LogitMatrix& grad_logits) {
  check_predictor(predictor, volumes);
  const PredictorShape& s = predictor.shape;
  if (s.kind == PredictorKind::direct_vertex) {
    return Eigen::Map<const Eigen::VectorXd>(grad_logits.data(), grad_logits.size());
  }
  const int c = s.channels;
  const Eigen::Index stride = 2 * c + 1;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(predictor.parameters.size());
  for (Eigen::Index v = 0; v < grad_logits.rows(); ++v) {
    const FeatureVolume& vol = volumes.size() == 1 ? volumes[0] : volumes[static_cast<std::size_t>(v)];
    double* g = grad.data() + v * stride;
    for (Eigen::Index x = 0; x < grad_logits.cols(); ++x) {
      const double gl = grad_logits(v, x);
      g[2 * c] += gl;
      const auto xi = static_cast<std::size_t>(x);
      if (!vol.valid[xi]) continue;
      const double* mu = vol.mean_at(xi);
      const double* var = vol.variance_at(xi);
      for (int ch = 0; ch < c; ++ch) {
        g[ch] += gl * mu[ch];
        g[c + ch] += gl * var[ch];
      }
    }
  }
  return grad;
}

TemplateMesh coarse_predict(const FeatureVolume& volume, const Predictor& predictor, const TemplateMesh& templ) {
  if (predictor.shape.n_vertices != static_cast<int>(templ.vertices.size()))
    throw ConfigError("predictor has " + std::to_string(predictor.shape.n_vertices) + " vertices, template has " +
                      std::to_string(templ.vertices.size()));
  if (predictor.shape.resolution != volume.spec.resolution)
    throw ConfigError("predictor resolution does not match the global grid");
  const CostVolume cost = predictor_logits(predictor, std::span<const FeatureVolume>(&volume, 1));
  return with_vertices(templ, softargmax_vertices(cost, volume.spec));
}

std::vector<GridSpec> local_grids(const TemplateMesh& coarse, const LocalGridParams& params) {
  std::vector<GridSpec> grids;
  grids.reserve(coarse.vertices.size());
  for (const auto& v : coarse.vertices) grids.push_back(local_grid(v, params));
  return grids;
}

std::vector<FeatureVolume> local_volumes(const TemplateMesh& coarse, const LocalContext& ctx) {
  if (ctx.rig == nullptr) throw ConfigError("local stage needs a camera rig");
  const std::vector<Vec3> normals = vertex_normals(coarse);
  std::vector<FeatureVolume> out(coarse.vertices.size());
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      out[v] = build_local_volume(coarse.vertices[v], normals[v], ctx.fmaps, *ctx.rig, ctx.hull_depths,
                                  ctx.global_grid, ctx.params);
    }
  });
  return out;
}

TemplateMesh local_refine(const TemplateMesh& coarse, const Predictor& predictor, const LocalContext& ctx) {
  if (predictor.shape.n_vertices != static_cast<int>(coarse.vertices.size()))
    throw ConfigError("predictor vertex count does not match the coarse mesh");
  if (predictor.shape.resolution != ctx.params.resolution)
    throw ConfigError("predictor resolution does not match the local grid");
  std::vector<FeatureVolume> volumes;
  if (predictor.shape.kind == PredictorKind::linear_heatmap) volumes = local_volumes(coarse, ctx);
  const CostVolume cost = predictor_logits(predictor, volumes);
  const HeatmapSupport support(local_grids(coarse, ctx.params));
  return with_vertices(coarse, softargmax_vertices(cost, support));
}

}  // namespace hullcap
