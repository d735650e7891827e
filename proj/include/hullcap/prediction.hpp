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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hullcap/camera.hpp"
#include "hullcap/features.hpp"
#include "hullcap/grid.hpp"
#include "hullcap/mesh.hpp"

namespace hullcap {

using LogitMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-vertex logits over the voxels of a heatmap grid (n_vertices x d^3).
struct CostVolume {
  LogitMatrix logits;

  int n_vertices() const { return static_cast<int>(logits.rows()); }
};

// Where each vertex's heatmap lives: one grid shared by every vertex (coarse
// stage) or one equally-shaped grid per vertex (local stage).
class HeatmapSupport {
 public:
  explicit HeatmapSupport(const GridSpec& shared);
  explicit HeatmapSupport(std::vector<GridSpec> per_vertex);

  int resolution() const { return resolution_; }
  std::size_t voxel_count() const { return offsets_.rows(); }
  bool shared() const { return origins_.size() == 1; }
  std::size_t grid_count() const { return origins_.size(); }
  const GridSpec& grid(int vertex) const { return grids_[shared() ? 0 : vertex]; }
  const Vec3& origin(int vertex) const { return origins_[shared() ? 0 : vertex]; }
  // Voxel centers relative to the grid origin, voxel_count x 3.
  const Eigen::Matrix<double, Eigen::Dynamic, 3>& offsets() const { return offsets_; }

 private:
  std::vector<GridSpec> grids_;
  std::vector<Vec3> origins_;
  Eigen::Matrix<double, Eigen::Dynamic, 3> offsets_;
  int resolution_ = 0;
};

// Row-wise softmax with the maximum subtracted first.
LogitMatrix softmax_rows(const LogitMatrix& logits);

// Expected voxel center under each vertex's softmax distribution.
std::vector<Vec3> softargmax_vertices(const CostVolume& cost, const GridSpec& grid);
std::vector<Vec3> softargmax_vertices(const CostVolume& cost, const HeatmapSupport& support);

// Chain rule through the soft-argmax: d position_v / d logit_{v,k} =
// p_{v,k} (c_k - position_v). Returns dL/dlogits given dL/dpositions.
LogitMatrix softargmax_backward(const LogitMatrix& probabilities, const HeatmapSupport& support,
                                const std::vector<Vec3>& positions, const std::vector<Vec3>& grad_positions);

enum class PredictorKind : std::uint8_t {
  // Parameters are the logits themselves; the prediction ignores features.
  direct_vertex = 0,
  // logit[v, x] = <w_v, [mean(x); variance(x)]> + b_v, and b_v - 30 on
  // voxels without a visible view.
  linear_heatmap = 1,
};

std::string predictor_kind_name(PredictorKind kind);
PredictorKind parse_predictor_kind(const std::string& name);

constexpr double kInvalidVoxelBias = -30.0;

struct PredictorShape {
  PredictorKind kind = PredictorKind::direct_vertex;
  int n_vertices = 0;
  int resolution = 0;  // heatmap grid voxels per axis
  int channels = 0;    // feature channels; used by linear_heatmap only

  std::size_t parameter_count() const;
  bool operator==(const PredictorShape&) const = default;
};

struct Predictor {
  PredictorShape shape;
  std::uint64_t seed = 0;
  Eigen::VectorXd parameters;
};

// Parameters drawn uniformly from [-init_scale, init_scale] with a PCG32
// stream seeded by `seed`.
Predictor make_predictor(const PredictorShape& shape, std::uint64_t seed, double init_scale = 0.01);

// Two predictors of identical shape with independent initializations.
// Throws ConfigError when the seeds coincide.
std::pair<Predictor, Predictor> make_dual_pair(const PredictorShape& shape, std::uint64_t seed_a,
                                               std::uint64_t seed_b, double init_scale = 0.01);

// Logits for every vertex. `volumes` holds the feature volume(s) read by the
// linear kind: one shared volume, or one per vertex for the local stage; it
// may be empty for direct_vertex. Throws ConfigError on dimension mismatch.
CostVolume predictor_logits(const Predictor& predictor, std::span<const FeatureVolume> volumes);

// Accumulates dL/dparameters from dL/dlogits (the map from parameters to
// logits is linear for both kinds).
Eigen::VectorXd logits_backward(const Predictor& predictor, std::span<const FeatureVolume> volumes,
                                const LogitMatrix& grad_logits);

// Coarse mesh: logits over the global grid, soft-argmax, template topology.
TemplateMesh coarse_predict(const FeatureVolume& volume, const Predictor& predictor, const TemplateMesh& templ);

// Inputs shared by every vertex of the local stage.
struct LocalContext {
  std::span<const FeatureMap> fmaps;
  const CameraRig* rig = nullptr;
  std::span<const DepthMap> hull_depths;
  GridSpec global_grid;
  LocalGridParams params;
};

// Local grids centered on each coarse vertex.
std::vector<GridSpec> local_grids(const TemplateMesh& coarse, const LocalGridParams& params);

// One local feature volume per coarse vertex, with area-weighted normals.
std::vector<FeatureVolume> local_volumes(const TemplateMesh& coarse, const LocalContext& ctx);

// Refines every vertex by soft-argmax inside its local grid. Displacements
// are bounded by the local grid's half diagonal.
TemplateMesh local_refine(const TemplateMesh& coarse, const Predictor& predictor, const LocalContext& ctx);

}  // namespace hullcap
