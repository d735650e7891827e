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
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hullcap/prediction.hpp"
#include "hullcap/supervision.hpp"

namespace hullcap {

// Adam with bias correction; the step size is passed per call.
class Adam {
 public:
  explicit Adam(std::size_t n = 0, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double step_size);
  int iterations() const { return t_; }

 private:
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  double beta1_;
  double beta2_;
  double epsilon_;
  int t_ = 0;
};

enum class Stage : std::uint8_t { coarse = 0, local = 1 };

struct LossWeights {
  double v2v = 1.0;
  double p2s = 1.0;
  double laplacian = 0.0;  // optional smoothness prior, off by default
};

// One training scene as seen by the predictors.
struct TrainingBatch {
  const TemplateMesh* topology = nullptr;  // triangles shared by every prediction
  std::vector<Vec3> reg;                   // registered (label) vertices
  const Scan* scan = nullptr;              // optional
  std::vector<double> reg_distances;       // scan to label-mesh distances
  HeatmapSupport support;
  std::vector<FeatureVolume> volumes;  // read by the linear kind
  const LaplacianTerm* laplacian = nullptr;
};

// Fills reg_distances from the label mesh when a scan is given.
TrainingBatch make_batch(const TemplateMesh& reg_mesh, const Scan* scan, HeatmapSupport support,
                         std::vector<FeatureVolume> volumes = {}, const LaplacianTerm* laplacian = nullptr);

struct Masks {
  std::vector<std::uint8_t> delta;  // per vertex
  std::vector<std::uint8_t> omega;  // per scan point
};

struct LossEvaluation {
  double total = 0.0;
  double v2v = 0.0;
  double p2s = 0.0;
  double laplacian = 0.0;
  bool v2v_starved = false;
  bool p2s_starved = false;
  Eigen::VectorXd gradient;  // w.r.t. predictor parameters, when requested
};

std::vector<Vec3> predict_positions(const Predictor& predictor, const TrainingBatch& batch);

// Loss of one estimator under fixed masks: lambda_v2v E_v2v + lambda_p2s
// E_p2s (coarse) or E_p2s alone (local), plus the optional Laplacian term.
LossEvaluation fitting_loss(const Predictor& predictor, const TrainingBatch& batch, Stage stage,
                            const LossWeights& weights, const Masks& masks, bool with_gradient);

struct DualEstimator {
  Predictor a;
  Predictor b;
  Adam adam_a;
  Adam adam_b;
  int steps_taken = 0;

  DualEstimator(Predictor pa, Predictor pb);
};

struct StepReport {
  int step = 0;
  double loss_a = 0.0;
  double loss_b = 0.0;
  std::size_t sum_delta_a = 0;
  std::size_t sum_delta_b = 0;
  std::size_t sum_omega_a = 0;
  std::size_t sum_omega_b = 0;
  bool masks_applied = true;
  bool skipped_a = false;
  bool skipped_b = false;
  std::vector<std::string> flags;
  Masks masks_a;  // disagreement masks from the rule, even when not applied
  Masks masks_b;
};

// Predicts with both estimators, derives each one's masks from the other's
// prediction, and takes one Adam step per estimator on its own masked loss.
// With masks disabled every term keeps all of its elements. An estimator
// whose active robust terms are all starved is not updated.
StepReport dual_update_step(DualEstimator& dual, const TrainingBatch& batch, Stage stage, const LossWeights& weights,
                            double step_size, bool masks_enabled = true);

struct Schedule {
  int steps = 0;
  double step_size = 0.05;
  int warmup_steps = 0;  // leading steps trained with masks disabled
  // After warm-up the step size follows a cosine from step_size down to
  // final_fraction * step_size; 1 keeps it constant.
  double final_fraction = 1.0;

  double step_size_at(int step) const;
};

// Runs the schedule and returns the final report; `on_step` sees every one.
StepReport train_dual(DualEstimator& dual, const TrainingBatch& batch, Stage stage, const LossWeights& weights,
                      const Schedule& schedule, const std::function<void(const StepReport&)>& on_step = {});

}  // namespace hullcap
