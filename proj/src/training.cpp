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

#include "hullcap/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hullcap {

Adam::Adam(std::size_t n, double beta1, double beta2, double epsilon)
    : m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double step_size) {
  if (params.size() != grad.size() || params.size() != m_.size())
    throw ShapeError("optimizer state, parameters and gradient disagree in size");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  params.array() -= step_size * (m_.array() / c1) / ((v_.array() / c2).sqrt() + epsilon_);
}

TrainingBatch make_batch(const TemplateMesh& reg_mesh, const Scan* scan, HeatmapSupport support,
                         std::vector<FeatureVolume> volumes, const LaplacianTerm* laplacian) {
  TrainingBatch batch{&reg_mesh, reg_mesh.vertices, scan, {}, std::move(support), std::move(volumes), laplacian};
  if (scan != nullptr) {
    scan->validate();
    batch.reg_distances = p2s_distances(scan->points, reg_mesh);
  }
  return batch;
}

namespace {

struct Forward {
  LogitMatrix probabilities;
  std::vector<Vec3> positions;
  TriMesh mesh;
  std::vector<ClosestPoint> closest;
  std::vector<double> distances;
};

bool uses_v2v(Stage stage, const LossWeights& w) { return stage == Stage::coarse && w.v2v > 0.0; }
bool uses_p2s(Stage stage, const LossWeights& w, const TrainingBatch& b) {
  return b.scan != nullptr && (stage == Stage::local || w.p2s > 0.0);
}

Forward forward(const Predictor& predictor, const TrainingBatch& batch, bool need_closest) {
  if (batch.topology == nullptr) throw ConfigError("training batch has no topology");
  if (predictor.shape.n_vertices != static_cast<int>(batch.reg.size()))
    throw ConfigError("predictor has " + std::to_string(predictor.shape.n_vertices) + " vertices, labels have " +
                      std::to_string(batch.reg.size()));
  if (predictor.shape.resolution != batch.support.resolution())
    throw ConfigError("predictor resolution does not match the heatmap grid");
  Forward f;
  const CostVolume cost = predictor_logits(predictor, batch.volumes);
  f.probabilities = softmax_rows(cost.logits);
  f.positions.resize(static_cast<std::size_t>(f.probabilities.rows()));
  for (Eigen::Index v = 0; v < f.probabilities.rows(); ++v) {
    f.positions[static_cast<std::size_t>(v)] =
        batch.support.origin(static_cast<int>(v)) + (f.probabilities.row(v) * batch.support.offsets()).transpose();
  }
  if (need_closest) {
    f.mesh = with_vertices(*batch.topology, f.positions);
    f.closest = closest_points(batch.scan->points, f.mesh);
    f.distances.resize(f.closest.size());
    for (std::size_t i = 0; i < f.closest.size(); ++i) f.distances[i] = f.closest[i].distance();
  }
  return f;
}

LossEvaluation evaluate(const Predictor& predictor, const Forward& f, const TrainingBatch& batch, Stage stage,
                        const LossWeights& weights, const Masks& masks, bool with_gradient) {
  LossEvaluation out;
  std::vector<Vec3> grad_pos(f.positions.size(), Vec3::Zero());
  std::vector<Vec3> term(f.positions.size(), Vec3::Zero());
  auto accumulate = [&](double lambda) {
    for (std::size_t i = 0; i < term.size(); ++i) {
      grad_pos[i] += lambda * term[i];
      term[i].setZero();
    }
  };
  std::vector<Vec3>* tg = with_gradient ? &term : nullptr;

  if (uses_v2v(stage, weights)) {
    out.v2v_starved = std::none_of(masks.delta.begin(), masks.delta.end(), [](std::uint8_t m) { return m != 0; });
    out.v2v = masked_v2v(f.positions, batch.reg, masks.delta, tg);
    out.total += weights.v2v * out.v2v;
    accumulate(weights.v2v);
  }
  if (uses_p2s(stage, weights, batch)) {
    const double lambda = stage == Stage::local ? 1.0 : weights.p2s;
    out.p2s_starved = std::none_of(masks.omega.begin(), masks.omega.end(), [](std::uint8_t m) { return m != 0; });
    out.p2s = masked_p2s(*batch.scan, f.mesh, f.closest, masks.omega, tg);
    out.total += lambda * out.p2s;
    accumulate(lambda);
  }
  if (batch.laplacian != nullptr && weights.laplacian > 0.0) {
    out.laplacian = batch.laplacian->evaluate(f.positions, tg);
    out.total += weights.laplacian * out.laplacian;
    accumulate(weights.laplacian);
  }
  if (with_gradient) {
    const LogitMatrix grad_logits = softargmax_backward(f.probabilities, batch.support, f.positions, grad_pos);
    out.gradient = logits_backward(predictor, batch.volumes, grad_logits);
  }
  return out;
}

std::size_t count_ones(const std::vector<std::uint8_t>& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

}  // namespace

std::vector<Vec3> predict_positions(const Predictor& predictor, const TrainingBatch& batch) {
  return forward(predictor, batch, false).positions;
}

LossEvaluation fitting_loss(const Predictor& predictor, const TrainingBatch& batch, Stage stage,
                            const LossWeights& weights, const Masks& masks, bool with_gradient) {
  const bool p2s = uses_p2s(stage, weights, batch);
  if (uses_v2v(stage, weights) && masks.delta.size() != batch.reg.size())
    throw ShapeError("delta mask length does not match the vertex count");
  if (p2s && masks.omega.size() != batch.scan->size())
    throw ShapeError("omega mask length does not match the scan size");
  const Forward f = forward(predictor, batch, p2s);
  return evaluate(predictor, f, batch, stage, weights, masks, with_gradient);
}

DualEstimator::DualEstimator(Predictor pa, Predictor pb)
    : a(std::move(pa)),
      b(std::move(pb)),
      adam_a(static_cast<std::size_t>(a.parameters.size())),
      adam_b(static_cast<std::size_t>(b.parameters.size())) {
  if (!(a.shape == b.shape)) throw ConfigError("dual estimators must share kind and shape");
}

StepReport dual_update_step(DualEstimator& dual, const TrainingBatch& batch, Stage stage, const LossWeights& weights,
                            double step_size, bool masks_enabled) {
  const bool v2v = uses_v2v(stage, weights);
  const bool p2s = uses_p2s(stage, weights, batch);
  const Forward fa = forward(dual.a, batch, p2s);
  const Forward fb = forward(dual.b, batch, p2s);

  StepReport report;
  report.step = dual.steps_taken;
  report.masks_applied = masks_enabled;
  // Each estimator is filtered by the other's prediction.
  report.masks_a.delta = v2v_mask(fa.positions, fb.positions, batch.reg);
  report.masks_b.delta = v2v_mask(fb.positions, fa.positions, batch.reg);
  if (p2s) {
    report.masks_a.omega = p2s_mask(fa.distances, fb.distances, batch.reg_distances);
    report.masks_b.omega = p2s_mask(fb.distances, fa.distances, batch.reg_distances);
  }
  report.sum_delta_a = count_ones(report.masks_a.delta);
  report.sum_delta_b = count_ones(report.masks_b.delta);
  report.sum_omega_a = count_ones(report.masks_a.omega);
  report.sum_omega_b = count_ones(report.masks_b.omega);

  Masks all_ones;
  all_ones.delta.assign(batch.reg.size(), 1);
  if (p2s) all_ones.omega.assign(batch.scan->size(), 1);
  if (!masks_enabled) report.flags.emplace_back("warmup");

  auto update = [&](Predictor& pred, Adam& adam, const Forward& f, const Masks& rule_masks, double& loss,
                    bool& skipped, const char* name) {
    const Masks& masks = masks_enabled ? rule_masks : all_ones;
    LossEvaluation ev = evaluate(pred, f, batch, stage, weights, masks, true);
    loss = ev.total;
    if (ev.v2v_starved) report.flags.push_back(std::string("starved_v2v_") + name);
    if (ev.p2s_starved) report.flags.push_back(std::string("starved_p2s_") + name);
    const bool any_robust = v2v || p2s;
    const bool all_starved = any_robust && (!v2v || ev.v2v_starved) && (!p2s || ev.p2s_starved);
    if (all_starved) {
      skipped = true;
      report.flags.push_back(std::string("skipped_") + name);
      return;
    }
    adam.step(pred.parameters, ev.gradient, step_size);
  };
  update(dual.a, dual.adam_a, fa, report.masks_a, report.loss_a, report.skipped_a, "a");
  update(dual.b, dual.adam_b, fb, report.masks_b, report.loss_b, report.skipped_b, "b");
  ++dual.steps_taken;
  return report;
}

double Schedule::step_size_at(int step) const {
  if (step < warmup_steps || final_fraction == 1.0) return step_size;
  const double t = static_cast<double>(step - warmup_steps) / std::max(1, steps - warmup_steps);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * t));
  return step_size * (final_fraction + (1.0 - final_fraction) * cosine);
}

StepReport train_dual(DualEstimator& dual, const TrainingBatch& batch, Stage stage, const LossWeights& weights,
                      const Schedule& schedule, const std::function<void(const StepReport&)>& on_step) {
  StepReport last;
  for (int s = 0; s < schedule.steps; ++s) {
    last = dual_update_step(dual, batch, stage, weights, schedule.step_size_at(s), s >= schedule.warmup_steps);
    if (on_step) on_step(last);
  }
  return last;
}

}  // namespace hullcap
