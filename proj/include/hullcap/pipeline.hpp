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

#include <filesystem>
#include <functional>
#include <string>

#include "hullcap/config.hpp"
#include "hullcap/features.hpp"
#include "hullcap/metrics.hpp"
#include "hullcap/synth.hpp"
#include "hullcap/training.hpp"

namespace hullcap {

// One pipeline stage per call. Stages talk only through files below
// `paths.root`, so any stage can be rerun on its own.
//
// Layout under the root:
//   scene/        gt.obj reg.obj template.obj scan.ply rig.json
//                 mask_NN.pgm depth_NN.pfm image_NN.ppm
//                 corrupted_ids.txt outlier_ids.txt
//   hull.obj hull_grid.json global_grid.json
//   hull_depth_NN.pfm visibility.bin volume.bin
//   fit_a.ckpt fit_b.ckpt coarse.obj fit_log.jsonl fit_report.txt
//   refine_a.ckpt refine_b.ckpt refined.obj refine_log.jsonl refine_report.txt
//   report.txt

class Pipeline {
 public:
  explicit Pipeline(Config config);

  const Config& config() const { return config_; }
  std::filesystem::path root() const;
  std::filesystem::path scene_dir() const;
  // `key` overrides the default location `root / name`.
  std::filesystem::path artifact(const std::string& key, const std::string& name) const;

  void synth() const;
  void carve() const;
  void visibility() const;
  void aggregate() const;
  ErrorReport fit() const;
  ErrorReport refine() const;
  ErrorReport eval() const;

  // Receives one line of progress text per notable event.
  std::function<void(const std::string&)> log;

 private:
  void say(const std::string& line) const;
  Schedule schedule(const std::string& section) const;
  LossWeights weights(const std::string& section, double v2v_default) const;
  LocalGridParams local_params() const;

  Config config_;
};

SceneSpec scene_spec_from_config(const Config& config);

}  // namespace hullcap
