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

#include <span>
#include <string>
#include <vector>

#include "hullcap/mesh.hpp"
#include "hullcap/supervision.hpp"

namespace hullcap {

struct RegionStats {
  std::string name;  // complete, face, scalp or neck
  double median_mm = 0.0;
  double avg_mm = 0.0;
  double std_mm = 0.0;
  std::size_t n_points = 0;
};

struct ErrorReport {
  std::vector<RegionStats> regions;  // "complete" first
  std::vector<std::string> notes;    // e.g. regions omitted for having no points

  const RegionStats* find(const std::string& name) const;
};

// Median (mean of the two central values for even counts), mean and
// population standard deviation, all in the input's units.
RegionStats summarize(std::string name, std::vector<double> values);

// Point-to-surface distances from the scan to the mesh, in millimeters, over
// the complete scan and over each labeled region.
ErrorReport compute_metrics(const Scan& scan, const TriMesh& mesh);

// Same statistics from precomputed distances in meters.
ErrorReport metrics_from_distances(std::span<const double> distances_m, std::span<const Region> regions);

}  // namespace hullcap
