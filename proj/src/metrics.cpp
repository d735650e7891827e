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

#include "hullcap/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hullcap/distance.hpp"

namespace hullcap {

const RegionStats* ErrorReport::find(const std::string& name) const {
  for (const auto& r : regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

RegionStats summarize(std::string name, std::vector<double> values) {
  RegionStats s;
  s.name = std::move(name);
  s.n_points = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median_mm = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.avg_mm = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double v : values) sq += (v - s.avg_mm) * (v - s.avg_mm);
  s.std_mm = std::sqrt(sq / static_cast<double>(n));
  return s;
}

ErrorReport metrics_from_distances(std::span<const double> distances_m, std::span<const Region> regions) {
  if (!regions.empty() && regions.size() != distances_m.size())
    throw ShapeError("region labels do not match the number of distances");
  ErrorReport report;
  std::vector<double> mm(distances_m.size());
  for (std::size_t i = 0; i < mm.size(); ++i) mm[i] = 1000.0 * distances_m[i];
  report.regions.push_back(summarize("complete", mm));
  if (regions.empty()) return report;
  for (Region r : {Region::face, Region::scalp, Region::neck}) {
    std::vector<double> subset;
    for (std::size_t i = 0; i < mm.size(); ++i) {
      if (regions[i] == r) subset.push_back(mm[i]);
    }
    const std::string name(region_name(r));
    if (subset.empty()) {
      report.notes.push_back("region " + name + " omitted: no scan points");
      continue;
    }
    report.regions.push_back(summarize(name, std::move(subset)));
  }
  return report;
}

ErrorReport compute_metrics(const Scan& scan, const TriMesh& mesh) {
  scan.validate();
  const std::vector<double> d = p2s_distances(scan.points, mesh);
  return metrics_from_distances(d, scan.regions);
}

}  // namespace hullcap
