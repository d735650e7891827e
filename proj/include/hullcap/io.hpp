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
#include <string>
#include <string_view>
#include <vector>

#include "hullcap/features.hpp"
#include "hullcap/grid.hpp"
#include "hullcap/image.hpp"
#include "hullcap/mesh.hpp"
#include "hullcap/metrics.hpp"
#include "hullcap/prediction.hpp"
#include "hullcap/supervision.hpp"
#include "hullcap/training.hpp"
#include "hullcap/visibility.hpp"

namespace hullcap {

// Every reader parses the complete input before returning, so a malformed
// file throws ParseError (with the byte offset) and yields no object.

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Wavefront OBJ with "v x y z" and "f a b c" records (1-based indices).
std::string format_obj(const TriMesh& mesh);
TriMesh parse_obj(std::string_view text);
void write_obj(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh read_obj(const std::filesystem::path& path);

// ASCII PLY point cloud: double x, y, z and an optional uchar region.
std::string format_ply(const Scan& scan);
Scan parse_ply(std::string_view text);
void write_ply(const Scan& scan, const std::filesystem::path& path);
Scan read_ply(const std::filesystem::path& path);

// Portable float map ("Pf", scale -1 for little-endian, rows bottom to top).
// Background is stored as 3.4e38 and read back as +infinity.
std::string encode_pfm(const DepthMap& depth);
DepthMap decode_pfm(std::string_view bytes);
void write_pfm(const DepthMap& depth, const std::filesystem::path& path);
DepthMap read_pfm(const std::filesystem::path& path);

// Binary PGM (P5, maxval 255).
std::string encode_pgm(const BinaryMask& mask);
BinaryMask decode_pgm(std::string_view bytes);
void write_pgm(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask read_pgm(const std::filesystem::path& path);

// Binary PPM (P6, maxval 255).
std::string encode_ppm(const RgbImage& image);
RgbImage decode_ppm(std::string_view bytes);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);

// "HCFV" dump: resolution, channels, origin, edge, then float32 means,
// float32 variances (voxel-major) and one valid byte per voxel.
std::string encode_volume(const FeatureVolume& volume);
FeatureVolume decode_volume(std::string_view bytes);

// "HCPT" checkpoint: kind, dimensions, seed, then float64 parameters.
std::string encode_checkpoint(const Predictor& predictor);
Predictor decode_checkpoint(std::string_view bytes);

// "HCVS" visibility dump: views, grid, then one byte per (view, voxel).
std::string encode_visibility(const VisibilityMask& mask);
VisibilityMask decode_visibility(std::string_view bytes);

// Grid as JSON {"origin": [x, y, z], "resolution": d, "voxel_edge": e}.
std::string format_grid(const GridSpec& grid);
GridSpec parse_grid(std::string_view text);

// One "[region]" block per region with median_mm, avg_mm, std_mm and
// n_points; notes become "# " lines.
std::string format_report(const ErrorReport& report);
ErrorReport parse_report(std::string_view text);

// One JSON object per line: step, loss_a, loss_b, sum_delta, sum_omega,
// sum_delta_b, sum_omega_b and flags.
std::string format_step_log_line(const StepReport& report);

// Whitespace-separated integers.
std::string format_ids(const std::vector<int>& ids);
std::vector<int> parse_ids(std::string_view text);

}  // namespace hullcap
