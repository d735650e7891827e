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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hullcap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or document. `offset` is the byte offset of the
// offending token when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t offset = npos)
      : Error(offset == npos ? what : what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t offset_;
};

// A value violates a type invariant (non-orthonormal rotation, bad grid, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Container sizes disagree (one mask per camera, equal vertex counts, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Bad or missing configuration (missing key, unsupported predictor kind, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Degenerate geometric query: point behind the camera, flat depth range.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Marching cubes produced nothing because no voxel reached the threshold.
class EmptyHullError : public Error {
 public:
  using Error::Error;
};

// Number of worker threads: hardware concurrency, capped by HULLCAP_THREADS.
int worker_count();

// Runs fn(begin, end) over disjoint chunks of [0, n). Chunks never overlap,
// so callers writing to distinct output slots stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace hullcap
