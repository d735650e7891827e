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

#include "hullcap/camera.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

namespace hullcap {

void GridSpec::validate() const {
  if (resolution < 2) throw ValidationError("grid resolution must be >= 2, got " + std::to_string(resolution));
  if (!(voxel_edge > 0.0) || !std::isfinite(voxel_edge)) throw ValidationError("grid voxel_edge must be > 0");
  if (!origin.allFinite()) throw ValidationError("grid origin must be finite");
}

std::array<Vec3, 8> GridSpec::corners() const {
  const double e = extent();
  std::array<Vec3, 8> out;
  for (int c = 0; c < 8; ++c) {
    out[c] = origin + Vec3((c & 1) ? e : 0.0, (c & 2) ? e : 0.0, (c & 4) ? e : 0.0);
  }
  return out;
}

GridSpec GridSpec::centered(const Vec3& center, int resolution, double voxel_edge) {
  GridSpec g;
  g.resolution = resolution;
  g.voxel_edge = voxel_edge;
  g.origin = center - Vec3::Constant(0.5 * resolution * voxel_edge);
  g.validate();
  return g;
}

void Camera::validate(double tolerance) const {
  const std::string who = "camera '" + id + "': ";
  if (width <= 0 || height <= 0) throw ValidationError(who + "image size must be positive");
  if (!intrinsics.allFinite() || !rotation.allFinite() || !translation.allFinite())
    throw ValidationError(who + "non-finite parameters");
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tolerance) throw ValidationError(who + "rotation is not orthonormal (error " + std::to_string(ortho) + ")");
  if (std::abs(rotation.determinant() - 1.0) > tolerance)
    throw ValidationError(who + "rotation determinant is not +1 (reflection)");
  if (!(intrinsics(0, 0) > 0.0) || !(intrinsics(1, 1) > 0.0))
    throw ValidationError(who + "focal lengths must be positive");
  if (intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0 || intrinsics(2, 2) != 1.0)
    throw ValidationError(who + "intrinsics bottom row must be [0 0 1]");
}

std::optional<Projection> try_project(const Vec3& point, const Camera& camera) noexcept {
  const Vec3 cam = camera.to_camera(point);
  if (!(cam.z() > kMinDepth)) return std::nullopt;
  const Vec3 h = camera.intrinsics * cam;
  return Projection{Vec2(h.x() / h.z(), h.y() / h.z()), cam.z()};
}

Projection project(const Vec3& point, const Camera& camera) {
  if (auto p = try_project(point, camera)) return *p;
  throw GeometryError("point is behind camera '" + camera.id + "'");
}

Vec3 back_project(const Vec2& pixel, double depth, const Camera& camera) {
  const Vec3 ray = camera.intrinsics.inverse() * Vec3(pixel.x(), pixel.y(), 1.0);
  return camera.to_world(ray * (depth / ray.z()));
}

std::optional<std::pair<int, int>> nearest_pixel(const Vec2& pixel, int width, int height) noexcept {
  const double fx = std::floor(pixel.x() + 0.5);
  const double fy = std::floor(pixel.y() + 0.5);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < width && fy < height)) return std::nullopt;
  return std::make_pair(static_cast<int>(fx), static_cast<int>(fy));
}

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width,
               int height, std::string id) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.id = std::move(id);
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -(cam.rotation * eye);
  cam.intrinsics << focal, 0.0, 0.5 * (width - 1), 0.0, focal, 0.5 * (height - 1), 0.0, 0.0, 1.0;
  cam.width = width;
  cam.height = height;
  return cam;
}

void CameraRig::validate(double tolerance) const {
  if (cameras.size() < 2) throw ValidationError("camera rig needs at least 2 cameras");
  std::set<std::string> ids;
  for (const auto& c : cameras) {
    if (!ids.insert(c.id).second) throw ValidationError("duplicate camera id '" + c.id + "'");
    c.validate(tolerance);
  }
}

namespace {

template <int N>
Eigen::Matrix<double, N, 1> read_numbers(const nlohmann::json& j, const char* key, const std::string& who) {
  if (!j.contains(key)) throw ParseError(who + "missing key '" + key + "'");
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != N)
    throw ParseError(who + "'" + key + "' must be an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!arr[i].is_number()) throw ParseError(who + "'" + key + "' must contain numbers only");
    out[i] = arr[i].get<double>();
  }
  return out;
}

int read_int(const nlohmann::json& j, const char* key, const std::string& who) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw ParseError(who + "'" + key + "' must be an integer");
  return j.at(key).get<int>();
}

}  // namespace

CameraRig parse_rig(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("rig file: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("cameras") || !doc["cameras"].is_array())
    throw ParseError("rig file: expected an object with a 'cameras' array");
  CameraRig rig;
  std::size_t index = 0;
  for (const auto& jc : doc["cameras"]) {
    std::string who = "rig file: camera #" + std::to_string(index) + ": ";
    if (!jc.is_object()) throw ParseError(who + "expected an object");
    Camera cam;
    if (!jc.contains("id") || !jc["id"].is_string()) throw ParseError(who + "'id' must be a string");
    cam.id = jc["id"].get<std::string>();
    who = "rig file: camera '" + cam.id + "': ";
    const auto k = read_numbers<9>(jc, "K", who);
    const auto r = read_numbers<9>(jc, "R", who);
    cam.translation = read_numbers<3>(jc, "t", who);
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 3; ++c) {
        cam.intrinsics(i, c) = k[3 * i + c];
        cam.rotation(i, c) = r[3 * i + c];
      }
    }
    cam.width = read_int(jc, "width", who);
    cam.height = read_int(jc, "height", who);
    rig.cameras.push_back(std::move(cam));
    ++index;
  }
  // Loaded rotations may be off by up to 1e-6.
  rig.validate(1e-6);
  return rig;
}

CameraRig load_rig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open rig file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rig(ss.str());
}

std::string format_rig(const CameraRig& rig) {
  nlohmann::json doc;
  doc["cameras"] = nlohmann::json::array();
  for (const auto& cam : rig.cameras) {
    nlohmann::json jc;
    jc["id"] = cam.id;
    std::vector<double> k, r;
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 3; ++c) {
        k.push_back(cam.intrinsics(i, c));
        r.push_back(cam.rotation(i, c));
      }
    }
    jc["K"] = k;
    jc["R"] = r;
    jc["t"] = {cam.translation.x(), cam.translation.y(), cam.translation.z()};
    jc["width"] = cam.width;
    jc["height"] = cam.height;
    doc["cameras"].push_back(jc);
  }
  return doc.dump(2) + "\n";
}

void save_rig(const CameraRig& rig, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write rig file " + path.string());
  out << format_rig(rig);
}

Vec3 rig_focus_point(const CameraRig& rig) {
  // Minimize sum_i |(I - d_i d_i^T)(x - c_i)|^2.
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (const auto& cam : rig.cameras) {
    const Vec3 d = cam.rotation.row(2).transpose();
    const Mat3 p = Mat3::Identity() - d * d.transpose();
    a += p;
    b += p * cam.center();
  }
  return a.ldlt().solve(b);
}

DepthRange DepthRange::of_grid(const Camera& camera, const GridSpec& grid) {
  DepthRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& corner : grid.corners()) {
    const double z = camera.to_camera(corner).z();
    r.near = std::min(r.near, z);
    r.far = std::max(r.far, z);
  }
  if (!(r.far - r.near >= 1e-9)) throw GeometryError("degenerate depth range for camera '" + camera.id + "'");
  return r;
}

double DepthRange::normalize(double depth) const {
  return std::clamp((depth - near) / (far - near), 0.0, 1.0);
}

double normalized_depth(double depth, const Camera& camera, const GridSpec& grid) {
  return DepthRange::of_grid(camera, grid).normalize(depth);
}

}  // namespace hullcap
