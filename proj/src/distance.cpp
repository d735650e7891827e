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

#include "hullcap/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hullcap {

double ClosestPoint::distance() const { return std::sqrt(squared_distance); }

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk from Ericson, Real-Time Collision Detection, 5.1.5.
  auto finish = [&](const Vec3& bary) {
    ClosestPoint cp;
    cp.barycentric = bary;
    cp.point = bary.x() * a + bary.y() * b + bary.z() * c;
    cp.squared_distance = (p - cp.point).squaredNorm();
    return cp;
  };
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return finish(Vec3(1, 0, 0));

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return finish(Vec3(0, 1, 0));

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return finish(Vec3(1 - v, v, 0));
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return finish(Vec3(0, 0, 1));

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return finish(Vec3(1 - w, 0, w));
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return finish(Vec3(0, 1 - w, w));
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return finish(Vec3(1 - v - w, v, w));
}

namespace {

ClosestPoint triangle_query(const Vec3& p, const std::vector<Vec3>& vs, const Triangle& t, int id) {
  ClosestPoint cp = closest_point_on_triangle(p, vs[t[0]], vs[t[1]], vs[t[2]]);
  cp.triangle = id;
  return cp;
}

}  // namespace

ClosestPoint brute_force_closest(const Vec3& p, const TriMesh& mesh) {
  if (mesh.empty()) throw ValidationError("distance query against an empty mesh");
  ClosestPoint best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    ClosestPoint cp = triangle_query(p, mesh.vertices, mesh.triangles[t], static_cast<int>(t));
    if (cp.squared_distance < best.squared_distance) best = cp;
  }
  return best;
}

TriangleBvh::TriangleBvh(const TriMesh& mesh) : vertices_(mesh.vertices), triangles_(mesh.triangles) {
  if (mesh.empty()) throw ValidationError("distance query against an empty mesh");
  const int n = static_cast<int>(triangles_.size());
  boxes_.resize(n);
  std::vector<Vec3> centroids(n);
  order_.resize(n);
  for (int t = 0; t < n; ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) boxes_[t].extend(vertices_[tri[k]]);
    centroids[t] = (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
    order_[t] = t;
  }
  nodes_.reserve(2 * static_cast<std::size_t>(n) / 4 + 2);
  build(0, n, centroids);
}

int TriangleBvh::build(int begin, int end, const std::vector<Vec3>& centroids) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (int i = begin; i < end; ++i) {
    box.extend(boxes_[order_[i]]);
    centroid_box.extend(centroids[order_[i]]);
  }
  nodes_[id].box = box;
  if (end - begin <= 4) {
    nodes_[id].first = begin;
    nodes_[id].count = end - begin;
    return id;
  }
  int axis = 0;
  centroid_box.size().maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int x, int y) {
    const double cx = centroids[x][axis];
    const double cy = centroids[y][axis];
    return cx < cy || (cx == cy && x < y);
  });
  const int left = build(begin, mid, centroids);
  const int right = build(mid, end, centroids);
  nodes_[id].first = left;
  nodes_[id].right = right;
  return id;
}

ClosestPoint TriangleBvh::closest(const Vec3& p) const {
  ClosestPoint best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squared_distance(p) > best.squared_distance) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int t = order_[i];
        ClosestPoint cp = triangle_query(p, vertices_, triangles_[t], t);
        if (cp.squared_distance < best.squared_distance ||
            (cp.squared_distance == best.squared_distance && t < best.triangle)) {
          best = cp;
        }
      }
      continue;
    }
    // Visit the nearer child first.
    const double dl = nodes_[node.first].box.squared_distance(p);
    const double dr = nodes_[node.right].box.squared_distance(p);
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.first;
    } else {
      stack[top++] = node.first;
      stack[top++] = node.right;
    }
  }
  return best;
}

double p2s_distance(const Vec3& point, const TriMesh& mesh) { return TriangleBvh(mesh).distance(point); }

std::vector<ClosestPoint> closest_points(std::span<const Vec3> points, const TriMesh& mesh) {
  const TriangleBvh bvh(mesh);
  std::vector<ClosestPoint> out(points.size());
  parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = bvh.closest(points[i]);
  });
  return out;
}

std::vector<double> p2s_distances(std::span<const Vec3> points, const TriMesh& mesh) {
  const TriangleBvh bvh(mesh);
  std::vector<double> out(points.size());
  parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = bvh.distance(points[i]);
  });
  return out;
}

}  // namespace hullcap
