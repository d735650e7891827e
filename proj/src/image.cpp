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

#include "hullcap/image.hpp"

#include <algorithm>
#include <vector>

namespace hullcap {

std::size_t BinaryMask::foreground_count() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t v) { return v >= 128; }));
}

BinaryMask largest_connected_component(const BinaryMask& mask) {
  const std::size_t n = mask.pixels.size();
  std::vector<int> label(n, -1);
  std::vector<std::size_t> stack;
  int best = -1;
  std::size_t best_size = 0;
  int next = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (mask.pixels[seed] < 128 || label[seed] >= 0) continue;
    std::size_t size = 0;
    stack.push_back(seed);
    label[seed] = next;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++size;
      const int x = static_cast<int>(p % mask.width);
      const int y = static_cast<int>(p / mask.width);
      const int dx[4] = {1, -1, 0, 0};
      const int dy[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        const int nx = x + dx[d];
        const int ny = y + dy[d];
        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
        const std::size_t q = static_cast<std::size_t>(ny) * mask.width + nx;
        if (mask.pixels[q] >= 128 && label[q] < 0) {
          label[q] = next;
          stack.push_back(q);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best = next;
    }
    ++next;
  }
  BinaryMask out(mask.width, mask.height, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (best >= 0 && label[p] == best) out.pixels[p] = 255;
  }
  return out;
}

}  // namespace hullcap
