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

#include "hullcap/io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace hullcap {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class ByteWriter {
 public:
  void raw(std::string_view s) { out_.append(s); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  void expect(std::string_view magic) {
    if (bytes_.substr(pos_, magic.size()) != magic)
      throw ParseError(what_ + ": bad magic, expected '" + std::string(magic) + "'", pos_);
    pos_ += magic.size();
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n) throw ParseError(what_ + ": truncated data", pos_);
  }
  void finish() const {
    if (pos_ != bytes_.size()) throw ParseError(what_ + ": trailing bytes after payload", pos_);
  }
  const std::string& what() const { return what_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

template <typename T>
T parse_number(std::string_view token, std::size_t offset, const std::string& what) {
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(what + ": invalid number '" + std::string(token) + "'", offset);
  return value;
}

// Whitespace-separated tokens of one line with their byte offsets.
std::vector<std::pair<std::string_view, std::size_t>> split_line(std::string_view line, std::size_t base) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start), base + start);
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    fn(text.substr(pos, end - pos), pos);
    pos = end + 1;
  }
}

// Netpbm-style header tokens: whitespace separated, '#' comments.
class HeaderReader {
 public:
  HeaderReader(std::string_view bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  std::pair<std::string_view, std::size_t> token() {
    for (;;) {
      while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
      if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError(what_ + ": truncated header", start);
    return {bytes_.substr(start, pos_ - start), start};
  }
  int positive_int() {
    auto [tok, off] = token();
    const int v = parse_number<int>(tok, off, what_);
    if (v <= 0) throw ParseError(what_ + ": dimension must be positive", off);
    return v;
  }
  // Exactly one whitespace byte separates the header from the payload.
  std::size_t payload_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      throw ParseError(what_ + ": missing separator before pixel data", pos_);
    return pos_ + 1;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::string netpbm_header(std::string_view magic, int w, int h) {
  return std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
}

// Reads magic, width, height and maxval 255; returns (w, h, payload offset).
std::tuple<int, int, std::size_t> netpbm_dims(std::string_view bytes, std::string_view magic, const std::string& what) {
  HeaderReader hr(bytes, what);
  auto [m, moff] = hr.token();
  if (m != magic) throw ParseError(what + ": expected magic '" + std::string(magic) + "'", moff);
  const int w = hr.positive_int();
  const int h = hr.positive_int();
  auto [maxval, voff] = hr.token();
  if (parse_number<int>(maxval, voff, what) != 255) throw ParseError(what + ": only maxval 255 is supported", voff);
  return {w, h, hr.payload_start()};
}

constexpr float kPfmBackground = 3.4e38f;

}  // namespace

std::string format_obj(const TriMesh& mesh) {
  std::string out = "# hullcap mesh\n";
  for (const auto& v : mesh.vertices) {
    out += "v " + fmt_double(v.x()) + " " + fmt_double(v.y()) + " " + fmt_double(v.z()) + "\n";
  }
  for (const auto& t : mesh.triangles) {
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
  }
  return out;
}

TriMesh parse_obj(std::string_view text) {
  const std::string what = "OBJ";
  TriMesh mesh;
  for_each_line(text, [&](std::string_view line, std::size_t base) {
    const auto toks = split_line(line, base);
    if (toks.empty() || toks[0].first[0] == '#') return;
    if (toks[0].first == "v") {
      if (toks.size() < 4) throw ParseError(what + ": vertex needs three coordinates", base);
      mesh.vertices.emplace_back(parse_number<double>(toks[1].first, toks[1].second, what),
                                 parse_number<double>(toks[2].first, toks[2].second, what),
                                 parse_number<double>(toks[3].first, toks[3].second, what));
    } else if (toks[0].first == "f") {
      if (toks.size() != 4) throw ParseError(what + ": only triangular faces are supported", base);
      Triangle t{};
      for (int k = 0; k < 3; ++k) {
        std::string_view ref = toks[k + 1].first;
        ref = ref.substr(0, ref.find('/'));
        const int idx = parse_number<int>(ref, toks[k + 1].second, what);
        if (idx < 1) throw ParseError(what + ": face index must be 1-based and positive", toks[k + 1].second);
        t[k] = idx - 1;
      }
      mesh.triangles.push_back(t);
    }
  });
  for (const auto& t : mesh.triangles) {
    for (int idx : t) {
      if (idx >= static_cast<int>(mesh.vertices.size()))
        throw ParseError(what + ": face index " + std::to_string(idx + 1) + " exceeds vertex count");
    }
  }
  return mesh;
}

void write_obj(const TriMesh& mesh, const std::filesystem::path& path) { write_file(path, format_obj(mesh)); }
TriMesh read_obj(const std::filesystem::path& path) { return parse_obj(read_file(path)); }

std::string format_ply(const Scan& scan) {
  const bool labeled = !scan.regions.empty();
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(scan.points.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\n";
  if (labeled) out += "property uchar region\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const Vec3& p = scan.points[i];
    out += fmt_double(p.x()) + " " + fmt_double(p.y()) + " " + fmt_double(p.z());
    if (labeled) out += " " + std::to_string(static_cast<int>(scan.regions[i]));
    out += "\n";
  }
  return out;
}

Scan parse_ply(std::string_view text) {
  const std::string what = "PLY";
  if (text.substr(0, 4) != "ply\n" && text.substr(0, 5) != "ply\r\n") throw ParseError(what + ": missing 'ply' magic", 0);
  std::size_t pos = 0;
  std::size_t count = 0;
  bool have_count = false;
  std::vector<std::string> props;
  bool header_done = false;
  Scan scan;
  int ix = -1, iy = -1, iz = -1, ir = -1;
  std::size_t row = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    const auto toks = split_line(line, pos);
    if (!header_done) {
      if (toks.empty()) {
      } else if (toks[0].first == "format") {
        if (toks.size() < 2 || toks[1].first != "ascii") throw ParseError(what + ": only ASCII PLY is supported", pos);
      } else if (toks[0].first == "element") {
        if (toks.size() != 3 || toks[1].first != "vertex")
          throw ParseError(what + ": only a vertex element is supported", pos);
        count = parse_number<std::size_t>(toks[2].first, toks[2].second, what);
        have_count = true;
      } else if (toks[0].first == "property") {
        if (toks.size() != 3) throw ParseError(what + ": malformed property", pos);
        props.emplace_back(toks[2].first);
      } else if (toks[0].first == "end_header") {
        if (!have_count) throw ParseError(what + ": header lacks a vertex element", pos);
        for (std::size_t i = 0; i < props.size(); ++i) {
          if (props[i] == "x") ix = static_cast<int>(i);
          if (props[i] == "y") iy = static_cast<int>(i);
          if (props[i] == "z") iz = static_cast<int>(i);
          if (props[i] == "region") ir = static_cast<int>(i);
        }
        if (ix < 0 || iy < 0 || iz < 0) throw ParseError(what + ": header lacks x, y, z properties", pos);
        header_done = true;
        scan.points.reserve(count);
      }
    } else if (!toks.empty() && row < count) {
      if (toks.size() != props.size())
        throw ParseError(what + ": point " + std::to_string(row) + " has " + std::to_string(toks.size()) +
                             " values, expected " + std::to_string(props.size()),
                         pos);
      scan.points.emplace_back(parse_number<double>(toks[ix].first, toks[ix].second, what),
                               parse_number<double>(toks[iy].first, toks[iy].second, what),
                               parse_number<double>(toks[iz].first, toks[iz].second, what));
      if (ir >= 0) {
        const int r = parse_number<int>(toks[ir].first, toks[ir].second, what);
        if (r < 0 || r > 3) throw ParseError(what + ": region label out of range", toks[ir].second);
        scan.regions.push_back(static_cast<Region>(r));
      }
      ++row;
    } else if (!toks.empty()) {
      throw ParseError(what + ": more points than declared", pos);
    }
    pos = end + 1;
  }
  if (!header_done) throw ParseError(what + ": missing end_header", text.size());
  if (row != count)
    throw ParseError(what + ": expected " + std::to_string(count) + " points, found " + std::to_string(row),
                     text.size());
  return scan;
}

void write_ply(const Scan& scan, const std::filesystem::path& path) { write_file(path, format_ply(scan)); }
Scan read_ply(const std::filesystem::path& path) { return parse_ply(read_file(path)); }

std::string encode_pfm(const DepthMap& depth) {
  ByteWriter w;
  w.raw("Pf\n" + std::to_string(depth.width) + " " + std::to_string(depth.height) + "\n-1.0\n");
  for (int y = depth.height - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width; ++x) {
      const float v = depth.at(x, y);
      w.f32(std::isinf(v) ? kPfmBackground : v);
    }
  }
  return w.take();
}

DepthMap decode_pfm(std::string_view bytes) {
  const std::string what = "PFM";
  HeaderReader hr(bytes, what);
  auto [magic, moff] = hr.token();
  if (magic != "Pf") throw ParseError(what + ": expected single-channel 'Pf' magic", moff);
  const int w = hr.positive_int();
  const int h = hr.positive_int();
  auto [scale_tok, soff] = hr.token();
  const double scale = parse_number<double>(scale_tok, soff, what);
  if (!(scale < 0.0)) throw ParseError(what + ": only little-endian (negative scale) maps are supported", soff);
  const std::size_t start = hr.payload_start();
  ByteReader r(bytes.substr(start), what);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (r.remaining() != n * 4)
    throw ParseError(what + ": payload holds " + std::to_string(r.remaining()) + " bytes, expected " +
                         std::to_string(n * 4),
                     start + std::min(r.remaining(), n * 4));
  DepthMap depth(w, h);
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      const float v = r.f32();
      depth.at(x, y) = v >= kPfmBackground ? DepthMap::kBackground : v;
    }
  }
  return depth;
}

void write_pfm(const DepthMap& depth, const std::filesystem::path& path) { write_file(path, encode_pfm(depth)); }
DepthMap read_pfm(const std::filesystem::path& path) { return decode_pfm(read_file(path)); }

std::string encode_pgm(const BinaryMask& mask) {
  std::string out = netpbm_header("P5", mask.width, mask.height);
  out.append(reinterpret_cast<const char*>(mask.pixels.data()), mask.pixels.size());
  return out;
}

BinaryMask decode_pgm(std::string_view bytes) {
  const std::string what = "PGM";
  auto [w, h, start] = netpbm_dims(bytes, "P5", what);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - start != n)
    throw ParseError(what + ": payload holds " + std::to_string(bytes.size() - start) + " bytes, expected " +
                         std::to_string(n),
                     std::min(bytes.size(), start + n));
  BinaryMask mask(w, h);
  std::memcpy(mask.pixels.data(), bytes.data() + start, n);
  return mask;
}

void write_pgm(const BinaryMask& mask, const std::filesystem::path& path) { write_file(path, encode_pgm(mask)); }
BinaryMask read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

std::string encode_ppm(const RgbImage& image) {
  std::string out = netpbm_header("P6", image.width, image.height);
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

RgbImage decode_ppm(std::string_view bytes) {
  const std::string what = "PPM";
  auto [w, h, start] = netpbm_dims(bytes, "P6", what);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (bytes.size() - start != n)
    throw ParseError(what + ": payload holds " + std::to_string(bytes.size() - start) + " bytes, expected " +
                         std::to_string(n),
                     std::min(bytes.size(), start + n));
  RgbImage image(w, h);
  std::memcpy(image.rgb.data(), bytes.data() + start, n);
  return image;
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) { write_file(path, encode_ppm(image)); }
RgbImage read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }

std::string encode_volume(const FeatureVolume& volume) {
  ByteWriter w;
  w.raw("HCFV");
  w.u32(1);
  w.i32(volume.spec.resolution);
  w.i32(volume.channels);
  for (int k = 0; k < 3; ++k) w.f64(volume.spec.origin[k]);
  w.f64(volume.spec.voxel_edge);
  for (double v : volume.mean) w.f32(static_cast<float>(v));
  for (double v : volume.variance) w.f32(static_cast<float>(v));
  for (std::uint8_t v : volume.valid) w.u8(v);
  return w.take();
}

FeatureVolume decode_volume(std::string_view bytes) {
  ByteReader r(bytes, "feature volume");
  r.expect("HCFV");
  if (r.u32() != 1) throw ParseError("feature volume: unsupported version", 4);
  GridSpec spec;
  spec.resolution = r.i32();
  const int channels = r.i32();
  for (int k = 0; k < 3; ++k) spec.origin[k] = r.f64();
  spec.voxel_edge = r.f64();
  if (spec.resolution < 2 || spec.resolution > 4096 || channels < 1 || channels > 4096 || !(spec.voxel_edge > 0.0))
    throw ParseError("feature volume: invalid header", 8);
  const std::size_t n = spec.voxel_count() * static_cast<std::size_t>(channels);
  r.need(n * 8 + spec.voxel_count());
  FeatureVolume vol(spec, channels);
  for (std::size_t i = 0; i < n; ++i) vol.mean[i] = r.f32();
  for (std::size_t i = 0; i < n; ++i) vol.variance[i] = r.f32();
  for (std::size_t i = 0; i < spec.voxel_count(); ++i) vol.valid[i] = r.u8();
  r.finish();
  return vol;
}

std::string encode_checkpoint(const Predictor& predictor) {
  ByteWriter w;
  w.raw("HCPT");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(predictor.shape.kind));
  w.i32(predictor.shape.n_vertices);
  w.i32(predictor.shape.resolution);
  w.i32(predictor.shape.channels);
  w.u64(predictor.seed);
  w.u64(static_cast<std::uint64_t>(predictor.parameters.size()));
  for (Eigen::Index i = 0; i < predictor.parameters.size(); ++i) w.f64(predictor.parameters[i]);
  return w.take();
}

Predictor decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes, "checkpoint");
  r.expect("HCPT");
  if (r.u32() != 1) throw ParseError("checkpoint: unsupported version", 4);
  Predictor p;
  const std::uint32_t kind = r.u32();
  if (kind > 1) throw ParseError("checkpoint: unknown predictor kind " + std::to_string(kind), 8);
  p.shape.kind = static_cast<PredictorKind>(kind);
  p.shape.n_vertices = r.i32();
  p.shape.resolution = r.i32();
  p.shape.channels = r.i32();
  p.seed = r.u64();
  const std::uint64_t n = r.u64();
  if (p.shape.n_vertices < 1 || p.shape.resolution < 2 || p.shape.channels < 0 || n != p.shape.parameter_count())
    throw ParseError("checkpoint: parameter count does not match the header dimensions", r.offset() - 8);
  r.need(n * 8);
  p.parameters.resize(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) p.parameters[static_cast<Eigen::Index>(i)] = r.f64();
  r.finish();
  return p;
}

std::string encode_visibility(const VisibilityMask& mask) {
  ByteWriter w;
  w.raw("HCVS");
  w.u32(1);
  w.i32(mask.n_views);
  w.i32(mask.spec.resolution);
  for (int k = 0; k < 3; ++k) w.f64(mask.spec.origin[k]);
  w.f64(mask.spec.voxel_edge);
  w.raw(std::string_view(reinterpret_cast<const char*>(mask.indicators.data()), mask.indicators.size()));
  return w.take();
}

VisibilityMask decode_visibility(std::string_view bytes) {
  ByteReader r(bytes, "visibility");
  r.expect("HCVS");
  if (r.u32() != 1) throw ParseError("visibility: unsupported version", 4);
  VisibilityMask mask;
  mask.n_views = r.i32();
  mask.spec.resolution = r.i32();
  for (int k = 0; k < 3; ++k) mask.spec.origin[k] = r.f64();
  mask.spec.voxel_edge = r.f64();
  if (mask.n_views < 1 || mask.spec.resolution < 2 || mask.spec.resolution > 4096)
    throw ParseError("visibility: invalid header", 8);
  const std::size_t n = mask.spec.voxel_count() * static_cast<std::size_t>(mask.n_views);
  r.need(n);
  mask.indicators.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t off = r.offset();
    mask.indicators[i] = r.u8();
    if (mask.indicators[i] > 1) throw ParseError("visibility: indicator outside {0, 1}", off);
  }
  r.finish();
  return mask;
}

std::string format_grid(const GridSpec& grid) {
  nlohmann::json j;
  j["origin"] = {grid.origin.x(), grid.origin.y(), grid.origin.z()};
  j["resolution"] = grid.resolution;
  j["voxel_edge"] = grid.voxel_edge;
  return j.dump(2) + "\n";
}

GridSpec parse_grid(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("grid: ") + e.what(), e.byte);
  }
  try {
    GridSpec g;
    const auto& o = j.at("origin");
    if (!o.is_array() || o.size() != 3) throw ParseError("grid: origin needs 3 numbers");
    g.origin = Vec3(o[0].get<double>(), o[1].get<double>(), o[2].get<double>());
    g.resolution = j.at("resolution").get<int>();
    g.voxel_edge = j.at("voxel_edge").get<double>();
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grid: ") + e.what());
  }
}

std::string format_report(const ErrorReport& report) {
  std::string out;
  for (const auto& note : report.notes) out += "# " + note + "\n";
  for (const auto& r : report.regions) {
    out += "[" + r.name + "]\n";
    out += "median_mm = " + fmt_double(r.median_mm) + "\n";
    out += "avg_mm = " + fmt_double(r.avg_mm) + "\n";
    out += "std_mm = " + fmt_double(r.std_mm) + "\n";
    out += "n_points = " + std::to_string(r.n_points) + "\n\n";
  }
  return out;
}

ErrorReport parse_report(std::string_view text) {
  const std::string what = "report";
  ErrorReport report;
  for_each_line(text, [&](std::string_view line, std::size_t base) {
    const auto toks = split_line(line, base);
    if (toks.empty()) return;
    if (toks[0].first[0] == '#') {
      const std::size_t hash = line.find('#');
      std::string_view note = line.substr(hash + 1);
      while (!note.empty() && note.front() == ' ') note.remove_prefix(1);
      report.notes.emplace_back(note);
      return;
    }
    if (toks[0].first.front() == '[') {
      const std::string_view t = toks[0].first;
      if (toks.size() != 1 || t.back() != ']') throw ParseError(what + ": malformed region header", base);
      report.regions.push_back(RegionStats{std::string(t.substr(1, t.size() - 2))});
      return;
    }
    if (report.regions.empty()) throw ParseError(what + ": value outside a region block", base);
    if (toks.size() != 3 || toks[1].first != "=") throw ParseError(what + ": expected 'key = value'", base);
    RegionStats& r = report.regions.back();
    const auto key = toks[0].first;
    const auto [val, off] = toks[2];
    if (key == "median_mm") {
      r.median_mm = parse_number<double>(val, off, what);
    } else if (key == "avg_mm") {
      r.avg_mm = parse_number<double>(val, off, what);
    } else if (key == "std_mm") {
      r.std_mm = parse_number<double>(val, off, what);
    } else if (key == "n_points") {
      r.n_points = parse_number<std::size_t>(val, off, what);
    } else {
      throw ParseError(what + ": unknown key '" + std::string(key) + "'", toks[0].second);
    }
  });
  return report;
}

std::string format_step_log_line(const StepReport& report) {
  nlohmann::json j;
  j["step"] = report.step;
  j["loss_a"] = report.loss_a;
  j["loss_b"] = report.loss_b;
  j["sum_delta"] = report.sum_delta_a;
  j["sum_omega"] = report.sum_omega_a;
  j["sum_delta_b"] = report.sum_delta_b;
  j["sum_omega_b"] = report.sum_omega_b;
  j["flags"] = report.flags;
  return j.dump() + "\n";
}

std::string format_ids(const std::vector<int>& ids) {
  std::string out;
  for (int id : ids) out += std::to_string(id) + "\n";
  return out;
}

std::vector<int> parse_ids(std::string_view text) {
  std::vector<int> ids;
  for_each_line(text, [&](std::string_view line, std::size_t base) {
    for (const auto& [tok, off] : split_line(line, base)) ids.push_back(parse_number<int>(tok, off, "id list"));
  });
  return ids;
}

}  // namespace hullcap
