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

#include "hullcap/pipeline.hpp"

#include <cstdio>
#include <limits>
#include <memory>

#include "hullcap/carving.hpp"
#include "hullcap/io.hpp"
#include "hullcap/prediction.hpp"
#include "hullcap/visibility.hpp"

namespace hullcap {

namespace fs = std::filesystem;

namespace {

std::string view_file(const char* stem, std::size_t view, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02zu.%s", stem, view, ext);
  return buf;
}

VisibilityMode parse_mode(const std::string& name) {
  if (name == "front_margin") return VisibilityMode::front_margin;
  if (name == "band") return VisibilityMode::band;
  throw ConfigError("unknown visibility mode '" + name + "' (expected front_margin or band)");
}

int as_int(const Config& cfg, const std::string& key, std::int64_t fallback) {
  const std::int64_t v = cfg.get_int(key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("config key '" + key + "' is out of range");
  return static_cast<int>(v);
}

std::uint64_t as_seed(const Config& cfg, const std::string& key, std::uint64_t fallback) {
  const std::int64_t v = cfg.get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(v);
}

std::vector<FeatureMap> load_features(const fs::path& scene, std::size_t n_views) {
  std::vector<FeatureMap> out(n_views);
  for (std::size_t v = 0; v < n_views; ++v) out[v] = extract_features(read_ppm(scene / view_file("image", v, "ppm")));
  return out;
}

std::vector<DepthMap> load_hull_depths(const Pipeline& p, std::size_t n_views) {
  std::vector<DepthMap> out(n_views);
  for (std::size_t v = 0; v < n_views; ++v) out[v] = read_pfm(p.root() / view_file("hull_depth", v, "pfm"));
  return out;
}

}  // namespace

SceneSpec scene_spec_from_config(const Config& cfg) {
  SceneSpec s;
  s.shape = parse_shape_kind(cfg.get_string("scene.shape"));
  s.radius = cfg.get_double("scene.radius", s.radius);
  s.semi_axes = cfg.get_vec3("scene.semi_axes", s.semi_axes);
  s.bump_amplitude = cfg.get_double("scene.bump_amplitude", s.bump_amplitude);
  s.center = cfg.get_vec3("scene.center", s.center);
  s.subdivision = as_int(cfg, "scene.subdivision", s.subdivision);
  s.n_views = as_int(cfg, "scene.n_views", s.n_views);
  s.ring_radius = cfg.get_double("scene.ring_radius", s.ring_radius);
  s.ring_arc_degrees = cfg.get_double("scene.ring_arc_degrees", s.ring_arc_degrees);
  s.camera_height = cfg.get_double("scene.camera_height", s.camera_height);
  s.image_size = as_int(cfg, "scene.image_size", s.image_size);
  s.focal_px = cfg.get_double("scene.focal_px", s.focal_px);
  s.seed = as_seed(cfg, "scene.seed", 0);
  s.reg_noise.fraction = cfg.get_double("scene.reg_noise_fraction", 0.0);
  s.reg_noise.magnitude = cfg.get_double("scene.reg_noise_magnitude", 0.0);
  s.scan_noise.region = parse_noise_region(cfg.get_string("scene.scan_noise_region", "back"));
  s.scan_noise.fraction = cfg.get_double("scene.scan_noise_fraction", 0.0);
  s.scan_noise.magnitude = cfg.get_double("scene.scan_noise_magnitude", 0.0);
  s.scan_density = as_int(cfg, "scene.scan_density", s.scan_density);
  s.validate();
  return s;
}

Pipeline::Pipeline(Config config) : config_(std::move(config)) {}

fs::path Pipeline::root() const { return fs::path(config_.get_string("paths.root")); }

fs::path Pipeline::scene_dir() const { return artifact("paths.scene", "scene"); }

fs::path Pipeline::artifact(const std::string& key, const std::string& name) const {
  if (!config_.has(key)) return root() / name;
  const fs::path p(config_.get_string(key));
  return p.is_absolute() ? p : root() / p;
}

void Pipeline::say(const std::string& line) const {
  if (log) log(line);
}

Schedule Pipeline::schedule(const std::string& section) const {
  Schedule s;
  s.steps = static_cast<int>(config_.get_int(section + ".steps"));
  s.step_size = config_.get_double(section + ".step_size", s.step_size);
  s.warmup_steps = as_int(config_, section + ".warmup_steps", 0);
  s.final_fraction = config_.get_double(section + ".final_fraction", 1.0);
  if (s.steps < 0 || s.warmup_steps < 0) throw ConfigError(section + ": step counts must be non-negative");
  if (!(s.step_size > 0.0)) throw ConfigError(section + ".step_size must be positive");
  if (!(s.final_fraction > 0.0 && s.final_fraction <= 1.0))
    throw ConfigError(section + ".final_fraction must be in (0, 1]");
  return s;
}

LossWeights Pipeline::weights(const std::string& section, double v2v_default) const {
  LossWeights w;
  w.v2v = config_.get_double(section + ".w_v2v", v2v_default);
  w.p2s = config_.get_double(section + ".w_p2s", 1.0);
  w.laplacian = config_.get_double(section + ".w_laplacian", 0.0);
  if (w.v2v < 0.0 || w.p2s < 0.0 || w.laplacian < 0.0) throw ConfigError(section + ": loss weights must be >= 0");
  return w;
}

LocalGridParams Pipeline::local_params() const {
  LocalGridParams p;
  p.resolution = as_int(config_, "local.resolution", p.resolution);
  p.voxel_edge = config_.get_double("local.voxel_edge", p.voxel_edge);
  p.rho = config_.get_double("local.rho", config_.get_double("visibility.rho", p.rho));
  p.mode = parse_mode(config_.get_string("visibility.mode", "front_margin"));
  return p;
}

void Pipeline::synth() const {
  const SceneSpec spec = scene_spec_from_config(config_);
  const Scene scene = make_scene(spec);
  const std::vector<ViewRender> views = rasterize_views(scene);
  const fs::path dir = scene_dir();
  fs::create_directories(dir);
  write_obj(scene.gt_mesh, dir / "gt.obj");
  write_obj(scene.reg_mesh, dir / "reg.obj");
  write_obj(scene.template_mesh, dir / "template.obj");
  write_ply(scene.scan, dir / "scan.ply");
  save_rig(scene.rig, dir / "rig.json");
  write_file(dir / "corrupted_ids.txt", format_ids(scene.corrupted_vertex_ids));
  write_file(dir / "outlier_ids.txt", format_ids(scene.outlier_point_ids));
  for (std::size_t v = 0; v < views.size(); ++v) {
    write_pgm(views[v].mask, dir / view_file("mask", v, "pgm"));
    write_pfm(views[v].depth, dir / view_file("depth", v, "pfm"));
    write_ppm(views[v].image, dir / view_file("image", v, "ppm"));
  }
  say("synth: " + std::to_string(scene.gt_mesh.vertices.size()) + " vertices, " +
      std::to_string(scene.scan.size()) + " scan points, " + std::to_string(views.size()) + " views -> " +
      dir.string());
}

void Pipeline::carve() const {
  const fs::path dir = scene_dir();
  const CameraRig rig = load_rig(dir / "rig.json");
  std::vector<BinaryMask> masks(rig.n_views());
  for (std::size_t v = 0; v < masks.size(); ++v) masks[v] = read_pgm(dir / view_file("mask", v, "pgm"));

  const GridSpec hull_grid = GridSpec::centered(rig_focus_point(rig), as_int(config_, "hull.resolution", 160),
                                                config_.get_double("hull.voxel_edge", 0.005));
  const int threshold = as_int(config_, "hull.threshold", static_cast<int>(rig.n_views()));
  const OccupancyGrid occ = carve_occupancy(masks, rig, hull_grid);
  const HullMesh hull = extract_hull(occ, threshold);
  const GridSpec global = hull_bounds(hull, config_.get_double("global.padding", 0.01),
                                      as_int(config_, "global.resolution", 32));
  write_obj(hull, artifact("paths.hull", "hull.obj"));
  write_file(root() / "hull_grid.json", format_grid(hull_grid));
  write_file(root() / "global_grid.json", format_grid(global));
  say("carve: " + std::to_string(inside_voxel_count(occ, threshold)) + " inside voxels, hull with " +
      std::to_string(hull.triangles.size()) + " triangles");
}

void Pipeline::visibility() const {
  const CameraRig rig = load_rig(scene_dir() / "rig.json");
  const HullMesh hull = read_obj(artifact("paths.hull", "hull.obj"));
  const GridSpec global = parse_grid(read_file(root() / "global_grid.json"));
  std::vector<DepthMap> depths(rig.n_views());
  parallel_for(depths.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) depths[v] = render_depth(hull, rig[v]);
  });
  for (std::size_t v = 0; v < depths.size(); ++v) write_pfm(depths[v], root() / view_file("hull_depth", v, "pfm"));
  const VisibilityMask vis = grid_visibility(global, rig, depths, config_.get_double("visibility.rho", 0.1),
                                             parse_mode(config_.get_string("visibility.mode", "front_margin")));
  write_file(root() / "visibility.bin", encode_visibility(vis));
  std::size_t total = 0;
  for (int v = 0; v < vis.n_views; ++v) total += vis.visible_count(v);
  say("visibility: " + std::to_string(total) + " visible (view, voxel) pairs");
}

void Pipeline::aggregate() const {
  const fs::path dir = scene_dir();
  const CameraRig rig = load_rig(dir / "rig.json");
  const GridSpec global = parse_grid(read_file(root() / "global_grid.json"));
  const VisibilityMask vis = decode_visibility(read_file(root() / "visibility.bin"));
  const std::vector<FeatureMap> fmaps = load_features(dir, rig.n_views());
  const FeatureVolume volume = build_global_volume(fmaps, rig, global, vis);
  write_file(root() / "volume.bin", encode_volume(volume));
  say("aggregate: " + std::to_string(volume.valid_count()) + " of " + std::to_string(global.voxel_count()) +
      " voxels valid");
}

ErrorReport Pipeline::fit() const {
  const fs::path dir = scene_dir();
  const TemplateMesh reg = read_obj(dir / "reg.obj");
  const TemplateMesh templ = read_obj(dir / "template.obj");
  const Scan scan = read_ply(dir / "scan.ply");
  const GridSpec global = parse_grid(read_file(root() / "global_grid.json"));
  const PredictorKind kind = parse_predictor_kind(config_.get_string("fit.predictor", "direct_vertex"));
  const Schedule sched = schedule("fit");
  const LossWeights w = weights("fit", 1.0);

  std::vector<FeatureVolume> volumes;
  int channels = 0;
  if (kind == PredictorKind::linear_heatmap) {
    volumes.push_back(decode_volume(read_file(root() / "volume.bin")));
    channels = volumes.front().channels;
  }
  std::unique_ptr<LaplacianTerm> lap;
  if (w.laplacian > 0.0) lap = std::make_unique<LaplacianTerm>(templ);
  const TrainingBatch batch = make_batch(reg, &scan, HeatmapSupport(global), std::move(volumes), lap.get());

  const std::uint64_t seed = as_seed(config_, "scene.seed", 0);
  const PredictorShape shape{kind, static_cast<int>(templ.vertices.size()), global.resolution, channels};
  auto [pa, pb] = make_dual_pair(shape, as_seed(config_, "fit.seed_a", 2 * seed + 1),
                                 as_seed(config_, "fit.seed_b", 2 * seed + 2));
  DualEstimator dual(std::move(pa), std::move(pb));
  std::string log_text;
  train_dual(dual, batch, Stage::coarse, w, sched, [&](const StepReport& r) { log_text += format_step_log_line(r); });

  const TemplateMesh coarse = with_vertices(templ, predict_positions(dual.a, batch));
  write_file(root() / "fit_a.ckpt", encode_checkpoint(dual.a));
  write_file(root() / "fit_b.ckpt", encode_checkpoint(dual.b));
  write_obj(coarse, artifact("paths.coarse", "coarse.obj"));
  write_file(root() / "fit_log.jsonl", log_text);
  const ErrorReport report = compute_metrics(scan, coarse);
  write_file(root() / "fit_report.txt", format_report(report));
  say("fit: " + std::to_string(sched.steps) + " steps, complete median " +
      std::to_string(report.find("complete")->median_mm) + " mm");
  return report;
}

ErrorReport Pipeline::refine() const {
  const fs::path dir = scene_dir();
  const CameraRig rig = load_rig(dir / "rig.json");
  const TemplateMesh reg = read_obj(dir / "reg.obj");
  const TemplateMesh templ = read_obj(dir / "template.obj");
  const Scan scan = read_ply(dir / "scan.ply");
  const TemplateMesh coarse = read_obj(artifact("paths.coarse", "coarse.obj"));
  const GridSpec global = parse_grid(read_file(root() / "global_grid.json"));
  const PredictorKind kind = parse_predictor_kind(config_.get_string("refine.predictor", "direct_vertex"));
  const Schedule sched = schedule("refine");
  const LossWeights w = weights("refine", 0.0);
  const LocalGridParams params = local_params();

  const std::vector<FeatureMap> fmaps = load_features(dir, rig.n_views());
  const std::vector<DepthMap> hull_depths = load_hull_depths(*this, rig.n_views());
  const LocalContext ctx{fmaps, &rig, hull_depths, global, params};

  std::vector<FeatureVolume> volumes;
  int channels = 0;
  if (kind == PredictorKind::linear_heatmap) {
    volumes = local_volumes(coarse, ctx);
    channels = fmaps.empty() ? 0 : fmaps.front().channels;
  }
  std::unique_ptr<LaplacianTerm> lap;
  if (w.laplacian > 0.0) lap = std::make_unique<LaplacianTerm>(templ);
  const TrainingBatch batch =
      make_batch(reg, &scan, HeatmapSupport(local_grids(coarse, params)), std::move(volumes), lap.get());

  const std::uint64_t seed = as_seed(config_, "scene.seed", 0);
  const PredictorShape shape{kind, static_cast<int>(coarse.vertices.size()), params.resolution, channels};
  auto [pa, pb] = make_dual_pair(shape, as_seed(config_, "refine.seed_a", 2 * seed + 101),
                                 as_seed(config_, "refine.seed_b", 2 * seed + 102));
  DualEstimator dual(std::move(pa), std::move(pb));
  std::string log_text;
  train_dual(dual, batch, Stage::local, w, sched, [&](const StepReport& r) { log_text += format_step_log_line(r); });

  const TemplateMesh refined = with_vertices(coarse, predict_positions(dual.a, batch));
  write_file(root() / "refine_a.ckpt", encode_checkpoint(dual.a));
  write_file(root() / "refine_b.ckpt", encode_checkpoint(dual.b));
  write_obj(refined, artifact("paths.refined", "refined.obj"));
  write_file(root() / "refine_log.jsonl", log_text);
  const ErrorReport report = compute_metrics(scan, refined);
  write_file(root() / "refine_report.txt", format_report(report));
  say("refine: " + std::to_string(sched.steps) + " steps, complete median " +
      std::to_string(report.find("complete")->median_mm) + " mm");
  return report;
}

ErrorReport Pipeline::eval() const {
  const TriMesh mesh = read_obj(artifact("eval.mesh", "refined.obj"));
  const Scan scan = read_ply(config_.has("eval.scan") ? artifact("eval.scan", "") : scene_dir() / "scan.ply");
  const ErrorReport report = compute_metrics(scan, mesh);
  write_file(artifact("eval.report", "report.txt"), format_report(report));
  return report;
}

}  // namespace hullcap
