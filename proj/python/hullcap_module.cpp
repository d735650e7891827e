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

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hullcap/carving.hpp"
#include "hullcap/distance.hpp"
#include "hullcap/features.hpp"
#include "hullcap/io.hpp"
#include "hullcap/metrics.hpp"
#include "hullcap/pipeline.hpp"
#include "hullcap/supervision.hpp"
#include "hullcap/synth.hpp"
#include "hullcap/visibility.hpp"

namespace py = pybind11;
using namespace hullcap;

namespace {

using PointArray = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using IndexArray = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::vector<Vec3> to_points(const PointArray& a) {
  std::vector<Vec3> out(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = a.row(i).transpose();
  return out;
}

PointArray from_points(const std::vector<Vec3>& p) {
  PointArray out(static_cast<Eigen::Index>(p.size()), 3);
  for (std::size_t i = 0; i < p.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = p[i].transpose();
  return out;
}

Scan to_scan(const PointArray& a) {
  Scan s;
  s.points = to_points(a);
  return s;
}

py::array_t<std::uint8_t> to_array(const std::vector<std::uint8_t>& v) {
  return py::array_t<std::uint8_t>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict report_dict(const ErrorReport& r) {
  py::dict out;
  for (const auto& s : r.regions) {
    py::dict d;
    d["median_mm"] = s.median_mm;
    d["avg_mm"] = s.avg_mm;
    d["std_mm"] = s.std_mm;
    d["n_points"] = s.n_points;
    out[py::str(s.name)] = d;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_hullcap, m) {
  m.doc() = "Multi-view head capture on a visual-hull voxel grid";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<EmptyHullError>(m, "EmptyHullError", base.ptr());

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_static("centered", &GridSpec::centered, py::arg("center"), py::arg("resolution"), py::arg("voxel_edge"))
      .def_readwrite("origin", &GridSpec::origin)
      .def_readwrite("resolution", &GridSpec::resolution)
      .def_readwrite("voxel_edge", &GridSpec::voxel_edge)
      .def("voxel_count", &GridSpec::voxel_count)
      .def("voxel_center", py::overload_cast<std::size_t>(&GridSpec::voxel_center, py::const_))
      .def("__repr__", [](const GridSpec& g) { return "GridSpec(" + format_grid(g) + ")"; });

  py::class_<Camera>(m, "Camera")
      .def_readonly("id", &Camera::id)
      .def_readonly("intrinsics", &Camera::intrinsics)
      .def_readonly("rotation", &Camera::rotation)
      .def_readonly("translation", &Camera::translation)
      .def_readonly("width", &Camera::width)
      .def_readonly("height", &Camera::height)
      .def("center", &Camera::center);
  m.def("look_at", &look_at, py::arg("eye"), py::arg("target"), py::arg("up"), py::arg("focal"), py::arg("width"),
        py::arg("height"), py::arg("id"));
  m.def(
      "project",
      [](const Vec3& x, const Camera& cam) {
        const Projection p = project(x, cam);
        return py::make_tuple(p.pixel, p.depth);
      },
      "World point to (pixel, depth)");
  m.def("back_project", &back_project, py::arg("pixel"), py::arg("depth"), py::arg("camera"));

  py::class_<CameraRig>(m, "CameraRig")
      .def_readonly("cameras", &CameraRig::cameras)
      .def("__len__", &CameraRig::n_views);
  m.def("load_rig", &load_rig);
  m.def("save_rig", &save_rig);

  py::class_<TriMesh>(m, "TriMesh")
      .def(py::init([](const PointArray& v, const IndexArray& t) {
             TriMesh mesh;
             mesh.vertices = to_points(v);
             for (Eigen::Index i = 0; i < t.rows(); ++i) mesh.triangles.push_back({t(i, 0), t(i, 1), t(i, 2)});
             mesh.validate();
             return mesh;
           }),
           py::arg("vertices"), py::arg("triangles"))
      .def_property_readonly("vertices", [](const TriMesh& mesh) { return from_points(mesh.vertices); })
      .def_property_readonly("triangles",
                             [](const TriMesh& mesh) {
                               IndexArray out(static_cast<Eigen::Index>(mesh.triangles.size()), 3);
                               for (std::size_t i = 0; i < mesh.triangles.size(); ++i)
                                 for (int k = 0; k < 3; ++k) out(static_cast<Eigen::Index>(i), k) = mesh.triangles[i][k];
                               return out;
                             });
  m.def("icosphere", &icosphere, py::arg("levels"));
  m.def("read_obj", &read_obj);
  m.def("write_obj", &write_obj);

  m.def(
      "p2s_distances",
      [](const PointArray& points, const TriMesh& mesh) { return p2s_distances(to_points(points), mesh); },
      py::arg("points"), py::arg("mesh"));
  m.def(
      "v2v_mask",
      [](const PointArray& a, const PointArray& b, const PointArray& reg) {
        return to_array(v2v_mask(to_points(a), to_points(b), to_points(reg)));
      },
      py::arg("a"), py::arg("b"), py::arg("reg"));
  m.def(
      "p2s_mask",
      [](const std::vector<double>& da, const std::vector<double>& db, const std::vector<double>& dreg) {
        return to_array(p2s_mask(da, db, dreg));
      },
      py::arg("d_a"), py::arg("d_b"), py::arg("d_reg"));
  m.def(
      "fuse_mean_variance",
      [](const Eigen::MatrixXd& features, const std::vector<std::uint8_t>& indicators,
         const std::vector<double>& weights) {
        const FusedFeature f = fuse_mean_variance(features, indicators, weights);
        return py::make_tuple(f.mean, f.variance, f.valid);
      },
      py::arg("features"), py::arg("indicators"), py::arg("weights"));

  m.def(
      "render_depth",
      [](const TriMesh& mesh, const Camera& cam) {
        const DepthMap d = render_depth(mesh, cam);
        py::array_t<float> out({d.height, d.width});
        std::copy(d.values.begin(), d.values.end(), out.mutable_data());
        return out;
      },
      py::arg("mesh"), py::arg("camera"));
  m.def(
      "sphere_scene_hull",
      [](double radius, int n_views, int image_size, double focal, int resolution, double voxel_edge) {
        SceneSpec spec;
        spec.shape = ShapeKind::sphere;
        spec.radius = radius;
        spec.n_views = n_views;
        spec.image_size = image_size;
        spec.focal_px = focal;
        const Scene scene = make_scene(spec);
        std::vector<BinaryMask> masks;
        for (auto& v : rasterize_views(scene)) masks.push_back(std::move(v.mask));
        const GridSpec grid = GridSpec::centered(rig_focus_point(scene.rig), resolution, voxel_edge);
        return extract_hull(carve_occupancy(masks, scene.rig, grid), n_views);
      },
      "Visual hull of a synthetic sphere seen by a camera ring", py::arg("radius"), py::arg("n_views"),
      py::arg("image_size"), py::arg("focal"), py::arg("resolution"), py::arg("voxel_edge"));

  m.def(
      "compute_metrics",
      [](const PointArray& scan, const TriMesh& mesh) { return report_dict(compute_metrics(to_scan(scan), mesh)); },
      "Point-to-surface statistics in millimeters", py::arg("scan"), py::arg("mesh"));

  m.def(
      "run_stage",
      [](const std::string& stage, const std::filesystem::path& config, std::optional<std::string> out,
         std::optional<std::int64_t> seed) -> py::object {
        Config cfg = Config::load(config);
        if (seed) cfg.set("scene.seed", std::to_string(*seed));
        if (out) cfg.set("paths.root", *out);
        const Pipeline p(std::move(cfg));
        if (stage == "synth") p.synth();
        else if (stage == "carve") p.carve();
        else if (stage == "visibility") p.visibility();
        else if (stage == "aggregate") p.aggregate();
        else if (stage == "fit" || stage == "refine" || stage == "eval") {
          return report_dict(stage == "fit" ? p.fit() : stage == "refine" ? p.refine() : p.eval());
        } else {
          throw ConfigError("unknown stage '" + stage + "'");
        }
        return py::none();
      },
      "Runs one pipeline stage; fit, refine and eval return their report", py::arg("stage"), py::arg("config"),
      py::arg("out") = py::none(), py::arg("seed") = py::none());
}
