# Copyright (c) 2026 The hullcap Authors.
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import os
import tempfile

import numpy as np
import pytest

import hullcap


def test_projection_round_trip():
    cam = hullcap.look_at([0.0, -2.0, 0.3], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], 800.0, 640, 480, "c0")
    x = np.array([0.05, -0.02, 0.1])
    pixel, depth = hullcap.project(x, cam)
    assert depth > 0
    np.testing.assert_allclose(hullcap.back_project(pixel, depth, cam), x, atol=1e-12)


def test_distances_against_a_sphere():
    ball = hullcap.icosphere(4)
    pts = np.array([[0.0, 0.0, 2.0], [0.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    d = hullcap.p2s_distances(pts, ball)
    np.testing.assert_allclose(d, [1.0, 1.0, 2.0], atol=2e-3)
    report = hullcap.compute_metrics(pts, ball)
    assert report["complete"]["n_points"] == 3
    assert math.isclose(report["complete"]["median_mm"], 1000.0 * sorted(d)[1])


def test_masks():
    a = np.zeros((2, 3))
    b = np.array([[0.0, 0.0, 0.1], [0.0, 0.0, 0.0]])
    reg = np.array([[0.0, 0.0, 5.0], [0.0, 0.0, 0.0]])
    assert list(hullcap.v2v_mask(a, b, reg)) == [0, 1]
    assert list(hullcap.p2s_mask([0.0012], [0.001], [0.05])) == [0]
    with pytest.raises(hullcap.ShapeError):
        hullcap.p2s_mask([0.1], [0.1], [])


def test_fusion_single_view():
    f = np.array([[0.25, 1.0], [0.75, -1.0]])
    mean, var, valid = hullcap.fuse_mean_variance(f, [0, 1], [1.0, 2.0])
    assert valid
    np.testing.assert_allclose(mean, [0.75, -1.0])
    np.testing.assert_allclose(var, [0.0, 0.0])


def test_hull_contains_sphere():
    hull = hullcap.sphere_scene_hull(0.1, 8, 200, 500.0, 48, 0.005)
    v = hull.vertices
    assert v.shape[1] == 3 and len(v) > 100
    r = np.linalg.norm(v, axis=1)
    assert r.min() > 0.1 - 0.005


def test_pipeline_stages():
    config = (
        "scene.shape = sphere\nscene.subdivision = 1\nscene.image_size = 120\n"
        "scene.focal_px = 300\nscene.scan_density = 2\nhull.resolution = 32\n"
        "hull.voxel_edge = 0.008\nglobal.resolution = 6\nfit.steps = 5\nrefine.steps = 3\n"
    )
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "run.cfg")
        with open(path, "w") as fh:
            fh.write(config)
        out = os.path.join(tmp, "out")
        for stage in ("synth", "carve", "visibility", "aggregate"):
            assert hullcap.run_stage(stage, path, out) is None
        fit = hullcap.run_stage("fit", path, out)
        assert fit["complete"]["n_points"] > 0
        hullcap.run_stage("refine", path, out)
        report = hullcap.run_stage("eval", path, out)
        assert set(report) >= {"complete"}
        rig = hullcap.load_rig(os.path.join(out, "scene", "rig.json"))
        assert len(rig) == 8
        with pytest.raises(hullcap.ConfigError):
            hullcap.run_stage("bogus", path, out)
