# Copyright 2026 The Panoptic Core Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Panoptic metrics, fusion and loss oracles backed by the C++ core."""

import json

import numpy as np

from . import _core
from ._core import DecodeError, SchemaError

__version__ = _core.__version__

__all__ = [
    "DecodeError",
    "SchemaError",
    "py_evaluate",
    "py_fuse",
    "py_losses",
]


def _categories_json(categories):
    # Accepts {"categories": [...]} or the bare list.
    if isinstance(categories, (list, tuple)):
        categories = {"categories": list(categories)}
    return json.dumps(categories)


def _segments(mapping):
    return {int(k): int(v) for k, v in mapping.items()}


def _as_list(ids, classes):
    if isinstance(ids, np.ndarray) and ids.ndim == 2:
        return [ids], [classes]
    return list(ids), list(classes)


def py_evaluate(gt_ids, gt_classes, pred_ids, pred_classes, categories,
                fn_void_rule=True, jobs=1):
    """PQ / PQ-dagger report for one image or a list of images.

    `gt_ids` / `pred_ids` are 2-D integer id grids (0 = void), or lists of
    them; `gt_classes` / `pred_classes` map segment id to class id.
    """
    gts, gcs = _as_list(gt_ids, gt_classes)
    preds, pcs = _as_list(pred_ids, pred_classes)
    report = _core.evaluate(
        [np.asarray(g) for g in gts], [_segments(c) for c in gcs],
        [np.asarray(p) for p in preds], [_segments(c) for c in pcs],
        _categories_json(categories), fn_void_rule, jobs)
    return json.loads(report)


def py_fuse(detections, semantic, categories, config=None):
    """Fuses detections with a semantic label grid.

    Returns (id grid, {segment id: class id}).
    """
    cfg = {"coverage_threshold": 0.5, "stuff_min_area": 4096,
           "mask_threshold": 0.5}
    cfg.update(config or {})
    records = []
    for det in detections:
        records.append({
            "box": [float(v) for v in det["box"]],
            "class_id": int(det["class_id"]),
            "score": float(det["score"]),
            "mask": np.asarray(det["mask"], dtype=np.float64).ravel().tolist(),
        })
    grid, segments, _, _ = _core.fuse(
        json.dumps(records), np.asarray(semantic), _categories_json(categories),
        float(cfg["coverage_threshold"]), int(cfg["stuff_min_area"]),
        float(cfg["mask_threshold"]))
    return grid, dict(segments)


def py_losses(fixture):
    """The six loss values (plus flags) for a {semantic, rpn, rsh} bundle."""
    return json.loads(_core.losses(json.dumps(fixture)))
