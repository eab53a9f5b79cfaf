"""Palette-indexed rendering.

Every object class owns one palette index, shared between the renderer and
the pixel-extraction templates, which makes extraction exact by design.
Draw order is statics, then non-controllable objects, then the
controllable object on top.
"""

from __future__ import annotations

import numpy as np

from .objects import CONTROLLABLE, NON_CONTROLLABLE, STATIC, EnvState, paint_mask

BACKGROUND = 0

# global class -> palette index table, disjoint across all environments
_CLASS_INDEX = {
    "wall": 1,
    "ball": 2,
    "paddle": 3,
    "opponent": 4,
    "bumper": 5,
}
_BRICK_ROW_BASE = 6
_MAX_BRICK_ROWS = 8

_RGB = {
    0: (0, 0, 0),
    1: (200, 200, 200),
    2: (255, 255, 255),
    3: (92, 186, 92),
    4: (213, 130, 74),
    5: (255, 210, 70),
    6: (198, 108, 58),
    7: (180, 122, 48),
    8: (162, 162, 42),
    9: (66, 158, 130),
    10: (66, 114, 194),
    11: (160, 60, 160),
    12: (220, 80, 120),
    13: (120, 200, 220),
}


def class_of(object_id: str) -> str:
    """Object class name for palette lookup, derived from stable ids."""
    if object_id.startswith("wall"):
        return "wall"
    if object_id.startswith("brick_"):
        row = object_id.split("_")[1]
        return f"brick_row_{row}"
    if object_id.startswith("bumper"):
        return "bumper"
    return object_id  # ball, paddle, opponent


def palette_index(object_id: str) -> int:
    cls = class_of(object_id)
    if cls.startswith("brick_row_"):
        row = int(cls.rsplit("_", 1)[1])
        if row >= _MAX_BRICK_ROWS:
            raise ValueError(f"no palette slot for brick row {row}")
        return _BRICK_ROW_BASE + row
    return _CLASS_INDEX[cls]


def palette_for(state_or_name) -> dict[str, int]:
    """class name -> palette index for the classes present in a state."""
    if isinstance(state_or_name, EnvState):
        classes = {class_of(oid) for oid in state_or_name.objects}
    else:
        classes = {
            "duel": {"wall", "ball", "paddle", "opponent"},
            "bricks": {"wall", "ball", "paddle"}
            | {f"brick_row_{r}" for r in range(_MAX_BRICK_ROWS)},
            "pinball_lite": {"wall", "ball", "paddle", "bumper"},
        }[state_or_name]
    out = {}
    for cls in sorted(classes):
        if cls.startswith("brick_row_"):
            out[cls] = _BRICK_ROW_BASE + int(cls.rsplit("_", 1)[1])
        else:
            out[cls] = _CLASS_INDEX[cls]
    return out


def rgb_palette_for(max_index: int = 13) -> np.ndarray:
    """(n, 3) uint8 table mapping palette index to display RGB."""
    table = np.zeros((max_index + 1, 3), dtype=np.uint8)
    for idx, rgb in _RGB.items():
        if idx <= max_index:
            table[idx] = rgb
    return table


def render(state: EnvState) -> np.ndarray:
    """Palette-indexed frame of the state; a pure function of its inputs."""
    frame = np.zeros((state.height, state.width), dtype=np.uint8)
    for kind in (STATIC, NON_CONTROLLABLE, CONTROLLABLE):
        for oid, rec in state.objects.items():
            if rec.kind != kind or not rec.position_history:
                continue
            _paint_over(frame, rec.top_left, rec.shape.mask, palette_index(oid))
    return frame


def _paint_over(frame: np.ndarray, top_left, mask: np.ndarray, idx: int) -> None:
    gh, gw = frame.shape
    mh, mw = mask.shape
    tx, ty = top_left
    x0, y0 = max(tx, 0), max(ty, 0)
    x1, y1 = min(tx + mw, gw), min(ty + mh, gh)
    if x0 >= x1 or y0 >= y1:
        return
    sub = mask[y0 - ty:y1 - ty, x0 - tx:x1 - tx]
    region = frame[y0:y1, x0:x1]
    region[sub != 0] = idx
