"""Object records, environment state, and event types.

Conventions used throughout the package:

* Coordinates are integer pixels, x right, y down, origin top-left.
* An object's *position* is the center cell of its shape placement:
  ``top_left + (width // 2, height // 2)``.
* Velocities are per-tick position deltas in pixels.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

CONTROLLABLE = "controllable"
NON_CONTROLLABLE = "non_controllable"
STATIC = "static"
KINDS = (CONTROLLABLE, NON_CONTROLLABLE, STATIC)

HISTORY_LEN = 16


class ShapeBitmap:
    """Binary bitmap of an object's shape, row-major, at least one set cell."""

    __slots__ = ("mask",)

    def __init__(self, mask) -> None:
        mask = np.ascontiguousarray(np.asarray(mask, dtype=np.uint8))
        if mask.ndim != 2 or mask.shape[0] < 1 or mask.shape[1] < 1:
            raise ValueError(f"shape mask must be 2-D and non-empty, got {mask.shape}")
        if not mask.any():
            raise ValueError("shape mask has no set cells")
        mask[mask != 0] = 1
        self.mask = mask

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def half(self) -> tuple[int, int]:
        """Offset of the center cell from the top-left cell."""
        return self.width // 2, self.height // 2

    def cell_count(self) -> int:
        return int(self.mask.sum())

    @classmethod
    def box(cls, width: int, height: int) -> "ShapeBitmap":
        return cls(np.ones((height, width), dtype=np.uint8))

    def __eq__(self, other) -> bool:
        return isinstance(other, ShapeBitmap) and np.array_equal(self.mask, other.mask)


@dataclass
class RewardEvent:
    amount: int
    tick: int


@dataclass
class ContactEvent:
    """Overlap of the controllable shape with another object's shape.

    ``offset`` is the contact point relative to the controllable shape's
    center, always within the shape's bounding box extended by one pixel.
    """

    controllable_id: str
    other_id: str
    offset: tuple[int, int]
    tick: int


class ObjectRecord:
    """One tracked game object with bounded position/velocity history."""

    __slots__ = (
        "id", "kind", "shape", "position_history", "velocity_history",
        "observed_area", "action_set",
    )

    def __init__(self, object_id: str, kind: str, shape: ShapeBitmap,
                 action_set: tuple[str, ...] = (), history_len: int = HISTORY_LEN) -> None:
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        if (kind == CONTROLLABLE) != bool(action_set):
            raise ValueError("action_set must be nonempty iff kind is controllable")
        self.id = object_id
        self.kind = kind
        self.shape = shape
        self.position_history: deque = deque(maxlen=history_len)
        # one shorter so velocity[i] always pairs with (position[i], position[i+1])
        self.velocity_history: deque = deque(maxlen=history_len - 1)
        self.observed_area: tuple[int, int, int, int] | None = None
        self.action_set = tuple(action_set)

    @property
    def position(self) -> tuple[int, int]:
        return self.position_history[-1]

    @property
    def top_left(self) -> tuple[int, int]:
        hx, hy = self.shape.half
        x, y = self.position
        return x - hx, y - hy

    def footprint_bbox(self) -> tuple[int, int, int, int]:
        """Inclusive (xmin, ymin, xmax, ymax) of the shape at its position."""
        tx, ty = self.top_left
        return tx, ty, tx + self.shape.width - 1, ty + self.shape.height - 1

    def record_position(self, pos: tuple[int, int]) -> None:
        """Append a position; velocity and observed area follow."""
        pos = (int(pos[0]), int(pos[1]))
        if self.position_history:
            px, py = self.position_history[-1]
            self.velocity_history.append((pos[0] - px, pos[1] - py))
        self.position_history.append(pos)
        hx, hy = self.shape.half
        xmin = pos[0] - hx
        ymin = pos[1] - hy
        xmax = xmin + self.shape.width - 1
        ymax = ymin + self.shape.height - 1
        if self.observed_area is None:
            self.observed_area = (xmin, ymin, xmax, ymax)
        else:
            ax, ay, bx, by = self.observed_area
            self.observed_area = (min(ax, xmin), min(ay, ymin), max(bx, xmax), max(by, ymax))

    def clear_history(self) -> None:
        """Drop histories (used on respawns); observed_area is kept."""
        self.position_history.clear()
        self.velocity_history.clear()

    def clone(self) -> "ObjectRecord":
        other = ObjectRecord(self.id, self.kind, self.shape, self.action_set,
                             history_len=self.position_history.maxlen)
        other.position_history.extend(self.position_history)
        other.velocity_history.extend(self.velocity_history)
        other.observed_area = self.observed_area
        return other


@dataclass
class EnvState:
    """Full environment state; owned and mutated by one simulation loop."""

    env_name: str
    width: int
    height: int
    tick: int = 0
    objects: dict[str, ObjectRecord] = field(default_factory=dict)
    score: int = 0
    terminal: bool = False
    lives: int | None = None
    balls_left: int | None = None

    def controllable(self) -> ObjectRecord:
        for rec in self.objects.values():
            if rec.kind == CONTROLLABLE:
                return rec
        raise LookupError("no controllable object in state")

    def clone(self) -> "EnvState":
        return EnvState(
            env_name=self.env_name, width=self.width, height=self.height,
            tick=self.tick, objects={k: v.clone() for k, v in self.objects.items()},
            score=self.score, terminal=self.terminal,
            lives=self.lives, balls_left=self.balls_left,
        )


def occupancy_grid(state: EnvState, exclude_ids: tuple[str, ...] = ()) -> np.ndarray:
    """Paint every object's shape mask into an (H, W) uint8 grid.

    ``exclude_ids`` lets callers drop the predicted object (and, for
    rollouts, the controllable object) from the world snapshot.
    """
    grid = np.zeros((state.height, state.width), dtype=np.uint8)
    for rec in state.objects.values():
        if rec.id in exclude_ids or not rec.position_history:
            continue
        paint_mask(grid, rec.top_left, rec.shape.mask)
    return grid


def paint_mask(grid: np.ndarray, top_left: tuple[int, int], mask: np.ndarray) -> None:
    """OR a shape mask into the grid, clipping at the borders."""
    gh, gw = grid.shape
    mh, mw = mask.shape
    tx, ty = top_left
    x0, y0 = max(tx, 0), max(ty, 0)
    x1, y1 = min(tx + mw, gw), min(ty + mh, gh)
    if x0 >= x1 or y0 >= y1:
        return
    sub = mask[y0 - ty:y1 - ty, x0 - tx:x1 - tx]
    region = grid[y0:y1, x0:x1]
    np.maximum(region, sub, out=region)


def state_fingerprint(state: EnvState) -> str:
    """SHA-256 over a canonical serialization; equal iff states are bitwise equal."""
    h = hashlib.sha256()
    h.update(state.env_name.encode())
    h.update(np.int64([state.width, state.height, state.tick, state.score,
                       int(state.terminal),
                       -1 if state.lives is None else state.lives,
                       -1 if state.balls_left is None else state.balls_left]).tobytes())
    for oid in sorted(state.objects):
        rec = state.objects[oid]
        h.update(oid.encode())
        h.update(rec.kind.encode())
        h.update(rec.shape.mask.tobytes())
        h.update(np.int64(list(rec.position_history)).tobytes())
        h.update(np.int64(list(rec.velocity_history)).tobytes())
        area = rec.observed_area or (0, 0, -1, -1)
        h.update(np.int64(area).tobytes())
        h.update("|".join(rec.action_set).encode())
    return h.hexdigest()
