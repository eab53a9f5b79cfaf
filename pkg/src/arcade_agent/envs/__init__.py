"""Deterministic object-based arcade environments.

Three desk-scale games ship: ``duel`` (paddle-ball duel against a scripted
tracker), ``bricks`` (brick-breaker), and ``pinball_lite`` (bumper pinball
with a sliding flipper bar). All emit object records directly and can
render palette-indexed pixel frames.
"""

from .objects import (
    CONTROLLABLE,
    NON_CONTROLLABLE,
    STATIC,
    ContactEvent,
    EnvState,
    ObjectRecord,
    RewardEvent,
    ShapeBitmap,
    occupancy_grid,
    state_fingerprint,
)
from .layouts import default_layout, load_layout, save_layout
from .engine import ENV_NAMES, make_env, reset
from .render import palette_for, render, rgb_palette_for
from .io import (
    EventLogWriter,
    read_event_log,
    read_frame_log,
    read_ppm,
    write_frame_log,
    write_ppm,
)

__all__ = [
    "CONTROLLABLE",
    "NON_CONTROLLABLE",
    "STATIC",
    "ContactEvent",
    "EnvState",
    "ObjectRecord",
    "RewardEvent",
    "ShapeBitmap",
    "occupancy_grid",
    "state_fingerprint",
    "default_layout",
    "load_layout",
    "save_layout",
    "ENV_NAMES",
    "make_env",
    "reset",
    "palette_for",
    "render",
    "rgb_palette_for",
    "EventLogWriter",
    "read_event_log",
    "read_frame_log",
    "read_ppm",
    "write_ppm",
    "write_frame_log",
]
