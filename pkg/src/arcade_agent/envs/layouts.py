"""Environment layouts: fixed geometry, speeds, and termination rules.

Layouts are plain dataclasses round-trippable through the text key-value
format (see :mod:`arcade_agent.kv`), so experiments can ship custom
geometry files. Unspecified keys keep their defaults.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..errors import ConfigError
from ..kv import load_kv, save_kv


@dataclass(frozen=True)
class DuelLayout:
    env_name: str = "duel"
    width: int = 96
    height: int = 80
    wall_thickness: int = 2
    paddle_width: int = 16
    paddle_height: int = 4
    paddle_speed: int = 2
    paddle_top: int = 72
    opponent_top: int = 4
    opponent_speed: int = 1
    ball_size: int = 2
    ball_speed_y: int = 2
    serve_x: int = 48
    serve_y: int = 40
    win_score: int = 21

    @property
    def agent_center_y(self) -> int:
        return self.paddle_top + self.paddle_height // 2

    @property
    def opponent_center_y(self) -> int:
        return self.opponent_top + self.paddle_height // 2


@dataclass(frozen=True)
class BricksLayout:
    env_name: str = "bricks"
    width: int = 96
    height: int = 84
    wall_thickness: int = 2
    paddle_width: int = 16
    paddle_height: int = 4
    paddle_speed: int = 2
    paddle_top: int = 78
    ball_size: int = 2
    ball_speed_y: int = 2
    ball_speed_y_fast: int = 3
    speedup_contacts: int = 4  # paddle contacts before vy speeds up
    brick_rows: int = 6
    brick_cols: int = 8
    brick_width: int = 10
    brick_height: int = 3
    brick_x0: int = 4
    brick_y0: int = 12
    brick_pitch_x: int = 11
    brick_pitch_y: int = 4
    serve_x: int = 48
    serve_y: int = 60
    lives: int = 3

    @property
    def agent_center_y(self) -> int:
        return self.paddle_top + self.paddle_height // 2


@dataclass(frozen=True)
class PinballLayout:
    env_name: str = "pinball_lite"
    width: int = 96
    height: int = 96
    wall_thickness: int = 2
    paddle_width: int = 16
    paddle_height: int = 4
    paddle_speed: int = 2
    paddle_top: int = 88
    ball_size: int = 2
    bumper_size: int = 11  # octagonal mask, see engine
    bumper_centers: tuple = ((32, 34), (64, 34))
    serve_x: int = 48
    serve_y: int = 16
    balls: int = 3

    @property
    def agent_center_y(self) -> int:
        return self.paddle_top + self.paddle_height // 2


_LAYOUTS = {
    "duel": DuelLayout,
    "bricks": BricksLayout,
    "pinball_lite": PinballLayout,
}


def default_layout(env_name: str):
    try:
        return _LAYOUTS[env_name]()
    except KeyError:
        raise ConfigError(
            f"unknown environment {env_name!r}; expected one of {sorted(_LAYOUTS)}"
        ) from None


def load_layout(path):
    """Read a layout from a key-value file; ``env_name`` selects the game."""
    pairs = load_kv(path)
    name = pairs.get("env_name")
    if name not in _LAYOUTS:
        raise ConfigError(f"layout file {path} has unknown env_name {name!r}")
    cls = _LAYOUTS[name]
    known = {f.name for f in fields(cls)}
    unknown = set(pairs) - known
    if unknown:
        raise ConfigError(f"layout file {path} has unknown keys {sorted(unknown)}")
    if "bumper_centers" in pairs:
        flat = pairs["bumper_centers"]
        if not isinstance(flat, tuple) or len(flat) % 2:
            raise ConfigError("bumper_centers must be a flat even-length list of ints")
        pairs["bumper_centers"] = tuple(
            (flat[i], flat[i + 1]) for i in range(0, len(flat), 2)
        )
    return cls(**pairs)


def save_layout(path, layout) -> None:
    pairs = asdict(layout)
    if "bumper_centers" in pairs:
        pairs["bumper_centers"] = tuple(
            v for center in pairs["bumper_centers"] for v in center
        )
    save_kv(path, pairs)
