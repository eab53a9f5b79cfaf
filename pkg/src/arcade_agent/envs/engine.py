"""Game engines: integer-grid physics, collisions, scoring, serving.

Physics contract (documented here, relied on by tests):

* One tick advances every object once. The commanded action moves the
  paddle first, scripted objects move next, the ball moves last.
* Ball motion is decomposed into unit substeps (``max(|vx|, |vy|)`` of
  them, x before y within a substep). A blocked unit move reflects by
  mirror-fold: the ball moves one pixel *away* instead and the velocity
  component negates, which reproduces the closed-form triangle-wave fold
  off static axis-aligned surfaces exactly.
* Paddle rebound table: a contact at offset ``dx`` from the paddle center
  sets the outgoing horizontal speed to
  ``clamp(floor(dx / 3 + 0.5), -2, +2)``, i.e. for a 16-wide paddle::

      dx  -8..-5  -4..-2  -1..1  2..4  5..7
      vx    -2      -1      0     1     2

  monotone in ``dx`` with the steepest angle at the edges. The vertical
  component reflects. Side (x-axis) paddle hits reflect specularly.
* Bumpers (pinball) reflect by face region: mostly-horizontal approach
  flips vx, mostly-vertical flips vy, diagonal approach mirrors across
  the 45-degree face, swapping components.
* Respawns (serve after a point, lost life, or drained ball) clear the
  ball's histories so observed velocities never span a teleport.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, EpisodeFinishedError, InvalidActionError
from .layouts import BricksLayout, DuelLayout, PinballLayout, default_layout
from .objects import (
    CONTROLLABLE,
    NON_CONTROLLABLE,
    STATIC,
    ContactEvent,
    EnvState,
    ObjectRecord,
    RewardEvent,
    ShapeBitmap,
)

ENV_NAMES = ("duel", "bricks", "pinball_lite")
ACTIONS = ("noop", "left", "right")

SERVE_VX_CHOICES = (-2, -1, 1, 2)


def rebound_vx(dx: int, limit: int = 2) -> int:
    """Outgoing horizontal speed after a paddle contact at offset ``dx``."""
    return max(-limit, min(limit, math.floor(dx / 3 + 0.5)))


def octagon_mask(size: int) -> np.ndarray:
    """Octagonal approximation of a circular bumper on an odd-sized grid."""
    if size % 2 == 0 or size < 5:
        raise ConfigError(f"bumper size must be odd and >= 5, got {size}")
    half = size // 2
    cut = size - 3
    yy, xx = np.mgrid[-half:half + 1, -half:half + 1]
    return ((np.abs(xx) + np.abs(yy)) <= cut).astype(np.uint8)


class ArcadeEnv:
    """Base engine; subclasses define layout-specific objects and rules."""

    def __init__(self, layout) -> None:
        self.layout = layout
        self._rng: np.random.Generator | None = None
        self.state: EnvState | None = None
        self._pos: dict[str, list[int]] = {}
        self._ball_vel = [0, 0]
        self._movers: tuple[str, ...] = ()

    # -- construction -----------------------------------------------------

    def reset(self, seed: int | None = None) -> EnvState:
        """Build the initial state. A seed reseeds the serve stream."""
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        if self._rng is None:
            raise ConfigError("first reset needs a seed")
        lay = self.layout
        self.state = EnvState(env_name=lay.env_name, width=lay.width, height=lay.height)
        self._pos = {}
        self._build_objects()
        self._serve()
        self._record_movers()
        return self.state

    def _add_static(self, object_id: str, shape: ShapeBitmap, center: tuple[int, int]) -> None:
        rec = ObjectRecord(object_id, STATIC, shape)
        rec.record_position(center)
        self.state.objects[object_id] = rec

    def _add_mover(self, object_id: str, kind: str, shape: ShapeBitmap,
                   center: tuple[int, int], action_set: tuple[str, ...] = ()) -> None:
        rec = ObjectRecord(object_id, kind, shape, action_set)
        self.state.objects[object_id] = rec
        self._pos[object_id] = [int(center[0]), int(center[1])]

    def _add_side_walls(self) -> None:
        lay = self.layout
        t = lay.wall_thickness
        wall = ShapeBitmap.box(t, lay.height)
        self._add_static("wall_left", wall, (t // 2, lay.height // 2))
        self._add_static("wall_right", wall, (lay.width - t + t // 2, lay.height // 2))

    def _add_top_wall(self) -> None:
        lay = self.layout
        t = lay.wall_thickness
        inner_w = lay.width - 2 * lay.wall_thickness
        wall = ShapeBitmap.box(inner_w, t)
        self._add_static("wall_top", wall, (lay.wall_thickness + inner_w // 2, t // 2))

    def _add_paddle(self) -> None:
        lay = self.layout
        shape = ShapeBitmap.box(lay.paddle_width, lay.paddle_height)
        center = (lay.width // 2, lay.agent_center_y)
        self._add_mover("paddle", CONTROLLABLE, shape, center, ACTIONS)

    def _add_ball(self) -> None:
        lay = self.layout
        shape = ShapeBitmap.box(lay.ball_size, lay.ball_size)
        self._add_mover("ball", NON_CONTROLLABLE, shape, (lay.serve_x, lay.serve_y))

    # -- stepping ---------------------------------------------------------

    def step(self, action: str, frame_skip: int = 2):
        """Advance ``frame_skip`` ticks with the action repeated each tick."""
        if self.state is None:
            raise ConfigError("env not reset")
        if frame_skip < 1:
            raise ConfigError(f"frame_skip must be >= 1, got {frame_skip}")
        if self.state.terminal:
            raise EpisodeFinishedError("step() on terminal state")
        if action not in self.state.controllable().action_set:
            raise InvalidActionError(f"action {action!r} not in action set")
        rewards: list[RewardEvent] = []
        contacts: list[ContactEvent] = []
        for _ in range(frame_skip):
            self._tick(action, rewards, contacts)
            if self.state.terminal:
                break
        return self.state, rewards, contacts

    def _tick(self, action: str, rewards, contacts) -> None:
        self.state.tick += 1
        self._move_paddle(action)
        self._move_scripted()
        self._move_ball(rewards, contacts)
        self._after_ball(rewards)
        self._record_movers()

    def _record_movers(self) -> None:
        for oid in self._movers:
            self.state.objects[oid].record_position(tuple(self._pos[oid]))

    def _move_paddle(self, action: str) -> None:
        lay = self.layout
        dx = {"noop": 0, "left": -lay.paddle_speed, "right": lay.paddle_speed}[action]
        pos = self._pos["paddle"]
        half = lay.paddle_width // 2
        lo = lay.wall_thickness + half
        hi = lay.width - lay.wall_thickness - lay.paddle_width + half
        new_x = max(lo, min(hi, pos[0] + dx))
        if not self._paddle_would_cover_ball("paddle", new_x):
            pos[0] = new_x

    def _move_scripted(self) -> None:
        pass

    def _paddle_would_cover_ball(self, paddle_id: str, new_cx: int) -> bool:
        """Paddles never sweep onto the ball; the blocked move is dropped."""
        paddle = self.state.objects[paddle_id]
        ball = self.state.objects["ball"]
        bx, by = self._pos["ball"]
        hx, hy = ball.shape.half
        phx, phy = paddle.shape.half
        pcy = self._pos[paddle_id][1]
        tlx, tly = new_cx - phx, pcy - phy
        x0 = max(bx - hx, tlx)
        y0 = max(by - hy, tly)
        x1 = min(bx - hx + ball.shape.width, tlx + paddle.shape.width)
        y1 = min(by - hy + ball.shape.height, tly + paddle.shape.height)
        return x0 < x1 and y0 < y1

    # -- ball motion ------------------------------------------------------

    def _solid_ids(self):
        return [oid for oid in self.state.objects if oid != "ball"]

    def _overlaps(self, rec: ObjectRecord, tlx: int, tly: int, bw: int, bh: int) -> bool:
        ox, oy = rec.top_left
        mask = rec.shape.mask
        x0, y0 = max(tlx, ox), max(tly, oy)
        x1 = min(tlx + bw, ox + mask.shape[1])
        y1 = min(tly + bh, oy + mask.shape[0])
        if x0 >= x1 or y0 >= y1:
            return False
        return bool(mask[y0 - oy:y1 - oy, x0 - ox:x1 - ox].any())

    def _hits_at(self, cx: int, cy: int):
        ball = self.state.objects["ball"]
        hx, hy = ball.shape.half
        tlx, tly = cx - hx, cy - hy
        bw, bh = ball.shape.width, ball.shape.height
        found = []
        for oid in self._solid_ids():
            rec = self.state.objects[oid]
            if not rec.position_history:
                continue
            if self._overlaps(rec, tlx, tly, bw, bh):
                found.append(oid)
        found.sort(key=lambda oid: (self.state.objects[oid].top_left[1],
                                    self.state.objects[oid].top_left[0], oid))
        return found

    def _in_field(self, cx: int, cy: int) -> bool:
        ball = self.state.objects["ball"]
        hx, hy = ball.shape.half
        tlx, tly = cx - hx, cy - hy
        return (tlx >= 0 and tly >= 0
                and tlx + ball.shape.width <= self.layout.width
                and tly + ball.shape.height <= self.layout.height)

    def _move_ball(self, rewards, contacts) -> None:
        self._tick_bumpers_hit: set[str] = set()
        mx = abs(self._ball_vel[0])
        my = abs(self._ball_vel[1])
        sub = max(mx, my, 1)
        for i in range(sub):
            ddx = (mx * (i + 1)) // sub - (mx * i) // sub
            ddy = (my * (i + 1)) // sub - (my * i) // sub
            if ddx and self._ball_vel[0] != 0:
                self._unit_move(1 if self._ball_vel[0] > 0 else -1, 0, rewards, contacts)
            if ddy and self._ball_vel[1] != 0:
                self._unit_move(0, 1 if self._ball_vel[1] > 0 else -1, rewards, contacts)

    def _unit_move(self, dx: int, dy: int, rewards, contacts) -> None:
        pos = self._pos["ball"]
        tx, ty = pos[0] + dx, pos[1] + dy
        if not self._in_field(tx, ty):
            return  # open border: hold position, scoring handles it
        hits = self._hits_at(tx, ty)
        if not hits:
            pos[0], pos[1] = tx, ty
            return
        self._resolve_hit(hits[0], dx, dy, tx, ty, rewards, contacts)
        # mirror-fold: step away instead, if that cell is free
        fx, fy = pos[0] - dx, pos[1] - dy
        if self._in_field(fx, fy) and not self._hits_at(fx, fy):
            pos[0], pos[1] = fx, fy

    def _resolve_hit(self, oid: str, dx: int, dy: int, tx: int, ty: int,
                     rewards, contacts) -> None:
        rec = self.state.objects[oid]
        if rec.kind == CONTROLLABLE or oid == "opponent":
            self._paddle_hit(rec, dx, dy, tx, ty, contacts)
        elif oid.startswith("brick"):
            self._brick_hit(oid, dx, dy, rewards)
        elif oid.startswith("bumper"):
            self._bumper_hit(rec, tx, ty, rewards)
        else:  # wall
            if dx:
                self._ball_vel[0] = -self._ball_vel[0]
            else:
                self._ball_vel[1] = -self._ball_vel[1]

    def _paddle_hit(self, rec: ObjectRecord, dx: int, dy: int, tx: int, ty: int,
                    contacts) -> None:
        pcx, pcy = rec.position
        off_x = tx - pcx
        off_y = ty - pcy
        if rec.kind == CONTROLLABLE:
            hx, hy = rec.shape.half
            cdx = max(-(hx + 1), min(rec.shape.width - 1 - hx + 1, off_x))
            cdy = max(-(hy + 1), min(rec.shape.height - 1 - hy + 1, off_y))
            contacts.append(ContactEvent("paddle", "ball", (cdx, cdy), self.state.tick))
            self._on_paddle_contact()
        if dy:
            self._ball_vel[1] = -dy * self._vy_magnitude()
            self._ball_vel[0] = rebound_vx(off_x)
        else:
            self._ball_vel[0] = -self._ball_vel[0]

    def _on_paddle_contact(self) -> None:
        pass

    def _vy_magnitude(self) -> int:
        return abs(self._ball_vel[1])

    def _brick_hit(self, oid: str, dx: int, dy: int, rewards) -> None:
        del self.state.objects[oid]
        self.state.score += 1
        rewards.append(RewardEvent(1, self.state.tick))
        if dx:
            self._ball_vel[0] = -self._ball_vel[0]
        else:
            self._ball_vel[1] = -self._ball_vel[1]

    def _bumper_hit(self, rec: ObjectRecord, tx: int, ty: int, rewards) -> None:
        if rec.id in self._tick_bumpers_hit:
            return  # one reflection per bumper per tick
        self._tick_bumpers_hit.add(rec.id)
        bx, by = rec.position
        rx, ry = tx - bx, ty - by
        vx, vy = self._ball_vel
        if abs(rx) >= abs(ry) + 2:
            vx = -vx
        elif abs(ry) >= abs(rx) + 2:
            vy = -vy
        elif (rx >= 0) == (ry >= 0):
            vx, vy = -vy, -vx
        else:
            vx, vy = vy, vx
        self._ball_vel[0], self._ball_vel[1] = vx, vy
        self.state.score += 1
        rewards.append(RewardEvent(1, self.state.tick))

    # -- env-specific hooks -------------------------------------------------

    def _build_objects(self) -> None:
        raise NotImplementedError

    def _serve(self) -> None:
        raise NotImplementedError

    def _after_ball(self, rewards) -> None:
        raise NotImplementedError


class DuelEnv(ArcadeEnv):
    """Paddle-ball duel against a scripted tracking opponent; first to 21."""

    def _build_objects(self) -> None:
        lay = self.layout
        self._add_side_walls()
        paddle_shape = ShapeBitmap.box(lay.paddle_width, lay.paddle_height)
        self._add_mover("opponent", NON_CONTROLLABLE, paddle_shape,
                        (lay.width // 2, lay.opponent_center_y))
        self._add_ball()
        self._add_paddle()
        self._movers = ("opponent", "ball", "paddle")

    def _serve(self) -> None:
        lay = self.layout
        ball = self.state.objects["ball"]
        ball.clear_history()
        self._pos["ball"] = [lay.serve_x, lay.serve_y]
        vx = int(self._rng.choice(SERVE_VX_CHOICES))
        vy = int(self._rng.choice((-lay.ball_speed_y, lay.ball_speed_y)))
        self._ball_vel = [vx, vy]

    def _move_scripted(self) -> None:
        lay = self.layout
        opp = self._pos["opponent"]
        diff = self._pos["ball"][0] - opp[0]
        if abs(diff) > 1:
            step = max(-lay.opponent_speed, min(lay.opponent_speed, diff))
            half = lay.paddle_width // 2
            lo = lay.wall_thickness + half
            hi = lay.width - lay.wall_thickness - lay.paddle_width + half
            new_x = max(lo, min(hi, opp[0] + step))
            if not self._paddle_would_cover_ball("opponent", new_x):
                opp[0] = new_x

    def _after_ball(self, rewards) -> None:
        lay = self.layout
        cy = self._pos["ball"][1]
        if cy <= 1:
            self.state.score += 1
            rewards.append(RewardEvent(1, self.state.tick))
            self._serve()
        elif cy >= lay.height - 2:
            self.state.score -= 1
            rewards.append(RewardEvent(-1, self.state.tick))
            self._serve()
        if abs(self.state.score) >= lay.win_score:
            self.state.terminal = True


class BricksEnv(ArcadeEnv):
    """Brick-breaker: clear the grid on three lives; the ball speeds up."""

    def _build_objects(self) -> None:
        lay = self.layout
        self.state.lives = lay.lives
        self._paddle_contacts = 0
        self._add_side_walls()
        self._add_top_wall()
        brick = ShapeBitmap.box(lay.brick_width, lay.brick_height)
        hx, hy = brick.half
        for r in range(lay.brick_rows):
            for c in range(lay.brick_cols):
                tlx = lay.brick_x0 + c * lay.brick_pitch_x
                tly = lay.brick_y0 + r * lay.brick_pitch_y
                self._add_static(f"brick_{r}_{c}", brick, (tlx + hx, tly + hy))
        self._add_ball()
        self._add_paddle()
        self._movers = ("ball", "paddle")

    def _serve(self) -> None:
        lay = self.layout
        ball = self.state.objects["ball"]
        ball.clear_history()
        self._pos["ball"] = [lay.serve_x, lay.serve_y]
        vx = int(self._rng.choice(SERVE_VX_CHOICES))
        self._ball_vel = [vx, -self._vy_magnitude()]

    def _on_paddle_contact(self) -> None:
        self._paddle_contacts += 1

    def _vy_magnitude(self) -> int:
        lay = self.layout
        if self._paddle_contacts >= lay.speedup_contacts:
            return lay.ball_speed_y_fast
        return lay.ball_speed_y

    def _after_ball(self, rewards) -> None:
        lay = self.layout
        if self._pos["ball"][1] >= lay.height - 2:
            self.state.lives -= 1
            if self.state.lives > 0:
                self._serve()
            else:
                self.state.terminal = True
        if not any(oid.startswith("brick") for oid in self.state.objects):
            self.state.terminal = True


class PinballLiteEnv(ArcadeEnv):
    """Bumper pinball with a sliding flipper bar; three balls per episode."""

    def _build_objects(self) -> None:
        lay = self.layout
        self.state.balls_left = lay.balls
        self._add_side_walls()
        self._add_top_wall()
        bumper = ShapeBitmap(octagon_mask(lay.bumper_size))
        for i, center in enumerate(lay.bumper_centers):
            self._add_static(f"bumper_{i}", bumper, tuple(center))
        self._add_ball()
        self._add_paddle()
        self._movers = ("ball", "paddle")

    def _serve(self) -> None:
        lay = self.layout
        ball = self.state.objects["ball"]
        ball.clear_history()
        self._pos["ball"] = [lay.serve_x, lay.serve_y]
        vx = int(self._rng.choice(SERVE_VX_CHOICES))
        self._ball_vel = [vx, 2]

    def _after_ball(self, rewards) -> None:
        lay = self.layout
        if self._pos["ball"][1] >= lay.height - 2:
            self.state.balls_left -= 1
            if self.state.balls_left > 0:
                self._serve()
            else:
                self.state.terminal = True


_ENGINES = {
    "duel": (DuelEnv, DuelLayout),
    "bricks": (BricksEnv, BricksLayout),
    "pinball_lite": (PinballLiteEnv, PinballLayout),
}


def make_env(env_name: str, seed: int, layout=None) -> ArcadeEnv:
    """Construct an environment and reset it with the given seed."""
    if env_name not in _ENGINES:
        raise ConfigError(
            f"unknown environment {env_name!r}; expected one of {sorted(_ENGINES)}"
        )
    cls, layout_cls = _ENGINES[env_name]
    if layout is None:
        layout = default_layout(env_name)
    elif not isinstance(layout, layout_cls):
        raise ConfigError(f"layout {type(layout).__name__} does not match {env_name}")
    env = cls(layout)
    env.reset(seed)
    return env


def reset(env_name: str, seed: int, layout=None) -> EnvState:
    """Initial state for (env_name, seed); a fresh engine is built internally."""
    return make_env(env_name, seed, layout).state
