"""Velocity-dynamics learner and recursive trajectory forecaster.

The predictor watches a moving object's velocity history together with a
ring of binary overlap probes around its position, learns next-tick
velocity with a split-head dense net (one stream per component), and rolls
forecasts out recursively: each predicted velocity is pushed back into the
input queue, the position advances, and the sensor is re-read at the new
position against a frozen world snapshot.

Probe layout: the m probes sit on the square (Chebyshev) ring of radius
``ring_radius`` around the queried position, probe j at angle 2*pi*j/m
measured with +x right and +y down, starting at +x and stepping
counterclockwise in that frame. Probes beyond the playfield read as
overlap (wall). The default radius is the shape half-extent plus the top
per-tick speed so an approaching surface is always sensed at least one
tick before contact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, ShapeError
from .nets import Adam, DenseNet, build_split_net, load_net, save_net


@dataclass(frozen=True)
class PredictorConfig:
    k: int = 4                  # velocity/sensor history length
    m: int = 8                  # probe count
    n: int = 40                 # recursive rollout steps
    ring_radius: int = 3
    trunk: tuple = (64, 64)
    head_hidden: int = 32
    lr: float = 1e-3
    batch: int = 32
    buffer: int = 10_000
    warmup: int = 200           # samples before training starts

    def __post_init__(self):
        if self.k < 1 or self.m < 1 or self.n < 1:
            raise ConfigError(f"k, m, n must all be >= 1, got {self.k}, {self.m}, {self.n}")
        if len(self.trunk) != 2:
            raise ConfigError("the velocity net uses exactly two trunk layers")
        if self.ring_radius < 1:
            raise ConfigError("ring_radius must be >= 1")

    @property
    def input_width(self) -> int:
        return self.k * (2 + self.m)


def probe_offsets(m: int, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer (dx, dy) probe offsets on the square ring (documented above)."""
    angles = 2.0 * np.pi * np.arange(m) / m
    ux, uy = np.cos(angles), np.sin(angles)
    scale = radius / np.maximum(np.abs(ux), np.abs(uy))
    return (np.rint(ux * scale).astype(np.int64),
            np.rint(uy * scale).astype(np.int64))


def sense(grid: np.ndarray, pos: tuple[int, int],
          offsets: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """Binary overlap readings around ``pos`` on an occupancy grid."""
    return kernels.sense_probes(grid, int(pos[0]), int(pos[1]), offsets[0], offsets[1])


def build_input(velocity_queue, sensor_queue) -> np.ndarray:
    """Flatten queues oldest-first as [v_1, s_1, ..., v_k, s_k]."""
    vq = np.asarray(velocity_queue, dtype=np.float64)
    sq = np.asarray(sensor_queue, dtype=np.float64)
    if vq.ndim != 2 or vq.shape[1] != 2:
        raise ShapeError(f"velocity queue must be (k, 2), got {vq.shape}")
    if sq.ndim != 2 or sq.shape[0] != vq.shape[0]:
        raise ShapeError(f"queue lengths differ: {vq.shape[0]} vs {sq.shape[0]}")
    return np.concatenate([np.concatenate([vq[i], sq[i]]) for i in range(vq.shape[0])])


@dataclass
class RolloutState:
    """Seed data for a recursive rollout, taken from live history."""

    pos: tuple[float, float]
    velocity_queue: np.ndarray  # (k, 2) float64, oldest first
    sensor_queue: np.ndarray    # (k, m) float64, oldest first
    trajectory: list = field(default_factory=list)

    @classmethod
    def from_history(cls, pos, velocities, sensors, k: int, m: int) -> "RolloutState":
        """Zero-pad short histories on the old side, keep the newest k entries."""
        vq = np.zeros((k, 2), dtype=np.float64)
        sq = np.zeros((k, m), dtype=np.float64)
        vel = list(velocities)[-k:]
        sen = list(sensors)[-k:]
        if vel:
            vq[k - len(vel):] = np.asarray(vel, dtype=np.float64)
        if sen:
            sq[k - len(sen):] = np.asarray(sen, dtype=np.float64)
        return cls(pos=(float(pos[0]), float(pos[1])), velocity_queue=vq, sensor_queue=sq)


@dataclass
class TrajectoryForecast:
    """n predicted positions and per-step velocities (post-clamp deltas)."""

    start: tuple[float, float]
    positions: np.ndarray   # (n, 2) float64
    velocities: np.ndarray  # (n, 2) float64
    clamped: np.ndarray     # (n,) bool; position left the playfield and was clamped
    start_tick: int = 0

    def __len__(self) -> int:
        return self.positions.shape[0]

    def position_at(self, step: int) -> tuple[float, float]:
        return float(self.positions[step, 0]), float(self.positions[step, 1])

    def to_csv(self, path) -> None:
        """Debug dump for trajectory overlays: step, x, y, vx, vy."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("step,x,y,vx,vy\n")
            for i in range(len(self)):
                x, y = (float(v) for v in self.positions[i])
                vx, vy = (float(v) for v in self.velocities[i])
                fh.write(f"{i + 1},{x!r},{y!r},{vx!r},{vy!r}\n")


class SampleBuilder:
    """Incremental (input, target) pair builder over a live observation feed.

    Push one (velocity, sensor) observation per tick; once k+1 are queued,
    every new tick yields one supervised pair. ``reset`` drops the window
    (call it on serves/respawns so samples never span a teleport).
    """

    def __init__(self, k: int) -> None:
        self.k = k
        self._vel: list = []
        self._sen: list = []

    def reset(self) -> None:
        self._vel.clear()
        self._sen.clear()

    def push(self, velocity, sensor_bits) -> tuple[np.ndarray, np.ndarray] | None:
        self._vel.append((float(velocity[0]), float(velocity[1])))
        self._sen.append(np.asarray(sensor_bits, dtype=np.float64))
        if len(self._vel) > self.k + 1:
            self._vel.pop(0)
            self._sen.pop(0)
        if len(self._vel) == self.k + 1:
            vec = build_input(self._vel[:-1], self._sen[:-1])
            target = np.asarray(self._vel[-1], dtype=np.float64)
            return vec, target
        return None

    def rollout_seed(self, pos, k: int, m: int) -> RolloutState:
        """Seed queues from the newest observations (zero-padded when short)."""
        return RolloutState.from_history(pos, self._vel, self._sen, k, m)


class TrajectoryPredictor:
    """Owns the velocity net, its replay of observed samples, and rollouts."""

    def __init__(self, config: PredictorConfig, playfield: tuple[int, int], seed) -> None:
        self.config = config
        self.playfield = (int(playfield[0]), int(playfield[1]))
        seq = np.random.SeedSequence(seed)
        net_seed, batch_seed = seq.spawn(2)
        self.net = build_split_net(
            config.input_width, config.trunk,
            {"vx": (config.head_hidden, 1), "vy": (config.head_hidden, 1)},
            seed=net_seed,
        )
        self.adam = Adam(self.net, lr=config.lr)
        self._rng = np.random.default_rng(batch_seed)
        self.offsets = probe_offsets(config.m, config.ring_radius)
        self._inputs = np.zeros((config.buffer, config.input_width), dtype=np.float64)
        self._targets = np.zeros((config.buffer, 2), dtype=np.float64)
        self._size = 0
        self._head = 0
        self.samples_seen = 0
        self.updates = 0

    # -- training ----------------------------------------------------------

    def add_sample(self, input_vec: np.ndarray, target_v) -> None:
        self._inputs[self._head] = input_vec
        self._targets[self._head] = target_v
        self._head = (self._head + 1) % self.config.buffer
        self._size = min(self._size + 1, self.config.buffer)
        self.samples_seen += 1

    def train_step(self) -> float | None:
        """One batched update from the sample buffer; None before warmup."""
        if self._size < max(self.config.warmup, 1):
            return None
        idx = self._rng.integers(0, self._size, size=self.config.batch)
        X = self._inputs[idx]
        t = self._targets[idx]
        loss, grads = self.net.backward(X, {"vx": t[:, :1], "vy": t[:, 1:]})
        self.adam.step(self.net.param_arrays(), DenseNet.grad_arrays(grads))
        self.updates += 1
        return loss

    def observe_and_train(self, velocities, sensors) -> float | None:
        """Harvest supervised pairs from an aligned observation block.

        ``velocities[i]`` is the velocity observed at tick i and
        ``sensors[i]`` the probe reading at that tick's position. Windows
        of k consecutive observations predict the following velocity.
        Returns the training loss, or None when there is nothing to learn
        from yet (fewer than k+1 observations and a cold buffer).
        """
        if len(velocities) <= self.config.k:
            return None  # nothing to learn from yet
        vel = np.asarray(velocities, dtype=np.float64).reshape(-1, 2)
        sen = np.asarray(sensors, dtype=np.float64).reshape(vel.shape[0], -1)
        if sen.shape[1] != self.config.m:
            raise ShapeError("velocities and sensors must align")
        k = self.config.k
        for t in range(k, vel.shape[0]):
            self.add_sample(build_input(vel[t - k:t], sen[t - k:t]), vel[t])
        return self.train_step()

    # -- prediction ----------------------------------------------------------

    def predict_trajectory(self, start: RolloutState, grid: np.ndarray) -> TrajectoryForecast:
        """Roll the net out n steps against a frozen occupancy snapshot."""
        cfg = self.config
        trunk0, trunk1 = self.net.trunk
        hvx, ovx = self.net.heads["vx"]
        hvy, ovy = self.net.heads["vy"]
        positions, velocities, clamped = kernels.rollout(
            trunk0.W, trunk0.b, trunk1.W, trunk1.b,
            hvx.W, hvx.b, ovx.W[0], float(ovx.b[0]),
            hvy.W, hvy.b, ovy.W[0], float(ovy.b[0]),
            start.velocity_queue.copy(), start.sensor_queue.copy(),
            float(start.pos[0]), float(start.pos[1]), cfg.n,
            grid, self.offsets[0], self.offsets[1],
            float(self.playfield[0] - 1), float(self.playfield[1] - 1),
        )
        return TrajectoryForecast(
            start=(float(start.pos[0]), float(start.pos[1])),
            positions=positions, velocities=velocities,
            clamped=clamped.astype(bool),
        )

    # -- persistence -----------------------------------------------------------

    def save(self, path) -> None:
        save_net(path, self.net)

    def load(self, path) -> None:
        net = load_net(path)
        if net.family != self.net.family:
            raise ConfigError("checkpoint topology does not match predictor config")
        self.net = net
        self.adam = Adam(self.net, lr=self.config.lr)
