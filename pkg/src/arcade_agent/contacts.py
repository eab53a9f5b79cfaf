"""Contact-point reward regression.

Accumulates delayed-reward statistics per contact offset along the
controllable shape's major (x) axis, in 1-pixel buckets spanning the shape
plus one beyond-edge bucket on each side. Rewards are credited to the most
recent live pending contact (last-contact attribution) and a pending
contact settles at the credit accumulated when its horizon expires.

Expected values are bucket means smoothed by a count-weighted triangular
kernel over the two nearest buckets on each side. Smoothing never mixes
across the within-shape / beyond-edge boundary, so a miss statistic cannot
bleed into an edge bucket. Unvisited regions return an optimistic prior.
Interception points are drawn from a softmax over within-shape buckets
only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

KERNEL_WEIGHTS = (3.0, 2.0, 1.0)  # triangular weights at distances 0, 1, 2


@dataclass
class PendingContact:
    bucket: int          # index into the bucket arrays
    tick: int
    deadline: int
    credit: float = 0.0
    synthetic: bool = False  # recorded miss rather than a physical contact


class ContactRewardTable:
    """Running (count, mean, M2) statistics per quantized contact offset."""

    def __init__(self, shape_mask: np.ndarray, horizon: int = 120,
                 prior: float = 0.5) -> None:
        if horizon < 1:
            raise ConfigError("attribution horizon must be >= 1")
        mask = np.asarray(shape_mask, dtype=np.uint8)
        width = mask.shape[1]
        half = width // 2
        self.min_dx = -(half + 1)
        self.max_dx = (width - 1 - half) + 1
        self.offsets = np.arange(self.min_dx, self.max_dx + 1)
        n = self.offsets.size
        # a bucket is admissible iff its column holds at least one set cell
        columns = mask.any(axis=0)
        self.admissible = np.zeros(n, dtype=bool)
        for i, dx in enumerate(self.offsets):
            col = dx + half
            if 0 <= col < width:
                self.admissible[i] = bool(columns[col])
        self.horizon = horizon
        self.prior = float(prior)
        self.count = np.zeros(n, dtype=np.float64)
        self.mean = np.zeros(n, dtype=np.float64)
        self.m2 = np.zeros(n, dtype=np.float64)
        self.pending: list[PendingContact] = []
        self.dropped_rewards = 0

    # -- recording -----------------------------------------------------------

    def bucket_of(self, dx: int) -> int:
        return int(np.clip(dx, self.min_dx, self.max_dx)) - self.min_dx

    def record_contact(self, dx: int, tick: int) -> None:
        """Open a pending contact; later contacts in the same tick merge."""
        if self.pending and self.pending[-1].tick == tick:
            return  # first contact of the tick owns the pending slot
        self.pending.append(PendingContact(self.bucket_of(dx), tick, tick + self.horizon))

    def record_miss(self, dx: int, tick: int) -> None:
        """Synthetic contact for a ball that passed the shape uncontacted.

        The offset is quantized like a physical contact, so misses beyond
        the edge land in the beyond-edge buckets and drains through a gap
        land in the gap's (never sampled) buckets.
        """
        if self.pending and self.pending[-1].tick == tick:
            return
        self.pending.append(
            PendingContact(self.bucket_of(dx), tick, tick + self.horizon, synthetic=True))

    def settle_rewards(self, reward_events, current_tick: int) -> None:
        """Credit each reward to the newest live pending; settle expired ones."""
        for event in reward_events:
            target = None
            for pc in reversed(self.pending):
                if pc.deadline > event.tick:
                    target = pc
                    break
            if target is None:
                self.dropped_rewards += 1
                continue
            target.credit += event.amount
        still_open = []
        for pc in self.pending:
            if pc.deadline <= current_tick:
                self._settle(pc)
            else:
                still_open.append(pc)
        self.pending = still_open

    def flush(self) -> None:
        """Settle everything immediately (episode end)."""
        for pc in self.pending:
            self._settle(pc)
        self.pending = []

    def _settle(self, pc: PendingContact) -> None:
        i = pc.bucket
        self.count[i] += 1.0
        delta = pc.credit - self.mean[i]
        self.mean[i] += delta / self.count[i]
        self.m2[i] += delta * (pc.credit - self.mean[i])

    # -- queries ---------------------------------------------------------------

    def expected_reward(self, dx: int) -> float:
        """Count-weighted triangular smoothing, restricted to like buckets."""
        i = self.bucket_of(dx)
        same_region = self.admissible[i]
        acc = 0.0
        wsum = 0.0
        for d in range(-2, 3):
            j = i + d
            if j < 0 or j >= self.offsets.size:
                continue
            if self.admissible[j] != same_region:
                continue
            w = KERNEL_WEIGHTS[abs(d)] * self.count[j]
            acc += w * self.mean[j]
            wsum += w
        if wsum == 0.0:
            return self.prior
        return acc / wsum

    def expected_curve(self) -> np.ndarray:
        return np.array([self.expected_reward(dx) for dx in self.offsets])

    def variance(self, dx: int) -> float:
        i = self.bucket_of(dx)
        if self.count[i] < 1:
            return 0.0
        return self.m2[i] / self.count[i]

    def sample_contact_point(self, rng: np.random.Generator,
                             tau: float) -> tuple[int, int]:
        """Draw a within-shape offset with probability softmax(value / tau)."""
        if tau <= 0:
            raise ConfigError("temperature must be > 0")
        idx = np.nonzero(self.admissible)[0]
        values = np.array([self.expected_reward(self.offsets[i]) for i in idx])
        logits = values / tau
        logits -= logits.max()
        probs = np.exp(logits)
        probs /= probs.sum()
        choice = rng.choice(idx.size, p=probs)
        return int(self.offsets[idx[choice]]), 0

    def sampling_probabilities(self, tau: float) -> tuple[np.ndarray, np.ndarray]:
        """(admissible offsets, softmax probabilities) for analysis and tests."""
        idx = np.nonzero(self.admissible)[0]
        values = np.array([self.expected_reward(self.offsets[i]) for i in idx])
        logits = values / tau
        logits -= logits.max()
        probs = np.exp(logits)
        probs /= probs.sum()
        return self.offsets[idx], probs

    # -- export ------------------------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("bucket_dx,count,mean,variance\n")
            for i, dx in enumerate(self.offsets):
                var = float(self.m2[i] / self.count[i]) if self.count[i] else 0.0
                fh.write(f"{dx},{int(self.count[i])},{float(self.mean[i])!r},{var!r}\n")
