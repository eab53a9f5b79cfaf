"""Shared test oracles, independent of the implementations they check."""

from __future__ import annotations

import numpy as np


def fold_coordinate(p0: int, v: int, lo: int, hi: int, t: int) -> int:
    """Closed-form triangle-wave position after t ticks bouncing in [lo, hi].

    Models ideal specular reflection of a point moving |v| pixels per tick
    between flush positions lo and hi (inclusive).
    """
    span = hi - lo
    u = (p0 - lo + v * t) % (2 * span)
    return lo + min(u, 2 * span - u)


def fold_path(p0: tuple[int, int], v: tuple[int, int],
              x_range: tuple[int, int], y_range: tuple[int, int],
              ticks: int) -> np.ndarray:
    """(ticks, 2) array of folded positions for independent reflection checks."""
    out = np.empty((ticks, 2), dtype=np.int64)
    for t in range(1, ticks + 1):
        out[t - 1, 0] = fold_coordinate(p0[0], v[0], x_range[0], x_range[1], t)
        out[t - 1, 1] = fold_coordinate(p0[1], v[1], y_range[0], y_range[1], t)
    return out


def brute_force_match(eq: np.ndarray, tmpl: np.ndarray, gate_tl: np.ndarray):
    """Reference exact template matcher: plain python triple loop."""
    hh, ww = eq.shape
    th, tw = tmpl.shape
    found = []
    for ty in range(hh - th + 1):
        for tx in range(ww - tw + 1):
            if not gate_tl[ty, tx]:
                continue
            ok = True
            for r in range(th):
                for c in range(tw):
                    if tmpl[r, c] and not eq[ty + r, tx + c]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                found.append((tx, ty))
    return found


def brute_force_probe_bits(grid: np.ndarray, px: int, py: int,
                           offsets) -> list[int]:
    """Reference sensor: geometric overlap check per probe pixel."""
    h, w = grid.shape
    bits = []
    for dx, dy in offsets:
        x, y = px + dx, py + dy
        if x < 0 or x >= w or y < 0 or y >= h:
            bits.append(1)
        else:
            bits.append(1 if grid[y, x] else 0)
    return bits


def chi2_uniform_stat(counts) -> float:
    """Pearson chi-square statistic against the uniform distribution."""
    counts = np.asarray(counts, dtype=np.float64)
    expected = counts.sum() / counts.size
    return float(((counts - expected) ** 2 / expected).sum())


# upper 1% critical values of the chi-square distribution by dof
CHI2_CRIT_1PCT = {
    1: 6.635, 2: 9.210, 3: 11.345, 4: 13.277, 5: 15.086,
    6: 16.812, 7: 18.475, 8: 20.090, 9: 21.666, 10: 23.209,
    15: 30.578, 16: 32.000, 17: 33.409, 20: 37.566,
}
