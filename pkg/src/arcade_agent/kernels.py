"""Hot numeric kernels: numba-jitted fast paths with pure-numpy fallbacks.

Three inner loops dominate runtime: the recursive trajectory rollout
(sequential single-sample network passes plus sensing), the sensor probe
reads, and exact template matching over frames. Each is exported twice:

* ``<name>_numpy`` -- the pure-numpy implementation, always available.
* ``<name>_jit``   -- the numba-compiled implementation, ``None`` when
  numba is unavailable or disabled.

The unsuffixed name is bound at import time to the jitted version when
``ARCADE_AGENT_NUMBA`` is unset/``1`` and numba imports cleanly, else to
the numpy version. ``benchmarks/bench_kernels.py`` times both paths.

Rounding convention: probe positions during rollout are quantized with
round-half-up on the already-clamped (hence non-negative) coordinates,
i.e. ``int(v + 0.5)``.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_FLAG = "ARCADE_AGENT_NUMBA"


def _numba_wanted() -> bool:
    return os.environ.get(NUMBA_FLAG, "1").strip().lower() not in ("0", "false", "off")


NUMBA_ENABLED = False
if _numba_wanted():
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


# --------------------------------------------------------------------------
# sensor probes
# --------------------------------------------------------------------------

def _sense_probes_loop(grid, px, py, pdx, pdy, out):
    h, w = grid.shape
    for j in range(pdx.shape[0]):
        x = px + pdx[j]
        y = py + pdy[j]
        if x < 0 or x >= w or y < 0 or y >= h:
            out[j] = 1  # beyond the playfield reads as wall
        elif grid[y, x] != 0:
            out[j] = 1
        else:
            out[j] = 0
    return out


def sense_probes_numpy(grid, px, py, pdx, pdy):
    """Overlap bits for m probe pixels around (px, py) on an occupancy grid."""
    xs = px + pdx
    ys = py + pdy
    h, w = grid.shape
    inside = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    out = np.ones(pdx.shape[0], dtype=np.uint8)
    out[inside] = (grid[ys[inside], xs[inside]] != 0).astype(np.uint8)
    return out


# --------------------------------------------------------------------------
# recursive trajectory rollout (fused forward pass + queue shift + sensing)
# --------------------------------------------------------------------------

def _rollout_loop(
    w0, b0, w1, b1,
    wxh, bxh, wxo, bxo,
    wyh, byh, wyo, byo,
    vel_q, sen_q, px, py, n,
    grid, pdx, pdy, xmax, ymax,
):
    """Run n recursive prediction steps of the split-head velocity network.

    Per step: flatten the (velocity, sensor) queues oldest-first, forward
    through trunk and the vx/vy heads, push the raw predicted velocity into
    the queue, advance the position, clamp it to the playfield (flagging
    clamped steps), then sense at the new position and push the reading.

    ``vel_q`` (k,2) and ``sen_q`` (k,m) are mutated in place; callers pass
    copies. Recorded velocities are the post-clamp position deltas so that
    ``positions[i] == positions[i-1] + velocities[i]`` holds exactly.
    """
    k = vel_q.shape[0]
    m = sen_q.shape[1]
    d = k * (2 + m)
    x_in = np.empty(d, dtype=np.float64)
    positions = np.empty((n, 2), dtype=np.float64)
    velocities = np.empty((n, 2), dtype=np.float64)
    clamped = np.zeros(n, dtype=np.uint8)
    gh, gw = grid.shape
    prevx = px
    prevy = py
    for i in range(n):
        for s in range(k):
            base = s * (2 + m)
            x_in[base] = vel_q[s, 0]
            x_in[base + 1] = vel_q[s, 1]
            for j in range(m):
                x_in[base + 2 + j] = sen_q[s, j]
        h0 = np.maximum(np.dot(w0, x_in) + b0, 0.0)
        h1 = np.maximum(np.dot(w1, h0) + b1, 0.0)
        hx = np.maximum(np.dot(wxh, h1) + bxh, 0.0)
        vx = np.dot(wxo, hx) + bxo
        hy = np.maximum(np.dot(wyh, h1) + byh, 0.0)
        vy = np.dot(wyo, hy) + byo
        for s in range(k - 1):
            vel_q[s, 0] = vel_q[s + 1, 0]
            vel_q[s, 1] = vel_q[s + 1, 1]
            for j in range(m):
                sen_q[s, j] = sen_q[s + 1, j]
        vel_q[k - 1, 0] = vx
        vel_q[k - 1, 1] = vy
        rawx = prevx + vx
        rawy = prevy + vy
        cx = min(max(rawx, 0.0), xmax)
        cy = min(max(rawy, 0.0), ymax)
        if cx != rawx or cy != rawy:
            clamped[i] = 1
        positions[i, 0] = cx
        positions[i, 1] = cy
        velocities[i, 0] = cx - prevx
        velocities[i, 1] = cy - prevy
        ipx = int(cx + 0.5)
        ipy = int(cy + 0.5)
        for j in range(m):
            qx = ipx + pdx[j]
            qy = ipy + pdy[j]
            if qx < 0 or qx >= gw or qy < 0 or qy >= gh:
                sen_q[k - 1, j] = 1.0
            elif grid[qy, qx] != 0:
                sen_q[k - 1, j] = 1.0
            else:
                sen_q[k - 1, j] = 0.0
        prevx = cx
        prevy = cy
    return positions, velocities, clamped


# The rollout body is written so the identical code runs untouched as the
# numpy fallback; only the binding differs.
rollout_numpy = _rollout_loop


# --------------------------------------------------------------------------
# exact template matching
# --------------------------------------------------------------------------

def _match_full_loop(eq, tmpl, gate_tl, out):
    hh, ww = eq.shape
    th, tw = tmpl.shape
    cnt = 0
    cap = out.shape[0]
    for ty in range(hh - th + 1):
        for tx in range(ww - tw + 1):
            if gate_tl[ty, tx] == 0:
                continue
            ok = True
            for r in range(th):
                for c in range(tw):
                    if tmpl[r, c] != 0 and eq[ty + r, tx + c] == 0:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                if cnt < cap:
                    out[cnt, 0] = tx
                    out[cnt, 1] = ty
                cnt += 1
    return cnt


def match_full_numpy(eq, tmpl, gate_tl):
    """Top-left positions where every set template cell matches ``eq``.

    ``eq`` is a uint8 equality mask (frame == palette index), ``gate_tl``
    a uint8 mask over valid top-left anchors. Returns an (n, 2) int64
    array of (x, y) anchors in row-major scan order.
    """
    hh, ww = eq.shape
    th, tw = tmpl.shape
    win = np.lib.stride_tricks.sliding_window_view(eq, (th, tw))
    sel = tmpl.astype(bool)
    ok = win[:, :, sel].all(axis=2)
    ok &= gate_tl.astype(bool)
    ys, xs = np.nonzero(ok)
    return np.stack([xs, ys], axis=1).astype(np.int64)


# --------------------------------------------------------------------------
# public bindings
# --------------------------------------------------------------------------

if NUMBA_ENABLED:
    _sense_probes_jit = _njit(cache=True)(_sense_probes_loop)
    rollout_jit = _njit(cache=True)(_rollout_loop)
    _match_full_jit = _njit(cache=True)(_match_full_loop)
else:
    _sense_probes_jit = None
    rollout_jit = None
    _match_full_jit = None


def sense_probes_jit(grid, px, py, pdx, pdy):
    out = np.empty(pdx.shape[0], dtype=np.uint8)
    _sense_probes_jit(grid, px, py, pdx, pdy, out)
    return out


def match_full_jit(eq, tmpl, gate_tl):
    hh, ww = eq.shape
    out = np.empty((hh * ww, 2), dtype=np.int64)
    cnt = _match_full_jit(eq, tmpl, gate_tl, out)
    return out[:cnt].copy()


if NUMBA_ENABLED:
    sense_probes = sense_probes_jit
    rollout = rollout_jit
    match_full = match_full_jit
else:  # pragma: no cover - exercised via ARCADE_AGENT_NUMBA=0 runs
    sense_probes = sense_probes_numpy
    rollout = rollout_numpy
    match_full = match_full_numpy
    sense_probes_jit = None
    match_full_jit = None
