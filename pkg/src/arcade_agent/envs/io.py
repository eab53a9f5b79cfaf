"""File interfaces: PPM frame dumps, packed frame logs, CSV event logs."""

from __future__ import annotations

import csv

import numpy as np

from ..errors import ParseError
from .render import rgb_palette_for

_FRAME_LOG_MAGIC = b"AFRM"


def write_ppm(path, frame: np.ndarray, rgb_table: np.ndarray | None = None) -> None:
    """Dump a palette-indexed frame as a binary (P6) portable pixmap."""
    if rgb_table is None:
        rgb_table = rgb_palette_for()
    h, w = frame.shape
    rgb = rgb_table[frame]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.astype(np.uint8).tobytes())


def read_ppm(path, rgb_table: np.ndarray | None = None) -> np.ndarray:
    """Read a P6 pixmap back into a palette-indexed frame."""
    if rgb_table is None:
        rgb_table = rgb_palette_for()
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P6":
        raise ParseError(f"{path} is not a binary PPM")
    try:
        w, h = (int(v) for v in parts[1].split())
        maxval = int(parts[2])
    except ValueError as exc:
        raise ParseError(f"bad PPM header in {path}") from exc
    if maxval != 255:
        raise ParseError(f"unsupported maxval {maxval} in {path}")
    rgb = np.frombuffer(parts[3][: w * h * 3], dtype=np.uint8).reshape(h, w, 3)
    lookup = {tuple(rgb_table[i]): i for i in range(len(rgb_table))}
    frame = np.zeros((h, w), dtype=np.uint8)
    colors = rgb.reshape(-1, 3)
    uniq, inverse = np.unique(colors, axis=0, return_inverse=True)
    idx_of = np.empty(len(uniq), dtype=np.uint8)
    for i, color in enumerate(uniq):
        key = tuple(int(c) for c in color)
        if key not in lookup:
            raise ParseError(f"unknown color {key} in {path}")
        idx_of[i] = lookup[key]
    frame = idx_of[inverse].reshape(h, w)
    return frame


def write_frame_log(path, frames) -> None:
    """Pack a sequence of equally-sized frames into one binary log."""
    frames = list(frames)
    if not frames:
        raise ValueError("empty frame sequence")
    h, w = frames[0].shape
    with open(path, "wb") as fh:
        fh.write(_FRAME_LOG_MAGIC)
        fh.write(np.array([w, h, len(frames)], dtype="<u4").tobytes())
        for frame in frames:
            if frame.shape != (h, w):
                raise ValueError("frame dimensions differ within one log")
            fh.write(np.ascontiguousarray(frame, dtype=np.uint8).tobytes())


def read_frame_log(path) -> list[np.ndarray]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _FRAME_LOG_MAGIC:
            raise ParseError(f"{path} is not a frame log")
        w, h, count = np.frombuffer(fh.read(12), dtype="<u4")
        frames = []
        for _ in range(int(count)):
            raw = fh.read(int(w) * int(h))
            if len(raw) != w * h:
                raise ParseError(f"truncated frame log {path}")
            frames.append(np.frombuffer(raw, dtype=np.uint8).reshape(int(h), int(w)).copy())
    return frames


class EventLogWriter:
    """Append-only CSV event log: tick, event_type, fields ("k=v;k=v")."""

    HEADER = ("tick", "event_type", "fields")

    def __init__(self, path):
        self._fh = open(path, "a", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh)
        if self._fh.tell() == 0:
            self._writer.writerow(self.HEADER)

    def log(self, tick: int, event_type: str, fields: dict) -> None:
        packed = ";".join(f"{k}={v}" for k, v in fields.items())
        self._writer.writerow((tick, event_type, packed))

    def log_reward(self, event) -> None:
        self.log(event.tick, "reward", {"amount": event.amount})

    def log_contact(self, event) -> None:
        self.log(event.tick, "contact", {
            "controllable": event.controllable_id,
            "other": event.other_id,
            "dx": event.offset[0],
            "dy": event.offset[1],
        })

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def read_event_log(path) -> list[tuple[int, str, dict]]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != EventLogWriter.HEADER:
            raise ParseError(f"{path} missing event log header")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError(f"bad event row in {path}", lineno)
            fields = {}
            if row[2]:
                for pair in row[2].split(";"):
                    key, _, value = pair.partition("=")
                    fields[key] = value
            out.append((int(row[0]), row[1], fields))
    return out
