"""Plain-text key-value config files.

Format: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines ignored. Values parse to int, float, or string; comma-separated
values parse to tuples. Used for environment layouts and experiment specs.
"""

from __future__ import annotations

from .errors import ParseError


def _parse_scalar(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_kv_text(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value' on line {lineno}: {raw!r}", lineno)
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ParseError(f"empty key on line {lineno}", lineno)
        value = value.strip()
        if "," in value:
            out[key] = tuple(_parse_scalar(v) for v in value.split(",") if v.strip())
        else:
            out[key] = _parse_scalar(value)
    return out


def load_kv(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kv_text(fh.read())


def format_kv(pairs: dict) -> str:
    lines = []
    for key, value in pairs.items():
        if isinstance(value, (tuple, list)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def save_kv(path, pairs: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_kv(pairs))
