"""Text encodings of points, matrices and sequences, with line/column errors."""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Callable

import numpy as np

from horoforge.geometries.currents import SlopeCurrent

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1, source: str = "<input>"):
        super().__init__(f"{source}: line {line}, column {column}: {message}")
        self.message, self.line, self.column, self.source = message, line, column, source


def _skip_ws(s: str, pos: int) -> int:
    while pos < len(s) and s[pos].isspace():
        pos += 1
    return pos


def parse_complex(text: str, line: int = 1, offset: int = 0, source: str = "<input>") -> complex:
    """Parse "a+bi" forms: "2i", "-i", "1 + 2.5i", "3", "1e-3-2i"."""
    s = text
    pos = _skip_ws(s, 0)
    re_part = im_part = None
    first = True
    if pos == len(s):
        raise ParseError("empty complex number", line, offset + 1, source)
    while pos < len(s):
        start = pos
        sign = 1.0
        if s[pos] in "+-":
            sign = -1.0 if s[pos] == "-" else 1.0
            pos = _skip_ws(s, pos + 1)
        elif not first:
            raise ParseError(f"expected '+' or '-', found {s[pos]!r}", line, offset + pos + 1, source)
        m = _NUMBER.match(s, pos)
        value = 1.0
        if m:
            value = float(m.group())
            pos = m.end()
        is_imag = pos < len(s) and s[pos] in "ij"
        if is_imag:
            pos += 1
        elif not m:
            found = repr(s[pos]) if pos < len(s) else "end of input"
            raise ParseError(f"expected a number, found {found}", line, offset + pos + 1, source)
        if is_imag:
            if im_part is not None:
                raise ParseError("imaginary part given twice", line, offset + start + 1, source)
            im_part = sign * value
        else:
            if re_part is not None or im_part is not None:
                raise ParseError("real part must come first and only once", line, offset + start + 1, source)
            re_part = sign * value
        first = False
        pos = _skip_ws(s, pos)
    return complex(re_part or 0.0, im_part or 0.0)


def parse_reals(text: str, line: int = 1, offset: int = 0, source: str = "<input>") -> list[float]:
    """Comma- or whitespace-separated reals, optionally in brackets."""
    out = []
    for m in re.finditer(r"[^\s,()\[\]]+", text):
        try:
            out.append(float(m.group()))
        except ValueError:
            raise ParseError(f"not a number: {m.group()!r}", line, offset + m.start() + 1, source) from None
    if not out:
        raise ParseError("expected at least one number", line, offset + 1, source)
    return out


def parse_slope(text: str, line: int = 1, offset: int = 0, source: str = "<input>") -> SlopeCurrent:
    """A current: "p,q", "p,q,w", atoms joined by ';', or a JSON list of [p, q, w]."""
    stripped = text.strip()
    if stripped.startswith("[["):
        try:
            return SlopeCurrent.from_any(json.loads(stripped))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line, offset + exc.colno, source) from None
        except ValueError as exc:
            raise ParseError(str(exc), line, offset + 1, source) from None
    atoms = []
    col = 0
    for chunk in text.split(";"):
        vals = parse_reals(chunk, line, offset + col, source)
        if len(vals) not in (2, 3):
            raise ParseError(f"a slope atom needs 2 or 3 numbers, got {len(vals)}", line, offset + col + 1, source)
        atoms.append(tuple(vals) + ((1.0,) if len(vals) == 2 else ()))
        col += len(chunk) + 1
    try:
        return SlopeCurrent(tuple(atoms))
    except ValueError as exc:
        raise ParseError(str(exc), line, offset + 1, source) from None


def parse_matrix(text: str, source: str = "<input>") -> np.ndarray:
    """2x2 matrix as "a b; c d", "a,b;c,d" or JSON [[a, b], [c, d]]."""
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            m = np.array(json.loads(stripped), dtype=float)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, 1, exc.colno, source) from None
    else:
        rows, col = [], 0
        for chunk in text.split(";"):
            rows.append(parse_reals(chunk, 1, col, source))
            col += len(chunk) + 1
        if len({len(r) for r in rows}) != 1:
            raise ParseError("matrix rows have different lengths", 1, 1, source)
        m = np.array(rows)
    if m.shape != (2, 2):
        raise ParseError(f"expected a 2x2 matrix, got shape {m.shape}", 1, 1, source)
    return m


def point_parser(domain) -> Callable[..., Any]:
    """Text parser for points of ``domain``, chosen by its kind."""
    kind = domain.kind
    if kind == "complex-upper-half-plane":
        return parse_complex
    if kind in ("real-vector", "polytope-interior"):
        return lambda text, line=1, offset=0, source="<input>": np.array(parse_reals(text, line, offset, source))
    if kind == "slope-current":
        return parse_slope
    if kind == "real-parameter":
        return lambda text, line=1, offset=0, source="<input>": _single(parse_reals(text, line, offset, source), line, offset, source)
    if kind == "facet-index":
        return lambda text, line=1, offset=0, source="<input>": _integer(text, line, offset, source)
    raise ValueError(f"no text encoding for {kind!r} points")


def _single(vals, line, offset, source):
    if len(vals) != 1:
        raise ParseError(f"expected one number, got {len(vals)}", line, offset + 1, source)
    return vals[0]


def _integer(text, line, offset, source):
    t = text.strip()
    if not re.fullmatch(r"\d+", t):
        raise ParseError(f"expected a facet index, got {t!r}", line, offset + 1, source)
    return int(t)


def parse_point(domain, text: str, line: int = 1, offset: int = 0, source: str = "<input>"):
    point = point_parser(domain)(text, line, offset, source)
    try:
        return domain.check(point)
    except ValueError as exc:
        raise ParseError(str(exc), line, offset + 1, source) from None


def parse_point_list(domain, text: str, source: str = "<input>") -> list:
    """Points separated by ';' on one line (used for config values)."""
    pts, col = [], 0
    for chunk in text.split(";"):
        if chunk.strip():
            pts.append(parse_point(domain, chunk, 1, col, source))
        col += len(chunk) + 1
    return pts


def read_points(domain, path) -> list:
    """One point per line; '#' starts a comment, blank lines are skipped."""
    pts = []
    source = str(path)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        pts.append(parse_point(domain, body, lineno, 0, source))
    if not pts:
        raise ParseError("no points found", 1, 1, source)
    return pts


def to_jsonable(obj):
    """Plain JSON value for any point encoding used by the built-in domains."""
    if isinstance(obj, SlopeCurrent):
        return obj.to_json()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj.reshape(-1)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    return obj


def format_point(obj) -> str:
    """Compact text form, readable back by the matching parser."""
    if isinstance(obj, complex):
        return f"{obj.real!r}{'+' if obj.imag >= 0 else '-'}{abs(obj.imag)!r}i"
    if isinstance(obj, SlopeCurrent):
        return ";".join(f"{p!r},{q!r},{w!r}" for p, q, w in obj.atoms)
    if isinstance(obj, np.ndarray):
        return " ".join(repr(float(v)) for v in obj)
    return repr(obj)
