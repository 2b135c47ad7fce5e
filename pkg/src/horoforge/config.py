"""Run configuration: an INI-style file of ``key = value`` lines under sections."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from horoforge.metric import SearchConfig
from horoforge.parsing import ParseError

FORMATS = ("json", "csv")


def _ints(text: str) -> tuple:
    vals = tuple(int(v) for v in text.replace(",", " ").split())
    if not vals:
        raise ValueError("empty integer list")
    return vals


@dataclass(frozen=True)
class RunConfig:
    geometry: str = "minsky"
    seed: int = 0
    format: str = "json"
    search: SearchConfig = field(default_factory=SearchConfig)
    # geometry parameters
    dim: int = 2
    polytope: Optional[str] = None
    n_dirs: int = 64
    plugin: Optional[str] = None
    # landmarks, as text in the geometry's point encoding
    landmarks: Optional[str] = None
    basepoint: Optional[str] = None
    # boundary
    boundary_tol: float = 1e-10
    boundary_k_max: int = 80
    # translation and north-south
    n_list: tuple = tuple(range(1, 13))
    functional_n_list: tuple = (8, 10, 12)
    ns_iters: int = 40
    ns_tol: float = 1e-9
    ns_probes: int = 5
    # invariance
    invariance_samples: int = 50
    invariance_tol: float = 1e-9
    # matrix
    asymmetry_tol: float = 1e-9

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        for name in ("boundary_tol", "ns_tol", "invariance_tol", "asymmetry_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("dim", "n_dirs", "boundary_k_max", "ns_iters", "ns_probes", "invariance_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def search_config(self) -> SearchConfig:
        return replace(self.search, seed=self.seed)


# section -> key -> (RunConfig field or "search.<field>", converter)
SCHEMA = {
    "run": {"geometry": ("geometry", str), "seed": ("seed", int), "format": ("format", str)},
    "search": {
        "initial_grid_size": ("search.initial_grid_size", int),
        "local_search_steps": ("search.local_search_steps", int),
        "step_shrink": ("search.step_shrink", float),
        "restarts": ("search.restarts", int),
        "min_step": ("search.min_step", float),
    },
    "geometry": {"dim": ("dim", int), "polytope": ("polytope", str), "n_dirs": ("n_dirs", int), "plugin": ("plugin", str)},
    "landmarks": {"points": ("landmarks", str), "basepoint": ("basepoint", str)},
    "boundary": {"tol": ("boundary_tol", float), "k_max": ("boundary_k_max", int)},
    "translation": {
        "n_list": ("n_list", _ints),
        "functional_n_list": ("functional_n_list", _ints),
        "iters": ("ns_iters", int),
        "tol": ("ns_tol", float),
        "probes": ("ns_probes", int),
    },
    "invariance": {"samples": ("invariance_samples", int), "tol": ("invariance_tol", float)},
    "matrix": {"asymmetry_tol": ("asymmetry_tol", float)},
}


def _locate(lines: list[str], section: str, key: Optional[str] = None, at_value: bool = False) -> tuple[int, int]:
    """1-based (line, column) of a section header, a key, or the value after a key."""
    current = None
    for i, raw in enumerate(lines, 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip().lower()
            if key is None and current == section:
                return i, raw.index("[") + 1
            continue
        if current == section and key is not None:
            name = s.split("=", 1)[0].split(":", 1)[0].strip().lower()
            if name == key:
                if not at_value:
                    return i, len(raw) - len(raw.lstrip()) + 1
                sep = min(j for j in (raw.find("="), raw.find(":")) if j >= 0)
                rest = raw[sep + 1:]
                return i, sep + 2 + len(rest) - len(rest.lstrip())
    return 1, 1


def parse_config(text: str, source: str = "<config>", base_dir: Optional[Path] = None) -> RunConfig:
    lines = text.splitlines()
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", 1) or 1
        raise ParseError(str(exc).splitlines()[0], line, 1, source) from None

    top: dict = {}
    search: dict = {}
    for section in cp.sections():
        sec = section.lower()
        if sec not in SCHEMA:
            raise ParseError(f"unknown section [{section}]", *_locate(lines, sec), source)
        for key, value in cp.items(section):
            if key not in SCHEMA[sec]:
                raise ParseError(f"unknown key {key!r} in [{section}]", *_locate(lines, sec, key), source)
            target, conv = SCHEMA[sec][key]
            try:
                v = conv(value.strip())
            except ValueError as exc:
                raise ParseError(f"bad value for {key}: {exc}", *_locate(lines, sec, key, True), source) from None
            if target.startswith("search."):
                search[target[7:]] = v
            else:
                top[target] = v
    if "polytope" in top and base_dir is not None and not Path(top["polytope"]).is_absolute():
        top["polytope"] = str(base_dir / top["polytope"])
    try:
        return RunConfig(search=SearchConfig(**search), **top)
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1, source) from None


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", 1, 1, str(path)) from None
    return parse_config(text, str(path), p.parent)


def config_keys() -> list[str]:
    return [f"[{s}] {k}" for s, keys in SCHEMA.items() for k in keys]


def overrides(cfg: RunConfig, **kw) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None and k in known})
