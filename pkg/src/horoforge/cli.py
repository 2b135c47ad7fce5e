"""Command-line front end.

Verbs: distance, matrix, boundary, translation, invariance, verify.
Exit codes: 0 ok, 1 a check failed (criterion, invariance, divergence),
2 usage or parse error.  Reports are byte-identical for a fixed config
and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from horoforge.acceptance import VerifyOptions, run_all
from horoforge.config import RunConfig, load_config, overrides
from horoforge.domains import DomainError
from horoforge.dynamics import (
    detect_north_south,
    invariance_defect,
    translation_length_functional,
    translation_length_metric,
)
from horoforge.horo import DivergenceError, LandmarkSet, boundary_limit, boundary_trace
from horoforge.metric import distance, distance_on_witnesses, symmetrize, witness_grid
from horoforge.parsing import (
    ParseError,
    format_point,
    parse_matrix,
    parse_point,
    parse_point_list,
    parse_reals,
    read_points,
    to_jsonable,
)
from horoforge.registry import build_geometry, default_landmarks, random_point

SCHEMA = "horoforge/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- output ----------------------------------------------------------------


def _json_text(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _header(cfg: RunConfig, command: str, I) -> dict:
    return {"schema": SCHEMA, "command": command, "geometry": I.name, "seed": cfg.seed}


# --- shared helpers --------------------------------------------------------


def _landmarks(cfg: RunConfig, I) -> LandmarkSet:
    pts = parse_point_list(I.M, cfg.landmarks, "[landmarks] points") if cfg.landmarks else default_landmarks(I.M)
    base = parse_point(I.M, cfg.basepoint, source="[landmarks] basepoint") if cfg.basepoint else None
    return LandmarkSet.build(I, pts, basepoint=base)


def _matrix_arg(text: str) -> np.ndarray:
    vals = parse_reals(text, source="matrix") if ";" not in text and not text.strip().startswith("[") else None
    if vals is not None and len(vals) == 4:
        return np.array(vals).reshape(2, 2)
    return parse_matrix(text, source="matrix")


def _group_element(I, text: str):
    if I.action_builder is None:
        raise UsageError(f"geometry {I.name!r} has no group action")
    m = _matrix_arg(text)
    if np.all(np.mod(m, 1) == 0):
        m = m.astype(int)
    return I.action_builder(m.tolist()), m


def parse_sequence(I, spec: str) -> Callable[[int], object]:
    """Sequence specs for ``boundary``:

    constant:POINT            z_k = POINT
    geometric:RATIO[:START]   z_k = START * RATIO^k         (real parameters)
    ray:VECTOR                z_k = (k + 1) * VECTOR        (real vectors)
    vertical:POINT[:RATIO]    z_k = Re + i Im * RATIO^k     (half-plane, RATIO default 2)
    orbit:MATRIX:POINT        z_k = g^k POINT, MATRIX as a,b,c,d
    """
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise ParseError("sequence spec needs the form kind:argument", 1, len(spec) + 1, "sequence")
    off = len(kind) + 1
    N = I.N
    if kind == "constant":
        z = parse_point(N, rest, 1, off, "sequence")
        return lambda k: z
    if kind == "geometric":
        parts = rest.split(":")
        ratio = parse_reals(parts[0], 1, off, "sequence")[0]
        start = parse_reals(parts[1], 1, off + len(parts[0]) + 1, "sequence")[0] if len(parts) > 1 else 1.0
        return lambda k: N.check(start * ratio**k)
    if kind == "ray":
        v = np.array(parse_reals(rest, 1, off, "sequence"))
        return lambda k: N.check((k + 1) * v)
    if kind == "vertical":
        parts = rest.split(":")
        z = parse_point(N, parts[0], 1, off, "sequence")
        ratio = parse_reals(parts[1], 1, off + len(parts[0]) + 1, "sequence")[0] if len(parts) > 1 else 2.0
        return lambda k: complex(z.real, z.imag * ratio**k)
    if kind == "orbit":
        mtext, sep2, ptext = rest.partition(":")
        if not sep2:
            raise ParseError("orbit needs MATRIX:POINT", 1, len(spec) + 1, "sequence")
        g, _ = _group_element(I, mtext)
        z0 = parse_point(N, ptext, 1, off + len(mtext) + 1, "sequence")
        return lambda k: g.power_N(z0, k)
    raise ParseError(f"unknown sequence kind {kind!r}", 1, 1, "sequence")


# --- verbs -----------------------------------------------------------------


def cmd_distance(cfg: RunConfig, I, args) -> tuple[str, int]:
    x = parse_point(I.M, args.x, source="x")
    y = parse_point(I.M, args.y, source="y")
    est = distance(I, x, y, cfg.search_config())
    rep = _header(cfg, "distance", I)
    rep.update(
        x=x, y=y, lower_bound=est.lower_bound, oracle=est.oracle_value, gap=est.gap,
        argmax_witness=est.argmax_witness, iterations=est.refinement_iterations,
        witness_count=est.witness_count, flags=list(est.flags),
    )
    if args.symmetrize:
        back = distance(I, y, x, cfg.search_config())
        rep.update(reverse_lower_bound=back.lower_bound, reverse_witness_count=back.witness_count,
                   symmetrized=symmetrize(est.lower_bound, back.lower_bound))
    if cfg.format == "json":
        return _json_text(rep), EXIT_OK
    keys = ["geometry", "x", "y", "lower_bound", "oracle", "gap", "argmax_witness", "iterations", "witness_count", "flags"]
    if args.symmetrize:
        keys += ["reverse_lower_bound", "reverse_witness_count", "symmetrized"]
    row = [format_point(rep[k]) if k in ("x", "y", "argmax_witness") else (";".join(rep[k]) if k == "flags" else rep[k]) for k in keys]
    return _csv_text([keys, row]), EXIT_OK


def cmd_matrix(cfg: RunConfig, I, args) -> tuple[str, int]:
    pts = read_points(I.M, args.points)
    n = len(pts)
    D = np.zeros((n, n))
    C = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            if i == j:
                W = witness_grid(I, pts[i], pts[i], cfg.search_config())
                est = distance_on_witnesses(I, pts[i], pts[i], W)
            else:
                est = distance(I, pts[i], pts[j], cfg.search_config())
            D[i, j], C[i, j] = est.lower_bound, est.witness_count
    asym = [[i, j, D[i, j], D[j, i]] for i in range(n) for j in range(i + 1, n) if abs(D[i, j] - D[j, i]) > cfg.asymmetry_tol]
    S = np.maximum(D, D.T)
    if cfg.format == "json":
        rep = _header(cfg, "matrix", I)
        rep.update(points=pts, matrix=D.tolist(), witness_counts=C.tolist(), asymmetric_entries=asym,
                   asymmetry_tol=cfg.asymmetry_tol)
        if args.symmetrize:
            rep["symmetrized"] = S.tolist()
        return _json_text(rep), EXIT_OK
    names = [f"p{i}" for i in range(n)]
    rows = [["from\\to"] + names] + [[names[i]] + [float(v) for v in D[i]] for i in range(n)]
    rows += [[], ["witness_count"] + names] + [[names[i]] + [int(v) for v in C[i]] for i in range(n)]
    if args.symmetrize:
        rows += [[], ["symmetrized"] + names] + [[names[i]] + [float(v) for v in S[i]] for i in range(n)]
    if asym:
        rows += [[], ["asymmetric_from", "asymmetric_to", "forward", "backward"]]
        rows += [[names[i], names[j], float(a), float(b)] for i, j, a, b in asym]
    return _csv_text(rows), EXIT_OK


def cmd_boundary(cfg: RunConfig, I, args) -> tuple[str, int]:
    seq = parse_sequence(I, args.sequence)
    L = _landmarks(cfg, I)
    status, code, osc = "converged", EXIT_OK, None
    try:
        lim = boundary_limit(I, seq, L, cfg.boundary_tol, cfg.boundary_k_max)
        last = lim.label[1]
        traj = [h.values for _, h in zip(range(last + 1), boundary_trace(I, seq, L, last))]
        limit = lim.values
    except DivergenceError as exc:
        status, code, osc = "divergent", EXIT_FAIL, exc.oscillation
        traj = [h.values for h in exc.trajectory]
        limit = None
    if cfg.format == "json":
        rep = _header(cfg, "boundary", I)
        rep.update(sequence=args.sequence, landmarks=list(L.points), basepoint_index=L.base_index,
                   landmark_count=len(L), iterates=len(traj), tol=cfg.boundary_tol, status=status,
                   trajectory=[list(map(float, v)) for v in traj],
                   limit=None if limit is None else list(map(float, limit)), oscillation=osc)
        return _json_text(rep), code
    rows = [["iterate", "landmark_index", "landmark", "value"]]
    for k, vals in enumerate(traj):
        rows += [[k, i, format_point(p), float(v)] for i, (p, v) in enumerate(zip(L.points, vals))]
    if limit is not None:
        rows += [["limit", i, format_point(p), float(v)] for i, (p, v) in enumerate(zip(L.points, limit))]
    else:
        rows.append(["divergent", "", "", float(osc)])
    return _csv_text(rows), code


def _check_invariance(cfg, I, g, rng, samples):
    pairs = [(random_point(I.M, rng), random_point(I.N, rng)) for _ in range(samples)]
    return invariance_defect(I, g, pairs)


def cmd_invariance(cfg: RunConfig, I, args) -> tuple[str, int]:
    g, m = _group_element(I, args.matrix)
    rng = np.random.default_rng(cfg.seed)
    defect = _check_invariance(cfg, I, g, rng, cfg.invariance_samples)
    ok = defect <= cfg.invariance_tol
    rep = _header(cfg, "invariance", I)
    rep.update(matrix=m.tolist(), samples=cfg.invariance_samples, defect=defect, tol=cfg.invariance_tol, passed=ok)
    if cfg.format == "json":
        return _json_text(rep), EXIT_OK if ok else EXIT_FAIL
    keys = ["geometry", "samples", "defect", "tol", "passed"]
    return _csv_text([keys, [rep[k] for k in keys]]), EXIT_OK if ok else EXIT_FAIL


def cmd_translation(cfg: RunConfig, I, args) -> tuple[str, int]:
    from horoforge.geometries.torus import axis_point, dilatation

    g, m = _group_element(I, args.matrix)
    rng = np.random.default_rng(cfg.seed)
    defect = _check_invariance(cfg, I, g, rng, 20)
    if defect > cfg.invariance_tol:
        raise UsageError(f"the action does not preserve I (defect {defect:.3g}); translation lengths need an invariant action")
    torus = I.name.startswith("torus")
    if args.basepoint:
        x = parse_point(I.M, args.basepoint, source="basepoint")
    elif torus and abs(m[0, 0] + m[1, 1]) > 2 and m[1, 0] != 0:
        x = axis_point(m.astype(int))
    else:
        x = default_landmarks(I.M)[0]
    y = parse_point(I.N, args.probe, source="probe") if args.probe else random_point(I.N, rng)

    search = cfg.search_config()
    td = translation_length_metric(lambda a, b: distance(I, a, b, search), g, x, cfg.n_list)
    tf = translation_length_functional(I, g, x, y, cfg.functional_n_list)
    tb = translation_length_functional(I, g.inverse, x, y, cfg.functional_n_list)
    rep = _header(cfg, "translation", I)
    rep.update(matrix=m.tolist(), basepoint=x, probe=y, metric=td.to_json(), functional=tf.to_json(),
               functional_inverse=tb.to_json(), witness_grid_size=search.initial_grid_size)
    if torus:
        rep["log_dilatation"] = math.log(dilatation(m.astype(int)))
    if I.N.kind == "slope-current":
        L = _landmarks(cfg, I)
        probes = [random_point(I.N, rng) for _ in range(cfg.ns_probes)]
        ns = detect_north_south(I, g, probes, L, cfg.ns_iters, cfg.ns_tol, cfg.functional_n_list)
        rep["north_south"] = {**ns.to_json(), "landmark_count": len(L), "probes": len(probes)}
    if cfg.format == "json":
        return _json_text(rep), EXIT_OK
    rows = [["method", "n", "value"]]
    for name, est in (("metric", td), ("functional", tf), ("functional_inverse", tb)):
        rows += [[name, n, float(v)] for n, v in est.values]
        rows.append([name, "extrapolated", float(est.extrapolated)])
    if torus:
        rows.append(["log_dilatation", "", rep["log_dilatation"]])
    return _csv_text(rows), EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> tuple[str, int]:
    try:
        only = tuple(int(v) for v in args.criteria.split(",")) if args.criteria else None
    except ValueError:
        raise UsageError(f"--criteria needs comma-separated integers, got {args.criteria!r}") from None
    opts = VerifyOptions(seed=cfg.seed, corrupt_convention=args.corrupt_convention, tol_override=args.tol_override, only=only)
    results = run_all(opts)
    ok = all(r.passed for r in results)
    if cfg.format == "json":
        lines = []
        for r in results:
            d = {"schema": SCHEMA, **r.to_json(args.timings)}
            lines.append(json.dumps(to_jsonable(d), sort_keys=True))
        return "\n".join(lines) + "\n", EXIT_OK if ok else EXIT_FAIL
    rows = [["criterion", "name", "passed", "measured", "tolerance", "units", "failed_invariant"]]
    rows += [[r.id, r.name, r.passed, float(r.measured), float(r.tolerance), r.units, r.failed_invariant] for r in results]
    return _csv_text(rows), EXIT_OK if ok else EXIT_FAIL


# --- argument parsing ------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", metavar="PATH", default=d, help="INI-style run configuration")
    p.add_argument("--seed", type=int, default=d, help="overrides [run] seed")
    p.add_argument("--out", metavar="PATH", default=d, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=d, help="overrides [run] format")
    p.add_argument("--geometry", default=d, help="overrides [run] geometry")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="horoforge", description="Distances and horofunctions induced by a bifunctional.")
    _add_common(parser, False)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("distance", help="lower-bound estimate of d(x, y)")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--symmetrize", action="store_true", help="also compute d(y, x) and the max of both")

    p = sub.add_parser("matrix", help="all-pairs distance matrix of a points file")
    p.add_argument("points")
    p.add_argument("--symmetrize", action="store_true")

    p = sub.add_parser("boundary", help="horofunction trajectory of a sequence in N")
    p.add_argument("sequence", help="e.g. geometric:2, constant:0, ray:1,0, orbit:2,1,1,1:1,0")

    p = sub.add_parser("translation", help="translation lengths of a group element")
    p.add_argument("--matrix", required=True, help="2x2 matrix, e.g. '2 1; 1 1'")
    p.add_argument("--basepoint")
    p.add_argument("--probe")

    p = sub.add_parser("invariance", help="check I(g m, g n) = I(m, n) on random samples")
    p.add_argument("--matrix", required=True)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--criteria", help="comma-separated criterion ids (default: all)")
    p.add_argument("--corrupt-convention", action="store_true", help="negative control: wrong slope action")
    p.add_argument("--tol-override", type=float, help="replace every tolerance (e.g. 1e-15)")
    p.add_argument("--timings", action="store_true", help="include wall-clock times (not byte-deterministic)")

    for sp in sub.choices.values():
        _add_common(sp, True)
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    try:
        return overrides(cfg, seed=args.seed, format=args.format, geometry=args.geometry)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


VERBS = {
    "distance": cmd_distance,
    "matrix": cmd_matrix,
    "boundary": cmd_boundary,
    "translation": cmd_translation,
    "invariance": cmd_invariance,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if args.verb == "verify":
            text, code = cmd_verify(cfg, args)
        else:
            I = build_geometry(cfg)
            text, code = VERBS[args.verb](cfg, I, args)
    except (ParseError, UsageError, DomainError, ValueError, OSError, ImportError) as exc:
        print(f"horoforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(text, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
