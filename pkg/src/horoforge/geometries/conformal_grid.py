"""Brute-force extremal length on the flat torus over grid conformal metrics.

The conformal factor rho is piecewise constant on an n x n grid of the
fundamental parallelogram {s + t tau : s, t in [0, 1)}.  For each slope the
rho-length is bounded above by the minimum over a family of closed flat
geodesics in its class; maximizing

    (sum_i w_i min_k L_ik(rho))^2 / Area(rho)

is a second-order cone program.  Its optimum U is an upper bound for the
extremal length among grid metrics, while the flat metric attains the
closed form, so  closed form <= Ext <= U  on this family.

The geodesic offsets are spaced 1/(n m) apart and centred, so the midpoint
rule integrates each cell's crossing length exactly (it is piecewise linear
in the offset with kinks on the 1/n grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cvxpy as cp
import numpy as np
from scipy.sparse import coo_matrix

from horoforge.geometries.currents import SlopeCurrent
from horoforge.geometries.torus import torus_extremal_length


@dataclass(frozen=True)
class GridExtremalResult:
    upper_bound: float
    flat_value: float
    closed_form: float
    grid: int
    lines_per_slope: int
    status: str

    @property
    def relative_gap(self) -> float:
        return abs(self.upper_bound - self.closed_form) / self.closed_form


def _primitive(p: float, q: float) -> tuple[int, int, int]:
    if p != int(p) or q != int(q):
        raise ValueError("the grid oracle needs integer slopes")
    p, q = int(p), int(q)
    g = math.gcd(p, q)
    return p // g, q // g, g


def geodesic_crossings(tau: complex, p: int, q: int, n: int, c: float) -> tuple[np.ndarray, np.ndarray]:
    """Cells crossed by the closed geodesic {q s - p t = c} of class (p, q)
    and the flat length spent in each (rows may repeat a cell)."""
    if q != 0:
        s0, t0 = c / q, 0.0
    else:
        s0, t0 = 0.0, -c / p
    lam = [0.0, 1.0]
    if p != 0:
        js = np.arange(math.floor(n * min(s0, s0 + p)), math.ceil(n * max(s0, s0 + p)) + 1)
        lam.extend(((js / n) - s0) / p)
    if q != 0:
        js = np.arange(math.floor(n * min(t0, t0 + q)), math.ceil(n * max(t0, t0 + q)) + 1)
        lam.extend(((js / n) - t0) / q)
    lam = np.unique(np.clip(np.array(lam), 0.0, 1.0))
    mid = 0.5 * (lam[1:] + lam[:-1])
    dl = np.diff(lam)
    keep = dl > 1e-15
    mid, dl = mid[keep], dl[keep]
    i = np.floor(n * np.mod(s0 + mid * p, 1.0)).astype(int) % n
    j = np.floor(n * np.mod(t0 + mid * q, 1.0)).astype(int) % n
    return i * n + j, dl * abs(p + q * tau)


def _length_matrix(tau, p, q, n, m):
    K = n * m
    rows, cols, vals = [], [], []
    for k in range(K):
        cells, lens = geodesic_crossings(tau, p, q, n, (k + 0.5) / K)
        rows.append(np.full(cells.size, k))
        cols.append(cells)
        vals.append(lens)
    A = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(K, n * n))
    return A.tocsr()


def grid_extremal_length(tau, current: SlopeCurrent, n: int = 64, lines_per_cell: int = 1, solver: str = "CLARABEL") -> GridExtremalResult:
    tau = complex(tau)
    cell_area = tau.imag / (n * n)
    slopes = []
    for p, q, w in current.atoms:
        pp, qq, g = _primitive(p, q)
        slopes.append((pp, qq, w * g))
    mats = [_length_matrix(tau, p, q, n, lines_per_cell) for p, q, _ in slopes]

    rho = cp.Variable(n * n, nonneg=True)
    s = cp.Variable(len(slopes))
    cons = [cp.norm(rho, 2) <= 1.0 / math.sqrt(cell_area)]
    cons += [s[i] <= A @ rho for i, A in enumerate(mats)]
    weights = np.array([w for _, _, w in slopes])
    prob = cp.Problem(cp.Maximize(weights @ s), cons)
    prob.solve(solver=solver)
    if prob.value is None or prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"grid extremal-length program failed: {prob.status}")
    upper = float(prob.value) ** 2

    flat = np.full(n * n, 1.0 / math.sqrt(tau.imag))
    flat_len = sum(w * float(np.min(A @ flat)) for A, (_, _, w) in zip(mats, slopes))
    flat_value = flat_len**2 / (float(np.sum(flat**2)) * cell_area)
    return GridExtremalResult(upper, flat_value, torus_extremal_length(tau, current), n, n * lines_per_cell, prob.status)
