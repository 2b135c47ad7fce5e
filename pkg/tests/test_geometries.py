import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horoforge.core import witnesses
from horoforge.domains import DomainError
from horoforge.geometries import (
    ConvexPolytope,
    SlopeCurrent,
    euclidean_inner,
    funk_polytope,
    liouville_discretize,
    make_torus_bifunctional,
    minsky_half_plane,
    minsky_inequality_check,
    sl2z_action,
    torus_extremal_length,
    torus_flat_length,
    torus_intersection,
    torus_systole,
)
from horoforge.geometries.conformal_grid import geodesic_crossings, grid_extremal_length
from horoforge.geometries.funk import funk_ray_exit, random_interior_point, random_polygon
from horoforge.geometries.minsky import hyperbolic_distance
from horoforge.geometries.torus import dilatation, moebius, teichmuller_distance
from horoforge.metric import distance

LOG2 = math.log(2)
E1 = make_torus_bifunctional("E1")
THURSTON = make_torus_bifunctional("thurston_like")

taus = st.builds(complex, st.floats(-2, 2), st.floats(0.3, 4))
slopes = st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.floats(0.1, 5)).filter(lambda a: a[:2] != (0, 0))
currents = st.lists(slopes, min_size=1, max_size=4).map(lambda atoms: SlopeCurrent(tuple(atoms)))
unimodular = st.sampled_from([[[1, 1], [0, 1]], [[1, 0], [1, 1]], [[0, -1], [1, 0]], [[2, 1], [1, 1]], [[3, 2], [1, 1]], [[1, -2], [-1, 3]]])


# --- slope currents -----------------------------------------------------------


def test_parallel_atoms_merge_with_rescaled_weight():
    c = SlopeCurrent(((1, 0, 1.0), (-2, 0, 0.5)))
    assert c.atoms == ((1.0, 0.0, 2.0),)


@pytest.mark.parametrize("atom", [(0, 0, 1), (1, 0, 0), (1, 0, -1), (1, math.nan, 1), (1, 2)])
def test_invalid_atoms_are_rejected(atom):
    with pytest.raises(ValueError):
        SlopeCurrent((atom,))


def test_current_json_round_trip():
    c = SlopeCurrent(((1, 2, 0.5), (3, -1, 2.0)))
    assert SlopeCurrent.from_any(json.dumps(c.to_json())).atoms == c.atoms
    assert SlopeCurrent.from_any([1, 2]).atoms == ((1.0, 2.0, 1.0),)


def test_close_to_ignores_orientation():
    assert SlopeCurrent.single(1, 2).close_to(SlopeCurrent.single(-1, -2))
    assert not SlopeCurrent.single(1, 2).close_to(SlopeCurrent.single(1, -2))


# --- Euclidean and Minsky ---------------------------------------------------------


def test_euclidean_examples():
    I = euclidean_inner(2)
    assert I((1, 0), (1, 0)) == 1.0
    assert I.oracle_d((0, 0), (3, 4)) == 5.0
    x, y = (0.3, -1.7), (2.0, 0.5)
    assert I(x, (4.0, 1.0)) == pytest.approx(I(x, (2.0, 0.5)), abs=1e-15)
    with pytest.raises(DomainError):
        I(x, (0, 0))


def test_minsky_examples():
    I = minsky_half_plane()
    assert I(1j, 0.0) == 0.0
    assert I.oracle_d(1j, 2j) == pytest.approx(LOG2, abs=1e-15)
    assert I.oracle_d(1j, 1 + 1j) == pytest.approx(math.acosh(1.5), abs=1e-15)
    with pytest.raises(DomainError):
        I(0.5 + 0j, 1.0)


# --- Funk ------------------------------------------------------------------------------


SQUARE = ConvexPolytope.square()


def test_square_has_four_facets():
    assert len(SQUARE.offsets) == 4


def test_funk_examples():
    F = funk_polytope(SQUARE)
    assert distance(F, (0, 0), (0.5, 0)).lower_bound == pytest.approx(LOG2, abs=1e-15)
    assert distance(F, (0.5, 0), (0, 0)).lower_bound == pytest.approx(math.log(1.5), abs=1e-15)
    assert funk_ray_exit(SQUARE, (0.2, 0.1), (0.2, 0.1)) == 0.0


def test_funk_rejects_boundary_points():
    F = funk_polytope(SQUARE)
    with pytest.raises(DomainError):
        F((1.0, 0.0), 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_facet_maximum_equals_ray_exit(seed):
    rng = np.random.default_rng(seed)
    P = random_polygon(rng)
    F = funk_polytope(P)
    x, y = random_interior_point(P, rng), random_interior_point(P, rng)
    est = distance(F, x, y).lower_bound
    assert est == pytest.approx(funk_ray_exit(P, x, y), abs=1e-12)


def test_polytope_file_loading(tmp_path):
    f = tmp_path / "tri.txt"
    f.write_text("# triangle\n0 0\n4 0\n\n0 4\n")
    P = ConvexPolytope.load(f)
    assert P.dim == 2 and len(P.offsets) == 3


def test_polytope_file_errors_name_the_line(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("0 0\n1 x\n")
    with pytest.raises(ValueError, match=":2:"):
        ConvexPolytope.load(f)
    g = tmp_path / "ragged.txt"
    g.write_text("0 0\n1 0 0\n0 1\n")
    with pytest.raises(ValueError, match="inconsistent"):
        ConvexPolytope.load(g)


# --- torus lengths ---------------------------------------------------------------------


def test_flat_length_examples():
    assert torus_flat_length(1j, SlopeCurrent.single(1, 0)) == 1.0
    assert torus_flat_length(2j, SlopeCurrent.single(1, 0)) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    c = SlopeCurrent.single(2, 3, 1.5)
    assert torus_flat_length(0.3 + 1.2j, c.scaled(2)) == pytest.approx(2 * torus_flat_length(0.3 + 1.2j, c), rel=1e-15)


def test_extremal_length_examples():
    assert torus_extremal_length(1j, SlopeCurrent.single(1, 0)) == 1.0
    assert torus_extremal_length(2j, SlopeCurrent.single(0, 1)) == pytest.approx(2.0, abs=1e-15)


def test_intersection_examples():
    a, b = SlopeCurrent.single(1, 0), SlopeCurrent.single(0, 1)
    assert torus_intersection(a, b) == 1.0
    assert torus_intersection(a, a) == 0.0
    assert torus_intersection(a.scaled(3), b.scaled(0.5)) == 1.5


@settings(max_examples=100, deadline=None)
@given(taus, slopes)
def test_extremal_length_of_a_slope_is_its_squared_flat_length(tau, atom):
    c = SlopeCurrent((atom,))
    assert torus_extremal_length(tau, c) == pytest.approx(torus_flat_length(tau, c) ** 2, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(taus, currents, st.floats(0.1, 10))
def test_homogeneity(tau, c, k):
    assert torus_flat_length(tau, c.scaled(k)) == pytest.approx(k * torus_flat_length(tau, c), rel=1e-12)
    assert torus_extremal_length(tau, c.scaled(k)) == pytest.approx(k * k * torus_extremal_length(tau, c), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(currents, currents, unimodular)
def test_intersection_is_invariant_and_symmetric(c1, c2, A):
    g = sl2z_action(A)
    assert torus_intersection(c1, c2) == pytest.approx(torus_intersection(c2, c1), rel=1e-14)
    assert torus_intersection(g.act_N(c1), g.act_N(c2)) == pytest.approx(torus_intersection(c1, c2), rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(taus, currents, unimodular)
def test_extremal_length_is_invariant(tau, c, A):
    g = sl2z_action(A)
    assert torus_extremal_length(g.act_M(tau), g.act_N(c)) == pytest.approx(torus_extremal_length(tau, c), rel=1e-9)


# --- Minsky inequality -------------------------------------------------------------------


@pytest.mark.parametrize("tau", [1j, 2j])
def test_orthogonal_slopes_give_equality(tau):
    assert minsky_inequality_check(tau, SlopeCurrent.single(1, 0), SlopeCurrent.single(0, 1)) == pytest.approx(0.0, abs=1e-15)


def test_two_atom_current_gives_a_strict_gap():
    G = SlopeCurrent(((0, 1, 1.0), (1, 1, 1.0)))
    assert minsky_inequality_check(0.2 + 1.3j, SlopeCurrent.single(1, 0), G) > 1e-3


def test_minsky_inequality_needs_a_single_slope():
    with pytest.raises(ValueError):
        minsky_inequality_check(1j, SlopeCurrent(((1, 0, 1), (0, 1, 1))), SlopeCurrent.single(1, 1))


@settings(max_examples=200, deadline=None)
@given(taus, slopes, currents)
def test_minsky_inequality_holds(tau, atom, G):
    assert minsky_inequality_check(tau, SlopeCurrent((atom,)), G) >= -1e-12 * (1 + torus_intersection(SlopeCurrent((atom,)), G))


# --- Liouville surrogate ----------------------------------------------------------------


def test_liouville_fit_at_i_matches_the_recorded_baseline():
    from horoforge.acceptance import load_baselines

    base = load_baselines()["liouville_residual"]
    fit = liouville_discretize(1j, base["n_dirs"], base["n_val"])
    assert fit.residual <= 1e-2
    assert fit.residual == pytest.approx(base["residual"], rel=1e-6)


def test_liouville_pairing_reproduces_flat_length():
    fit = liouville_discretize(1j)
    assert torus_intersection(fit.current, SlopeCurrent.single(1, 0)) == pytest.approx(1.0, abs=1e-2)


def test_liouville_needs_enough_directions():
    with pytest.raises(ValueError):
        liouville_discretize(1j, n_dirs=4)


@pytest.mark.parametrize("A", [[[1, 1], [0, 1]], [[2, 1], [1, 1]]])
def test_liouville_fit_is_equivariant(A):
    tau = 0.3 + 1.4j
    g = sl2z_action(A)
    fit, fit_moved = liouville_discretize(tau), liouville_discretize(g.act_M(tau))
    tol = 2 * max(fit.residual, fit_moved.residual)
    for theta in np.linspace(0.1, 3.0, 7):
        gamma = SlopeCurrent.direction(theta)
        a = torus_intersection(fit.current, gamma)
        b = torus_intersection(fit_moved.current, g.act_N(gamma))
        assert abs(a - b) <= tol * max(a, b)


# --- torus bifunctionals -------------------------------------------------------------------


def test_e1_distance_example():
    est = distance(E1, 1j, 2j)
    assert est.lower_bound == pytest.approx(0.5 * LOG2, abs=1e-9)
    assert est.oracle_value == pytest.approx(0.5 * hyperbolic_distance(1j, 2j), abs=1e-15)


def test_thurston_distance_example():
    assert distance(THURSTON, 1j, 2j).lower_bound == pytest.approx(0.5 * LOG2, abs=1e-9)


def test_e2_distance_lower_bound_example():
    I = make_torus_bifunctional("E2")
    assert distance(I, 1j, 2j).lower_bound >= 0.5 * LOG2 - 2e-2


def test_e2_values_match_the_recorded_baseline():
    from horoforge.acceptance import load_baselines

    I = make_torus_bifunctional("E2")
    for row in load_baselines()["e2_distance"][:5]:
        x, y = complex(*row["x"]), complex(*row["y"])
        assert distance(I, x, y).lower_bound == pytest.approx(row["lower_bound"], abs=1e-9)


def test_unknown_torus_kind():
    with pytest.raises(ValueError):
        make_torus_bifunctional("E3")


@settings(max_examples=25, deadline=None)
@given(st.builds(complex, st.floats(-2, 2), st.floats(0.5, 4)), st.builds(complex, st.floats(-2, 2), st.floats(0.5, 4)))
def test_e1_engine_matches_half_hyperbolic_distance(x, y):
    assert abs(distance(E1, x, y).lower_bound - teichmuller_distance(x, y)) <= 1e-6


# --- systole ------------------------------------------------------------------------------


def _gauss_reduced_shortest(tau: complex) -> float:
    """Lagrange-Gauss reduction of the basis (1, tau) of the lattice Z + tau Z."""
    u, v = complex(1), complex(tau)
    if abs(u) < abs(v):
        u, v = v, u
    while abs(v) < abs(u):
        m = round((u * v.conjugate()).real / abs(v) ** 2)
        u, v = v, u - m * v
    return min(abs(u), abs(v))


def test_systole_examples():
    assert torus_systole(1j) == 1.0
    assert torus_systole(2j) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.builds(complex, st.floats(-5, 5), st.floats(0.05, 5)))
def test_systole_matches_lattice_reduction(tau):
    assert torus_systole(tau) == pytest.approx(_gauss_reduced_shortest(tau) / math.sqrt(tau.imag), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(taus, unimodular)
def test_systole_is_invariant(tau, A):
    assert torus_systole(moebius(A, tau)) == pytest.approx(torus_systole(tau), rel=1e-9)


# --- SL(2, Z) -----------------------------------------------------------------------------


def test_identity_matrix_acts_trivially():
    g = sl2z_action([[1, 0], [0, 1]])
    assert g.act_M(0.3 + 2j) == 0.3 + 2j
    c = SlopeCurrent.single(2, -5)
    assert g.act_N(c).atoms == c.atoms


@settings(max_examples=50, deadline=None)
@given(taus)
def test_parabolic_keeps_the_height(tau):
    assert sl2z_action([[1, 1], [0, 1]]).act_M(tau).imag == pytest.approx(tau.imag, rel=1e-15)


def test_golden_dilatation():
    assert dilatation([[2, 1], [1, 1]]) == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-15)
    assert dilatation([[1, 1], [0, 1]]) == 1.0


def test_point_target_action():
    g = sl2z_action([[2, 1], [1, 1]], target="points")
    assert g.act_N(1j) == g.act_M(1j)
    with pytest.raises(ValueError):
        sl2z_action([[2, 1], [1, 1]], target="lines")


# --- conformal grid oracle ------------------------------------------------------------------


def test_geodesic_crossings_cover_the_flat_length():
    tau = 0.3 + 1.1j
    for p, q in [(1, 0), (0, 1), (2, 1), (1, -3)]:
        cells, lengths = geodesic_crossings(tau, p, q, 16, 0.01)
        assert lengths.sum() == pytest.approx(abs(p + q * tau), rel=1e-12)
        assert cells.min() >= 0 and cells.max() < 16 * 16


@pytest.mark.slow
@pytest.mark.parametrize("tau, atoms", [(1j, ((1, 0, 1),)), (2j, ((0, 1, 1),)), (0.4 + 1.3j, ((1, 1, 1), (2, -1, 0.5)))])
def test_flat_metric_is_optimal_on_the_grid(tau, atoms):
    res = grid_extremal_length(tau, SlopeCurrent(atoms), n=32)
    assert res.status == "optimal"
    assert res.relative_gap <= 1e-2


def test_grid_oracle_needs_integer_slopes():
    with pytest.raises(ValueError):
        grid_extremal_length(1j, SlopeCurrent.single(0.5, 1), n=8)
