from fractions import Fraction

import numpy as np
import pytest

from biext.hodge import PeriodValue
from biext.periods import graded_fiber, psi_p, psi_p_grid, sample_points
from biext.pushforward import (DimensionError, MonodromyHodgeMap, gr2_vanishing_check, pushforward_period,
                               splitting_locus_scan)
from biext.surfaces import Surface

TORUS = Surface.torus(1j, 0, 0.5)
SPHERE = Surface.sphere("inf", 0)
SPHERE3 = Surface.sphere("inf", 0, 1)


def test_identity_recovers_psi():
    phi = MonodromyHodgeMap.identity(TORUS)
    p, q = 0.25 + 0.3j, 0.7 + 0.6j
    got = pushforward_period(phi, [0.0, 0.0], TORUS, p, q).as_array()
    assert np.allclose(got, psi_p(TORUS, p, q), atol=0)
    assert phi.target_labels == ("e1", "kappa1")


def test_zero_map_is_constant(rng):
    phi = MonodromyHodgeMap(graded_fiber(SPHERE3), np.zeros((2, 2)))
    for q in sample_points(SPHERE3, 5, rng):
        v = pushforward_period(phi, [0.5, -1.25], SPHERE3, 2, q)
        assert v.coords == (Fraction(1, 2), Fraction(-5, 4))


def test_cocycle_two_evaluation_orders(rng):
    for s in (SPHERE3, TORUS, Surface.torus(0.3 + 1.1j, 0, 0.4 + 0.3j)):
        fib = graded_fiber(s)
        for _ in range(5):
            phi = MonodromyHodgeMap(fib, rng.normal(size=(3, fib.dimension)))
            base = rng.normal(size=3)
            p, p2, q = sample_points(s, 3, rng)
            direct = pushforward_period(phi, base, s, p, q).as_array()
            base2 = pushforward_period(phi, base, s, p, p2)
            again = pushforward_period(phi, base2, s, p2, q).as_array()
            assert np.max(np.abs(direct - again)) < 1e-8


def test_exact_additivity_in_base():
    phi = MonodromyHodgeMap(graded_fiber(SPHERE3), [[1.0, 2.0]])
    a = pushforward_period(phi, [0.1], SPHERE3, 2, 0.5 + 1j)
    b = pushforward_period(phi, [0.0], SPHERE3, 2, 0.5 + 1j)
    assert a.coords[0] - b.coords[0] == Fraction(0.1)


def test_accepts_period_value_base():
    phi = MonodromyHodgeMap(graded_fiber(SPHERE), [[2.0]], ("c",))
    v = pushforward_period(phi, PeriodValue((Fraction(1, 3),), ("c",)), SPHERE, 1, 2)
    assert abs(float(v.coords[0]) - (1 / 3 + 2 * psi_p(SPHERE, 1, 2)[0])) < 1e-15
    assert v.labels == ("c",)


def test_dimension_errors():
    fib = graded_fiber(TORUS)
    with pytest.raises(DimensionError):
        MonodromyHodgeMap(fib, np.eye(3))
    with pytest.raises(DimensionError):
        MonodromyHodgeMap(fib, [[np.nan, 1.0]])
    with pytest.raises(DimensionError):
        MonodromyHodgeMap(fib, np.eye(2), ("a",))
    phi = MonodromyHodgeMap.identity(TORUS)
    with pytest.raises(DimensionError):
        pushforward_period(phi, [0.0], TORUS, 0.25, 0.7)
    with pytest.raises(DimensionError):
        pushforward_period(phi, [0.0, 0.0], SPHERE3, 2, 3)


def test_identity_scan_is_unit_circle():
    res = splitting_locus_scan(MonodromyHodgeMap.identity(SPHERE), [0.0], SPHERE, 1, (-2, 2, -2, 2), 128, 1e-3)
    cells = res.flagged_cells()
    assert cells and res.nowhere_dense and not res.degenerate
    assert max(abs(abs(z) - 1) for _, _, z, _ in cells) < res.cell_diagonal


def test_rank_one_level_set():
    # project onto e1 with base shift c: flagged where h_1(q) = -c, i.e. |q| = exp(2π c)
    fib = graded_fiber(SPHERE3)
    c = 0.05
    phi = MonodromyHodgeMap(fib, [[1.0, 0.0]])
    res = splitting_locus_scan(phi, [c], SPHERE3, 2, (-3, 3, -3, 3), 128, 1e-3)
    cells = res.flagged_cells()
    assert cells and res.nowhere_dense and phi.rank == 1
    # h_1(q) = -(log|q| - log 2)/(2π) on the sphere {∞, 0, 1}
    radius = 2 * np.exp(2 * np.pi * c)
    dev = max(abs(abs(z) - radius) for _, _, z, _ in cells)
    assert dev < res.cell_diagonal
    vals = psi_p_grid(SPHERE3, 2, np.array([z for _, _, z, _ in cells]))[:, 0]
    assert np.max(np.abs(vals + c)) < 1e-3


def test_zero_map_nonzero_base_flags_nothing():
    phi = MonodromyHodgeMap(graded_fiber(TORUS), np.zeros((1, 2)))
    res = splitting_locus_scan(phi, [0.5], TORUS, 0.25 + 0.3j, (0, 1, 0, 1), 32, 1e-3)
    assert not res.flagged.any() and not res.degenerate and res.nowhere_dense


def test_zero_map_zero_base_is_degenerate():
    phi = MonodromyHodgeMap(graded_fiber(TORUS), np.zeros((1, 2)))
    res = splitting_locus_scan(phi, [0.0], TORUS, 0.25 + 0.3j, (0, 1, 0, 1), 16, 1e-3)
    assert res.degenerate
    assert np.array_equal(res.flagged, ~res.excluded)


def test_gr2_vanishing_cases():
    assert gr2_vanishing_check(Surface.sphere("inf"))
    assert gr2_vanishing_check(Surface.sphere())
    assert gr2_vanishing_check(Surface.torus(1j))
    assert not gr2_vanishing_check(SPHERE)
    assert not gr2_vanishing_check(Surface.torus(1j, 0))
    for s in (Surface.sphere("inf"), Surface.torus(1j), SPHERE, TORUS):
        assert gr2_vanishing_check(s) == (graded_fiber(s).dimension == 0)
