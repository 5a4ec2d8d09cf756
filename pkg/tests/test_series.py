import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from biext.periods import sample_points
from biext.series import (TruncatedSeries, combination, extract_dependence, mixed_coefficients,
                          restriction_vanishing)
from biext.surfaces import Surface
from biext.verify import random_dependent_family

R = 4
PAD = [0] * (R - 1)
T = TruncatedSeries([0, 1] + PAD)
ONE = TruncatedSeries([1, 0] + PAD)


def _parallel(v, w):
    v, w = np.asarray(v, dtype=complex), np.asarray(w, dtype=complex)
    return abs(abs(np.vdot(v, w)) - np.linalg.norm(v) * np.linalg.norm(w)) < 1e-10


def test_series_basics():
    s = TruncatedSeries([1, 2, 3])
    assert s.order == 2
    assert s(2.0) == 17
    assert (s + s).coeffs == (2, 4, 6)
    assert (2 * s).coeffs == (2, 4, 6)
    with pytest.raises(ValueError):
        TruncatedSeries([])
    with pytest.raises(ValueError):
        TruncatedSeries([1, np.inf])


def test_mixed_coefficients_direct_expansion():
    # |1 + 2t|² = 1 + 2t + 2t̄ + 4|t|²
    m = mixed_coefficients([TruncatedSeries([1, 2])], [])
    assert np.allclose(m, [[1, 2], [2, 4]])


def test_swap_example():
    res = extract_dependence([T, ONE], [ONE, T])
    assert res.identity_holds and not res.degenerate
    assert np.max(np.abs(combination(res.vector, [T, ONE, ONE, T]))) < 1e-10
    # kernel is spanned by f_1 - h_2 and f_2 - h_1
    assert res.kernel.shape == (4, 2)
    assert abs(np.linalg.norm(res.kernel.conj().T @ [1, 0, 0, -1])) > 0.5
    assert "truncated at order 4" in res.verdict


def test_sqrt2_example():
    r = 1 / math.sqrt(2)
    fs = [TruncatedSeries([r, r] + PAD), TruncatedSeries([r, -r] + PAD)]
    hs = [ONE, T]
    res = extract_dependence(fs, hs)
    assert res.identity_holds
    assert _parallel(res.vector, [1, 1, -math.sqrt(2), 0])
    assert np.max(np.abs(combination(res.vector, fs + hs))) < 1e-10


def test_identity_fails():
    res = extract_dependence([TruncatedSeries([1, 1, 0])], [TruncatedSeries([1, 0, 0])])
    assert not res.identity_holds and res.vector is None
    assert res.verdict.startswith("identity fails")


def test_all_zero_degenerate():
    z = TruncatedSeries([0, 0, 0, 0])
    res = extract_dependence([z, z], [z])
    assert res.identity_holds and res.degenerate
    assert np.linalg.norm(res.vector) > 0
    assert np.max(np.abs(combination(res.vector, [z, z, z]))) == 0


def test_preconditions():
    with pytest.raises(ValueError):
        extract_dependence([TruncatedSeries([1, 0, 0])], [TruncatedSeries([1, 0])])
    with pytest.raises(ValueError):
        extract_dependence([TruncatedSeries([1, 0])], [TruncatedSeries([1, 0])])
    with pytest.raises(ValueError):
        extract_dependence([], [])


@given(st.integers(0, 2**32 - 1))
def test_dependence_vectors_annihilate(seed):
    rng = np.random.default_rng(seed)
    fs, hs = random_dependent_family(rng)
    res = extract_dependence(fs, hs)
    assert res.identity_holds
    v = np.asarray(res.vector)
    assert np.max(np.abs(v)) == pytest.approx(1.0)
    assert np.max(np.abs(combination(v, fs + hs))) < 1e-10
    if res.kernel.size:
        assert np.max(np.abs(combination(res.kernel, fs + hs))) < 1e-10


def test_zero_h_vanishes(rng):
    s = Surface.torus(1j, 0)
    res = restriction_vanishing([[0]], sample_points(s, 10, rng), s)
    assert res.vanishes and res.witness is None and res.signature == (0, 0, 1)


def test_torus_unit_h(rng):
    s = Surface.torus(1j, 0)
    pts = sample_points(s, 10, rng)
    res = restriction_vanishing([[1j]], pts, s)
    assert not res.vanishes
    assert np.allclose(np.abs(res.values), 2.0, atol=1e-14)
    assert res.witness in pts
    assert res.signature == (0, 1, 0)


def test_signature_one_minus_one_witness():
    basis = [lambda z: np.ones_like(z), lambda z: z]
    # the two functions are independent: coefficient matrix of their Taylor series has rank 2
    assert np.linalg.matrix_rank(np.array([[1, 0, 0], [0, 1, 0]])) == 2
    ih = np.diag([1.0, -1.0])
    h = -1j * ih
    pts = np.array([0.2, 0.5j, 1.0, 1.5 + 0.5j])
    res = restriction_vanishing(h, pts, basis=basis)
    assert res.signature == (1, 1, 0)
    assert not res.vanishes
    # density 2(|z|² - 1) is zero on the unit circle and the witness is off it
    assert np.allclose(res.values, 2 * (np.abs(pts) ** 2 - 1))
    assert abs(abs(res.witness) - 1) > 0.1


def test_restriction_rejects_bad_h(rng):
    s = Surface.torus(1j, 0)
    with pytest.raises(ValueError):
        restriction_vanishing([[1.0]], [0.3], s)
    with pytest.raises(ValueError):
        restriction_vanishing(np.zeros((2, 2)), [0.3], s)
    with pytest.raises(ValueError):
        restriction_vanishing([[1j]], [0.3])


@given(st.integers(0, 2**32 - 1))
def test_vanishing_iff_h_zero(seed):
    rng = np.random.default_rng(seed)
    s = Surface.torus(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.0)), 0)
    pts = sample_points(s, 5, rng)
    c = 0.0 if seed % 4 == 0 else float(rng.normal()) * 10 ** rng.uniform(-6, 1)
    res = restriction_vanishing([[1j * c]], pts, s)
    assert res.vanishes == (abs(c) < 1e-12)
