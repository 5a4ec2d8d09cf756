from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biext import exact as ex
from biext.exact import GaussianRational, I
from biext.hodge import (Ext1RangeError, FramingError, HodgeError, NonPureError, PeriodValue,
                         RealBiextension, RealHodgeStructure, biextension_period, ext1_dim, hodge_decompose,
                         split_biextension, transform, twist)
from biext.verify import random_pure_structure, random_rational


def col(*xs):
    return ex.gaussian_array([[x] for x in xs])


# -- pure structures --------------------------------------------------------------

def test_tate_line_single_piece():
    J = ex.eye(1, True)
    pieces = hodge_decompose(-2, {-1: col(1), 0: ex.zeros((1, 0), True)}, J)
    assert list(pieces) == [(-1, -1)]


def test_weight_minus_one_rank_two():
    J = ex.eye(2, True)
    F0 = ex.hstack(col(1, 0) + I * col(0, 1))  # not conjugation stable
    pieces = hodge_decompose(-1, {0: F0, -1: ex.eye(2, True)}, J)
    assert sorted(pieces) == [(-1, 0), (0, -1)]
    assert all(E.shape[1] == 1 for E in pieces.values())


def test_non_pure_rejected():
    J = ex.eye(2, True)
    with pytest.raises(NonPureError):
        hodge_decompose(-1, {0: col(1, 0), -1: ex.eye(2, True)}, J)  # real line: F ∩ conj F ≠ 0


def test_weight_zero_round_trip(rng):
    P = ex.gaussian_array(rng.integers(-3, 4, size=(4, 4)).tolist())
    while ex.rank(P) < 4:
        P = ex.gaussian_array(rng.integers(-3, 4, size=(4, 4)).tolist())
    a = P[:, [0]] + I * P[:, [1]]
    pieces = {(1, -1): a, (-1, 1): ex.conj(a), (0, 0): P[:, 2:]}
    hs = RealHodgeStructure(0, ex.eye(4, True), pieces)
    back = hodge_decompose(0, hs.hodge_filtration(), hs.conjugation)
    assert sorted(back) == sorted(pieces)
    for k, E in pieces.items():
        assert ex.rank(ex.hstack(E, back[k])) == ex.rank(E) == ex.rank(back[k])


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(-1, 2), (-1, 4), (-2, 1), (-2, 3)]))
def test_filtration_reassembly(seed, wd):
    """Decomposing and reassembling F gives back the same subspaces."""
    rng = np.random.default_rng(seed)
    hs = random_pure_structure(rng, *wd)
    back = RealHodgeStructure.from_filtration(hs.weight, hs.hodge_filtration(), hs.conjugation)
    for p in range(-3, 2):
        A, B = hs.filtration(p), back.filtration(p)
        assert ex.rank(A) == ex.rank(B) == ex.rank(ex.hstack(A, B))


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(-1, 2), (-2, 3)]))
def test_conjugation_pairs_pieces(seed, wd):
    hs = random_pure_structure(np.random.default_rng(seed), *wd)
    for (p, q), E in hs.pieces.items():
        partner = hs.pieces[(q, p)]
        both = ex.hstack(hs.conj(E), partner)
        assert ex.rank(both) == ex.rank(partner)


def test_bad_conjugation():
    with pytest.raises(HodgeError):
        RealHodgeStructure(-2, ex.gaussian_array([[2]]), {(-1, -1): col(1)})


# -- Ext^1 ------------------------------------------------------------------------------

def _float_pieces(hs):
    return {k: ex.to_complex(v) for k, v in hs.pieces.items()}


def _F(pieces, p, n):
    cols = [E for (a, _), E in pieces.items() if a >= p]
    return np.hstack(cols) if cols else np.zeros((n, 0))


def _null(A, tol=1e-9):
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(A)
    r = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0)))
    return np.conj(vh[r:]).T


def brute_hom_minus11(E, K) -> int:
    """dim of Hom(E,K)^{-1,-1} from the filtrations on matrix space, in floating point."""
    nE, nK = E.dim, K.dim
    pe, pk = _float_pieces(E), _float_pieces(K)
    JE, JK = ex.to_complex(E.conjugation), ex.to_complex(K.conjugation)
    rows = []
    for r in range(-4, 4):
        Er = _F(pe, r, nE)
        Kr = _F(pk, r - 1, nK)
        if Er.shape[1] == 0:
            continue
        # rows annihilating F^{r-1}K
        Pk = _null(Kr.conj().T).conj().T if Kr.shape[1] else np.eye(nK)
        # constraint Pk @ M @ Er = 0, linear in vec(M) (row-major)
        rows.append(np.kron(Pk, Er.T))
    A = np.vstack(rows) if rows else np.zeros((0, nE * nK))
    F1 = _null(A)
    # conjugation on Hom: M ↦ JK conj(M) conj(JE)
    conjF1 = np.stack([(JK @ np.conj(v.reshape(nK, nE)) @ np.conj(JE)).ravel() for v in F1.T], axis=1) \
        if F1.shape[1] else F1
    both = np.hstack([F1, -conjF1])
    return F1.shape[1] + conjF1.shape[1] - np.linalg.matrix_rank(both, tol=1e-9)


def test_ext_zero_cases():
    R0 = RealHodgeStructure(0, ex.eye(1, True), {(0, 0): ex.eye(1, True)})
    K = random_pure_structure(np.random.default_rng(1), -1, 2)
    assert ext1_dim(R0, K) == 0


def test_ext_tate_is_one():
    R0 = RealHodgeStructure(0, ex.eye(1, True), {(0, 0): ex.eye(1, True)})
    R1 = RealHodgeStructure.tate(1)
    assert ext1_dim(R0, R1) == 1 == brute_hom_minus11(R0, R1)


def test_ext_weight_minus_one_minus_three():
    rng = np.random.default_rng(7)
    E = random_pure_structure(rng, -1, 2)
    P = ex.gaussian_array([[1, 2], [0, 1]])
    a = P[:, [0]] + I * P[:, [1]]
    K = RealHodgeStructure(-3, ex.eye(2, True), {(-1, -2): a, (-2, -1): ex.conj(a)})
    assert ext1_dim(E, K) == brute_hom_minus11(E, K) == 2


@given(st.integers(0, 2 ** 32 - 1))
def test_ext_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    E = random_pure_structure(rng, -1, 2 * int(rng.integers(1, 3)))
    K = RealHodgeStructure(-3, ex.eye(2, True),
                           {(-1, -2): col(1, 0) + I * col(0, 1), (-2, -1): col(1, 0) - I * col(0, 1)})
    assert ext1_dim(E, K) == brute_hom_minus11(E, K)
    R0 = RealHodgeStructure(0, ex.eye(1, True), {(0, 0): ex.eye(1, True)})
    C = random_pure_structure(rng, -2, int(rng.integers(1, 4)))
    assert ext1_dim(R0, C) == brute_hom_minus11(R0, C)


def test_ext_out_of_range():
    R0 = RealHodgeStructure(0, ex.eye(1, True), {(0, 0): ex.eye(1, True)})
    with pytest.raises(Ext1RangeError):
        ext1_dim(R0, RealHodgeStructure.tate(2))


# -- periods ------------------------------------------------------------------------------

EMPTY_B = RealHodgeStructure(-1, ex.eye(0, True), {})


def tate_c(k):
    return RealHodgeStructure(-2, ex.eye(k, True), {(-1, -1): ex.eye(k, True)})


def ext_oracle(v: RealBiextension) -> np.ndarray:
    """Im(e_R - e_F) in C coordinates, for B = 0 and C of Tate type, in floating point."""
    n = v.dim
    J = ex.to_complex(v.conjugation)
    frame = ex.to_complex(v.frame)
    u = ex.to_complex(v.unit).reshape(n)
    e_real = (u + J @ np.conj(u)) / 2
    F0 = ex.to_complex(v.mhs.hodge(0))
    assert F0.shape[1] == 1
    c = np.linalg.solve(frame, F0[:, 0])
    e_hodge = F0[:, 0] / c[0]
    d = np.linalg.solve(frame, e_real - e_hodge)
    assert abs(d[0]) < 1e-12
    return d[1:].imag


def _invertible(rng, n):
    while True:
        g = ex.gaussian_array((rng.integers(-2, 3, size=(n, n)) + 1j * rng.integers(-1, 2, size=(n, n))).tolist())
        if ex.rank(g) == n:
            return g


def test_split_has_zero_period():
    for c in (1, 2, 3):
        assert biextension_period(split_biextension(EMPTY_B, tate_c(c))).coords == (0,) * c


@pytest.mark.parametrize("seed", range(6))
def test_twist_against_ext_oracle(seed):
    rng = np.random.default_rng(seed)
    c = int(rng.integers(1, 4))
    t = tuple(random_rational(rng) for _ in range(c))
    v = twist(split_biextension(EMPTY_B, tate_c(c)), PeriodValue(t))
    w = transform(v, _invertible(rng, v.dim))
    assert np.allclose(ext_oracle(v), [float(x) for x in t], atol=1e-12)
    assert np.allclose(ext_oracle(w), [float(x) for x in t], atol=1e-10)
    assert biextension_period(w).coords == t


@pytest.mark.parametrize("seed", range(5))
def test_period_with_b_part(seed):
    rng = np.random.default_rng(100 + seed)
    B = random_pure_structure(rng, -1, 2)
    C = random_pure_structure(rng, -2, int(rng.integers(1, 4)))
    v0 = split_biextension(B, C)
    k = C.real_basis(-1).shape[1]
    a = PeriodValue(tuple(random_rational(rng) for _ in range(k)))
    b = PeriodValue(tuple(random_rational(rng) for _ in range(k)))
    assert biextension_period(v0).coords == (0,) * k
    va = twist(v0, a)
    assert biextension_period(va).coords == a.coords
    assert biextension_period(twist(va, b)).coords == (a + b).coords
    assert biextension_period(twist(va, -a)).coords == (0,) * k
    w = transform(va, _invertible(rng, va.dim))
    assert biextension_period(w).coords == a.coords


def test_lift_independence(rng):
    C = random_pure_structure(rng, -2, 3)
    B = random_pure_structure(rng, -1, 2)
    k = C.real_basis(-1).shape[1]
    t = PeriodValue(tuple(random_rational(rng) for _ in range(k)))
    v = twist(split_biextension(B, C), t)
    R = C.real_basis(-1)
    real_shift = R @ ex.gaussian_array([[3]] * R.shape[1])
    F0 = C.filtration(0)
    hodge_shift = F0 @ ex.gaussian_array([[GaussianRational(2, -5)]] * F0.shape[1]) if F0.shape[1] else None
    base = biextension_period(v)
    assert biextension_period(v, real_shift=real_shift).coords == base.coords
    assert biextension_period(v, hodge_shift=hodge_shift).coords == base.coords
    with pytest.raises(HodgeError):
        biextension_period(v, real_shift=I * real_shift)


def test_float_round_trip(rng):
    C = RealHodgeStructure(-2, np.eye(2, dtype=complex), {(-1, -1): np.eye(2, dtype=complex)})
    B = RealHodgeStructure(-1, np.eye(0, dtype=complex), {})
    t = PeriodValue((0.3, -1.7))
    v = twist(split_biextension(B, C), t)
    got = biextension_period(v).as_array()
    assert np.max(np.abs(got - t.as_array())) < 1e-12


def test_framing_mismatch():
    v = split_biextension(EMPTY_B, tate_c(1))
    with pytest.raises(FramingError):
        RealBiextension(v.conjugation, v.F, v.unit, v.b_frame, v.unit, v.B, v.C)
    with pytest.raises(FramingError):
        RealBiextension(v.conjugation, v.F, v.unit, v.b_frame, v.c_frame, v.C, v.C)


def test_period_value_real_and_finite():
    with pytest.raises(ValueError):
        PeriodValue((float("nan"),))
    with pytest.raises(TypeError):
        PeriodValue((GaussianRational(0, 1),))
    assert (PeriodValue((Fraction(1, 2),)) - PeriodValue((Fraction(1, 2),))).coords == (0,)
