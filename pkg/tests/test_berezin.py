"""Kernel compressions at hyperball points: membership, transforms, models."""
import numpy as np
import pytest

from polyfock.basis import TruncationSpec, build_basis, weight_b
from polyfock.berezin import (
    PointTuple,
    berezin_kernel,
    berezin_transform,
    bergman_shift,
    eval_symbol,
    hardy_polydisc,
    intertwining_residual,
    is_pure,
    kernel_gram,
    membership,
    point_tuple,
    purity,
    radial_model,
)
from polyfock.operators import max_abs, psi_bh
from polyfock.sampling import random_pure_point, random_toeplitz
from polyfock.toeplitz import Symbol, brown_halmos_residual, extract_symbol
from polyfock.words import MultiWord


def scalar_point(spec, values):
    """Point tuple of 1x1 matrices from a list of per-factor value lists."""
    factors = tuple(
        tuple(np.array([[v]], dtype=np.complex128) for v in vals) for vals in values
    )
    return point_tuple(spec, factors)


# -- membership and purity ---------------------------------------------------


def test_zero_point_is_member():
    spec = TruncationSpec.make(2, [2, 1], [2, 1], [3, 3])
    X = scalar_point(spec, [[0.0, 0.0], [0.0]])
    assert membership(X)
    assert is_pure(X)
    assert purity(X) == (0.0, 0.0)


def test_scalar_point_membership_boundary():
    spec = TruncationSpec.make(1, [1], [1], [4])
    assert membership(scalar_point(spec, [[0.9]]))
    assert not membership(scalar_point(spec, [[1.1]]))


def test_scalar_purity_value():
    # Phi(I) for the 1x1 point (c) has the single eigenvalue |c|^2
    spec = TruncationSpec.make(1, [1], [1], [3])
    X = scalar_point(spec, [[0.5]])
    assert abs(purity(X)[0] - 0.25) < 1e-14


def test_radial_model_membership_and_purity():
    spec = TruncationSpec.make(1, [2], [2], [3])
    X = radial_model(spec, 0.5)
    assert membership(X)
    # truncated creation tuples are nilpotent, so the model point is pure
    assert purity(X) == (0.0,)
    assert X.radial == 0.5
    with pytest.raises(ValueError):
        radial_model(spec, 1.0)


def test_commutation_violation_rejected():
    spec = TruncationSpec.make(2, [1, 1], [1, 1], [2, 2])
    A = np.array([[0.0, 0.3], [0.0, 0.0]], dtype=np.complex128)
    B = np.array([[0.0, 0.0], [0.3, 0.0]], dtype=np.complex128)
    with pytest.raises(ValueError, match="commut"):
        point_tuple(spec, ((A,), (B,)))


def test_point_json_roundtrip():
    spec = TruncationSpec.make(1, [2], [2], [3])
    X = random_pure_point(spec, seed=4, dH=3)
    Y = PointTuple.from_json(X.to_json())
    assert Y.spec == spec
    for ops_x, ops_y in zip(X.factors, Y.factors):
        for a, b in zip(ops_x, ops_y):
            assert np.array_equal(np.asarray(a), np.asarray(b))


# -- kernel ------------------------------------------------------------------


def test_kernel_at_zero_point_hits_vacuum():
    spec = TruncationSpec.make(1, [2], [2], [3])
    X = scalar_point(spec, [[0.0, 0.0]])
    K = berezin_kernel(X)
    # defect of 0 is the identity; the only nonvanishing row block is the
    # vacuum row, carrying the identity on the point space
    dense = K.matrix
    assert np.abs(dense[K.rank :]).max() == 0.0
    assert max_abs(kernel_gram(X) - np.eye(1)) < 1e-14


def test_kernel_rows_scale_with_weights():
    # scalar point c, m=2: row at word g1^s is sqrt(b(2,s)) c^s sqrt(1-2|c|^2+|c|^4...)
    spec = TruncationSpec.make(1, [1], [2], [4])
    c = 0.3
    X = scalar_point(spec, [[c]])
    K = berezin_kernel(X)
    basis = build_basis(spec)
    defect_val = (1.0 - c * c) ** 2  # (1 - |c|^2)^m for the 1x1 scalar point
    for s in range(5):
        idx = basis.index_of(MultiWord.from_string("1" * s, [1]))
        expect = np.sqrt(weight_b(2, s)) * (c**s) * np.sqrt(defect_val)
        assert abs(K.matrix[idx * K.rank, 0] - expect) < 1e-14


def test_gram_isometry_for_pure_points():
    spec = TruncationSpec.make(1, [2], [2], [5])
    for dH in (1, 2, 3):
        X = random_pure_point(spec, seed=2, dH=dH)
        G = kernel_gram(X)
        assert max_abs(G - np.eye(G.shape[0])) < 1e-8


def test_gram_matches_explicit_kernel_product():
    spec = TruncationSpec.make(1, [2], [2], [4])
    X = random_pure_point(spec, seed=5, dH=2)
    K = berezin_kernel(X).matrix
    assert max_abs(K.conj().T @ K - kernel_gram(X)) < 1e-13


def test_intertwining_zero_for_nilpotent_points():
    spec = TruncationSpec.make(2, [2, 1], [2, 1], [3, 3])
    X = random_pure_point(spec, seed=6, dH=3)
    for i in (1, 2):
        for j in range(1, spec.n[i - 1] + 1):
            assert intertwining_residual(X, i, j) < 1e-12


# -- transform ---------------------------------------------------------------


def test_transform_at_zero_reads_vacuum_block():
    spec = TruncationSpec.make(1, [2], [2], [3], d=1)
    X = scalar_point(spec, [[0.0, 0.0]])
    T = random_toeplitz(spec, seed=7)
    out = berezin_transform(X, T)
    assert out.shape == (1, 1)
    assert abs(out[0, 0] - T[0, 0]) < 1e-14


def test_eval_symbol_scalar_monomial():
    # symbol W_{g1} evaluated at the scalar point (x) is just x
    spec = TruncationSpec.make(1, [1], [2], [4])
    S = Symbol(
        spec,
        {
            (
                MultiWord.from_string("1", [1]),
                MultiWord.from_string("", [1]),
            ): np.array([[1.0]])
        },
    )
    X = scalar_point(spec, [[0.37]])
    out = eval_symbol(S, X)
    assert abs(out[0, 0] - 0.37) < 1e-14


def test_transform_equals_symbol_evaluation():
    spec = TruncationSpec.make(1, [2], [2], [5])
    for dH in (1, 2, 3):
        X = random_pure_point(spec, seed=8, dH=dH)
        T = random_toeplitz(spec, seed=8)
        S = extract_symbol(spec, T)
        assert max_abs(berezin_transform(X, T) - eval_symbol(S, X)) < 1e-8


def test_transform_radial_matches_kernel_path():
    # the gather-table path at the radial point against the generic kernel path
    spec = TruncationSpec.make(1, [2], [1], [3], d=2)
    r = 0.4
    X = radial_model(spec, r)
    T = random_toeplitz(spec, seed=9)
    via_tables = berezin_transform(X, T)
    generic = point_tuple(
        spec, tuple(tuple(np.asarray(M.todense()) for M in ops) for ops in X.factors)
    )
    via_kernel = berezin_transform(generic, T)
    assert max_abs(via_tables - via_kernel) < 1e-12


# -- classical reductions ----------------------------------------------------


def test_bergman_shift_m1_reduces_to_plain_toeplitz_condition():
    spec, S = bergman_shift(1, 6)
    T = random_toeplitz(spec, seed=11)
    # with one letter and m=1 the structure equation is S* T S = T (interior)
    lhs = np.asarray(S.conj().T @ T @ S)
    sub = lhs[:6, :6] - T[:6, :6]
    assert max_abs(sub) < 1e-12
    assert max(brown_halmos_residual(spec, T)) < 1e-12


def test_bergman_shift_m2_two_term_equation():
    spec, M = bergman_shift(2, 6)
    T = random_toeplitz(spec, seed=12)
    # order-2 weighted shift: the right side collapses to 2T - M T M*
    expect = 2.0 * np.asarray(T) - np.asarray(M @ T @ M.conj().T)
    assert max_abs(psi_bh(spec, 1, T) - expect) < 1e-12
    assert max(brown_halmos_residual(spec, T)) < 1e-12


def test_bergman_shift_m2_rejects_geometric_diagonal():
    spec, M = bergman_shift(2, 6)
    T = np.diag(2.0 ** np.arange(7)).astype(np.complex128)
    assert max(brown_halmos_residual(spec, T)) > 0.0
    assert max(brown_halmos_residual(spec, T)) > 1e-3


def test_hardy_polydisc_invariance():
    spec, shifts = hardy_polydisc(2, 4)
    T = random_toeplitz(spec, seed=13)
    idx = min(spec.L)  # interior degrees per factor
    for Mz in shifts:
        lhs = np.asarray(Mz.conj().T @ T @ Mz)
        # classical bidisc condition M_{z_i}* T M_{z_i} = T on the interior
        keep = _interior_indices(spec, 1)
        assert np.abs((lhs - T)[np.ix_(keep, keep)]).max() < 1e-12
    assert max(brown_halmos_residual(spec, T)) < 1e-12


def _interior_indices(spec, g):
    from polyfock.operators import GuardBand, interior_mask

    return np.nonzero(interior_mask(spec, GuardBand.uniform(spec, g)))[0]


def test_hardy_polydisc_mixed_symbol_passes():
    # T = M_{z1} + M_{z2}* is pluriharmonic: passes the structure equation
    spec, shifts = hardy_polydisc(2, 4)
    T = np.asarray(shifts[0].todense()) + np.asarray(shifts[1].conj().T.todense())
    assert max(brown_halmos_residual(spec, T)) < 1e-12


# -- reproducing property ----------------------------------------------------


def test_radial_kernel_reproduces_weights():
    # the gram of the radial-model kernel is the identity: the normalized
    # kernel rows encode b(m, s) r^{2s} summing against the defect to 1
    spec = TruncationSpec.make(1, [1], [2], [6])
    for r in (0.0, 0.3, 0.6):
        X = radial_model(spec, r)
        G = kernel_gram(X)
        assert max_abs(G - np.eye(G.shape[0])) < 1e-12
