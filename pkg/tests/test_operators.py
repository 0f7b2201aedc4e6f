"""Model operators: creation weights, diagonals, defects, serialization."""
import numpy as np
import pytest
import scipy.sparse as sp

from polyfock.basis import TruncationSpec, build_basis, weight_b
from polyfock.operators import (
    GuardBand,
    cauchy_dual_column,
    compress_interior,
    defect,
    gamma,
    interior_mask,
    interior_projector,
    left_creation,
    load_operator,
    max_abs,
    model_tuple,
    multiword_operator,
    omega,
    phi,
    psi_bh,
    right_creation,
    save_operator,
    spectral_projection,
    word_operator,
)
from polyfock.words import MultiWord, Word


def vec(spec, text):
    """Unit coordinate vector of the basis entry named by text."""
    basis = build_basis(spec)
    e = np.zeros(spec.total_dim, dtype=np.complex128)
    e[basis.index_of(MultiWord.from_string(text, spec.n))] = 1.0
    return e


# -- creation operators ------------------------------------------------------


def test_left_creation_weight_m2():
    spec = TruncationSpec.make(1, [1], [2], [4])
    W = left_creation(spec, 1, 1)
    out = W @ vec(spec, "")
    # first step carries sqrt(b(2,0)/b(2,1)) = sqrt(1/2)
    assert abs(np.vdot(vec(spec, "1"), out) - np.sqrt(0.5)) < 1e-15


def test_left_creation_unweighted_for_m1():
    spec = TruncationSpec.make(1, [2], [1], [3])
    W = left_creation(spec, 1, 2)
    out = W @ vec(spec, "11")
    assert abs(np.vdot(vec(spec, "211"), out) - 1.0) < 1e-15


def test_creation_annihilates_top_degree():
    spec = TruncationSpec.make(1, [2], [2], [3])
    W = left_creation(spec, 1, 1)
    assert np.abs(W @ vec(spec, "222")).max() == 0.0


def test_left_prepends_right_appends():
    spec = TruncationSpec.make(1, [2], [1], [3])
    W = left_creation(spec, 1, 1)
    Lam = right_creation(spec, 1, 1)
    assert abs(np.vdot(vec(spec, "12"), W @ vec(spec, "2")) - 1.0) < 1e-15
    assert abs(np.vdot(vec(spec, "21"), Lam @ vec(spec, "2")) - 1.0) < 1e-15


def test_right_creation_weight_depends_on_length_only():
    spec = TruncationSpec.make(1, [2], [2], [4])
    Lam = right_creation(spec, 1, 1)
    out = Lam @ vec(spec, "2")
    assert abs(np.vdot(vec(spec, "21"), out) - np.sqrt(2.0 / 3.0)) < 1e-15


def test_index_range_checked():
    spec = TruncationSpec.make(1, [2], [1], [2])
    with pytest.raises(ValueError):
        left_creation(spec, 2, 1)
    with pytest.raises(ValueError):
        left_creation(spec, 1, 3)


# -- word operators ----------------------------------------------------------


def test_word_operator_closed_form_equals_product():
    spec = TruncationSpec.make(1, [2], [3], [4])
    for text in ["", "1", "12", "121", "2211"]:
        word = Word.from_string(text, 2)
        for side in ("left", "right"):
            direct = word_operator(spec, 1, word, side)
            gens = (
                [left_creation(spec, 1, a) for a in word.letters]
                if side == "left"
                else [right_creation(spec, 1, a) for a in word.letters]
            )
            prod = sp.identity(spec.total_dim, format="csr", dtype=np.complex128)
            for g in gens:
                prod = prod @ g
            # compare on the interior the product leaves intact
            diff = compress_interior(spec, direct - prod, GuardBand.uniform(spec, len(word)))
            assert max_abs(diff) < 1e-12


def test_word_operator_weight_oracle():
    # m=2: W_{11} e_vac = sqrt(b(2,0)/b(2,2)) e_11 = sqrt(1/3)
    spec = TruncationSpec.make(1, [1], [2], [4])
    Wword = word_operator(spec, 1, Word.from_string("11", 1), "left")
    out = Wword @ vec(spec, "")
    assert abs(np.vdot(vec(spec, "11"), out) - np.sqrt(1.0 / 3.0)) < 1e-15


def test_right_word_operator_appends_reversed():
    spec = TruncationSpec.make(1, [2], [1], [4])
    Lam = word_operator(spec, 1, Word.from_string("12", 2), "right")
    out = Lam @ vec(spec, "")
    # Lambda_alpha e_gamma = e_{gamma . reverse(alpha)} for m = 1
    assert abs(np.vdot(vec(spec, "21"), out) - 1.0) < 1e-15


def test_multiword_operator_factors_commute():
    spec = TruncationSpec.make(2, [2, 2], [1, 2], [3, 3])
    mwo = multiword_operator(spec, MultiWord.from_string("12/2", [2, 2]), "left")
    a = word_operator(spec, 1, Word.from_string("12", 2), "left")
    b = word_operator(spec, 2, Word.from_string("2", 2), "left")
    assert max_abs(mwo - a @ b) < 1e-14
    assert max_abs(mwo - b @ a) < 1e-14


# -- diagonals and projections -----------------------------------------------


def test_omega_eigenvalues():
    spec = TruncationSpec.make(1, [1], [2], [4])
    Om = omega(spec, 1).toarray()
    basis = build_basis(spec)
    for t, entry in enumerate(basis.entries):
        q = entry.degree()[0]
        expect = 1.0 if q == 0 else (2 + q - 1) / q
        assert abs(Om[t, t] - expect) < 1e-15


def test_omega_identity_for_m1():
    spec = TruncationSpec.make(1, [2], [1], [3])
    assert max_abs(omega(spec, 1) - sp.identity(spec.total_dim)) == 0.0


def test_spectral_projections_partition_identity():
    spec = TruncationSpec.make(2, [2, 1], [1, 2], [2, 2])
    acc = sum(
        spectral_projection(spec, (p, q)).toarray()
        for p in range(3)
        for q in range(3)
    )
    assert np.abs(acc - np.eye(spec.total_dim)).max() == 0.0
    assert max_abs(spectral_projection(spec, (-1, 0))) == 0.0
    assert max_abs(spectral_projection(spec, (3, 0))) == 0.0


def test_gamma_group_law_and_phases():
    spec = TruncationSpec.make(2, [2, 1], [1, 1], [2, 2])
    th1, th2 = [0.3, 1.1], [0.5, -0.2]
    g1, g2 = gamma(spec, th1), gamma(spec, th2)
    g12 = gamma(spec, [a + b for a, b in zip(th1, th2)])
    assert max_abs(g1 @ g2 - g12) < 1e-14
    # on a fixed degree block the adjoint acts as the scalar e^{-i p.theta}
    P = spectral_projection(spec, (1, 1)).toarray()
    lhs = g1.conj().T.toarray() @ P
    assert np.abs(lhs - np.exp(-1j * (th1[0] + th1[1])) * P).max() < 1e-14


def test_cauchy_dual_column_oracle():
    # m=2: Lambda' e_{g1} = (3/2) sqrt(2/3) e_{g1 g1} = sqrt(3/2) e_{g1 g1}
    spec = TruncationSpec.make(1, [1], [2], [4])
    col = cauchy_dual_column(spec, 1, 1)
    out = col @ vec(spec, "1")
    assert abs(np.vdot(vec(spec, "11"), out) - np.sqrt(1.5)) < 1e-15


def test_interior_projector_rank():
    spec = TruncationSpec.make(1, [2], [1], [3], d=2)
    band = GuardBand.uniform(spec, 1)
    P = interior_projector(spec, band)
    assert int(P.diagonal().real.sum()) == 2 * (1 + 2 + 4)
    assert interior_mask(spec, GuardBand.uniform(spec, 0)).all()


# -- completely positive maps and defects ------------------------------------


def test_phi_zero_cases():
    spec = TruncationSpec.make(1, [2], [1], [2])
    Y = np.eye(spec.total_dim, dtype=np.complex128)
    zero = [sp.csr_matrix((spec.total_dim, spec.total_dim), dtype=np.complex128)] * 2
    assert max_abs(phi(zero, Y)) == 0.0
    ops = [left_creation(spec, 1, j) for j in (1, 2)]
    assert max_abs(phi(ops, np.zeros_like(Y))) == 0.0


def test_phi_preserves_psd():
    rng = np.random.default_rng(7)
    spec = TruncationSpec.make(1, [2], [2], [3])
    B = rng.standard_normal((spec.total_dim, spec.total_dim))
    Y = B @ B.T + 1e-12 * np.eye(spec.total_dim)
    ops = [left_creation(spec, 1, j) for j in (1, 2)]
    vals = np.linalg.eigvalsh(np.asarray(phi(ops, Y)))
    assert vals.min() > -1e-10


def test_defect_trivial_cases():
    spec = TruncationSpec.make(2, [1, 1], [1, 2], [2, 2])
    W = model_tuple(spec)
    assert max_abs(defect(W, (0, 0)) - sp.identity(spec.total_dim)) == 0.0


def test_defect_of_model_is_vacuum_projection():
    spec = TruncationSpec.make(2, [2, 1], [2, 1], [3, 3])
    W = model_tuple(spec)
    delta = defect(W, spec.m)
    vac = spectral_projection(spec, (0, 0))
    band = GuardBand(tuple(spec.m))
    assert max_abs(compress_interior(spec, delta - vac, band)) < 1e-12


def test_psi_bh_m1_is_identity_map():
    spec = TruncationSpec.make(1, [2], [1], [3])
    rng = np.random.default_rng(3)
    T = rng.standard_normal((spec.total_dim, spec.total_dim))
    assert max_abs(psi_bh(spec, 1, T) - T) < 1e-14


def test_psi_bh_m2_formula():
    spec = TruncationSpec.make(1, [2], [2], [3])
    rng = np.random.default_rng(4)
    T = rng.standard_normal((spec.total_dim, spec.total_dim)).astype(np.complex128)
    lams = [right_creation(spec, 1, j) for j in (1, 2)]
    expect = 2.0 * T - sum(np.asarray(lam @ T @ lam.conj().T) for lam in lams)
    assert max_abs(psi_bh(spec, 1, T) - expect) < 1e-13


# -- serialization -----------------------------------------------------------


def test_save_load_roundtrip_both_formats(tmp_path):
    spec = TruncationSpec.make(1, [2], [2], [3], d=2)
    rng = np.random.default_rng(11)
    T = rng.standard_normal((spec.total_dim, spec.total_dim)) + 1j * rng.standard_normal(
        (spec.total_dim, spec.total_dim)
    )
    for fmt, name in (("coo", "t.coo"), ("dense", "t.bin")):
        p = tmp_path / name
        save_operator(p, T, spec, fmt=fmt)
        M, spec2 = load_operator(p)
        assert spec2 == spec
        assert np.array_equal(M, T)


def test_save_load_sparse_coo(tmp_path):
    spec = TruncationSpec.make(1, [2], [1], [3])
    W = left_creation(spec, 1, 2)
    p = tmp_path / "w.coo"
    save_operator(p, W, spec, fmt="coo")
    M, _ = load_operator(p)
    assert np.array_equal(M, W.toarray())
