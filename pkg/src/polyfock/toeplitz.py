"""Multi-Toeplitz structure detection, Fourier symbols, and homogeneous parts.

An operator on the model space is weighted multi-Toeplitz when its matrix
entries vanish at non-comparable basis pairs and, along each simplification
class, are proportional to the class coefficient with the tau weights.  The
structure equation (the Brown-Halmos relation for the Cauchy dual of the
right creation tuple) characterizes the same family; both tests live here,
together with symbol extraction/reconstruction, multi-homogeneous parts by
spectral projection and by torus quadrature, and Cesaro (Fejer) summation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .basis import TruncationSpec, build_basis, weight_b
from .operators import (
    GuardBand,
    Matrix,
    _degree_array,
    cauchy_dual_column,
    interior_mask,
    multiword_operator,
    psi_bh,
)
from .words import MultiWord, Word, enumerate_words, is_reduced_pair, right_quotient

__all__ = [
    "Symbol",
    "ToeplitzReport",
    "Witness",
    "brown_halmos_residual",
    "is_weighted_multi_toeplitz",
    "extract_symbol",
    "reconstruct",
    "homogeneous_part_projection",
    "homogeneous_part_quadrature",
    "fejer_sum",
    "fourier_partial_sum",
    "fourier_support",
    "to_weighted_fock_conjugate",
]


# ----------------------------------------------------------------------------
# symbols
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Symbol:
    """Coefficients of a formal Fourier representation, indexed by reduced pairs.

    Keys are reduced pairs (alpha, beta) with |alpha_i| + |beta_i| <= L_i;
    absent keys mean a zero coefficient.  Values are d x d complex blocks.
    """

    spec: TruncationSpec
    coefficients: Mapping[Tuple[MultiWord, MultiWord], np.ndarray]

    def __post_init__(self) -> None:
        d = self.spec.d
        for (alpha, beta), A in self.coefficients.items():
            if alpha.k != self.spec.k or beta.k != self.spec.k:
                raise ValueError("symbol key factor count mismatch")
            if not is_reduced_pair(alpha, beta):
                raise ValueError(f"symbol key ({alpha}, {beta}) is not reduced")
            for i in range(self.spec.k):
                if len(alpha.components[i]) + len(beta.components[i]) > self.spec.L[i]:
                    raise ValueError(
                        f"symbol key ({alpha}, {beta}) outside truncation range"
                    )
            if np.shape(A) != (d, d):
                raise ValueError(f"coefficient block must be {d}x{d}")

    def coefficient(self, alpha: MultiWord, beta: MultiWord) -> np.ndarray:
        """The block at (alpha, beta); zeros when the key is absent."""
        A = self.coefficients.get((alpha, beta))
        if A is None:
            return np.zeros((self.spec.d, self.spec.d), dtype=np.complex128)
        return np.asarray(A, dtype=np.complex128)

    def __len__(self) -> int:
        return len(self.coefficients)

    def to_json(self) -> list:
        items = sorted(
            self.coefficients.items(),
            key=lambda kv: (str(kv[0][0]), str(kv[0][1])),
        )
        out = []
        for (alpha, beta), A in items:
            A = np.asarray(A)
            out.append(
                {
                    "alpha": [str(w) for w in alpha.components],
                    "beta": [str(w) for w in beta.components],
                    "A": [[[float(z.real), float(z.imag)] for z in row] for row in A],
                }
            )
        return out

    @staticmethod
    def from_json(spec: TruncationSpec, data: Sequence[dict]) -> "Symbol":
        coeffs: Dict[Tuple[MultiWord, MultiWord], np.ndarray] = {}
        for item in data:
            alpha = MultiWord(
                tuple(Word.from_string(s, spec.n[i]) for i, s in enumerate(item["alpha"]))
            )
            beta = MultiWord(
                tuple(Word.from_string(s, spec.n[i]) for i, s in enumerate(item["beta"]))
            )
            A = np.array(
                [[complex(re, im) for re, im in row] for row in item["A"]],
                dtype=np.complex128,
            )
            coeffs[(alpha, beta)] = A
        return Symbol(spec, coeffs)


def symbol_distance(a: Symbol, b: Symbol) -> float:
    """Max-modulus distance between two symbols (absent keys count as zero)."""
    keys = set(a.coefficients) | set(b.coefficients)
    out = 0.0
    for alpha, beta in keys:
        diff = a.coefficient(alpha, beta) - b.coefficient(alpha, beta)
        out = max(out, float(np.max(np.abs(diff))) if diff.size else 0.0)
    return out


# ----------------------------------------------------------------------------
# comparability tables
# ----------------------------------------------------------------------------


@dataclass(eq=False)
class _PairTables:
    """Vectorized per-spec tables over Fock basis pairs, in basis order.

    comp marks comparable pairs; for those, tau/mu hold the weights, rep the
    compressed simplification-class id, and pairs/ref_* describe each class's
    reduced representative (whose common part is the identity).
    """

    comp: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    tau: np.ndarray
    mu: np.ndarray
    rep: np.ndarray
    pairs: Tuple[Tuple[MultiWord, MultiWord], ...]
    ref_row: np.ndarray
    ref_col: np.ndarray
    tau_ref: np.ndarray
    mu_ref: np.ndarray
    pair_index: Dict[Tuple[MultiWord, MultiWord], int] = field(default_factory=dict)


@lru_cache(maxsize=None)
def _pair_tables(spec: TruncationSpec) -> _PairTables:
    basis = build_basis(spec)
    factor_words: List[List[Word]] = [
        enumerate_words(spec.n[i], spec.L[i]) for i in range(spec.k)
    ]
    sizes = [len(ws) for ws in factor_words]

    comp_f, tau_f, mu_f, repa_f, repb_f = [], [], [], [], []
    for i in range(spec.k):
        words = factor_words[i]
        pos = {w: t for t, w in enumerate(words)}
        F = sizes[i]
        mi = spec.m[i]
        comp = np.zeros((F, F), dtype=np.uint8)
        tauw = np.zeros((F, F))
        muw = np.zeros((F, F))
        repa = np.zeros((F, F), dtype=np.int64)
        repb = np.zeros((F, F), dtype=np.int64)
        for r, w in enumerate(words):
            for c, g in enumerate(words):
                a = right_quotient(w, g)
                if a is not None:
                    ai, bi = pos[a], pos[Word((), spec.n[i])]
                else:
                    b = right_quotient(g, w)
                    if b is None:
                        continue
                    ai, bi = pos[Word((), spec.n[i])], pos[b]
                lo, hi = sorted((len(w), len(g)))
                comp[r, c] = 1
                tauw[r, c] = math.sqrt(Fraction(weight_b(mi, lo), weight_b(mi, hi)))
                muw[r, c] = 1.0 / weight_b(mi, hi)
                repa[r, c] = ai
                repb[r, c] = bi
        comp_f.append(comp)
        tau_f.append(tauw)
        mu_f.append(muw)
        repa_f.append(repa)
        repb_f.append(repb)

    comp_k, tau_k, mu_k = comp_f[0], tau_f[0], mu_f[0]
    code_a, code_b = repa_f[0], repb_f[0]
    for i in range(1, spec.k):
        ones = np.ones_like(repa_f[i])
        comp_k = np.kron(comp_k, comp_f[i])
        tau_k = np.kron(tau_k, tau_f[i])
        mu_k = np.kron(mu_k, mu_f[i])
        code_a = np.kron(code_a, ones) * sizes[i] + np.kron(np.ones_like(code_a), repa_f[i])
        code_b = np.kron(code_b, ones) * sizes[i] + np.kron(np.ones_like(code_b), repb_f[i])
    combos = int(np.prod(sizes))
    rep_k = code_a * combos + code_b

    # permute from factor-major (kron) order to the degree-sorted basis order
    pos_maps = [{w: t for t, w in enumerate(ws)} for ws in factor_words]
    perm = np.empty(len(basis), dtype=np.int64)
    for b_idx, mw in enumerate(basis.entries):
        kidx = 0
        for i in range(spec.k):
            kidx = kidx * sizes[i] + pos_maps[i][mw.components[i]]
        perm[b_idx] = kidx
    ix = np.ix_(perm, perm)
    comp_s = comp_k[ix].astype(bool)
    tau_s = tau_k[ix]
    mu_s = mu_k[ix]
    rep_s = rep_k[ix]

    rows, cols = np.nonzero(comp_s)
    tau_c = tau_s[rows, cols]
    mu_c = mu_s[rows, cols]
    uniq, rep_c = np.unique(rep_s[rows, cols], return_inverse=True)

    pairs: List[Tuple[MultiWord, MultiWord]] = []
    ref_row = np.empty(len(uniq), dtype=np.int64)
    ref_col = np.empty(len(uniq), dtype=np.int64)
    for rid, code in enumerate(uniq):
        code = int(code)
        ca, cb = divmod(code, combos)
        aw: List[Word] = []
        bw: List[Word] = []
        for i in range(spec.k - 1, -1, -1):
            ca, ai = divmod(ca, sizes[i]) if i else (0, ca)
            cb, bi = divmod(cb, sizes[i]) if i else (0, cb)
            aw.append(factor_words[i][ai])
            bw.append(factor_words[i][bi])
        alpha = MultiWord(tuple(reversed(aw)))
        beta = MultiWord(tuple(reversed(bw)))
        pairs.append((alpha, beta))
        ref_row[rid] = basis.index_of(alpha)
        ref_col[rid] = basis.index_of(beta)
    tau_ref = tau_s[ref_row, ref_col]
    mu_ref = mu_s[ref_row, ref_col]
    pair_index = {pair: rid for rid, pair in enumerate(pairs)}

    return _PairTables(
        comp=comp_s,
        rows=rows,
        cols=cols,
        tau=tau_c,
        mu=mu_c,
        rep=rep_c,
        pairs=tuple(pairs),
        ref_row=ref_row,
        ref_col=ref_col,
        tau_ref=tau_ref,
        mu_ref=mu_ref,
        pair_index=pair_index,
    )


def _blocks(spec: TruncationSpec, T: Matrix) -> np.ndarray:
    """View T as a (d, fock, d, fock) array of coefficient blocks."""
    d, F = spec.d, spec.fock_dim
    A = np.asarray(T.todense() if hasattr(T, "todense") else T, dtype=np.complex128)
    if A.shape != (d * F, d * F):
        raise ValueError(f"operator must be {d * F}x{d * F}, got {A.shape}")
    return A.reshape(d, F, d, F)


# ----------------------------------------------------------------------------
# the two structure tests
# ----------------------------------------------------------------------------


def _column_structure(C) -> Tuple[np.ndarray, np.ndarray]:
    """(row_of, val_of) for a matrix with at most one nonzero per column.

    row_of[c] is -1 for zero columns.  Shift-type operators (creation
    operators, their Cauchy duals) all have this shape, which turns
    compressed products around them into plain index gathers.
    """
    csc = C.tocsc()
    dim = csc.shape[1]
    counts = np.diff(csc.indptr)
    if counts.max(initial=0) > 1:
        raise ValueError("matrix has a column with more than one nonzero")
    row_of = np.full(dim, -1, dtype=np.int64)
    val_of = np.zeros(dim, dtype=np.complex128)
    sel = counts == 1
    starts = csc.indptr[:-1][sel]
    row_of[sel] = csc.indices[starts]
    val_of[sel] = csc.data[starts]
    return row_of, val_of


def brown_halmos_residual(spec: TruncationSpec, T: Matrix) -> Tuple[float, ...]:
    """Per-factor residual of the structure equation on the guard-band interior.

    For factor i, the full n_i x n_i block equation is enforced: the (j, l)
    block of (Lambda'_{i,j})* T Lambda'_{i,l} must vanish off the diagonal
    and equal the alternating-binomial map of T on it.  Entries are compared
    after compression to the interior at a uniform guard band of m_i + 1.
    """
    A = np.asarray(T.todense() if hasattr(T, "todense") else T, dtype=np.complex128)
    if A.shape != (spec.total_dim, spec.total_dim):
        raise ValueError(f"operator must be {spec.total_dim}x{spec.total_dim}")
    if max(spec.m) + 1 > min(spec.L):
        raise ValueError(
            "structure equation needs truncation degrees above every weight order"
        )
    out = []
    for i in range(1, spec.k + 1):
        mask = interior_mask(spec, GuardBand.uniform(spec, spec.m[i - 1] + 1))
        idx = np.nonzero(mask)[0]
        psi_sub = psi_bh(spec, i, A)[np.ix_(idx, idx)]
        structure = [
            _column_structure(cauchy_dual_column(spec, i, j))
            for j in range(1, spec.n[i - 1] + 1)
        ]
        # interior columns are never annihilated, so each compressed block
        # (Lambda'_j)* T Lambda'_l is a gather of T scaled by the weights
        worst = 0.0
        for j, (rows_j, vals_j) in enumerate(structure):
            if not (rows_j[idx] >= 0).all():
                raise AssertionError("creation operator annihilated an interior column")
            for l, (rows_l, vals_l) in enumerate(structure):
                R = (
                    np.conj(vals_j[idx])[:, None]
                    * A[np.ix_(rows_j[idx], rows_l[idx])]
                    * vals_l[idx][None, :]
                )
                if j == l:
                    R = R - psi_sub
                if R.size:
                    worst = max(worst, float(np.max(np.abs(R))))
        out.append(worst)
    return tuple(out)


@dataclass(frozen=True)
class Witness:
    """Worst offending basis pair of a failed Toeplitz check."""

    omega: str
    gamma: str
    kind: str  # "offdomain" or "ratio"
    value: float

    def to_json(self) -> dict:
        return {
            "omega": self.omega,
            "gamma": self.gamma,
            "kind": self.kind,
            "value": self.value,
        }


@dataclass(frozen=True)
class ToeplitzReport:
    is_toeplitz: bool
    max_offdomain_entry: float
    max_ratio_residual: float
    witness: Optional[Witness]
    tol: float

    def to_json(self) -> dict:
        return {
            "is_toeplitz": self.is_toeplitz,
            "max_offdomain_entry": self.max_offdomain_entry,
            "max_ratio_residual": self.max_ratio_residual,
            "witness": None if self.witness is None else self.witness.to_json(),
            "tol": self.tol,
        }


def is_weighted_multi_toeplitz(
    spec: TruncationSpec,
    T: Matrix,
    tol: float = 1e-10,
    weights: str = "tau",
) -> ToeplitzReport:
    """Entrywise structure test: off-domain blocks vanish, classes are proportional.

    Every d x d block at a non-comparable pair must be zero, and within each
    simplification class the blocks divided by the pair weight must agree
    with the block at the reduced representative.  ``weights="mu"`` runs the
    plain-Fock variant (used on conjugated operators); the default uses tau.
    """
    if weights not in ("tau", "mu"):
        raise ValueError(f"weights must be 'tau' or 'mu', got {weights!r}")
    tab = _pair_tables(spec)
    basis = build_basis(spec)
    T4 = _blocks(spec, T)
    w_c = tab.tau if weights == "tau" else tab.mu
    w_ref = tab.tau_ref if weights == "tau" else tab.mu_ref

    max_off, max_dev = 0.0, 0.0
    off_pair, dev_pair = None, None
    offdomain = ~tab.comp
    ref_rows = tab.ref_row[tab.rep]
    ref_cols = tab.ref_col[tab.rep]
    for c1 in range(spec.d):
        for c2 in range(spec.d):
            B = T4[c1, :, c2, :]
            off = np.abs(B) * offdomain
            if off.size:
                r, c = np.unravel_index(int(np.argmax(off)), off.shape)
                if off[r, c] > max_off:
                    max_off = float(off[r, c])
                    off_pair = (r, c)
            ratios = B[tab.rows, tab.cols] / w_c
            refs = B[ref_rows, ref_cols] / w_ref[tab.rep]
            dev = np.abs(ratios - refs)
            if dev.size:
                t = int(np.argmax(dev))
                if dev[t] > max_dev:
                    max_dev = float(dev[t])
                    dev_pair = (int(tab.rows[t]), int(tab.cols[t]))

    ok = max_off <= tol and max_dev <= tol
    witness = None
    if not ok:
        if max_off > max_dev:
            r, c = off_pair
            witness = Witness(str(basis.entries[r]), str(basis.entries[c]), "offdomain", max_off)
        else:
            r, c = dev_pair
            witness = Witness(str(basis.entries[r]), str(basis.entries[c]), "ratio", max_dev)
    return ToeplitzReport(ok, max_off, max_dev, witness, tol)


# ----------------------------------------------------------------------------
# symbol extraction and reconstruction
# ----------------------------------------------------------------------------


def extract_symbol(spec: TruncationSpec, T: Matrix, prune: float = 0.0) -> Symbol:
    """Read the Fourier coefficients off the reduced-representative entries.

    A_{(alpha,beta)} is the block at row alpha, column beta divided by the
    pair's tau weight.  Blocks of max modulus <= ``prune`` are dropped
    (exact zeros by default), so extracting a synthesized operator returns
    exactly the generating symbol.
    """
    tab = _pair_tables(spec)
    T4 = _blocks(spec, T)
    coeffs: Dict[Tuple[MultiWord, MultiWord], np.ndarray] = {}
    for rid, pair in enumerate(tab.pairs):
        A = T4[:, tab.ref_row[rid], :, tab.ref_col[rid]] / tab.tau_ref[rid]
        if np.max(np.abs(A)) <= prune:
            continue
        coeffs[pair] = A.copy()
    return Symbol(spec, coeffs)


def reconstruct(spec: TruncationSpec, S: Symbol, method: str = "table") -> np.ndarray:
    """Assemble the operator with Fourier representation S.

    The result is sum over keys of A_{(alpha,beta)} tensor W_alpha W_beta*.
    ``method="table"`` fills entries directly from the matching condition
    (entrywise identical to the operator product); ``method="product"``
    multiplies out the word operators and is kept as the slow reference.
    """
    if S.spec != spec:
        raise ValueError("symbol spec does not match")
    d, F = spec.d, spec.fock_dim
    if method == "product":
        out = np.zeros((d * F, d * F), dtype=np.complex128)
        for (alpha, beta), A in S.coefficients.items():
            Wa = multiword_operator(spec, alpha, side="left")
            Wb = multiword_operator(spec, beta, side="left")
            M = np.asarray((Wa @ Wb.conj().T).todense())[:F, :F]
            out += np.kron(np.asarray(A, dtype=np.complex128), M)
        return out
    if method != "table":
        raise ValueError(f"method must be 'table' or 'product', got {method!r}")

    tab = _pair_tables(spec)
    coeff = np.zeros((len(tab.pairs), d, d), dtype=np.complex128)
    for pair, A in S.coefficients.items():
        rid = tab.pair_index.get(pair)
        if rid is None:
            raise ValueError(f"symbol key ({pair[0]}, {pair[1]}) outside truncation range")
        coeff[rid] = np.asarray(A, dtype=np.complex128)
    T4 = np.zeros((d, F, d, F), dtype=np.complex128)
    for c1 in range(d):
        for c2 in range(d):
            T4[c1, tab.rows, c2, tab.cols] = tab.tau * coeff[tab.rep, c1, c2]
    return T4.reshape(d * F, d * F)


# ----------------------------------------------------------------------------
# multi-homogeneous decomposition
# ----------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _degree_diffs(spec: TruncationSpec) -> np.ndarray:
    """(k, fock, fock) int array: per-factor degree difference row minus column."""
    deg = _degree_array(spec)
    return (deg.T[:, :, None] - deg.T[:, None, :]).astype(np.int16)


def _entrywise(spec: TruncationSpec, T: Matrix, weight: np.ndarray) -> np.ndarray:
    """Multiply every coefficient block of T entrywise by a (fock, fock) weight."""
    T4 = _blocks(spec, T)
    out = T4 * weight[None, :, None, :]
    d, F = spec.d, spec.fock_dim
    return out.reshape(d * F, d * F)


def _check_degree_vector(spec: TruncationSpec, s: Sequence[int]) -> Tuple[int, ...]:
    s = tuple(int(x) for x in s)
    if len(s) != spec.k:
        raise ValueError(f"degree vector must have length k={spec.k}")
    return s


def homogeneous_part_projection(spec: TruncationSpec, T: Matrix, s: Sequence[int]) -> np.ndarray:
    """The degree-s component: sum over p of P_{p+s} T P_p."""
    s = _check_degree_vector(spec, s)
    diffs = _degree_diffs(spec)
    keep = np.ones((spec.fock_dim, spec.fock_dim), dtype=bool)
    for j in range(spec.k):
        keep &= diffs[j] == s[j]
    return _entrywise(spec, T, keep.astype(np.float64))


def homogeneous_part_quadrature(
    spec: TruncationSpec,
    T: Matrix,
    s: Sequence[int],
    N: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """The degree-s component by uniform torus quadrature.

    Averages e^{-i s.theta} Gamma(theta) T Gamma(theta)* over the uniform
    grid with N_j points per circle.  The integrand is a trigonometric
    polynomial of degree at most L_j per variable, so any N_j >= 2 L_j + 1
    reproduces the spectral projection exactly; smaller N_j is an error.
    """
    s = _check_degree_vector(spec, s)
    if N is None:
        N = tuple(2 * Lj + 1 for Lj in spec.L)
    N = tuple(int(x) for x in N)
    if len(N) != spec.k:
        raise ValueError(f"sample counts must have length k={spec.k}")
    for Nj, Lj in zip(N, spec.L):
        if Nj < 2 * Lj + 1:
            raise ValueError(f"undersampled quadrature: N={Nj} < {2 * Lj + 1}")
    # The grid average factorizes over the torus coordinates, so run one
    # phase-averaging pass per circle instead of the full product grid.
    acc = np.asarray(T.todense() if hasattr(T, "todense") else T, dtype=np.complex128)
    deg = _degree_array(spec).astype(np.float64)
    for j in range(spec.k):
        u_base = np.tile(deg[:, j], spec.d)
        nxt = np.zeros_like(acc)
        for t in range(N[j]):
            theta = 2.0 * np.pi * t / N[j]
            u = np.exp(1j * theta * u_base)
            nxt += np.exp(-1j * s[j] * theta) * (u[:, None] * acc * np.conj(u)[None, :])
        acc = nxt / N[j]
    return acc


def fourier_support(spec: TruncationSpec) -> Iterator[Tuple[int, ...]]:
    """All degree vectors s at which a truncated operator can have a component."""
    return itertools.product(*(range(-Lj, Lj + 1) for Lj in spec.L))


def fourier_partial_sum(spec: TruncationSpec, T: Matrix, N: Sequence[int]) -> np.ndarray:
    """Plain partial Fourier sum: sum of T_s over |s_j| <= N_j (weight one)."""
    N = tuple(int(x) for x in N)
    if len(N) != spec.k:
        raise ValueError(f"N must have length k={spec.k}")
    diffs = _degree_diffs(spec)
    keep = np.ones((spec.fock_dim, spec.fock_dim), dtype=bool)
    for j in range(spec.k):
        keep &= np.abs(diffs[j]) <= N[j]
    return _entrywise(spec, T, keep.astype(np.float64))


def fejer_sum(spec: TruncationSpec, T: Matrix, N: Sequence[int]) -> np.ndarray:
    """Cesaro-weighted Fourier sum: sum_s prod_j (1 - |s_j|/(N_j+1)) T_s.

    Since the homogeneous parts tile the entries by degree difference, this
    is an entrywise multiplier: each entry is scaled by the product of
    clipped triangular weights of its per-factor degree differences.
    """
    N = tuple(int(x) for x in N)
    if len(N) != spec.k or any(Nj < 0 for Nj in N):
        raise ValueError(f"N must be k={spec.k} nonnegative integers")
    diffs = _degree_diffs(spec)
    weight = np.ones((spec.fock_dim, spec.fock_dim))
    for j in range(spec.k):
        weight *= np.clip(1.0 - np.abs(diffs[j]).astype(np.float64) / (N[j] + 1.0), 0.0, None)
    return _entrywise(spec, T, weight)


# ----------------------------------------------------------------------------
# conjugation to the formal power-series picture
# ----------------------------------------------------------------------------


def to_weighted_fock_conjugate(spec: TruncationSpec, T: Matrix, invert: bool = False) -> np.ndarray:
    """Entry table of the conjugated operator in the formal-monomial basis.

    The grading unitary sends the orthonormal basis vector for alpha to
    sqrt(prod_i b(m_i, |alpha_i|)) times the monomial Z_alpha, which has
    norm 1/sqrt(prod_i b).  The entries of the conjugated operator against
    the (complete orthogonal, non-normalized) monomials are therefore the
    original entries scaled by prod 1/sqrt(b) on both sides; the tau
    proportionality becomes the plain-Fock mu proportionality with the same
    class coefficients.  ``invert=True`` applies the inverse scaling.
    """
    deg = _degree_array(spec)
    scale = np.ones(spec.fock_dim)
    for i in range(spec.k):
        bvals = np.array([weight_b(spec.m[i], int(t)) for t in range(spec.L[i] + 1)], dtype=np.float64)
        scale *= np.sqrt(bvals[deg[:, i]])
    u = scale if invert else 1.0 / scale
    T4 = _blocks(spec, T)
    out = T4 * u[None, :, None, None] * u[None, None, None, :]
    d, F = spec.d, spec.fock_dim
    return out.reshape(d * F, d * F)
