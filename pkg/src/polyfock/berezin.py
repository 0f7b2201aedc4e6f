"""Berezin kernels and transforms at matrix tuples, membership and purity.

A point is a k-tuple of n_i-tuples of dH x dH matrices whose entries
commute across factors.  Membership in the poly-hyperball asks all iterated
defects to be positive semidefinite; pure points have every factor's
completely positive map of spectral radius < 1.  The kernel rows are
indexed by (basis word, defect coordinate) with the word index major.

The radial tuple rW lives on the truncated space itself (dH = fock
dimension), where a materialized kernel would be enormous; every check the
radial tuple participates in (Gram, intertwining, transform) is therefore
also available through structured paths that never build the kernel matrix.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .basis import TruncationSpec, build_basis, weight_b
from .operators import Matrix, _degree_array, defect, left_creation, max_abs
from .toeplitz import Symbol, _blocks
from .words import MultiWord, Word, concat

COMMUTATION_TOL = 1e-12
PSD_TOL = 1e-10
PURITY_THRESHOLD = 1.0 - 1e-8
_MAX_KERNEL_ENTRIES = 200_000_000


@dataclass(frozen=True, eq=False)
class PointTuple:
    """A matrix tuple in (or near) the poly-hyperball.

    ``factors[i-1][j-1]`` is X_{i,j}; all matrices share the size dH.
    ``radial`` marks the tuple rW built by radial_model and enables the
    structured evaluation paths.
    """

    spec: TruncationSpec
    factors: Tuple[Tuple[Matrix, ...], ...]
    pure: bool = False
    radial: Optional[float] = None

    def __post_init__(self) -> None:
        if len(self.factors) != self.spec.k:
            raise ValueError("factor count must equal k")
        dH = self.factors[0][0].shape[0]
        for i, ops in enumerate(self.factors):
            if len(ops) != self.spec.n[i]:
                raise ValueError(f"factor {i + 1} must have {self.spec.n[i]} matrices")
            for X in ops:
                if X.shape != (dH, dH):
                    raise ValueError("all point matrices must be square of equal size")
        for p in range(self.spec.k):
            for q in range(p + 1, self.spec.k):
                for A in self.factors[p]:
                    for B in self.factors[q]:
                        if max_abs(A @ B - B @ A) > COMMUTATION_TOL:
                            raise ValueError(
                                f"commutation violation between factors {p + 1} and {q + 1}"
                            )

    @property
    def dH(self) -> int:
        return self.factors[0][0].shape[0]

    def factor(self, i: int) -> Tuple[Matrix, ...]:
        return self.factors[i - 1]

    def to_json(self) -> dict:
        factors = []
        for ops in self.factors:
            mats = []
            for X in ops:
                A = np.asarray(X.todense() if sp.issparse(X) else X)
                mats.append([[[float(z.real), float(z.imag)] for z in row] for row in A])
            factors.append(mats)
        return {
            "spec": self.spec.to_json(),
            "dH": self.dH,
            "pure": self.pure,
            "radial": self.radial,
            "factors": factors,
        }

    @staticmethod
    def from_json(obj: dict) -> "PointTuple":
        spec = TruncationSpec.from_json(obj["spec"])
        factors = tuple(
            tuple(
                np.array([[complex(re, im) for re, im in row] for row in mat], dtype=np.complex128)
                for mat in ops
            )
            for ops in obj["factors"]
        )
        return PointTuple(spec, factors, pure=bool(obj.get("pure", False)), radial=obj.get("radial"))


def point_tuple(spec: TruncationSpec, factors, radial: Optional[float] = None) -> PointTuple:
    """Build a PointTuple, normalizing matrices and computing the purity flag."""
    norm = tuple(
        tuple(X if sp.issparse(X) else np.asarray(X, dtype=np.complex128) for X in ops)
        for ops in factors
    )
    probe = PointTuple(spec, norm, pure=False, radial=radial)
    rho = purity(probe)
    return PointTuple(spec, norm, pure=all(r < PURITY_THRESHOLD for r in rho), radial=radial)


# ----------------------------------------------------------------------------
# membership and purity
# ----------------------------------------------------------------------------


def _min_eigenvalue(D: Matrix) -> float:
    if sp.issparse(D):
        off = D - sp.diags(D.diagonal())
        if off.nnz == 0 or max_abs(off) == 0.0:
            return float(D.diagonal().real.min())
        D = D.toarray()
    return float(np.linalg.eigvalsh(np.asarray(D)).min())


def membership(X: PointTuple, spec: Optional[TruncationSpec] = None) -> bool:
    """Whether every iterated defect up to the order tuple is PSD (tol 1e-10)."""
    spec = spec or X.spec
    for p in itertools.product(*(range(mi + 1) for mi in spec.m)):
        if _min_eigenvalue(defect(X, p)) < -PSD_TOL:
            return False
    return True


def purity(X: PointTuple) -> Tuple[float, ...]:
    """Spectral radius of each factor's completely positive map on dH x dH space.

    Small sizes use the exact dH^2 x dH^2 matrix representation; large ones
    a matrix-free power iteration started at the identity (exact zero for
    nilpotent tuples such as the radial model).
    """
    radii = []
    for ops in X.factors:
        dH = ops[0].shape[0]
        if dH <= 24 and not any(sp.issparse(op) for op in ops):
            rep = np.zeros((dH * dH, dH * dH), dtype=np.complex128)
            for op in ops:
                A = np.asarray(op)
                rep += np.kron(A, A.conj())
            radii.append(float(np.max(np.abs(np.linalg.eigvals(rep)))) if rep.size else 0.0)
            continue
        Y: Matrix = sp.identity(dH, format="csr", dtype=np.complex128) if sp.issparse(ops[0]) else np.eye(dH, dtype=np.complex128)
        ratio, prev_norm = 0.0, 1.0
        for _ in range(200):
            Z = None
            for op in ops:
                term = op @ Y @ (op.conj().T if not sp.issparse(op) else op.conj().T.tocsr())
                Z = term if Z is None else Z + term
            nrm = max_abs(Z)
            if nrm == 0.0:
                ratio = 0.0
                break
            new_ratio = nrm / prev_norm if prev_norm else nrm
            if abs(new_ratio - ratio) < 1e-12:
                ratio = new_ratio
                break
            ratio, prev_norm = new_ratio, 1.0
            Y = Z / nrm
        radii.append(float(ratio))
    return tuple(radii)


def is_pure(X: PointTuple) -> bool:
    return all(r < PURITY_THRESHOLD for r in purity(X))


# ----------------------------------------------------------------------------
# word products and the defect square root
# ----------------------------------------------------------------------------


def _word_products(X: PointTuple) -> List[Matrix]:
    """X_beta for every basis word beta, by peeling the first letter.

    The basis is sorted by degree vectors, so each word's parent (first
    letter of the first nonempty factor removed) appears earlier.
    """
    spec = X.spec
    basis = build_basis(spec)
    dH = X.dH
    sparse = any(sp.issparse(op) for ops in X.factors for op in ops)
    eye = sp.identity(dH, format="csr", dtype=np.complex128) if sparse else np.eye(dH, dtype=np.complex128)
    prods: List[Optional[Matrix]] = [None] * len(basis)
    for idx, mw in enumerate(basis.entries):
        for i in range(spec.k):
            letters = mw.components[i].letters
            if letters:
                tail = list(mw.components)
                tail[i] = Word(letters[1:], spec.n[i])
                parent = basis.index_of(MultiWord(tuple(tail)))
                prods[idx] = X.factors[i][letters[0] - 1] @ prods[parent]
                break
        else:
            prods[idx] = eye
    return prods


@dataclass(frozen=True, eq=False)
class _DefectData:
    matrix: Matrix          # PSD-clipped defect
    sqrt_factor: np.ndarray  # dH x rank, columns sqrt(lambda_t) v_t
    eigenvalues: np.ndarray
    rank: int


def _defect_psd(X: PointTuple) -> _DefectData:
    """Eigendata of the top defect, aborting below -1e-10 and clipping above."""
    spec = X.spec
    D = defect(X, spec.m)
    if sp.issparse(D):
        off = D - sp.diags(D.diagonal())
        if off.nnz == 0 or max_abs(off) == 0.0:
            w = np.asarray(D.diagonal().real, dtype=np.float64)
            if w.min(initial=0.0) < -PSD_TOL:
                raise ValueError(f"defect eigenvalue {w.min():.3e} below -{PSD_TOL}")
            w = np.clip(w, 0.0, None)
            pos = np.nonzero(w > 0.0)[0]
            S = sp.csc_matrix(
                (np.sqrt(w[pos]), (pos, np.arange(len(pos)))),
                shape=(D.shape[0], len(pos)),
                dtype=np.complex128,
            )
            return _DefectData(sp.diags(w).tocsr(), S, w, len(pos))
        D = D.toarray()
    A = np.asarray(D)
    A = (A + A.conj().T) / 2.0
    w, V = np.linalg.eigh(A)
    if w.min(initial=0.0) < -PSD_TOL:
        raise ValueError(f"defect eigenvalue {w.min():.3e} below -{PSD_TOL}")
    w = np.clip(w, 0.0, None)
    pos = np.nonzero(w > 0.0)[0]
    S = V[:, pos] * np.sqrt(w[pos])[None, :]
    clipped = (V * w[None, :]) @ V.conj().T
    return _DefectData(clipped, S, w, len(pos))


# ----------------------------------------------------------------------------
# kernel, Gram, intertwining
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BerezinKernelMatrix:
    """The kernel as an explicit matrix from C^{dH} to (basis word, defect coord).

    Row index = word_index * rank + defect_coordinate.
    """

    spec: TruncationSpec
    matrix: np.ndarray
    rank: int
    defect_sqrt: np.ndarray
    eigenvalues: np.ndarray


def berezin_kernel(X: PointTuple) -> BerezinKernelMatrix:
    """Materialize the kernel: row block at beta is sqrt(b_beta) (X_beta S)^*.

    S is the economy square-root factor of the PSD-clipped defect.  For
    points whose kernel would not fit in memory (the radial tuple at large
    truncations), use kernel_gram / berezin_transform, which never build it.
    """
    spec = X.spec
    basis = build_basis(spec)
    dd = _defect_psd(X)
    F, dH, rank = len(basis), X.dH, dd.rank
    if F * rank * dH > _MAX_KERNEL_ENTRIES:
        raise ValueError(
            "kernel matrix too large to materialize; use kernel_gram or berezin_transform"
        )
    prods = _word_products(X)
    S = dd.sqrt_factor.toarray() if sp.issparse(dd.sqrt_factor) else dd.sqrt_factor
    K = np.zeros((F * rank, dH), dtype=np.complex128)
    for idx, mw in enumerate(basis.entries):
        root = math.sqrt(
            math.prod(weight_b(spec.m[i], len(mw.components[i])) for i in range(spec.k))
        )
        XS = prods[idx] @ S
        block = np.asarray(XS.todense() if sp.issparse(XS) else XS)
        K[idx * rank: (idx + 1) * rank, :] = root * block.conj().T
    return BerezinKernelMatrix(spec, K, rank, S, dd.eigenvalues)


def kernel_gram(X: PointTuple) -> np.ndarray:
    """K*K without materializing K: sum of b_beta X_beta Delta X_beta*.

    Equals the identity, up to the truncation tail, for pure members.
    """
    spec = X.spec
    basis = build_basis(spec)
    dd = _defect_psd(X)
    prods = _word_products(X)
    acc = None
    for idx, mw in enumerate(basis.entries):
        coeff = math.prod(weight_b(spec.m[i], len(mw.components[i])) for i in range(spec.k))
        term = coeff * (prods[idx] @ dd.matrix @ _adj(prods[idx]))
        acc = term if acc is None else acc + term
    return np.asarray(acc.todense() if sp.issparse(acc) else acc)


def _adj(M: Matrix) -> Matrix:
    return M.conj().T.tocsr() if sp.issparse(M) else np.asarray(M).conj().T


def intertwining_residual(X: PointTuple, i: int, j: int) -> float:
    """Upper bound on the max entry of K X_{i,j}* - (W_{i,j}* (x) I) K.

    The row block of the residual at beta is sqrt(b_beta) S^* M_beta^* with
    M_beta = X_{i,j} X_beta - X_{g_j beta} (the creation weights cancel), on
    the interior with guard band 1 in factor i; its Gram matrix is
    sum b_beta M_beta Delta M_beta^*, and the max column norm bounds every
    entry.  For points built from exactly commuting factors the bound is an
    exact zero up to rounding.
    """
    spec = X.spec
    basis = build_basis(spec)
    dd = _defect_psd(X)
    prods = _word_products(X)
    deg = _degree_array(spec)
    Xij = X.factors[i - 1][j - 1]
    G = None
    for idx, mw in enumerate(basis.entries):
        if deg[idx, i - 1] > spec.L[i - 1] - 1:
            continue
        shifted = list(mw.components)
        shifted[i - 1] = concat(Word((j,), spec.n[i - 1]), shifted[i - 1])
        up = basis.index_of(MultiWord(tuple(shifted)))
        M = Xij @ prods[idx] - prods[up]
        coeff = math.prod(weight_b(spec.m[t], len(mw.components[t])) for t in range(spec.k))
        term = coeff * (M @ dd.matrix @ _adj(M))
        G = term if G is None else G + term
    if G is None:
        return 0.0
    diag = np.asarray(G.diagonal()).ravel().real if sp.issparse(G) else np.diag(G).real
    return float(math.sqrt(max(float(diag.max(initial=0.0)), 0.0)))


# ----------------------------------------------------------------------------
# transforms and symbol evaluation
# ----------------------------------------------------------------------------


@dataclass(eq=False)
class _RadialTables:
    """Flattened triples (h, h', f) with h = beta f, h' = beta' f componentwise.

    For the radial tuple the transform entry at (h, h') is the sum over
    common suffixes f of T[beta, beta'] times a static weight, r to the
    total raised degree, and the defect diagonal at f.
    """

    h1: np.ndarray
    h2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    f: np.ndarray
    degsum: np.ndarray
    weight: np.ndarray


@lru_cache(maxsize=None)
def _radial_tables(spec: TruncationSpec) -> _RadialTables:
    basis = build_basis(spec)
    factor_words = [
        [w for w in _factor_word_list(spec, i)] for i in range(spec.k)
    ]
    pos_maps = [{w: t for t, w in enumerate(ws)} for ws in factor_words]
    sizes = [len(ws) for ws in factor_words]
    # map from factor-major position combos to the degree-sorted index
    combo_to_idx = np.empty(int(np.prod(sizes)), dtype=np.int64)
    for b_idx, mw in enumerate(basis.entries):
        kidx = 0
        for i in range(spec.k):
            kidx = kidx * sizes[i] + pos_maps[i][mw.components[i]]
        combo_to_idx[kidx] = b_idx

    # per factor: all (f, beta) pairs with |beta| + |f| <= L, h = beta f
    per_factor = []
    for i in range(spec.k):
        words = factor_words[i]
        pos = pos_maps[i]
        mi, Li = spec.m[i], spec.L[i]
        fpos, bpos, hpos, wvals, bdeg = [], [], [], [], []
        for f in words:
            room = Li - len(f)
            for beta in words:
                if len(beta) > room:
                    continue
                h = concat(beta, f)
                fpos.append(pos[f])
                bpos.append(pos[beta])
                hpos.append(pos[h])
                wvals.append(
                    math.sqrt(weight_b(mi, len(f)) / weight_b(mi, len(h)))
                    * math.sqrt(weight_b(mi, len(beta)))
                )
                bdeg.append(len(beta))
        per_factor.append(
            (
                np.array(fpos, dtype=np.int64),
                np.array(bpos, dtype=np.int64),
                np.array(hpos, dtype=np.int64),
                np.array(wvals),
                np.array(bdeg, dtype=np.int64),
            )
        )

    # cartesian product across factors via index folding
    fpos, bpos, hpos, wvals, bdeg = per_factor[0]
    for i in range(1, spec.k):
        f2, b2, h2, w2, d2 = per_factor[i]
        n1, n2 = len(fpos), len(f2)
        r1, r2 = np.repeat(np.arange(n1), n2), np.tile(np.arange(n2), n1)
        fpos = fpos[r1] * sizes[i] + f2[r2]
        bpos = bpos[r1] * sizes[i] + b2[r2]
        hpos = hpos[r1] * sizes[i] + h2[r2]
        wvals = wvals[r1] * w2[r2]
        bdeg = bdeg[r1] + d2[r2]
    f_idx = combo_to_idx[fpos]
    b_idx = combo_to_idx[bpos]
    h_idx = combo_to_idx[hpos]

    # pair up sides sharing the common suffix f
    order = np.argsort(f_idx, kind="stable")
    f_sorted = f_idx[order]
    bounds = np.nonzero(np.diff(f_sorted))[0] + 1
    starts = np.concatenate(([0], bounds))
    stops = np.concatenate((bounds, [len(f_sorted)]))
    H1, H2, B1, B2, FF, DS, WW = [], [], [], [], [], [], []
    for s, e in zip(starts, stops):
        grp = order[s:e]
        n = len(grp)
        r1, r2 = np.repeat(grp, n), np.tile(grp, n)
        H1.append(h_idx[r1])
        H2.append(h_idx[r2])
        B1.append(b_idx[r1])
        B2.append(b_idx[r2])
        FF.append(np.full(n * n, f_sorted[s], dtype=np.int64))
        DS.append(bdeg[r1] + bdeg[r2])
        WW.append(wvals[r1] * wvals[r2])
    return _RadialTables(
        h1=np.concatenate(H1),
        h2=np.concatenate(H2),
        b1=np.concatenate(B1),
        b2=np.concatenate(B2),
        f=np.concatenate(FF),
        degsum=np.concatenate(DS).astype(np.int64),
        weight=np.concatenate(WW),
    )


def _factor_word_list(spec: TruncationSpec, i: int):
    from .words import enumerate_words

    return enumerate_words(spec.n[i], spec.L[i])


def berezin_transform(X: PointTuple, T: Matrix) -> np.ndarray:
    """(I (x) K*)(T (x) I)(I (x) K) as a matrix on C^d (x) C^{dH}.

    Entry blocks: sum over word pairs of T[beta, beta'] sqrt(b_beta
    b_beta') X_beta Delta X_beta'^*.  The radial tuple uses the suffix
    tables; other points contract through the materialized kernel.
    """
    spec = X.spec
    d, F = spec.d, spec.fock_dim
    T4 = _blocks(spec, T)
    if X.radial is not None:
        tab = _radial_tables(spec)
        dd = _defect_psd(X)
        delta = np.asarray(dd.matrix.diagonal()).ravel().real
        vals = tab.weight * np.power(float(X.radial), tab.degsum) * delta[tab.f]
        pos = tab.h1 * F + tab.h2
        out = np.zeros((d, F, d, F), dtype=np.complex128)
        for c1 in range(d):
            for c2 in range(d):
                tv = T4[c1, tab.b1, c2, tab.b2] * vals
                out[c1, :, c2, :] = (
                    np.bincount(pos, weights=tv.real, minlength=F * F)
                    + 1j * np.bincount(pos, weights=tv.imag, minlength=F * F)
                ).reshape(F, F)
        return out.reshape(d * F, d * F)

    kernel = berezin_kernel(X)
    dH, rank = X.dH, kernel.rank
    K3 = kernel.matrix.reshape(F, rank, dH)
    out = np.zeros((d, dH, d, dH), dtype=np.complex128)
    for c1 in range(d):
        for c2 in range(d):
            out[c1, :, c2, :] = np.einsum(
                "ath,ab,btg->hg", K3.conj(), T4[c1, :, c2, :], K3, optimize=True
            )
    return out.reshape(d * dH, d * dH)


def eval_symbol(S: Symbol, X: PointTuple) -> np.ndarray:
    """Evaluate the pluriharmonic symbol at the point: sum A (x) X_alpha X_beta*."""
    spec = S.spec
    if (X.spec.k, X.spec.n, X.spec.m, X.spec.L) != (spec.k, spec.n, spec.m, spec.L):
        raise ValueError("point and symbol truncation shapes differ")
    basis = build_basis(X.spec)
    prods = _word_products(X)
    d, dH = spec.d, X.dH
    sparse = any(sp.issparse(op) for ops in X.factors for op in ops)
    if sparse:
        acc = [[None for _ in range(d)] for _ in range(d)]
        for (alpha, beta), A in S.coefficients.items():
            M = prods[basis.index_of(alpha)] @ _adj(prods[basis.index_of(beta)])
            A = np.asarray(A)
            for c1 in range(d):
                for c2 in range(d):
                    if A[c1, c2] == 0:
                        continue
                    term = A[c1, c2] * M
                    acc[c1][c2] = term if acc[c1][c2] is None else acc[c1][c2] + term
        out = np.zeros((d, dH, d, dH), dtype=np.complex128)
        for c1 in range(d):
            for c2 in range(d):
                if acc[c1][c2] is not None:
                    out[c1, :, c2, :] = np.asarray(acc[c1][c2].todense())
        return out.reshape(d * dH, d * dH)
    out = np.zeros((d, dH, d, dH), dtype=np.complex128)
    for (alpha, beta), A in S.coefficients.items():
        M = prods[basis.index_of(alpha)] @ _adj(prods[basis.index_of(beta)])
        A = np.asarray(A)
        for c1 in range(d):
            for c2 in range(d):
                out[c1, :, c2, :] += A[c1, c2] * M
    return out.reshape(d * dH, d * dH)


# ----------------------------------------------------------------------------
# constructors
# ----------------------------------------------------------------------------


def radial_model(spec: TruncationSpec, r: float) -> PointTuple:
    """The tuple rW on the truncated space (a pure member for 0 <= r < 1)."""
    if not 0.0 <= r < 1.0:
        raise ValueError(f"radial parameter must be in [0, 1), got {r}")
    flat = TruncationSpec(spec.k, spec.n, spec.m, spec.L, 1)
    factors = tuple(
        tuple((r * left_creation(flat, i, j)).tocsr() for j in range(1, spec.n[i - 1] + 1))
        for i in range(1, spec.k + 1)
    )
    return PointTuple(spec, factors, pure=True, radial=float(r))


def bergman_shift(m: int, L: int) -> Tuple[TruncationSpec, sp.csr_matrix]:
    """The single-variable weighted shift of order m (k = n = 1).

    Its structure equation is the classical one for the Cauchy dual of the
    Bergman-type multiplication operator; order 1 gives S* T S = T.
    """
    if m < 1:
        raise ValueError("order must be >= 1")
    spec = TruncationSpec.make(1, [1], [m], [L])
    return spec, left_creation(spec, 1, 1)


def hardy_polydisc(k: int, L: int) -> Tuple[TruncationSpec, Tuple[sp.csr_matrix, ...]]:
    """Unweighted coordinate shifts of the polydisc (n_i = m_i = 1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    spec = TruncationSpec.make(k, [1] * k, [1] * k, [L] * k)
    return spec, tuple(left_creation(spec, i, 1) for i in range(1, k + 1))
