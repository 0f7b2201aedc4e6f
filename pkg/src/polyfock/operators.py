"""Model operators on the truncated space as concrete sparse/dense matrices.

Every operator acts on C^d tensor the truncated Fock space, with the
coefficient index major: full index = c * fock_dim + b.  Model operators
(creation operators, diagonals, projections) are returned as scipy CSR
matrices acting as the identity on the coefficient factor; generic
operators T are plain dense complex arrays.

Truncation convention: creation operators annihilate the top degree layer
(compression to the truncated space), so operator identities from the
infinite-dimensional theory hold exactly on an interior guard band whose
width equals the maximal word length appearing in the identity.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .basis import GradedBasis, TruncationSpec, build_basis, weight_b
from .words import MultiWord, Word, concat, reverse

Matrix = Union[np.ndarray, sp.spmatrix]

BASIS_ORDER = "degree-block-lex"


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    """A k-tuple of operator tuples, one n_i-tuple of matrices per factor."""

    spec: TruncationSpec
    blocks: Tuple[Tuple[Matrix, ...], ...]
    pure: bool = False

    @property
    def factors(self) -> Tuple[Tuple[Matrix, ...], ...]:
        return self.blocks

    def factor(self, i: int) -> Tuple[Matrix, ...]:
        """The n_i-tuple for factor i (1-based)."""
        return self.blocks[i - 1]


@dataclass(frozen=True)
class GuardBand:
    """Componentwise degree margin: the interior keeps degrees p_i <= L_i - g_i."""

    g: Tuple[int, ...]

    def __post_init__(self) -> None:
        if any(gi < 0 for gi in self.g):
            raise ValueError("guard band components must be >= 0")

    @staticmethod
    def uniform(spec: TruncationSpec, g: int) -> "GuardBand":
        return GuardBand(tuple(g for _ in range(spec.k)))

    @staticmethod
    def factor_only(spec: TruncationSpec, i: int, g: int) -> "GuardBand":
        """Guard band g in factor i, zero elsewhere."""
        out = [0] * spec.k
        out[i - 1] = g
        return GuardBand(tuple(out))


# ----------------------------------------------------------------------------
# degree bookkeeping
# ----------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _degree_array(spec: TruncationSpec) -> np.ndarray:
    """(fock_dim, k) int array of per-factor degrees for each basis index."""
    basis = build_basis(spec)
    return np.array([mw.degree() for mw in basis.entries], dtype=np.int64)


def interior_mask(spec: TruncationSpec, band: GuardBand) -> np.ndarray:
    """Boolean mask over the full model index selecting the guard-band interior."""
    if len(band.g) != spec.k:
        raise ValueError("guard band length must equal k")
    if any(gi > Li for gi, Li in zip(band.g, spec.L)):
        raise ValueError("guard band exceeds truncation length")
    degrees = _degree_array(spec)
    limits = np.array(spec.L, dtype=np.int64) - np.array(band.g, dtype=np.int64)
    fock = (degrees <= limits[None, :]).all(axis=1)
    return np.tile(fock, spec.d)


def interior_projector(spec: TruncationSpec, band: GuardBand) -> sp.csr_matrix:
    """Orthogonal projection onto the guard-band interior."""
    mask = interior_mask(spec, band).astype(np.float64)
    return sp.diags(mask, format="csr", dtype=np.complex128)


def compress_interior(spec: TruncationSpec, M: Matrix, band: GuardBand) -> np.ndarray:
    """Rows and columns of M restricted to the interior, as a dense array."""
    mask = interior_mask(spec, band)
    A = np.asarray(M.todense()) if sp.issparse(M) else np.asarray(M)
    return A[np.ix_(mask, mask)]


def max_abs(M: Matrix) -> float:
    """Entrywise max-modulus of a (possibly sparse, possibly empty) matrix."""
    if sp.issparse(M):
        return 0.0 if M.nnz == 0 else float(np.max(np.abs(M.data)))
    A = np.asarray(M)
    return 0.0 if A.size == 0 else float(np.max(np.abs(A)))


# ----------------------------------------------------------------------------
# creation operators and diagonals
# ----------------------------------------------------------------------------


def _with_coeff(spec: TruncationSpec, fock_matrix: sp.spmatrix) -> sp.csr_matrix:
    """Tensor the identity on the coefficient space (coefficient index major)."""
    if spec.d == 1:
        return fock_matrix.tocsr()
    return sp.kron(sp.identity(spec.d, format="csr"), fock_matrix, format="csr")


def _shifted_word(mw: MultiWord, i: int, letter: int, side: str) -> MultiWord:
    parts = list(mw.components)
    g = Word((letter,), parts[i - 1].n)
    if side == "left":
        parts[i - 1] = concat(g, parts[i - 1])
    else:
        parts[i - 1] = concat(parts[i - 1], g)
    return MultiWord(tuple(parts))


@lru_cache(maxsize=None)
def _creation_fock(spec: TruncationSpec, i: int, j: int, side: str) -> sp.csr_matrix:
    basis = build_basis(spec)
    mi, Li = spec.m[i - 1], spec.L[i - 1]
    rows, cols, vals = [], [], []
    for col, mw in enumerate(basis.entries):
        length = len(mw.components[i - 1])
        if length == Li:
            continue
        target = _shifted_word(mw, i, j, side)
        rows.append(basis.index_of(target))
        cols.append(col)
        vals.append(math.sqrt(weight_b(mi, length) / weight_b(mi, length + 1)))
    n = spec.fock_dim
    return sp.csr_matrix(
        (np.array(vals), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(n, n),
        dtype=np.complex128,
    )


def _check_factor_index(spec: TruncationSpec, i: int, j: Optional[int] = None) -> None:
    if not 1 <= i <= spec.k:
        raise ValueError(f"factor index {i} out of range 1..{spec.k}")
    if j is not None and not 1 <= j <= spec.n[i - 1]:
        raise ValueError(f"generator index {j} out of range 1..{spec.n[i - 1]}")


def left_creation(spec: TruncationSpec, i: int, j: int) -> sp.csr_matrix:
    """The weighted left creation operator for generator j of factor i.

    Prepends g_j to the factor-i word with weight
    sqrt(b(m_i, len) / b(m_i, len + 1)); the top degree layer maps to zero.
    """
    _check_factor_index(spec, i, j)
    return _with_coeff(spec, _creation_fock(spec, i, j, "left"))


def right_creation(spec: TruncationSpec, i: int, j: int) -> sp.csr_matrix:
    """The weighted right creation operator (appends g_j to the factor-i word)."""
    _check_factor_index(spec, i, j)
    return _with_coeff(spec, _creation_fock(spec, i, j, "right"))


@lru_cache(maxsize=None)
def _word_operator_fock(spec: TruncationSpec, i: int, letters: Tuple[int, ...], side: str) -> sp.csr_matrix:
    """Closed-form word operator on the Fock part.

    Left side prepends the word; right side appends the *reverse* of the
    word (the iterated product applies the innermost generator first).
    The weight depends only on lengths: sqrt(b(len) / b(len + |word|)).
    """
    basis = build_basis(spec)
    mi, Li = spec.m[i - 1], spec.L[i - 1]
    word = Word(letters, spec.n[i - 1])
    p = len(word)
    rows, cols, vals = [], [], []
    for col, mw in enumerate(basis.entries):
        length = len(mw.components[i - 1])
        if length + p > Li:
            continue
        parts = list(mw.components)
        if side == "left":
            parts[i - 1] = concat(word, parts[i - 1])
        else:
            parts[i - 1] = concat(parts[i - 1], reverse(word))
        rows.append(basis.index_of(MultiWord(tuple(parts))))
        cols.append(col)
        vals.append(math.sqrt(weight_b(mi, length) / weight_b(mi, length + p)))
    n = spec.fock_dim
    return sp.csr_matrix(
        (np.array(vals), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(n, n),
        dtype=np.complex128,
    )


def word_operator(spec: TruncationSpec, i: int, word: Word, side: str = "left") -> sp.csr_matrix:
    """The operator of a whole word: product of generator operators.

    ``side="left"`` gives the product of left creation operators for the
    letters of ``word`` (closed form: prepend the word); ``side="right"``
    the product of right creation operators (append the reversed word).
    """
    _check_factor_index(spec, i)
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if len(word) > spec.L[i - 1]:
        raise ValueError(f"word length {len(word)} exceeds truncation {spec.L[i - 1]}")
    return _with_coeff(spec, _word_operator_fock(spec, i, word.letters, side))


def multiword_operator(spec: TruncationSpec, mw: MultiWord, side: str = "left") -> sp.csr_matrix:
    """Product over factors of per-factor word operators (factors commute)."""
    out = _word_operator_fock(spec, 1, mw.components[0].letters, side)
    for i in range(2, spec.k + 1):
        out = out @ _word_operator_fock(spec, i, mw.components[i - 1].letters, side)
    return _with_coeff(spec, out)


def word_action_exact(
    spec: TruncationSpec, i: int, word: Word, side: str, start: MultiWord
) -> Optional[Tuple[MultiWord, Fraction]]:
    """Exact single-column action of a word operator.

    Returns the image basis word together with the rational *radicand* of
    the entry (the entry is its square root), or None when the column maps
    to zero under truncation.
    """
    mi, Li = spec.m[i - 1], spec.L[i - 1]
    length = len(start.components[i - 1])
    if length + len(word) > Li:
        return None
    parts = list(start.components)
    if side == "left":
        parts[i - 1] = concat(word, parts[i - 1])
    else:
        parts[i - 1] = concat(parts[i - 1], reverse(word))
    radicand = Fraction(weight_b(mi, length), weight_b(mi, length + len(word)))
    return MultiWord(tuple(parts)), radicand


def omega(spec: TruncationSpec, i: int) -> sp.csr_matrix:
    """Diagonal operator scaling factor-i degree-j components by (m_i + j - 1)/j.

    The vacuum layer (j = 0) is left unchanged; for m_i = 1 this is the
    identity.
    """
    _check_factor_index(spec, i)
    degrees = _degree_array(spec)[:, i - 1].astype(np.float64)
    mi = spec.m[i - 1]
    vals = np.ones_like(degrees)
    nz = degrees >= 1
    vals[nz] = (mi + degrees[nz] - 1.0) / degrees[nz]
    return _with_coeff(spec, sp.diags(vals.astype(np.complex128), format="csr"))


def spectral_projection(spec: TruncationSpec, p: Sequence[int]) -> sp.csr_matrix:
    """Orthogonal projection onto the degree-p spectral subspace (zero off-range)."""
    basis = build_basis(spec)
    n = spec.fock_dim
    idx = basis.degree_indices(p)
    vals = np.zeros(n)
    vals[idx.start: idx.stop] = 1.0
    return _with_coeff(spec, sp.diags(vals.astype(np.complex128), format="csr"))


def gamma(spec: TruncationSpec, theta: Sequence[float]) -> sp.csr_matrix:
    """The torus representation: diagonal phases exp(i sum_s theta_s |alpha_s|)."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (spec.k,):
        raise ValueError(f"theta must have length k={spec.k}")
    degrees = _degree_array(spec).astype(np.float64)
    phases = np.exp(1j * degrees @ theta)
    return _with_coeff(spec, sp.diags(phases, format="csr"))


def cauchy_dual_column(spec: TruncationSpec, i: int, j: int) -> sp.csr_matrix:
    """Column j of the Cauchy dual of the right creation tuple: Omega_i Lambda_{i,j}.

    (The Gram matrix of the right tuple is diagonal in the graded basis, so
    its inverse acts as the entrywise reciprocal; no general solve.)
    """
    _check_factor_index(spec, i, j)
    return (omega(spec, i) @ right_creation(spec, i, j)).tocsr()


def model_tuple(spec: TruncationSpec, side: str = "left", scale: float = 1.0) -> OperatorTuple:
    """The universal model tuple (all creation operators), optionally scaled."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    build = left_creation if side == "left" else right_creation
    blocks = tuple(
        tuple((scale * build(spec, i, j)).tocsr() for j in range(1, spec.n[i - 1] + 1))
        for i in range(1, spec.k + 1)
    )
    return OperatorTuple(spec, blocks, pure=True)


# ----------------------------------------------------------------------------
# completely positive maps and defects
# ----------------------------------------------------------------------------


def phi(factor_ops: Iterable[Matrix], Y: Matrix) -> Matrix:
    """The completely positive map sum_j X_j Y X_j* for one factor's tuple."""
    out = None
    for X in factor_ops:
        term = X @ Y @ _adjoint(X)
        out = term if out is None else out + term
    if out is None:
        raise ValueError("factor tuple must be non-empty")
    return out if sp.issparse(out) else np.asarray(out)


def _adjoint(M: Matrix) -> Matrix:
    if sp.issparse(M):
        return M.conj().T.tocsr()
    return np.asarray(M).conj().T


def _factors_of(X) -> Sequence[Sequence[Matrix]]:
    factors = getattr(X, "factors", None)
    if factors is None:
        factors = X
    return factors


def defect(X, p: Sequence[int]) -> Matrix:
    """The iterated defect: composition over factors of (id - Phi_i)^{p_i}, applied to I.

    Each factor contributes its binomial expansion
    sum_t (-1)^t C(p_i, t) Phi_i^t.  ``X`` may be an OperatorTuple, a
    PointTuple, or a bare sequence of factor tuples.
    """
    factors = _factors_of(X)
    p = tuple(int(x) for x in p)
    if len(p) != len(factors):
        raise ValueError("exponent tuple length must equal the number of factors")
    if any(pi < 0 for pi in p):
        raise ValueError("exponents must be >= 0")
    dim = factors[0][0].shape[0]
    Y: Matrix = sp.identity(dim, format="csr", dtype=np.complex128)
    if not any(sp.issparse(ops[0]) for ops in factors):
        Y = np.eye(dim, dtype=np.complex128)
    for ops, pi in zip(factors, p):
        if pi == 0:
            continue
        powers = [Y]
        for _ in range(pi):
            powers.append(phi(ops, powers[-1]))
        acc = None
        for t in range(pi + 1):
            term = ((-1) ** t * math.comb(pi, t)) * powers[t]
            acc = term if acc is None else acc + term
        Y = acc
    return Y


def psi_bh(spec: TruncationSpec, i: int, T: Matrix) -> Matrix:
    """The alternating-binomial right-hand side of the structure equation.

    Psi_i(T) = sum_{j=0}^{m_i - 1} (-1)^j C(m_i, j+1) sum_{|beta| = j}
    Lambda_beta T Lambda_beta*, computed through iterated applications of
    the factor-i right-creation CP map.
    """
    _check_factor_index(spec, i)
    mi = spec.m[i - 1]
    lam = [right_creation(spec, i, j) for j in range(1, spec.n[i - 1] + 1)]
    acc = math.comb(mi, 1) * (T if not sp.issparse(T) else T.copy())
    power = T
    for j in range(1, mi):
        power = phi(lam, power)
        acc = acc + ((-1) ** j * math.comb(mi, j + 1)) * power
    return acc


# ----------------------------------------------------------------------------
# file formats
# ----------------------------------------------------------------------------


def save_operator(
    path: str | Path,
    M: Matrix,
    spec: TruncationSpec,
    fmt: str = "coo",
) -> None:
    """Write an operator with a JSON header naming the spec and basis order.

    ``fmt="coo"``: text, one ``row col re im`` line per nonzero entry.
    ``fmt="dense"``: binary, row-major little-endian float64 (re, im) pairs.
    """
    path = Path(path)
    N = M.shape[0]
    if M.shape != (N, N):
        raise ValueError("operator must be square")
    header = {
        "format": fmt,
        "spec": spec.to_json(),
        "basis_order": BASIS_ORDER,
        "shape": [int(M.shape[0]), int(M.shape[1])],
    }
    if fmt == "coo":
        C = M.tocoo() if sp.issparse(M) else sp.coo_matrix(M)
        header["nnz"] = int(C.nnz)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for r, c, v in zip(C.row, C.col, C.data):
                fh.write(f"{int(r)} {int(c)} {float(v.real)!r} {float(v.imag)!r}\n")
    elif fmt == "dense":
        A = np.asarray(M.todense()) if sp.issparse(M) else np.asarray(M)
        A = np.ascontiguousarray(A, dtype=np.complex128)
        with path.open("wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            pairs = np.empty((N, N, 2), dtype="<f8")
            pairs[:, :, 0] = A.real
            pairs[:, :, 1] = A.imag
            fh.write(pairs.tobytes())
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_operator(path: str | Path) -> Tuple[np.ndarray, TruncationSpec]:
    """Read an operator written by save_operator; returns (dense matrix, spec)."""
    path = Path(path)
    with path.open("rb") as fh:
        header_line = fh.readline()
        header = json.loads(header_line.decode("utf-8"))
        spec = TruncationSpec.from_json(header["spec"])
        N = int(header["shape"][0])
        if header.get("basis_order", BASIS_ORDER) != BASIS_ORDER:
            raise ValueError(f"unsupported basis order {header.get('basis_order')!r}")
        if header["format"] == "dense":
            raw = np.frombuffer(fh.read(N * N * 16), dtype="<f8").reshape(N, N, 2)
            return raw[:, :, 0] + 1j * raw[:, :, 1], spec
        if header["format"] == "coo":
            M = np.zeros((N, N), dtype=np.complex128)
            for line in fh.read().decode("utf-8").splitlines():
                if not line.strip():
                    continue
                r, c, re_part, im_part = line.split()
                M[int(r), int(c)] = float(re_part) + 1j * float(im_part)
            return M, spec
    raise ValueError(f"unknown operator format {header['format']!r}")
