"""Truncated tensor Fock space: weights, basis indexing, graded subspaces.

The model space is C^d tensor the truncated Fock space whose basis is
labelled by multiwords with per-factor length at most L_i.  All creation
weights derive from the integer weight sequence

    b(m, j) = binomial(j + m - 1, m - 1),   b(m, 0) = 1,

so every squared matrix entry of a model operator is a rational number.
Alongside float values, the Toeplitz weights tau and mu are exposed as
exact rational *radicands* (`Fraction` values equal to the square of the
weight) so proportionality checks can be anchored to exact arithmetic.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Sequence, Tuple

from .words import MultiWord, Word, comparable, enumerate_words

DegreeTuple = Tuple[int, ...]


@dataclass(frozen=True)
class TruncationSpec:
    """Global configuration of a finite model.

    k factors; alphabet sizes n, hyperball orders m, truncation lengths L
    (all k-tuples); coefficient-space dimension d.
    """

    k: int
    n: Tuple[int, ...]
    m: Tuple[int, ...]
    L: Tuple[int, ...]
    d: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for name, seq in (("n", self.n), ("m", self.m), ("L", self.L)):
            if len(seq) != self.k:
                raise ValueError(f"{name} must have length k={self.k}, got {seq}")
        if any(ni < 1 for ni in self.n):
            raise ValueError("alphabet sizes n must be >= 1")
        if any(mi < 1 for mi in self.m):
            raise ValueError("orders m must be >= 1")
        if any(Li < 1 for Li in self.L):
            raise ValueError("truncation lengths L must be >= 1")
        if self.d < 1:
            raise ValueError("coefficient dimension d must be >= 1")

    @staticmethod
    def make(k: int, n: Sequence[int], m: Sequence[int], L: Sequence[int], d: int = 1) -> "TruncationSpec":
        return TruncationSpec(k, tuple(n), tuple(m), tuple(L), d)

    def factor_dim(self, i: int) -> int:
        """Number of words of length <= L_i over n_i letters (factor i is 1-based)."""
        n, L = self.n[i - 1], self.L[i - 1]
        return sum(n**j for j in range(L + 1))

    @property
    def fock_dim(self) -> int:
        """Dimension of the truncated Fock space (without the coefficient factor)."""
        out = 1
        for i in range(1, self.k + 1):
            out *= self.factor_dim(i)
        return out

    @property
    def total_dim(self) -> int:
        """Dimension of the full model space C^d tensor Fock."""
        return self.d * self.fock_dim

    def to_json(self) -> dict:
        return {"k": self.k, "n": list(self.n), "m": list(self.m),
                "L": list(self.L), "d": self.d}

    @staticmethod
    def from_json(obj: dict | str) -> "TruncationSpec":
        """Parse ``{"k":2,"n":[2,2],"m":[2,1],"L":[3,3],"d":1}`` (dict or JSON text)."""
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict):
            raise ValueError("spec JSON must be an object")
        try:
            return TruncationSpec.make(
                int(obj["k"]),
                [int(x) for x in obj["n"]],
                [int(x) for x in obj["m"]],
                [int(x) for x in obj["L"]],
                int(obj.get("d", 1)),
            )
        except KeyError as exc:
            raise ValueError(f"spec JSON missing field {exc}") from exc


def weight_b(m: int, length: int) -> int:
    """The weight b(m, length) = binomial(length + m - 1, m - 1), an exact integer."""
    if m < 1:
        raise ValueError("order m must be >= 1")
    if length < 0:
        raise ValueError("word length must be >= 0")
    return math.comb(length + m - 1, m - 1)


def tau_radicand(spec: TruncationSpec, w: MultiWord, g: MultiWord) -> Fraction:
    """Exact square of the Toeplitz weight tau for a comparable pair.

    tau(w, g)^2 = prod_i b(m_i, min(|w_i|, |g_i|)) / b(m_i, max(|w_i|, |g_i|)).
    """
    if not comparable(w, g):
        raise ValueError("tau is defined on comparable pairs only")
    out = Fraction(1)
    for mi, wi, gi in zip(spec.m, w.components, g.components):
        lo, hi = sorted((len(wi), len(gi)))
        out *= Fraction(weight_b(mi, lo), weight_b(mi, hi))
    return out


def tau(spec: TruncationSpec, w: MultiWord, g: MultiWord) -> float:
    """The Toeplitz weight tau as a double (square root of the exact radicand)."""
    return math.sqrt(tau_radicand(spec, w, g))


def mu(spec: TruncationSpec, w: MultiWord, g: MultiWord) -> Fraction:
    """The weighted-Fock-space weight mu(w, g) = prod_i 1 / b(m_i, max length).

    Exact rational; take ``float()`` for the double value.
    """
    if not comparable(w, g):
        raise ValueError("mu is defined on comparable pairs only")
    out = Fraction(1)
    for mi, wi, gi in zip(spec.m, w.components, g.components):
        out /= weight_b(mi, max(len(wi), len(gi)))
    return out


@dataclass(frozen=True, eq=False)
class GradedBasis:
    """The ordered multiword basis with its degree-block structure.

    Entries are sorted degree-block-major (degree vectors in lexicographic
    order, graded-lexicographic per factor within a block), so every
    spectral subspace occupies a contiguous index range.
    """

    spec: TruncationSpec
    entries: Tuple[MultiWord, ...]
    blocks: Dict[DegreeTuple, range]

    def __len__(self) -> int:
        return len(self.entries)

    def index_of(self, w: MultiWord) -> int:
        return _index_map(self.spec)[w]

    def degree_indices(self, p: Sequence[int]) -> range:
        """Index range of the spectral subspace for degree vector p.

        Empty when any component is negative or exceeds its truncation
        length (those subspaces are zero).
        """
        p = tuple(int(x) for x in p)
        if len(p) != self.spec.k:
            raise ValueError(f"degree vector must have length k={self.spec.k}")
        if any(pi < 0 or pi > Li for pi, Li in zip(p, self.spec.L)):
            return range(0)
        return self.blocks[p]

    def degrees(self) -> list[DegreeTuple]:
        """All degree vectors present, in block order."""
        return list(self.blocks.keys())


@lru_cache(maxsize=None)
def _basis_cache(key: Tuple) -> GradedBasis:
    spec = TruncationSpec(*key)
    factor_words = [enumerate_words(spec.n[i], spec.L[i]) for i in range(spec.k)]
    entries = [MultiWord(combo) for combo in itertools.product(*factor_words)]
    entries.sort(key=lambda mw: (mw.degree(), tuple(w.letters for w in mw.components)))
    blocks: Dict[DegreeTuple, range] = {}
    lo = 0
    for idx in range(1, len(entries) + 1):
        if idx == len(entries) or entries[idx].degree() != entries[lo].degree():
            blocks[entries[lo].degree()] = range(lo, idx)
            lo = idx
    return GradedBasis(spec, tuple(entries), blocks)


@lru_cache(maxsize=None)
def _index_map(spec: TruncationSpec) -> Dict[MultiWord, int]:
    basis = build_basis(spec)
    return {mw: i for i, mw in enumerate(basis.entries)}


def build_basis(spec: TruncationSpec) -> GradedBasis:
    """Build (or fetch the cached) graded basis for a spec.

    The basis depends only on (k, n, m, L); the coefficient dimension d
    plays no role in indexing, but a separate cache entry per d is cheap
    and keeps the association obvious.
    """
    return _basis_cache((spec.k, spec.n, spec.m, spec.L, spec.d))


def degree_indices(basis: GradedBasis, p: Sequence[int]) -> range:
    """Module-level alias for GradedBasis.degree_indices."""
    return basis.degree_indices(p)
