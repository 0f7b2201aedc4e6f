"""Free-monoid combinatorics: words, right divisibility, and reduced pairs.

Words over the alphabet {1, ..., n} index the Fock basis of one tensor
factor; k-tuples of words (one per factor) index the full basis.  The
structure theory of multi-Toeplitz operators rests on *right* divisibility:
``w >= g`` (written ``w >=_r g``) means ``w = s . g`` for some prefix ``s``.
A pair of multiwords is *comparable* when in every factor one word right-
divides the other, and every comparable pair simplifies to a unique
*reduced pair* in which each factor has at least one empty component.

Serialization: a word is a digit string (``"12"`` is the two-letter word
g1 g2, ``""`` the empty word), a multiword joins its components with
``"/"`` (``"12/"`` for k = 2).  Digit strings require n <= 9, which is far
above desk scale.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple


@dataclass(frozen=True)
class Word:
    """A word in the free monoid on ``n`` generators.

    ``letters`` holds generator indices in {1, ..., n}; the empty tuple is
    the monoid identity.
    """

    letters: Tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"alphabet size must be >= 1, got {self.n}")
        for a in self.letters:
            if not 1 <= a <= self.n:
                raise ValueError(f"letter {a} outside alphabet 1..{self.n}")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return "".join(str(a) for a in self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r}, n={self.n})"

    @staticmethod
    def identity(n: int) -> "Word":
        return Word((), n)

    @staticmethod
    def from_string(text: str, n: int) -> "Word":
        """Parse a digit string, the inverse of ``str()``."""
        return Word(tuple(int(c) for c in text), n)


def concat(a: Word, b: Word) -> Word:
    """Monoid product: the letters of ``a`` followed by those of ``b``."""
    if a.n != b.n:
        raise ValueError(f"alphabet mismatch: {a.n} vs {b.n}")
    return Word(a.letters + b.letters, a.n)


def reverse(w: Word) -> Word:
    """The word with letters in reverse order."""
    return Word(w.letters[::-1], w.n)


def right_quotient(w: Word, g: Word) -> Optional[Word]:
    """Return ``s`` with ``w = s . g`` when ``g`` right-divides ``w``, else None."""
    if w.n != g.n:
        raise ValueError(f"alphabet mismatch: {w.n} vs {g.n}")
    if len(g) > len(w):
        return None
    cut = len(w) - len(g)
    if w.letters[cut:] != g.letters:
        return None
    return Word(w.letters[:cut], w.n)


def enumerate_words(n: int, L: int) -> list[Word]:
    """All words of length <= L in graded lexicographic order.

    Length-major, then lexicographic by letters; ``sum(n**j for j <= L)``
    words in total.
    """
    if n < 1:
        raise ValueError("alphabet size must be >= 1")
    if L < 0:
        raise ValueError("max length must be >= 0")
    out: list[Word] = []
    for length in range(L + 1):
        for letters in itertools.product(range(1, n + 1), repeat=length):
            out.append(Word(letters, n))
    return out


@dataclass(frozen=True)
class MultiWord:
    """A k-tuple of words, component i over an alphabet of size n_i."""

    components: Tuple[Word, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("multiword needs at least one component")

    @property
    def k(self) -> int:
        return len(self.components)

    def degree(self) -> Tuple[int, ...]:
        """Componentwise word lengths."""
        return tuple(len(w) for w in self.components)

    def __str__(self) -> str:
        return "/".join(str(w) for w in self.components)

    def __repr__(self) -> str:
        return f"MultiWord({str(self)!r})"

    @staticmethod
    def identity(n: Sequence[int]) -> "MultiWord":
        return MultiWord(tuple(Word.identity(ni) for ni in n))

    @staticmethod
    def from_string(text: str, n: Sequence[int]) -> "MultiWord":
        parts = text.split("/")
        if len(parts) != len(n):
            raise ValueError(
                f"expected {len(n)} '/'-separated components, got {len(parts)}"
            )
        return MultiWord(tuple(Word.from_string(p, ni) for p, ni in zip(parts, n)))


def _check_shapes(a: MultiWord, b: MultiWord) -> None:
    if a.k != b.k or any(x.n != y.n for x, y in zip(a.components, b.components)):
        raise ValueError("multiword shape mismatch")


def comparable(w: MultiWord, g: MultiWord) -> bool:
    """True iff in every factor one component right-divides the other."""
    _check_shapes(w, g)
    for wi, gi in zip(w.components, g.components):
        if right_quotient(wi, gi) is None and right_quotient(gi, wi) is None:
            return False
    return True


def simplify(w: MultiWord, g: MultiWord) -> Tuple[MultiWord, MultiWord]:
    """Reduce a comparable pair by cancelling the common right factor per component.

    Returns ``(sigma, beta)`` with ``sigma_i = w_i \\ g_i`` when ``w_i`` is a
    right multiple of ``g_i`` (else the empty word), and ``beta_i = g_i \\ w_i``
    symmetrically.  The result is a reduced pair.  Raises on non-comparable
    input — the simplification map is only defined on comparable pairs.
    """
    _check_shapes(w, g)
    sigma: list[Word] = []
    beta: list[Word] = []
    for wi, gi in zip(w.components, g.components):
        s = right_quotient(wi, gi)
        b = right_quotient(gi, wi)
        if s is None and b is None:
            raise ValueError(f"pair not comparable in some factor: {w} , {g}")
        sigma.append(s if s is not None else Word.identity(wi.n))
        beta.append(b if b is not None else Word.identity(wi.n))
    return MultiWord(tuple(sigma)), MultiWord(tuple(beta))


def is_reduced_pair(a: MultiWord, b: MultiWord) -> bool:
    """True iff in every factor at least one of the two components is empty."""
    _check_shapes(a, b)
    return all(
        min(len(ai), len(bi)) == 0 for ai, bi in zip(a.components, b.components)
    )


def degree_plus(s: Sequence[int]) -> Tuple[int, ...]:
    """Componentwise positive part of a signed degree vector."""
    return tuple(max(x, 0) for x in s)


def degree_minus(s: Sequence[int]) -> Tuple[int, ...]:
    """Componentwise negative part of a signed degree vector."""
    return tuple(max(-x, 0) for x in s)


def reduced_pairs(n: Sequence[int], bound: Sequence[int]) -> Iterator[Tuple[MultiWord, MultiWord]]:
    """All reduced pairs (a, b) with |a_i| + |b_i| <= bound_i per factor.

    In each factor one side is empty, so the pairs are exactly the
    (word, empty) and (empty, word) combinations; the lists are ordered
    graded-lexicographically factor by factor, alphas before betas.
    """
    per_factor: list[list[Tuple[Word, Word]]] = []
    for ni, bi in zip(n, bound):
        empty = Word.identity(ni)
        pairs = [(empty, empty)]
        for w in enumerate_words(ni, bi)[1:]:
            pairs.append((w, empty))
        for w in enumerate_words(ni, bi)[1:]:
            pairs.append((empty, w))
        per_factor.append(pairs)
    for combo in itertools.product(*per_factor):
        alpha = MultiWord(tuple(p[0] for p in combo))
        beta = MultiWord(tuple(p[1] for p in combo))
        yield alpha, beta
