"""Seeded random instances: symbols, operators, monomials, and point tuples.

All draws go through numpy's PCG64 keyed by (seed, truncation shape,
instance index), so every suite and report is reproducible bit for bit.
The point generator only produces tuples for which the truncated identities
are exact or have tails far below the check tolerances: nilpotent matrix
tuples built from a single Jordan block (with the raised-degree floor
matched to each factor's order) and near-zero scalar tuples.
"""
from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from .basis import TruncationSpec
from .berezin import PointTuple, membership, point_tuple
from .toeplitz import Symbol, reconstruct
from .words import reduced_pairs

PRNG_NAME = "numpy-PCG64"


def instance_rng(seed: int, spec: TruncationSpec, index: int = 0) -> np.random.Generator:
    """A generator keyed by (seed, truncation shape, instance index)."""
    key = (spec.k, *spec.n, *spec.m, *spec.L, spec.d, index)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_symbol(spec: TruncationSpec, seed: int, index: int = 0) -> Symbol:
    """A symbol with complex standard normal blocks on the interior support.

    Support is |alpha_i| + |beta_i| <= L_i - m_i, which keeps every
    structure identity exact on the truncation.
    """
    rng = instance_rng(seed, spec, index)
    bound = tuple(Li - mi for Li, mi in zip(spec.L, spec.m))
    if any(b < 0 for b in bound):
        raise ValueError("truncation too small for interior-supported symbols")
    coeffs = {}
    for pair in reduced_pairs(spec.n, bound):
        coeffs[pair] = _complex_normal(rng, (spec.d, spec.d))
    return Symbol(spec, coeffs)


def random_toeplitz(spec: TruncationSpec, seed: int, index: int = 0) -> np.ndarray:
    """A weighted multi-Toeplitz operator synthesized from a random symbol."""
    return reconstruct(spec, random_symbol(spec, seed, index))


def random_dense_operator(spec: TruncationSpec, seed: int, index: int = 0) -> np.ndarray:
    """A dense operator with complex standard normal entries (almost surely
    violates both structure tests)."""
    rng = instance_rng(seed, spec, index + 1_000_000)
    N = spec.total_dim
    return _complex_normal(rng, (N, N))


def random_monomial(spec: TruncationSpec, seed: int, index: int = 0) -> Symbol:
    """A single-key symbol: one reduced pair within the truncation bound and
    a random coefficient block."""
    rng = instance_rng(seed, spec, index + 2_000_000)
    pairs = list(reduced_pairs(spec.n, spec.L))
    pair = pairs[int(rng.integers(len(pairs)))]
    return Symbol(spec, {pair: _complex_normal(rng, (spec.d, spec.d))})


def _jordan_block(dH: int) -> np.ndarray:
    N = np.zeros((dH, dH), dtype=np.complex128)
    for t in range(dH - 1):
        N[t + 1, t] = 1.0
    return N


def random_pure_point(
    spec: TruncationSpec, seed: int, index: int = 0, dH: Optional[int] = None
) -> PointTuple:
    """A random pure point with all the truncated identities under control.

    dH = 1 draws scalars of modulus < 1e-3 (tails of the kernel series are
    then far below 1e-9); dH >= 2 draws coefficients of powers of a single
    Jordan block, with the lowest power ceil((dH-1)/m_i) in factor i so
    that factor-i word products longer than m_i vanish.  Cross-factor
    commutation is exact, the tuples are nilpotent (spectral radii 0), and
    the scale is halved until membership holds.
    """
    rng = instance_rng(seed, spec, index + 3_000_000)
    if dH is None:
        dH = int(rng.integers(1, 4))
    if dH < 1:
        raise ValueError("dH must be >= 1")

    if dH == 1:
        blocks = []
        for ni in spec.n:
            ops = []
            for _ in range(ni):
                z = complex(_complex_normal(rng, ()))
                c = 1e-3 * z / (1.0 + abs(z))
                ops.append(np.array([[c]], dtype=np.complex128))
            blocks.append(tuple(ops))
        return point_tuple(spec, tuple(blocks))

    N = _jordan_block(dH)
    powers = [np.linalg.matrix_power(N, t) for t in range(dH)]
    scale = 0.5 / math.sqrt(max(spec.n))
    blocks = []
    for i in range(spec.k):
        floor = max(1, math.ceil((dH - 1) / spec.m[i]))
        ops = []
        for _ in range(spec.n[i]):
            M = np.zeros((dH, dH), dtype=np.complex128)
            for t in range(floor, dH):
                M += complex(_complex_normal(rng, ())) * powers[t]
            ops.append(M)
        blocks.append(tuple(ops))
    X = point_tuple(spec, tuple(tuple(scale * M for M in ops) for ops in blocks))
    for _ in range(60):
        if membership(X):
            return X
        scale *= 0.5
        X = point_tuple(spec, tuple(tuple(scale * M for M in ops) for ops in blocks))
    raise RuntimeError("could not scale the random point into the poly-hyperball")
