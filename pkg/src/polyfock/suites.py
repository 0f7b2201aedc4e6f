"""Named check suites over the truncated model, with machine-readable reports.

Four suites mirror the command-line surface: ``verify`` (operator
identities), ``toeplitz`` (structure detection on one operator),
``fourier`` (homogeneous decomposition), and ``berezin`` (kernel and
transform checks at one point).  Every check records its name, residual,
the guard band it was compressed at, and wall time; checks are sorted by
name so two runs of the same configuration produce the same report apart
from the timing fields.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .basis import TruncationSpec, weight_b
from .berezin import (
    PointTuple,
    berezin_transform,
    eval_symbol,
    intertwining_residual,
    kernel_gram,
    membership,
)
from .operators import (
    GuardBand,
    cauchy_dual_column,
    compress_interior,
    defect,
    gamma,
    left_creation,
    max_abs,
    model_tuple,
    omega,
    right_creation,
    spectral_projection,
)
from .sampling import (
    PRNG_NAME,
    instance_rng,
    random_dense_operator,
    random_toeplitz,
)
from .toeplitz import (
    brown_halmos_residual,
    extract_symbol,
    fejer_sum,
    homogeneous_part_projection,
    homogeneous_part_quadrature,
    is_weighted_multi_toeplitz,
    reconstruct,
)

STRUCTURAL_TOL = 1e-10
TAIL_TOL = 1e-8

SUITES = ("verify", "toeplitz", "berezin", "fourier")


@dataclass(frozen=True)
class RunConfig:
    """One reproducible suite invocation."""

    spec: TruncationSpec
    suite: str
    seed: int = 1
    tol: Optional[float] = None  # None -> the suite's default tolerance
    out: Optional[str] = None
    source: str = "random-symbol"  # toeplitz: random-symbol | random-dense | file
    operator_path: Optional[str] = None
    radial: Optional[float] = None  # berezin: radial point parameter

    def resolved_tol(self) -> float:
        if self.tol is not None:
            return float(self.tol)
        return TAIL_TOL if self.suite == "berezin" else STRUCTURAL_TOL


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    guard_band: Tuple[int, ...]
    elapsed_ms: float
    detail: str = ""

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "pass": bool(self.passed),
            "residual": float(self.residual),
            "guard_band": list(self.guard_band),
            "elapsed_ms": float(self.elapsed_ms),
        }
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass(frozen=True)
class Report:
    suite: str
    spec: TruncationSpec
    seed: int
    tol: float
    checks: Tuple[CheckResult, ...]
    prng: str = PRNG_NAME

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "spec": self.spec.to_json(),
            "seed": self.seed,
            "tol": self.tol,
            "prng": self.prng,
            "checks": [c.to_json() for c in self.checks],
            "overall_pass": self.overall_pass,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


class _Collector:
    """Accumulates timed checks and assembles a name-sorted report."""

    def __init__(self, suite: str, spec: TruncationSpec, seed: int, tol: float):
        self.suite = suite
        self.spec = spec
        self.seed = seed
        self.tol = tol
        self._checks: List[CheckResult] = []

    def run(
        self,
        name: str,
        fn: Callable[[], Tuple[float, str]],
        guard: Tuple[int, ...],
        tol: Optional[float] = None,
    ) -> CheckResult:
        t0 = time.perf_counter()
        residual, detail = fn()
        elapsed = 1000.0 * (time.perf_counter() - t0)
        bound = self.tol if tol is None else tol
        result = CheckResult(name, residual < bound, float(residual), guard, elapsed, detail)
        self._checks.append(result)
        return result

    def add(
        self,
        name: str,
        passed: bool,
        residual: float,
        guard: Tuple[int, ...],
        elapsed_ms: float,
        detail: str = "",
    ) -> CheckResult:
        result = CheckResult(name, passed, float(residual), guard, elapsed_ms, detail)
        self._checks.append(result)
        return result

    def report(self) -> Report:
        checks = tuple(sorted(self._checks, key=lambda c: c.name))
        return Report(self.suite, self.spec, self.seed, self.tol, checks)


def _zeros(spec: TruncationSpec) -> Tuple[int, ...]:
    return tuple(0 for _ in range(spec.k))


def _factor_weight_diag(spec: TruncationSpec, i: int) -> np.ndarray:
    """Diagonal of the squared creation weight b(q)/b(q+1) in factor i."""
    from .operators import _degree_array  # shared degree cache

    deg = _degree_array(spec)[:, i - 1]
    mi = spec.m[i - 1]
    table = np.array(
        [weight_b(mi, q) / weight_b(mi, q + 1) for q in range(spec.L[i - 1] + 1)],
        dtype=np.float64,
    )
    return np.tile(table[deg], spec.d)


def _factor_degree_full(spec: TruncationSpec, i: int) -> np.ndarray:
    from .operators import _degree_array

    return np.tile(_degree_array(spec)[:, i - 1], spec.d)


# ----------------------------------------------------------------------------
# verify suite: operator identities
# ----------------------------------------------------------------------------


def verify_suite(config: RunConfig) -> Report:
    spec = config.spec
    tol = config.resolved_tol()
    col = _Collector("verify", spec, config.seed, tol)
    N = spec.total_dim

    def cauchy_dual_adjoint() -> Tuple[float, str]:
        # the inverse Gram acting on the adjoint column equals the adjoint
        # column followed by the degree rescaling
        band = GuardBand.uniform(spec, 1)
        worst = 0.0
        for i in range(1, spec.k + 1):
            dinv = sp.diags(1.0 / _factor_weight_diag(spec, i), format="csr")
            om = omega(spec, i)
            for j in range(1, spec.n[i - 1] + 1):
                lam_adj = right_creation(spec, i, j).conj().T.tocsr()
                diff = dinv @ lam_adj - lam_adj @ om
                worst = max(worst, max_abs(compress_interior(spec, diff, band)))
        return worst, ""

    col.run("cauchy_dual_adjoint", cauchy_dual_adjoint, (1,) * spec.k)

    def range_projection() -> Tuple[float, str]:
        # sum_j Lambda'_j Lambda_j* projects onto factor-i degree >= 1
        band = GuardBand.uniform(spec, 1)
        worst = 0.0
        for i in range(1, spec.k + 1):
            acc = None
            for j in range(1, spec.n[i - 1] + 1):
                term = cauchy_dual_column(spec, i, j) @ right_creation(spec, i, j).conj().T
                acc = term if acc is None else acc + term
            proj = sp.diags((_factor_degree_full(spec, i) >= 1).astype(np.complex128))
            worst = max(worst, max_abs(compress_interior(spec, acc - proj, band)))
        return worst, ""

    col.run("range_projection", range_projection, (1,) * spec.k)

    def cauchy_dual_defect() -> Tuple[float, str]:
        # the same projection complement equals the per-factor defect of the
        # right tuple at full order
        worst = 0.0
        for i in range(1, spec.k + 1):
            band = GuardBand.factor_only(spec, i, spec.m[i - 1])
            acc = None
            for j in range(1, spec.n[i - 1] + 1):
                term = cauchy_dual_column(spec, i, j) @ right_creation(spec, i, j).conj().T
                acc = term if acc is None else acc + term
            p = [0] * spec.k
            p[i - 1] = spec.m[i - 1]
            rhs = defect(model_tuple(spec, side="right"), p)
            lhs = sp.identity(N, format="csr", dtype=np.complex128) - acc
            worst = max(worst, max_abs(compress_interior(spec, lhs - rhs, band)))
        return worst, ""

    col.run("cauchy_dual_defect", cauchy_dual_defect, tuple(spec.m))

    def defect_vacuum() -> Tuple[float, str]:
        band = GuardBand(tuple(spec.m))
        delta = defect(model_tuple(spec, side="left"), spec.m)
        vac = spectral_projection(spec, [0] * spec.k)
        return max_abs(compress_interior(spec, delta - vac, band)), ""

    col.run("defect_vacuum", defect_vacuum, tuple(spec.m))

    def right_grading() -> Tuple[float, str]:
        # closed-form eigenvalues of sum_j Lambda_j Lambda_j*: q/(m+q-1) on
        # factor-i degree q >= 1.  The detail also reports the residual
        # against the alternative constant 1/(m+q-1) for cross-checking.
        worst = 0.0
        worst_alt = 0.0
        for i in range(1, spec.k + 1):
            acc = None
            for j in range(1, spec.n[i - 1] + 1):
                lam = right_creation(spec, i, j)
                term = lam @ lam.conj().T
                acc = term if acc is None else acc + term
            q = _factor_degree_full(spec, i).astype(np.float64)
            mi = spec.m[i - 1]
            with np.errstate(divide="ignore", invalid="ignore"):
                impl = np.where(q >= 1, q / (mi + q - 1.0), 0.0)
                alt = np.where(q >= 1, 1.0 / (mi + q - 1.0), 0.0)
            worst = max(worst, max_abs(acc - sp.diags(impl.astype(np.complex128))))
            worst_alt = max(worst_alt, max_abs(acc - sp.diags(alt.astype(np.complex128))))
        detail = (
            f"eigenvalue q/(m+q-1) residual {worst:.3e}; "
            f"alternative constant 1/(m+q-1) residual {worst_alt:.3e}"
        )
        return worst, detail

    col.run("right_grading", right_grading, _zeros(spec))

    def right_orthogonality() -> Tuple[float, str]:
        band = GuardBand.uniform(spec, 1)
        worst = 0.0
        for i in range(1, spec.k + 1):
            d2 = sp.diags(_factor_weight_diag(spec, i).astype(np.complex128))
            cols = [right_creation(spec, i, j) for j in range(1, spec.n[i - 1] + 1)]
            for j, cj in enumerate(cols):
                for l, cl in enumerate(cols):
                    g = cj.conj().T @ cl
                    if j == l:
                        g = g - d2
                    worst = max(worst, max_abs(compress_interior(spec, g, band)))
        return worst, ""

    col.run("right_orthogonality", right_orthogonality, (1,) * spec.k)

    def factor_commutation() -> Tuple[float, str]:
        band = GuardBand(tuple(min(2, Li) for Li in spec.L))
        lefts = [
            left_creation(spec, i, j)
            for i in range(1, spec.k + 1)
            for j in range(1, spec.n[i - 1] + 1)
        ]
        rights = [
            right_creation(spec, i, j)
            for i in range(1, spec.k + 1)
            for j in range(1, spec.n[i - 1] + 1)
        ]
        worst = 0.0
        for w in lefts:
            for lam in rights:
                worst = max(worst, max_abs(compress_interior(spec, w @ lam - lam @ w, band)))
        return worst, ""

    col.run("factor_commutation", factor_commutation, (2,) * spec.k)

    def torus_covariance() -> Tuple[float, str]:
        theta = [0.7 + 0.31 * s for s in range(spec.k)]
        g = gamma(spec, theta)
        worst = 0.0
        for i in range(1, spec.k + 1):
            phase = np.exp(1j * theta[i - 1])
            for j in range(1, spec.n[i - 1] + 1):
                w = left_creation(spec, i, j)
                worst = max(worst, max_abs(g @ w @ g.conj().T - phase * w))
        return worst, f"theta={[round(t, 4) for t in theta]}"

    col.run("torus_covariance", torus_covariance, _zeros(spec))

    return col.report()


# ----------------------------------------------------------------------------
# toeplitz suite: structure detection on one operator
# ----------------------------------------------------------------------------


def _toeplitz_operator(config: RunConfig) -> np.ndarray:
    if config.source == "random-symbol":
        return random_toeplitz(config.spec, config.seed)
    if config.source == "random-dense":
        return random_dense_operator(config.spec, config.seed)
    if config.source == "file":
        from .operators import load_operator

        if not config.operator_path:
            raise ValueError("source 'file' requires an operator path")
        M, file_spec = load_operator(config.operator_path)
        if file_spec != config.spec:
            raise ValueError("operator file was exported for a different truncation")
        return M
    raise ValueError(f"unknown operator source {config.source!r}")


def toeplitz_suite(config: RunConfig, operator: Optional[np.ndarray] = None) -> Report:
    spec = config.spec
    tol = config.resolved_tol()
    col = _Collector("toeplitz", spec, config.seed, tol)
    T = _toeplitz_operator(config) if operator is None else operator
    bh_guard = tuple(mi + 1 for mi in spec.m)

    structure = col.run(
        "structure_detect",
        lambda: _structure_check(spec, T, tol),
        _zeros(spec),
    )
    bh = col.run("bh_residual", lambda: (max(brown_halmos_residual(spec, T)), ""), bh_guard)
    col.run("round_trip", lambda: (max_abs(reconstruct(spec, extract_symbol(spec, T)) - T), ""), _zeros(spec))

    agree = structure.passed == bh.passed
    col.add(
        "tests_agree",
        agree,
        0.0 if agree else 1.0,
        _zeros(spec),
        0.0,
        "structure and residual tests match" if agree else "structure and residual tests disagree",
    )
    return col.report()


def _structure_check(spec: TruncationSpec, T: np.ndarray, tol: float) -> Tuple[float, str]:
    rep = is_weighted_multi_toeplitz(spec, T, tol=tol)
    residual = max(rep.max_offdomain_entry, rep.max_ratio_residual)
    detail = ""
    if rep.witness is not None:
        detail = json.dumps(rep.witness.to_json(), sort_keys=True)
    return residual, detail


# ----------------------------------------------------------------------------
# fourier suite: homogeneous decomposition of one random operator
# ----------------------------------------------------------------------------


def offset_subset(spec: TruncationSpec, seed: int) -> List[Tuple[int, ...]]:
    """Deterministic degree offsets: zero, unit vectors, the support corner,
    and one seeded draw from the full offset box."""
    out = [tuple(0 for _ in range(spec.k))]
    for i in range(spec.k):
        for sign in (1, -1):
            s = [0] * spec.k
            s[i] = sign
            out.append(tuple(s))
    out.append(tuple(Li - mi for Li, mi in zip(spec.L, spec.m)))
    rng = instance_rng(seed, spec, 777)
    out.append(tuple(int(rng.integers(-Li, Li + 1)) for Li in spec.L))
    seen = []
    for s in out:
        if s not in seen:
            seen.append(s)
    return seen


def fourier_suite(config: RunConfig) -> Report:
    spec = config.spec
    tol = config.resolved_tol()
    col = _Collector("fourier", spec, config.seed, tol)
    T = random_toeplitz(spec, config.seed)
    base = max_abs(T)
    diffs_subset = offset_subset(spec, config.seed)

    def homogeneous_sum() -> Tuple[float, str]:
        total = np.zeros((spec.total_dim, spec.total_dim), dtype=np.complex128)
        count = 0
        for s in _present_offsets(spec, T):
            total += homogeneous_part_projection(spec, T, s)
            count += 1
        return max_abs(total - np.asarray(T)), f"{count} components"

    col.run("homogeneous_sum", homogeneous_sum, _zeros(spec))

    def norm_bound() -> Tuple[float, str]:
        worst = 0.0
        for s in _present_offsets(spec, T):
            worst = max(worst, max_abs(homogeneous_part_projection(spec, T, s)))
        return max(0.0, worst - base), f"max part {worst:.6e} vs whole {base:.6e}"

    col.run("norm_bound", norm_bound, _zeros(spec), tol=1e-12)

    def projection_vs_quadrature() -> Tuple[float, str]:
        worst = 0.0
        for s in diffs_subset:
            p = homogeneous_part_projection(spec, T, s)
            q = homogeneous_part_quadrature(spec, T, s)
            worst = max(worst, max_abs(p - q))
        return worst, f"{len(diffs_subset)} offsets at N=2L+1"

    col.run("projection_vs_quadrature", projection_vs_quadrature, _zeros(spec), tol=1e-12)

    def fejer_bound() -> Tuple[float, str]:
        errs = []
        for c in (1, 2, 4, 8):
            NN = tuple(c * Li for Li in spec.L)
            errs.append(max_abs(fejer_sum(spec, T, NN) - np.asarray(T)))
        monotone = all(errs[t + 1] <= errs[t] + 1e-12 for t in range(3))
        ok = monotone and errs[-1] < 0.2 * base
        detail = "errors at N=L,2L,4L,8L: " + ", ".join(f"{e:.4e}" for e in errs)
        if not monotone:
            detail += " (not monotone)"
        # encode pass/fail through the residual against the 0.2 bound
        residual = errs[-1] / base if base > 0 else 0.0
        return (residual if ok else max(residual, 1.0)), detail

    col.run("fejer_bound", fejer_bound, _zeros(spec), tol=0.2)

    def bh_invariance() -> Tuple[float, str]:
        eps = max(brown_halmos_residual(spec, T))
        worst = 0.0
        tested = 0
        for s in diffs_subset[: 2 * spec.k + 1]:
            part = homogeneous_part_projection(spec, T, s)
            r = max(brown_halmos_residual(spec, part))
            worst = max(worst, max(0.0, r - eps - 1e-10))
            tested += 1
        return worst, f"{tested} components against whole-operator residual {eps:.3e}"

    col.run("bh_invariance", bh_invariance, tuple(mi + 1 for mi in spec.m), tol=1e-12)

    return col.report()


def _present_offsets(spec: TruncationSpec, T) -> List[Tuple[int, ...]]:
    """Degree offsets with a nonzero component in T (cheap blockwise scan)."""
    from .toeplitz import _blocks, _degree_diffs

    T4 = _blocks(spec, T)
    mass = np.abs(T4).sum(axis=(0, 2))
    diffs = _degree_diffs(spec)
    rows, cols = np.nonzero(mass > 0)
    if rows.size == 0:
        return []
    vecs = np.stack([diffs[j, rows, cols] for j in range(spec.k)], axis=1)
    return [tuple(int(x) for x in row) for row in np.unique(vecs, axis=0)]


# ----------------------------------------------------------------------------
# berezin suite: kernel and transform checks at one point
# ----------------------------------------------------------------------------


def berezin_suite(
    config: RunConfig,
    point: PointTuple,
    n_transforms: int = 3,
) -> Report:
    spec = config.spec
    tol = config.resolved_tol()
    col = _Collector("berezin", spec, config.seed, tol)
    if not membership(point):
        raise ValueError("point lies outside the poly-hyperball")

    gram = kernel_gram(point)
    eye = np.eye(gram.shape[0], dtype=np.complex128)

    def contraction() -> Tuple[float, str]:
        lam = float(np.linalg.eigvalsh((gram + gram.conj().T) / 2.0)[-1])
        return max(0.0, np.sqrt(max(lam, 0.0)) - 1.0), f"largest singular value {np.sqrt(max(lam, 0.0)):.12f}"

    col.run("contraction", contraction, _zeros(spec))

    col.run("isometry", lambda: (max_abs(gram - eye), ""), _zeros(spec))

    def intertwining() -> Tuple[float, str]:
        worst = 0.0
        for i in range(1, spec.k + 1):
            for j in range(1, spec.n[i - 1] + 1):
                worst = max(worst, intertwining_residual(point, i, j))
        return worst, ""

    col.run("intertwining", intertwining, (1,) * spec.k)

    def kk_identity() -> Tuple[float, str]:
        worst = 0.0
        for t in range(n_transforms):
            T = random_toeplitz(spec, config.seed, index=t)
            S = extract_symbol(spec, T)
            lhs = berezin_transform(point, T)
            rhs = eval_symbol(S, point)
            worst = max(worst, max_abs(lhs - rhs))
        return worst, f"{n_transforms} random structured operators"

    col.run("kk_identity", kk_identity, _zeros(spec))

    return col.report()


# ----------------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------------


def run_suite(config: RunConfig, point: Optional[PointTuple] = None) -> Report:
    if config.suite == "verify":
        return verify_suite(config)
    if config.suite == "toeplitz":
        return toeplitz_suite(config)
    if config.suite == "fourier":
        return fourier_suite(config)
    if config.suite == "berezin":
        if point is None:
            from .berezin import radial_model

            point = radial_model(config.spec, config.radial if config.radial is not None else 0.5)
        return berezin_suite(config, point)
    raise ValueError(f"unknown suite {config.suite!r}")
