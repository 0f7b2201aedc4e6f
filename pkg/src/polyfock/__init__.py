"""Truncated weighted Fock models of noncommutative poly-hyperballs.

The package builds the universal operator models on truncated tensor
products of weighted full Fock spaces, detects weighted multi-Toeplitz
structure two independent ways, decomposes operators into multi-homogeneous
parts, and evaluates kernel compressions at points of the hyperball.
"""
from .basis import TruncationSpec, GradedBasis, build_basis, mu, tau, tau_radicand, weight_b
from .berezin import (
    BerezinKernelMatrix,
    PointTuple,
    bergman_shift,
    berezin_kernel,
    berezin_transform,
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
from .operators import (
    BASIS_ORDER,
    GuardBand,
    OperatorTuple,
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
from .sampling import (
    PRNG_NAME,
    instance_rng,
    random_dense_operator,
    random_monomial,
    random_pure_point,
    random_symbol,
    random_toeplitz,
)
from .suites import (
    CheckResult,
    Report,
    RunConfig,
    berezin_suite,
    fourier_suite,
    run_suite,
    toeplitz_suite,
    verify_suite,
)
from .toeplitz import (
    Symbol,
    ToeplitzReport,
    Witness,
    brown_halmos_residual,
    extract_symbol,
    fejer_sum,
    fourier_partial_sum,
    fourier_support,
    homogeneous_part_projection,
    homogeneous_part_quadrature,
    is_weighted_multi_toeplitz,
    reconstruct,
    symbol_distance,
    to_weighted_fock_conjugate,
)
from .words import (
    MultiWord,
    Word,
    comparable,
    concat,
    enumerate_words,
    is_reduced_pair,
    reduced_pairs,
    reverse,
    right_quotient,
    simplify,
)

__version__ = "0.1.0"
