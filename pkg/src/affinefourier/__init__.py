"""Chained Fourier analysis on the affine group and its factor groups.

The package builds quadrature rules for the unipotent, diagonal, compact
and scale factors of GL(n) at desk scale (n = 2, 3), composes per-factor
transforms into a chained spectrum, and checks Plancherel, inversion,
convolution and invariance identities numerically.
"""

from .errors import (
    AffineFourierError,
    BudgetExceededError,
    ConfigurationError,
    ContractViolation,
    DomainError,
    PreconditionError,
    UnsupportedFeatureError,
)
from .groups import (
    GroupElement,
    IwasawaFactors,
    affine,
    compose,
    general_linear,
    identity_element,
    invert,
    iwasawa_decompose,
    positive_diagonal,
    random_element,
    reorder_iwasawa,
    rotation,
    special_linear,
    split_gl_plus,
    tilde_extend,
    unipotent,
)
from .quadrature import (
    ProductRule,
    QuadratureRule,
    build_rule,
    integrate,
    invariance_residual,
)
from .spectra import (
    CompactSpectrum,
    SampledFunction,
    compact_plancherel_residual,
    euclid_ft,
    euclid_ift,
    hs_norm_sq,
    mellin_ft,
    mellin_ift,
    peter_weyl,
    peter_weyl_inverse,
)
from .wigner import wigner_D, wigner_d
from .composite import (
    CompositeSpectrum,
    IdentityReport,
    chained_transform,
    convolution_identity_residual,
    convolve,
    ga_transform,
    gl_full_integrals,
    glplus_transform,
    plancherel_residual,
    sl_transform,
    solvable_transform,
)
from .bundles import BUNDLE_NAMES, Bundle, make_bundle
from .harness import PROFILES, RunConfig, emit_report, run_suite, sweep_convergence

__all__ = [
    "AffineFourierError",
    "BudgetExceededError",
    "ConfigurationError",
    "ContractViolation",
    "DomainError",
    "PreconditionError",
    "UnsupportedFeatureError",
    "GroupElement",
    "IwasawaFactors",
    "affine",
    "compose",
    "general_linear",
    "identity_element",
    "invert",
    "iwasawa_decompose",
    "positive_diagonal",
    "random_element",
    "reorder_iwasawa",
    "rotation",
    "special_linear",
    "split_gl_plus",
    "tilde_extend",
    "unipotent",
    "ProductRule",
    "QuadratureRule",
    "build_rule",
    "integrate",
    "invariance_residual",
    "CompactSpectrum",
    "SampledFunction",
    "compact_plancherel_residual",
    "euclid_ft",
    "euclid_ift",
    "hs_norm_sq",
    "mellin_ft",
    "mellin_ift",
    "peter_weyl",
    "peter_weyl_inverse",
    "wigner_D",
    "wigner_d",
    "CompositeSpectrum",
    "IdentityReport",
    "chained_transform",
    "convolution_identity_residual",
    "convolve",
    "ga_transform",
    "gl_full_integrals",
    "glplus_transform",
    "plancherel_residual",
    "sl_transform",
    "solvable_transform",
    "BUNDLE_NAMES",
    "Bundle",
    "make_bundle",
    "PROFILES",
    "RunConfig",
    "emit_report",
    "run_suite",
    "sweep_convergence",
]

__version__ = "0.1.0"
