"""Quadrature rules realizing the Haar measures of the group factors.

Compact factors (SO(2), SO(3)) carry normalized Haar measure of total mass 1.
Noncompact factors carry Lebesgue measure in their natural chart: plain
coordinates for unipotent and Euclidean factors, log coordinates for the
diagonal and scale factors (so du realizes da/a and dt/t).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ConfigurationError, ContractViolation, DomainError
from . import groups

FACTORS = ("K_SO2", "K_SO3", "A_diag", "N_unipotent", "EuclideanRn", "ScaleRplus")


@dataclass(frozen=True)
class QuadratureRule:
    factor: str
    nodes: np.ndarray          # (count,) or (count, dim) coordinate tuples
    weights: np.ndarray        # (count,), positive
    chart: str

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise ConfigurationError("node count must match weight count")
        if np.any(self.weights <= 0.0):
            raise ConfigurationError("quadrature weights must be positive")


@dataclass(frozen=True)
class ProductRule:
    """Ordered product of factor rules; integration order follows the list."""

    factors: tuple[QuadratureRule, ...]

    def grids(self):
        return [r.nodes for r in self.factors]

    def total_nodes(self) -> int:
        out = 1
        for r in self.factors:
            out *= len(r.nodes)
        return out


def uniform_circle_rule(count: int) -> QuadratureRule:
    theta = 2.0 * np.pi * np.arange(count) / count
    w = np.full(count, 1.0 / count)
    return QuadratureRule("K_SO2", theta, w, "angle theta -> R(theta)")


def so3_rule(band_limit: int) -> QuadratureRule:
    """Product rule in ZYZ Euler angles, exact for band-limited integrands.

    Uniform grids in alpha and gamma, Gauss-Legendre in cos(beta); weights
    are normalized so the constant 1 integrates to 1.
    """
    n_circ = 4 * band_limit + 4
    n_beta = 2 * band_limit + 2
    alpha = 2.0 * np.pi * np.arange(n_circ) / n_circ
    gamma = 2.0 * np.pi * np.arange(n_circ) / n_circ
    xb, wb = np.polynomial.legendre.leggauss(n_beta)
    beta = np.arccos(xb)
    nodes = []
    weights = []
    for i, a in enumerate(alpha):
        for j, b in enumerate(beta):
            for k, g in enumerate(gamma):
                nodes.append((a, b, g))
                weights.append(wb[j] / (2.0 * n_circ * n_circ))
    return QuadratureRule("K_SO3", np.array(nodes), np.array(weights),
                          "ZYZ Euler angles (alpha, beta, gamma)")


def line_rule(factor: str, count: int, span: tuple[float, float]) -> QuadratureRule:
    """Trapezoid rule on a uniform coordinate grid."""
    lo, hi = span
    if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
        raise ConfigurationError("span must be a finite increasing interval")
    x = np.linspace(lo, hi, count)
    h = x[1] - x[0]
    w = np.full(count, h)
    w[0] = w[-1] = h / 2.0
    charts = {
        "A_diag": "log coordinate u -> diag(e^u, e^-u, ...)",
        "ScaleRplus": "log coordinate u -> t = e^u",
        "N_unipotent": "strict upper entry",
        "EuclideanRn": "Cartesian coordinate",
    }
    return QuadratureRule(factor, x, w, charts[factor])


def build_rule(factor: str, count: int | None = None,
               span: tuple[float, float] | None = None,
               band_limit: int | None = None) -> QuadratureRule:
    if factor not in FACTORS:
        raise ConfigurationError(f"unknown factor {factor!r}")
    if factor == "K_SO2":
        if count is None or count < 2:
            raise ConfigurationError("K_SO2 rule needs count >= 2")
        return uniform_circle_rule(count)
    if factor == "K_SO3":
        if band_limit is None or band_limit < 0:
            raise ConfigurationError("K_SO3 rule needs a band limit")
        return so3_rule(band_limit)
    if count is None or count < 2:
        raise ConfigurationError(f"{factor} rule needs count >= 2")
    if span is None:
        raise ConfigurationError(f"{factor} rule needs a finite span")
    return line_rule(factor, count, span)


def integrate(f, rule) -> complex:
    """Weighted sum of f over the rule's nodes.

    ``f`` is either an ndarray of node values or a callable evaluated on the
    node coordinates.  For a ProductRule a callable receives one meshgrid
    array per factor.
    """
    if isinstance(rule, QuadratureRule):
        vals = f(rule.nodes) if callable(f) else np.asarray(f)
        if vals.shape != rule.weights.shape:
            raise ContractViolation("value shape does not match rule nodes")
        return complex(np.sum(vals * rule.weights))
    shapes = tuple(len(r.nodes) for r in rule.factors)
    if callable(f):
        axes = [r.nodes for r in rule.factors]
        mesh = np.meshgrid(*axes, indexing="ij", copy=False)
        vals = f(*mesh)
    else:
        vals = np.asarray(f)
    if vals.shape != shapes:
        raise ContractViolation(f"value shape {vals.shape} != grid shape {shapes}")
    w = np.ones(())
    for r in rule.factors:
        w = np.multiply.outer(w, r.weights)
    return complex(np.sum(vals * w))


def modulus_half_sum(a) -> float:
    """Jacobian of n -> a n a^-1 on the unipotent factor: prod_{i<j} a_i / a_j."""
    if isinstance(a, groups.GroupElement):
        a = a.matrix
    a = np.asarray(a, dtype=float)
    d = np.diag(a) if a.ndim == 2 else a
    if np.any(d <= 0.0):
        raise DomainError("diagonal entries must be positive")
    i, j = np.triu_indices(len(d), 1)
    return float(np.prod(d[i] / d[j]))


def conjugation_jacobian_fd(a, n_dim: int, step: float = 1e-5) -> float:
    """Finite-difference Jacobian determinant of n -> a n a^-1 in N coordinates."""
    if isinstance(a, groups.GroupElement):
        a = a.matrix
    a = np.asarray(a, dtype=float)
    a_inv = np.linalg.inv(a)
    d = n_dim * (n_dim - 1) // 2

    def push(x):
        m = groups.unipotent_from_coords(x, n_dim)
        return groups.unipotent_coords(a @ m @ a_inv)

    jac = np.empty((d, d))
    for col in range(d):
        e = np.zeros(d)
        e[col] = step
        jac[:, col] = (push(e) - push(-e)) / (2.0 * step)
    return float(np.linalg.det(jac))


def _translate_nodes(rule: QuadratureRule, shift, n_dim: int | None = None):
    """Coordinates of g . x for every node x, g given in the rule's chart."""
    if rule.factor == "K_SO2":
        return np.mod(rule.nodes + shift, 2.0 * np.pi)
    if rule.factor in ("A_diag", "ScaleRplus", "EuclideanRn"):
        return rule.nodes + shift
    if rule.factor == "N_unipotent":
        if n_dim is None or n_dim * (n_dim - 1) // 2 == 1:
            return rule.nodes + shift
        g = groups.unipotent_from_coords(shift, n_dim)
        return np.array([groups.unipotent_coords(
            g @ groups.unipotent_from_coords(x, n_dim)) for x in rule.nodes])
    raise ConfigurationError(f"translation not defined for {rule.factor}")


def invariance_residual(rule: QuadratureRule, f, shifts, n_dim: int | None = None) -> float:
    """Max relative change of the integral under left translations.

    ``shifts`` is an iterable of translation parameters in the rule's chart
    (angles for K, coordinate offsets otherwise).  The test integrand must be
    band-limited or decay inside the grid for the residual to be meaningful.
    """
    base = integrate(f, rule)
    scale = max(abs(base), 1e-300)
    worst = 0.0
    for s in shifts:
        translated = f(_translate_nodes(rule, s, n_dim))
        shifted = complex(np.sum(np.asarray(translated) * rule.weights))
        worst = max(worst, abs(shifted - base) / scale)
    return worst
