"""Primitive transforms: Euclidean FT, Mellin-type FT, and Peter-Weyl on K.

Conventions, fixed project-wide by the Parseval tests:

* forward Euclidean kernel exp(-i <lam, x>), inverse carries (2 pi)^-d;
* the Mellin transform is the Euclidean transform in u = log t, realizing
  integral f(t) t^(-i eta) dt/t;
* Haar measure on K is normalized to mass 1, so Plancherel on K reads
  sum_gamma d_gamma ||Tf(gamma)||_HS^2 with no extra constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, ContractViolation, PreconditionError,
                     UnsupportedFeatureError)
from .quadrature import QuadratureRule
from .wigner import wigner_D, wigner_d
from . import groups


@dataclass(frozen=True)
class SampledFunction:
    """Complex values on a product grid, with one semantic label per axis."""

    grids: tuple[np.ndarray, ...]
    values: np.ndarray
    axes: tuple[str, ...]

    def __post_init__(self):
        shape = tuple(len(g) for g in self.grids)
        if self.values.shape != shape:
            raise ContractViolation(
                f"value shape {self.values.shape} != grid shape {shape}")
        if len(self.axes) != len(self.grids) or len(set(self.axes)) != len(self.axes):
            raise ContractViolation("axis labels must be unique, one per grid")


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    h = x[1] - x[0]
    w = np.full(len(x), h)
    w[0] = w[-1] = h / 2.0
    return w


def nyquist_frequencies(x: np.ndarray) -> np.ndarray:
    """Centered frequency grid with spacing 2 pi / (m h), spanning +-pi/h."""
    m = len(x)
    h = x[1] - x[0]
    return (np.arange(m) - m // 2) * (2.0 * np.pi / (m * h))


# The canonical Gaussian exp(-x^2/2) on [-8, 8] sits at 1.27e-14 on the
# boundary, so the gate is one order looser than that floor.
DECAY_TOL = 1e-13


def check_boundary_decay(values: np.ndarray, axis: int, tol: float = DECAY_TOL):
    v = np.moveaxis(np.asarray(values), axis, 0)
    peak = np.max(np.abs(v))
    if peak == 0.0:
        return
    edge = max(np.max(np.abs(v[0])), np.max(np.abs(v[-1])))
    if edge > tol * max(peak, 1.0):
        raise PreconditionError(
            f"boundary value {edge:.3e} on axis {axis} exceeds decay threshold {tol:.1e}")


def _ft_kernel(freqs: np.ndarray, x: np.ndarray, sign: float) -> np.ndarray:
    return np.exp(sign * 1j * np.outer(freqs, x)) * trapezoid_weights(x)[None, :]


def euclid_ft(f: SampledFunction, freq_grids=None, axes=None,
              check_decay: bool = True) -> SampledFunction:
    """Quadrature Fourier transform along the selected axes.

    Parameters
    ----------
    f : SampledFunction
    freq_grids : optional list of frequency grids, one per transformed axis;
        defaults to the Nyquist-consistent grid of each spatial grid.
    axes : axis labels to transform; defaults to all.
    """
    idx = range(len(f.axes)) if axes is None else [f.axes.index(a) for a in axes]
    if freq_grids is None:
        freq_grids = [nyquist_frequencies(f.grids[i]) for i in idx]
    values = np.asarray(f.values, dtype=complex)
    grids = list(f.grids)
    labels = list(f.axes)
    for i, fg in zip(idx, freq_grids):
        if check_decay:
            check_boundary_decay(values, i)
        kern = _ft_kernel(np.asarray(fg, dtype=float), f.grids[i], -1.0)
        values = np.moveaxis(np.tensordot(kern, values, axes=([1], [i])), 0, i)
        grids[i] = np.asarray(fg, dtype=float)
        labels[i] = "freq_" + labels[i]
    return SampledFunction(tuple(grids), values, tuple(labels))


def euclid_ift(f: SampledFunction, space_grids, axes=None) -> SampledFunction:
    """Inverse transform, kernel exp(+i <lam, x>) with a (2 pi)^-1 per axis."""
    idx = range(len(f.axes)) if axes is None else [f.axes.index(a) for a in axes]
    values = np.asarray(f.values, dtype=complex)
    grids = list(f.grids)
    labels = list(f.axes)
    for i, xg in zip(idx, space_grids):
        kern = _ft_kernel(np.asarray(xg, dtype=float), f.grids[i], +1.0) / (2.0 * np.pi)
        values = np.moveaxis(np.tensordot(kern, values, axes=([1], [i])), 0, i)
        grids[i] = np.asarray(xg, dtype=float)
        labels[i] = labels[i].removeprefix("freq_")
    return SampledFunction(tuple(grids), values, tuple(labels))


def mellin_ft(f: SampledFunction, eta_grid=None, axis: str | None = None,
              check_decay: bool = True) -> SampledFunction:
    """Multiplicative-group transform; ``f`` must be sampled in u = log t."""
    axes = None if axis is None else [axis]
    fg = None if eta_grid is None else [eta_grid]
    return euclid_ft(f, freq_grids=fg, axes=axes, check_decay=check_decay)


def mellin_ift(f: SampledFunction, u_grid, axis: str | None = None) -> SampledFunction:
    axes = None if axis is None else [axis]
    return euclid_ift(f, [u_grid], axes=axes)


# ---------------------------------------------------------------------------
# Peter-Weyl transform on K = SO(2), SO(3)


@dataclass(frozen=True)
class CompactSpectrum:
    """Matrix Fourier blocks indexed by the irrep label.

    SO(2): label m with |m| <= band_limit, 1x1 blocks.
    SO(3): label l with 0 <= l <= band_limit, (2l+1)x(2l+1) blocks.
    """

    group: str
    band_limit: int
    blocks: dict[int, np.ndarray]


def irrep_labels(group: str, band_limit: int):
    if group == "SO2":
        return list(range(-band_limit, band_limit + 1))
    if group == "SO3":
        return list(range(band_limit + 1))
    raise UnsupportedFeatureError(f"no irrep machinery for {group!r}")


def irrep_dimension(group: str, label: int) -> int:
    return 1 if group == "SO2" else 2 * label + 1


def irrep_matrix(group: str, label: int, k) -> np.ndarray:
    """Unitary irreducible representation evaluated at a rotation.

    ``k`` may be a GroupElement, a rotation matrix, an angle (SO(2)), or a
    ZYZ Euler triple (SO(3)).
    """
    if group == "SO2":
        if isinstance(k, groups.GroupElement):
            theta = groups.so2_angle(k.matrix)
        else:
            k = np.asarray(k, dtype=float)
            theta = groups.so2_angle(k) if k.ndim == 2 else float(k)
        return np.array([[np.exp(1j * label * theta)]])
    if group == "SO3":
        if isinstance(k, groups.GroupElement):
            ang = groups.euler_zyz_angles(k.matrix)
        else:
            k = np.asarray(k, dtype=float)
            ang = groups.euler_zyz_angles(k) if k.ndim == 2 else tuple(k)
        return wigner_D(label, *ang)
    raise UnsupportedFeatureError(f"no irrep machinery for {group!r}")


def so3_irrep_stack(nodes: np.ndarray, ell: int) -> np.ndarray:
    """D^l at every Euler-angle node, shape (count, 2l+1, 2l+1).

    The d-part depends only on beta, so it is evaluated once per distinct
    beta value and broadcast against the alpha/gamma phases.
    """
    alpha, beta, gamma = nodes[:, 0], nodes[:, 1], nodes[:, 2]
    uniq, inv = np.unique(np.round(beta, 14), return_inverse=True)
    d_uniq = np.array([wigner_d(ell, b) for b in uniq])
    m = np.arange(-ell, ell + 1)
    ph_a = np.exp(-1j * alpha[:, None] * m[None, :])
    ph_g = np.exp(-1j * gamma[:, None] * m[None, :])
    return ph_a[:, :, None] * d_uniq[inv] * ph_g[:, None, :]


def rule_group(rule: QuadratureRule) -> str:
    if rule.factor == "K_SO2":
        return "SO2"
    if rule.factor == "K_SO3":
        return "SO3"
    raise ConfigurationError(f"{rule.factor} is not a compact-group rule")


def peter_weyl(f, rule: QuadratureRule, band_limit: int) -> CompactSpectrum:
    """Matrix Fourier coefficients Tf(gamma) = integral f(x) gamma(x^-1) dx."""
    group = rule_group(rule)
    vals = np.asarray(f(rule.nodes) if callable(f) else f, dtype=complex)
    if vals.shape != (len(rule.nodes),):
        raise ContractViolation("value array must match the rule's nodes")
    wf = vals * rule.weights
    blocks: dict[int, np.ndarray] = {}
    if group == "SO2":
        if len(rule.nodes) < 2 * band_limit + 1:
            raise ConfigurationError("SO(2) rule too coarse for this band limit")
        for m in irrep_labels(group, band_limit):
            blocks[m] = np.array([[np.sum(wf * np.exp(-1j * m * rule.nodes))]])
    else:
        for ell in irrep_labels(group, band_limit):
            d_stack = so3_irrep_stack(rule.nodes, ell)
            # gamma(x^-1) = D(x)^dagger for a unitary representation
            blocks[ell] = np.einsum("s,sij->ji", wf, d_stack.conj())
    return CompactSpectrum(group, band_limit, blocks)


def peter_weyl_inverse(spec: CompactSpectrum, points) -> np.ndarray:
    """Inversion f(x) = sum_gamma d_gamma tr[Tf(gamma) gamma(x)] at the points."""
    points = np.asarray(points, dtype=float)
    if spec.group == "SO2":
        out = np.zeros(points.shape, dtype=complex)
        for m, blk in spec.blocks.items():
            out += blk[0, 0] * np.exp(1j * m * points)
        return out
    out = np.zeros(len(points), dtype=complex)
    for ell, blk in spec.blocks.items():
        d_stack = so3_irrep_stack(points, ell)
        out += (2 * ell + 1) * np.einsum("ij,sji->s", blk, d_stack)
    return out


def hs_norm_sq(spec: CompactSpectrum) -> float:
    """Weighted Hilbert-Schmidt mass  sum_gamma d_gamma ||Tf(gamma)||_HS^2."""
    total = 0.0
    for label, blk in spec.blocks.items():
        total += irrep_dimension(spec.group, label) * float(np.sum(np.abs(blk) ** 2))
    return total


def compact_plancherel_residual(f, rule: QuadratureRule, band_limit: int) -> float:
    """Relative gap between the L2 mass of f and its spectral HS mass."""
    vals = np.asarray(f(rule.nodes) if callable(f) else f, dtype=complex)
    left = float(np.sum(np.abs(vals) ** 2 * rule.weights))
    right = hs_norm_sq(peter_weyl(vals, rule, band_limit))
    return abs(left - right) / max(left, 1e-300)
