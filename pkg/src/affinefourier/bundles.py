"""Reusable test-function bundles: analytic factors with grid samplers.

A bundle is a named set of separable factors, one per chart axis, chosen so
that every factor decays inside its default grid (or is band-limited on the
compact axis).  Bundles drive the identity harness and the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class FactorSpec:
    """Analytic 1-D factor: kind in {gaussian, hermite-gaussian, trig, one}."""

    kind: str
    center: float = 0.0
    width: float = 1.0
    harmonics: tuple[tuple[int, complex], ...] = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-((x - self.center) / self.width) ** 2 / 2.0) + 0j
        if self.kind == "hermite-gaussian":
            z = (x - self.center) / self.width
            return z * np.exp(-z ** 2 / 2.0) + 0j
        if self.kind == "trig":
            out = np.zeros(np.shape(x), dtype=complex)
            for m, c in self.harmonics:
                out += c * np.exp(1j * m * x)
            return out
        if self.kind == "one":
            return np.ones(np.shape(x), dtype=complex)
        raise ConfigurationError(f"unknown factor kind {self.kind!r}")


def gaussian(center=0.0, width=1.0) -> FactorSpec:
    return FactorSpec("gaussian", center, width)


def hermite_gaussian(center=0.0, width=1.0) -> FactorSpec:
    return FactorSpec("hermite-gaussian", center, width)


def trig(harmonics) -> FactorSpec:
    return FactorSpec("trig", harmonics=tuple((int(m), complex(c))
                                              for m, c in harmonics))


@dataclass(frozen=True)
class Bundle:
    """Named separable test function: one FactorSpec per axis label."""

    name: str
    factors: dict[str, FactorSpec]

    def factor(self, axis: str) -> FactorSpec:
        if axis not in self.factors:
            raise ConfigurationError(f"bundle {self.name!r} has no axis {axis!r}")
        return self.factors[axis]

    def sample(self, axis: str, grid) -> np.ndarray:
        return self.factor(axis)(grid)

    def band_limit(self, axis: str = "k") -> int:
        fs = self.factor(axis)
        return max((abs(m) for m, _ in fs.harmonics), default=0)


GA2_AXES = ("A0", "A1", "n0", "a0", "k", "t")


def make_bundle(name: str, seed: int = 0) -> Bundle:
    """Standard bundles over the full n = 2 affine axis set.

    * gaussian: centered Gaussians, band-3 trig polynomial on k;
    * offset: shifted/perturbed widths, complex trig coefficients;
    * hermite: odd Hermite-Gaussian on the unipotent axis;
    * random-trig: reproducible random band-limited compact factor.
    """
    if name == "gaussian":
        factors = {a: gaussian() for a in GA2_AXES if a != "k"}
        factors["k"] = trig([(0, 1.0), (3, 0.5), (-3, 0.5)])
    elif name == "offset":
        factors = {"A0": gaussian(0.4, 0.9), "A1": gaussian(-0.3, 0.95),
                   "n0": gaussian(0.5, 0.8), "a0": gaussian(-0.2, 0.7),
                   "t": gaussian(0.1, 0.9),
                   "k": trig([(0, 1.0), (1, 0.4 + 0.2j), (-2, 0.3j)])}
    elif name == "hermite":
        factors = {a: gaussian() for a in GA2_AXES if a != "k"}
        factors["n0"] = hermite_gaussian(0.0, 1.0)
        factors["k"] = trig([(0, 1.0), (2, 0.25)])
    elif name == "random-trig":
        rng = np.random.default_rng(seed)
        factors = {a: gaussian(0.0, float(rng.uniform(0.7, 0.95)))
                   for a in GA2_AXES if a != "k"}
        coeffs = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        factors["k"] = trig([(m, c) for m, c in zip(range(-3, 4), coeffs)])
    else:
        raise ConfigurationError(f"unknown bundle {name!r}")
    return Bundle(name, factors)


BUNDLE_NAMES = ("gaussian", "offset", "hermite", "random-trig")
