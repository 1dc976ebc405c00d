"""Configuration-driven experiment runner.

Builds grids from a validated RunConfig, runs identity suites over the
bundled test functions, and serializes IdentityReports as line-JSON or CSV.
Reports are deterministic for a fixed (config, seed) pair; suite order in the
output is the declaration order, never completion order.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import bundles, composite, quadrature, spectra
from .composite import FactorSample, IdentityReport, SeparableFunction, make_report
from .errors import BudgetExceededError, ConfigurationError

LEVELS = ("N", "S", "SL", "GL+", "GL", "GA+", "GA")

# axis stacks per level, n = 2 (n = 3 only changes the compact factor and the
# unipotent dimension; the so3 profile covers it)
LEVEL_AXES = {
    "N": ("n0",),
    "S": ("n0", "a0"),
    "SL": ("n0", "a0", "k"),
    "GL+": ("n0", "a0", "k", "t"),
    "GL": ("n0", "a0", "k", "t"),
    "GA+": ("A0", "A1", "n0", "a0", "k", "t"),
    "GA": ("A0", "A1", "n0", "a0", "k", "t"),
}


@dataclass(frozen=True)
class RunConfig:
    level: str = "GA+"
    n: int = 2
    grid_size: int = 64
    span: tuple[float, float] = (-8.0, 8.0)
    compact_count: int = 64
    band_limit: int = 8
    bundle: str = "gaussian"
    seed: int = 0
    out_dir: str = "."
    budget_seconds: float = 120.0

    def axes(self) -> tuple[str, ...]:
        return LEVEL_AXES[self.level]


PROFILES = {
    "default": RunConfig(),
    "deep": RunConfig(grid_size=128, compact_count=128, band_limit=16),
    "so3": RunConfig(level="SL", n=3, grid_size=48, compact_count=0, band_limit=4),
}


def load_config(path) -> RunConfig:
    """Parse and exhaustively validate a JSON config file.

    Every violated invariant is reported, with the offending field named;
    nothing is partially applied.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config parse error in {path}: {exc}") from exc
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(raw) - known
    problems = [f"unknown field {u!r}" for u in sorted(unknown)]
    merged = {k: raw[k] for k in known & set(raw)}
    if "span" in merged:
        merged["span"] = tuple(float(v) for v in merged["span"])
    cfg = RunConfig(**merged)
    problems += validate(cfg)
    if problems:
        raise ConfigurationError("invalid config: " + "; ".join(problems))
    return cfg


def validate(cfg: RunConfig) -> list[str]:
    problems = []
    if cfg.level not in LEVELS:
        problems.append(f"level must be one of {LEVELS}, got {cfg.level!r}")
    if cfg.n not in (2, 3):
        problems.append(f"n must be 2 or 3, got {cfg.n}")
    if cfg.grid_size < 8:
        noncompact = [a for a in LEVEL_AXES.get(cfg.level, ()) if a != "k"]
        problems.append(
            f"grid_size {cfg.grid_size} < 8 on non-compact axes {noncompact}")
    lo, hi = cfg.span
    if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
        problems.append(f"span {cfg.span} must be a finite increasing interval")
    if cfg.level in ("SL", "GL+", "GL", "GA+", "GA") and cfg.n == 2:
        if cfg.compact_count < 2 * cfg.band_limit + 1:
            problems.append(
                f"compact_count {cfg.compact_count} cannot resolve band_limit "
                f"{cfg.band_limit} (needs >= {2 * cfg.band_limit + 1})")
    if cfg.bundle not in bundles.BUNDLE_NAMES and cfg.bundle != "zero":
        problems.append(f"unknown bundle {cfg.bundle!r}")
    if cfg.budget_seconds <= 0:
        problems.append("budget_seconds must be positive")
    if not problems and cfg.bundle != "zero":
        b = bundles.make_bundle(cfg.bundle, cfg.seed)
        for axis in LEVEL_AXES[cfg.level]:
            if axis == "k":
                continue
            edge = max(abs(b.sample(axis, np.array([lo]))[0]),
                       abs(b.sample(axis, np.array([hi]))[0]))
            if edge > spectra.DECAY_TOL:
                problems.append(
                    f"bundle {cfg.bundle!r} boundary value {edge:.2e} on axis "
                    f"{axis!r} exceeds decay threshold {spectra.DECAY_TOL:.0e}")
    return problems


def _guard_budget(rep: IdentityReport, cfg: RunConfig) -> IdentityReport:
    if rep.seconds > cfg.budget_seconds:
        raise BudgetExceededError(
            f"report {rep.identity} took {rep.seconds:.1f} s "
            f"(budget {cfg.budget_seconds:.0f} s)")
    return rep


def _separable_function(cfg: RunConfig) -> SeparableFunction:
    grid = np.linspace(*cfg.span, cfg.grid_size)
    rule = quadrature.build_rule("K_SO2", count=cfg.compact_count) \
        if "k" in cfg.axes() and cfg.n == 2 else None
    fac = []
    for axis in cfg.axes():
        if cfg.bundle == "zero":
            if axis == "k":
                fac.append(FactorSample("compact", "k",
                                        np.zeros(cfg.compact_count, complex),
                                        rule=rule, band_limit=cfg.band_limit))
            else:
                fac.append(FactorSample("euclid", axis,
                                        np.zeros(cfg.grid_size, complex), grid=grid))
            continue
        b = bundles.make_bundle(cfg.bundle, cfg.seed)
        if axis == "k":
            fac.append(FactorSample("compact", "k", b.sample("k", rule.nodes),
                                    rule=rule, band_limit=cfg.band_limit))
        else:
            fac.append(FactorSample("euclid", axis, b.sample(axis, grid), grid=grid))
    return SeparableFunction(tuple(fac))


def plancherel_suite(cfg: RunConfig) -> list[IdentityReport]:
    if cfg.level == "SL" and cfg.n == 3:
        return [_guard_budget(_so3_plancherel(cfg), cfg)]
    f = _separable_function(cfg)
    rep = composite.separable_plancherel_residual(cfg.level, f, n=cfg.n,
                                                  seed=cfg.seed)
    reps = [_guard_budget(rep, cfg)]
    if cfg.level in ("GL", "GA"):
        reps.append(_guard_budget(_doubling_report(cfg), cfg))
    return reps


def _so3_plancherel(cfg: RunConfig) -> IdentityReport:
    t0 = time.perf_counter()
    rule = quadrature.build_rule("K_SO3", band_limit=cfg.band_limit)
    rng = np.random.default_rng(cfg.seed)
    vals = np.zeros(len(rule.nodes), dtype=complex)
    for ell in range(cfg.band_limit + 1):
        dim = 2 * ell + 1
        c = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        vals += np.einsum("ij,sji->s", c, spectra.so3_irrep_stack(rule.nodes, ell))
    left = float(np.sum(np.abs(vals) ** 2 * rule.weights))
    right = spectra.hs_norm_sq(spectra.peter_weyl(vals, rule, cfg.band_limit))
    return make_report("plancherel[SO3]", left, right,
                       f"band{cfg.band_limit}", time.perf_counter() - t0,
                       cfg.level, cfg.n, cfg.seed)


def _doubling_report(cfg: RunConfig) -> IdentityReport:
    grid = np.linspace(*cfg.span, cfg.grid_size)
    b = bundles.make_bundle(cfg.bundle if cfg.bundle != "zero" else "gaussian",
                            cfg.seed)
    vals = np.multiply.outer(b.sample("n0", grid), b.sample("a0", grid))
    f_plus = spectra.SampledFunction((grid, grid), vals, ("n0", "a0"))
    f_minus = spectra.SampledFunction((grid, grid), vals.copy(), ("n0", "a0"))
    return composite.gl_full_integrals(f_plus, f_minus, level=cfg.level,
                                       n=cfg.n, seed=cfg.seed)


def convolution_suite(cfg: RunConfig, coarse: int = 24,
                      affine_sizes=(9, 13, 12)) -> list[IdentityReport]:
    """Convolution-identity reports at coarse grids sized for the budget."""
    if cfg.bundle == "zero":
        z2 = lambda x, u: np.zeros(np.broadcast(np.asarray(x), np.asarray(u)).shape)
        rep = composite.solvable_pointwise_identity(
            z2, z2, np.linspace(-10, 10, 16), np.linspace(-4, 4, 12),
            [(0.0, 0.0, 0.0)], seed=cfg.seed)
        return [rep]
    f2 = lambda x, u: np.exp(-np.asarray(x) ** 2 / 2 - np.asarray(u) ** 2 / 2)
    g2 = lambda x, u: np.exp(-np.asarray(x) ** 2 / 1.5 - np.asarray(u) ** 2 / 1.7)
    rng = np.random.default_rng(cfg.seed)
    pts = [tuple(rng.normal(scale=0.6, size=3)) for _ in range(6)]
    reps = [composite.solvable_pointwise_identity(
        f2, g2, np.linspace(-12, 12, 2 * coarse), np.linspace(-4, 4, coarse),
        pts, seed=cfg.seed)]
    reps.append(composite.solvable_spectral_identity(
        f2, g2, np.linspace(-12, 12, coarse), np.linspace(-6, 6, coarse),
        np.linspace(-6, 6, coarse), seed=cfg.seed))
    if cfg.level in ("GA+", "GA"):
        fa = lambda v: np.exp(-np.sum(np.asarray(v) ** 2, axis=-1) / 2)
        ga = lambda v: np.exp(-np.sum(np.asarray(v) ** 2, axis=-1) / 1.6)
        # matrix factors must decay in chart coordinates: entrywise Gaussians
        # stay bounded along contracting rays where 1/|det| blows up
        fg = composite.chart_gaussian(0.7, 0.14, 0.35, 0.14)
        gg = composite.chart_gaussian(0.55, 0.12, 0.28, 0.12)
        na, m, mt = affine_sizes
        a_grid = np.linspace(-6, 6, na)
        gl_grids = (np.linspace(-3.8, 3.8, m), np.linspace(-2.0, 2.0, m),
                    2 * np.pi * np.arange(mt) / mt, np.linspace(-2.0, 2.0, m))
        from . import groups
        samples = []
        for _ in range(4):
            samples.append((rng.normal(size=2),
                            groups.gl2_ank_matrix(*rng.normal(scale=0.5, size=4)),
                            groups.gl2_ank_matrix(*rng.normal(scale=0.5, size=4))))
        reps.append(composite.affine_pointwise_identity(
            lambda v, mm: fa(v) * fg(mm), lambda v, mm: ga(v) * gg(mm),
            a_grid, gl_grids, samples, seed=cfg.seed))
        # scalar chained kernels multiply over the matrix group exactly when
        # only the determinant frequency is active; evaluate there
        spec_pts = [(np.array([0.5, -0.3]), 0, 0.0, 0.0, 1.0),
                    (np.array([0.2, 0.4]), 0, 0.0, 0.0, -0.7)]
        reps.append(composite.affine_spectral_identity(
            fg, gg, gl_grids, spec_pts, fa_width=0.8, ga_width=0.7,
            seed=cfg.seed))
    return [_guard_budget(r, cfg) for r in reps]


def invariance_suite(cfg: RunConfig) -> list[IdentityReport]:
    reps = []
    t0 = time.perf_counter()
    rule = quadrature.build_rule("K_SO2", count=max(cfg.compact_count, 8))
    res = quadrature.invariance_residual(
        rule, lambda th: 1.0 + np.cos(3 * th), shifts=[0.3, 1.1, 4.0])
    reps.append(IdentityReport("invariance[K]", 1.0, 1.0 - res, res,
                               str(len(rule.nodes)), time.perf_counter() - t0,
                               cfg.level, cfg.n, cfg.seed))
    t0 = time.perf_counter()
    line = quadrature.build_rule("A_diag", count=cfg.grid_size, span=cfg.span)
    res = quadrature.invariance_residual(
        line, lambda u: np.exp(-u ** 2 / 2.0), shifts=[-0.5, 0.25, 1.0])
    reps.append(IdentityReport("invariance[A]", 1.0, 1.0 - res, res,
                               str(cfg.grid_size), time.perf_counter() - t0,
                               cfg.level, cfg.n, cfg.seed))
    t0 = time.perf_counter()
    res = order_swap_residual(cfg)
    reps.append(IdentityReport("order-swap[SL]", 1.0, 1.0 - res, res,
                               str(cfg.grid_size), time.perf_counter() - t0,
                               cfg.level, cfg.n, cfg.seed))
    return [_guard_budget(r, cfg) for r in reps]


def order_swap_residual(cfg: RunConfig) -> float:
    """Haar factorization order swap on SL(2).

    integral f(n a k) delta(a)^-1 dn da dk = integral f(k a n) delta(a) dn da dk
    with delta(a) the conjugation Jacobian; both sides are plain quadratures
    of the same bi-invariant integral in different chart orders.
    """
    from . import groups
    # the swapped-order chart coordinate rescales x by exp(-2u), so keep the
    # diagonal factor narrow and oversample x to resolve both orders at once
    x = np.linspace(-8.0, 8.0, 4 * cfg.grid_size + 1)
    u = np.linspace(-1.5, 1.5, cfg.grid_size + 1)
    count = max(2 * cfg.compact_count, 64)
    th = 2.0 * np.pi * np.arange(count) / count
    wx = spectra.trapezoid_weights(x)
    wu = spectra.trapezoid_weights(u)
    wt = np.full(count, 1.0 / count)
    X, U, T = np.meshgrid(x, u, th, indexing="ij")
    W = wx[:, None, None] * wu[None, :, None] * wt[None, None, :]

    def f(mats):
        # separable in the NAK chart of the argument
        cx, cu, ct, _ = groups.gl2_ank_coords(mats)
        return (np.exp(-cx ** 2 / 0.5) * np.exp(-cu ** 2 / 0.045)
                * (1.0 + 0.5 * np.cos(2.0 * ct)))

    n_mat = np.zeros(X.shape + (2, 2))
    n_mat[..., 0, 0] = 1.0
    n_mat[..., 1, 1] = 1.0
    n_mat[..., 0, 1] = X
    a_mat = np.zeros(X.shape + (2, 2))
    a_mat[..., 0, 0] = np.exp(U)
    a_mat[..., 1, 1] = np.exp(-U)
    k_mat = np.zeros(X.shape + (2, 2))
    k_mat[..., 0, 0] = np.cos(T)
    k_mat[..., 0, 1] = -np.sin(T)
    k_mat[..., 1, 0] = np.sin(T)
    k_mat[..., 1, 1] = np.cos(T)
    delta = np.exp(2.0 * U)
    left = np.sum(f(n_mat @ a_mat @ k_mat) / delta * W)
    right = np.sum(f(k_mat @ a_mat @ n_mat) * delta * W)
    return abs(left - right) / max(abs(left), 1e-300)


def shift_equivariance_residual(cfg: RunConfig, c=(0.5, -0.25)) -> IdentityReport:
    """Translating the input on the A0/A1 axes must phase-twist the spectrum."""
    t0 = time.perf_counter()
    b = bundles.make_bundle(cfg.bundle if cfg.bundle != "zero" else "gaussian",
                            cfg.seed)
    grid = np.linspace(*cfg.span, cfg.grid_size)
    worst = 0.0
    for axis, ci in zip(("A0", "A1"), c):
        base = spectra.euclid_ft(spectra.SampledFunction(
            (grid,), b.sample(axis, grid), (axis,)), check_decay=False)
        fs = b.factor(axis)
        shifted_vals = bundles.FactorSpec(fs.kind, fs.center + ci, fs.width,
                                          fs.harmonics)(grid)
        shifted = spectra.euclid_ft(spectra.SampledFunction(
            (grid,), shifted_vals, (axis,)), check_decay=False)
        lam = base.grids[0]
        dev = np.max(np.abs(shifted.values - np.exp(-1j * lam * ci) * base.values))
        worst = max(worst, float(dev / max(np.max(np.abs(base.values)), 1e-300)))
    return IdentityReport("shift-equivariance[GA+]", 1.0, 1.0 - worst, worst,
                          str(cfg.grid_size), time.perf_counter() - t0,
                          cfg.level, cfg.n, cfg.seed)


def run_suite(cfg: RunConfig, which: str = "all") -> list[IdentityReport]:
    """Run the selected identity suites in declaration order."""
    reps: list[IdentityReport] = []
    if which in ("plancherel", "all"):
        reps += plancherel_suite(cfg)
    if which in ("convolution", "all") and not (cfg.level == "SL" and cfg.n == 3):
        reps += convolution_suite(cfg)
    if which in ("invariance", "all") and cfg.n == 2:
        reps += invariance_suite(cfg)
        if cfg.level in ("GA+", "GA"):
            reps.append(_guard_budget(shift_equivariance_residual(cfg), cfg))
    return reps


def sweep_convergence(cfg: RunConfig, steps: int = 3, factor: int = 2):
    """Refine the non-compact grids and tabulate the Plancherel residual.

    Returns a list of (grid descriptor, residual, flagged) rows; a row is
    flagged when its residual fails to decrease below its predecessor's
    (beyond the 1e-12 quadrature floor).
    """
    if steps < 1:
        raise ConfigurationError("sweep needs at least one step")
    rows = []
    prev = None
    for i in range(steps):
        size = cfg.grid_size * factor ** i
        compact = cfg.compact_count * factor ** i if cfg.compact_count else 0
        step_cfg = RunConfig(cfg.level, cfg.n, size, cfg.span, compact,
                             cfg.band_limit, cfg.bundle, cfg.seed, cfg.out_dir,
                             cfg.budget_seconds)
        rep = plancherel_suite(step_cfg)[0]
        flagged = prev is not None and rep.residual > max(prev, 1e-12)
        rows.append((rep.grid, rep.residual, flagged))
        prev = rep.residual
    return rows


REPORT_FIELDS = ("identity", "level", "n", "left", "right", "residual",
                 "grid", "seconds", "seed")


def emit_report(reports, fmt: str = "line-json", path=None) -> str:
    """Serialize reports; returns the text and optionally writes it.

    The ``seconds`` field is wall-clock and is zeroed in the serialized form
    so that identical (config, seed) runs are byte-identical.
    """
    if fmt not in ("line-json", "csv"):
        raise ConfigurationError(f"unknown report format {fmt!r}")
    rows = []
    for rep in reports:
        d = rep.as_dict()
        d["seconds"] = 0.0
        rows.append({k: d[k] for k in REPORT_FIELDS})
    if fmt == "line-json":
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
