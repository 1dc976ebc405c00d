"""Chained transforms on the solvable, linear and affine groups.

Functions on a group are sampled in chart coordinates:

* solvable level (n = 2): axes ("n0", "a0") with a = diag(e^u, e^-u);
* special linear: adds the compact axis "k";
* GL+ adds the log-scale axis "t"; the affine level adds "A0", ..., "A{n-1}".

Composite transforms are the per-axis factor transforms applied in sequence,
which is exactly how the chained integral kernels factorize.  Residual
evaluators report both sides of each identity and never assert.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import groups, spectra
from .errors import ContractViolation
from .quadrature import QuadratureRule
from .spectra import (CompactSpectrum, SampledFunction, hs_norm_sq,
                      irrep_dimension, nyquist_frequencies, peter_weyl,
                      so3_irrep_stack, trapezoid_weights)

RESIDUAL_FLOOR = 1e-300


@dataclass(frozen=True)
class IdentityReport:
    identity: str
    left: float
    right: float
    residual: float
    grid: str
    seconds: float
    level: str = ""
    n: int = 0
    seed: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def make_report(identity, left, right, grid, seconds, level="", n=0, seed=0):
    left = float(left)
    right = float(right)
    if left == 0.0 and right == 0.0:
        residual = 0.0
    else:
        residual = abs(left - right) / max(abs(left), RESIDUAL_FLOOR)
    return IdentityReport(identity, left, right, residual, grid, float(seconds),
                          level, n, seed)


# ---------------------------------------------------------------------------
# Composite spectra


@dataclass(frozen=True)
class CompositeSpectrum:
    """Transform output: continuous frequency axes plus per-irrep blocks.

    ``blocks`` maps the compact-dual label to an array of shape
    (*continuous frequency shape, d, d); when no compact factor is present
    there is a single block with label None and d = 1.
    """

    axes: tuple[str, ...]
    grids: tuple[np.ndarray, ...]
    blocks: dict
    group: str | None = None
    band_limit: int | None = None

    def spectral_mass(self) -> float:
        """sum_gamma d_gamma integral ||.||_HS^2 with a (2 pi)^-1 per axis."""
        w = np.ones(())
        for g in self.grids:
            w = np.multiply.outer(w, trapezoid_weights(g) / (2.0 * np.pi))
        total = 0.0
        for label, blk in self.blocks.items():
            d = 1 if label is None else irrep_dimension(self.group, label)
            total += d * float(np.sum(w * np.sum(np.abs(blk) ** 2, axis=(-2, -1))))
        return total


def chained_transform(f: SampledFunction, compact_axis: str | None = None,
                      rule: QuadratureRule | None = None,
                      band_limit: int | None = None,
                      freq_grids=None, check_decay: bool = True) -> CompositeSpectrum:
    """Euclidean FT on every continuous axis, Peter-Weyl on the compact one."""
    cont = [a for a in f.axes if a != compact_axis]
    out = spectra.euclid_ft(f, freq_grids=freq_grids, axes=cont,
                            check_decay=check_decay)
    if compact_axis is None:
        return CompositeSpectrum(
            tuple("freq_" + a for a in cont),
            tuple(out.grids[f.axes.index(a)] for a in cont),
            {None: out.values[..., None, None]})
    ki = f.axes.index(compact_axis)
    vals = np.moveaxis(out.values, ki, -1)
    wv = vals * rule.weights
    group = spectra.rule_group(rule)
    blocks = {}
    if group == "SO2":
        theta = rule.nodes
        for m in spectra.irrep_labels(group, band_limit):
            blocks[m] = np.tensordot(wv, np.exp(-1j * m * theta),
                                     axes=([-1], [0]))[..., None, None]
    else:
        for ell in spectra.irrep_labels(group, band_limit):
            stack = so3_irrep_stack(rule.nodes, ell)
            blocks[ell] = np.einsum("...s,sji->...ij", wv, stack.conj())
    cont_grids = tuple(out.grids[f.axes.index(a)] for a in cont)
    return CompositeSpectrum(tuple("freq_" + a for a in cont), cont_grids,
                             blocks, group, band_limit)


def _require_axes(f: SampledFunction, needed: tuple[str, ...]):
    if tuple(f.axes) != needed:
        raise ContractViolation(f"expected axes {needed}, got {tuple(f.axes)}")


def solvable_transform(f: SampledFunction, **kw) -> CompositeSpectrum:
    """Transform on N x| A: Euclidean FT in the n-coordinates and in log a."""
    if not all(a.startswith(("n", "a")) for a in f.axes):
        raise ContractViolation(f"solvable axes must be n*/a*, got {f.axes}")
    return chained_transform(f, **kw)


def sl_transform(f: SampledFunction, rule: QuadratureRule, band_limit: int,
                 **kw) -> CompositeSpectrum:
    """Transform on SL(n, R) in NAK-type coordinates; compact axis is 'k'."""
    if "k" not in f.axes:
        raise ContractViolation("sl_transform needs a 'k' axis")
    return chained_transform(f, compact_axis="k", rule=rule,
                             band_limit=band_limit, **kw)


def glplus_transform(f: SampledFunction, rule: QuadratureRule, band_limit: int,
                     **kw) -> CompositeSpectrum:
    """SL transform chained with the multiplicative transform in log t."""
    if "t" not in f.axes:
        raise ContractViolation("glplus_transform needs a 't' axis")
    return sl_transform(f, rule, band_limit, **kw)


def ga_transform(f: SampledFunction, rule: QuadratureRule, band_limit: int,
                 **kw) -> CompositeSpectrum:
    """GL+ transform chained with the Euclidean FT over the translation part."""
    if not any(a.startswith("A") for a in f.axes):
        raise ContractViolation("ga_transform needs translation axes A*")
    return glplus_transform(f, rule, band_limit, **kw)


def spatial_mass(f: SampledFunction, compact_axis: str | None = None,
                 rule: QuadratureRule | None = None) -> float:
    """L2 mass of f under the product of the per-axis Haar weights."""
    w = np.ones(())
    for label, g in zip(f.axes, f.grids):
        if label == compact_axis:
            w = np.multiply.outer(w, rule.weights)
        else:
            w = np.multiply.outer(w, trapezoid_weights(g))
    return float(np.sum(w * np.abs(f.values) ** 2))


def plancherel_residual(level: str, f: SampledFunction,
                        rule: QuadratureRule | None = None,
                        band_limit: int | None = None,
                        n: int = 2, seed: int = 0,
                        check_decay: bool = True) -> IdentityReport:
    """Spatial L2 mass against the spectral Hilbert-Schmidt mass (dense path)."""
    t0 = time.perf_counter()
    compact_axis = "k" if "k" in f.axes else None
    left = spatial_mass(f, compact_axis, rule)
    spec = chained_transform(f, compact_axis, rule, band_limit,
                             check_decay=check_decay)
    right = spec.spectral_mass()
    grid = "x".join(str(len(g)) for g in f.grids)
    return make_report(f"plancherel[{level}]", left, right, grid,
                       time.perf_counter() - t0, level, n, seed)


# ---------------------------------------------------------------------------
# Separable fast path


@dataclass(frozen=True)
class FactorSample:
    """One separable factor: a 1-D sampled function on a single axis."""

    kind: str                      # "euclid" or "compact"
    label: str
    values: np.ndarray
    grid: np.ndarray | None = None
    rule: QuadratureRule | None = None
    band_limit: int | None = None


@dataclass(frozen=True)
class SeparableFunction:
    factors: tuple[FactorSample, ...]

    def grid_descriptor(self) -> str:
        return "x".join(str(len(fa.values)) for fa in self.factors)


def _factor_mass_pair(fa: FactorSample, check_decay: bool) -> tuple[float, float]:
    if fa.kind == "compact":
        left = float(np.sum(np.abs(fa.values) ** 2 * fa.rule.weights))
        right = hs_norm_sq(peter_weyl(fa.values, fa.rule, fa.band_limit))
        return left, right
    sf = SampledFunction((fa.grid,), np.asarray(fa.values, dtype=complex), (fa.label,))
    left = float(np.sum(np.abs(fa.values) ** 2 * trapezoid_weights(fa.grid)))
    out = spectra.euclid_ft(sf, check_decay=check_decay)
    dlam = out.grids[0][1] - out.grids[0][0]
    right = float(np.sum(np.abs(out.values) ** 2)) * dlam / (2.0 * np.pi)
    return left, right


def separable_plancherel_residual(level: str, f: SeparableFunction,
                                  n: int = 2, seed: int = 0,
                                  check_decay: bool = True) -> IdentityReport:
    """Plancherel residual for a separable bundle, one factor at a time.

    For separable input the composite transform is the outer product of the
    factor transforms, so both masses factorize exactly.
    """
    t0 = time.perf_counter()
    left = 1.0
    right = 1.0
    for fa in f.factors:
        l_i, r_i = _factor_mass_pair(fa, check_decay)
        left *= l_i
        right *= r_i
    return make_report(f"plancherel[{level}]", left, right, f.grid_descriptor(),
                       time.perf_counter() - t0, level, n, seed)


def separable_outer_check(f: SeparableFunction, rule=None, band_limit=None) -> float:
    """Max deviation between the dense composite transform of the assembled
    product function and the outer product of its factor transforms."""
    grids = []
    axes = []
    vals = np.ones((1,) * 0, dtype=complex)
    for fa in f.factors:
        vals = np.multiply.outer(vals, np.asarray(fa.values, dtype=complex))
        grids.append(fa.grid if fa.kind == "euclid" else fa.rule.nodes)
        axes.append(fa.label)
    dense = SampledFunction(tuple(grids), vals, tuple(axes))
    compact_axis = next((fa.label for fa in f.factors if fa.kind == "compact"), None)
    spec = chained_transform(dense, compact_axis, rule, band_limit,
                             check_decay=False)
    # outer product of factor spectra
    parts = []
    compact_blocks = None
    for fa in f.factors:
        if fa.kind == "compact":
            compact_blocks = peter_weyl(fa.values, fa.rule, fa.band_limit).blocks
        else:
            sf = SampledFunction((fa.grid,), np.asarray(fa.values, dtype=complex),
                                 (fa.label,))
            parts.append(spectra.euclid_ft(sf, check_decay=False).values)
    cont = np.ones((), dtype=complex)
    for p in parts:
        cont = np.multiply.outer(cont, p)
    worst = 0.0
    scale = max(max(np.max(np.abs(b)) for b in spec.blocks.values()), 1e-300)
    for label, blk in spec.blocks.items():
        expected = np.multiply.outer(
            cont, compact_blocks[label] if compact_blocks else np.ones((1, 1)))
        worst = max(worst, float(np.max(np.abs(blk - expected))) / scale)
    return worst


# ---------------------------------------------------------------------------
# Group convolution by quadrature


def _axis_weights(f: SampledFunction) -> list[np.ndarray]:
    out = []
    for label, g in zip(f.axes, f.grids):
        if label == "k":
            out.append(np.full(len(g), 1.0 / len(g)))   # uniform circle rule
        else:
            out.append(trapezoid_weights(g))
    return out


def _interpolator(f: SampledFunction):
    grids = list(f.grids)
    vals = np.asarray(f.values, dtype=complex)
    if "k" in f.axes:
        ki = f.axes.index("k")
        theta = grids[ki]
        grids[ki] = np.concatenate([theta, [theta[0] + 2.0 * np.pi]])
        vals = np.concatenate([vals, np.take(vals, [0], axis=ki)], axis=ki)
    interp = RegularGridInterpolator(tuple(grids), vals, bounds_error=False,
                                     fill_value=0.0)
    ki = f.axes.index("k") if "k" in f.axes else None

    def ev(pts):
        pts = np.array(pts, dtype=float, copy=True)
        if ki is not None:
            pts[:, ki] = np.mod(pts[:, ki], 2.0 * np.pi)
        return interp(pts)
    return ev


def _inv_compose_coords(level: str, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Chart coordinates of y^-1 x for batched coordinate tuples."""
    if level == "Rn":
        return x - y
    if level == "S":
        xn, xu = x[..., 0], x[..., 1]
        yn, yu = y[..., 0], y[..., 1]
        return np.stack([np.exp(-2.0 * yu) * (xn - yn), xu - yu], axis=-1)
    if level == "GA+":
        a_x, m_x = x[..., :2], groups.gl2_ank_matrix(*(x[..., i] for i in range(2, 6)))
        a_y, m_y = y[..., :2], groups.gl2_ank_matrix(*(y[..., i] for i in range(2, 6)))
        m_inv = np.linalg.inv(m_y)
        vec = np.einsum("...ij,...j->...i", m_inv, a_x - a_y)
        mat = m_inv @ m_x
        cx, cu, ct, cs = groups.gl2_ank_coords(mat)
        return np.concatenate([vec, np.stack([cx, cu, np.mod(ct, 2 * np.pi), cs],
                                             axis=-1)], axis=-1)
    raise ContractViolation(f"unknown convolution level {level!r}")


def convolve(f: SampledFunction, g: SampledFunction, level: str,
             points: np.ndarray | None = None):
    """Group convolution (g * f)(x) = integral f(y^-1 x) g(y) dy by quadrature.

    Off-grid arguments of f are evaluated by multilinear interpolation in
    chart coordinates (periodic on the compact axis, zero outside the grid).
    Returns node values at ``points``, or a SampledFunction on g's grid when
    ``points`` is None.
    """
    if f.axes != g.axes:
        raise ContractViolation("operands must share axis layout")
    w = np.ones(())
    for aw in _axis_weights(g):
        w = np.multiply.outer(w, aw)
    mesh = np.meshgrid(*g.grids, indexing="ij")
    y_flat = np.stack([m.ravel() for m in mesh], axis=-1)
    gw_flat = (np.asarray(g.values) * w).ravel()
    fev = _interpolator(f)
    full_grid = points is None
    if full_grid:
        points = y_flat
    points = np.asarray(points, dtype=float)
    out = np.empty(len(points), dtype=complex)
    for i, x in enumerate(points):
        args = _inv_compose_coords(level, y_flat, np.broadcast_to(x, y_flat.shape))
        out[i] = np.sum(fev(args) * gw_flat)
    if full_grid:
        return SampledFunction(g.grids, out.reshape(g.values.shape), g.axes)
    return out


# ---------------------------------------------------------------------------
# Convolution identities


def solvable_tilde_coords(f):
    """Coordinate form of the solvable extension: ft(x, ua, ub) = f(e^{2 ua} x, ua + ub)."""
    def ft(x, ua, ub):
        return f(np.exp(2.0 * np.asarray(ua)) * np.asarray(x),
                 np.asarray(ua) + np.asarray(ub))
    return ft


def _grid_and_weights(rule_like):
    if isinstance(rule_like, QuadratureRule):
        return rule_like.nodes, rule_like.weights
    g = np.asarray(rule_like, dtype=float)
    return g, trapezoid_weights(g)


def solvable_pointwise_identity(f, g, x_grid, u_grid, sample_points,
                             seed: int = 0) -> IdentityReport:
    """Both sides of the pointwise solvable identity g * ft = g *_c ft.

    ``f`` and ``g`` are callables on solvable coordinates (x, u); the two
    sides are independent quadratures over the (y, v) grid, evaluated at the
    given (x, ua, ub) triples.
    """
    t0 = time.perf_counter()
    ft = solvable_tilde_coords(f)
    y, wy = _grid_and_weights(x_grid)
    v, wv = _grid_and_weights(u_grid)
    yy, vv = np.meshgrid(y, v, indexing="ij")
    ww = np.outer(wy, wv)
    gv = g(yy, vv) * ww
    lefts, rights = [], []
    for (x, ua, ub) in sample_points:
        lefts.append(np.sum(gv * ft(np.exp(-2.0 * vv) * (x - yy), ua, ub - vv)))
        rights.append(np.sum(gv * ft(x - yy, ua - vv, ub)))
    lefts = np.asarray(lefts)
    rights = np.asarray(rights)
    scale = max(np.max(np.abs(lefts)), RESIDUAL_FLOOR)
    resid = float(np.max(np.abs(lefts - rights)) / scale)
    rep = make_report("convolution[solvable-pointwise]", np.max(np.abs(lefts)),
                      np.max(np.abs(rights)),
                      f"{len(y)}x{len(v)}", time.perf_counter() - t0,
                      "S", 2, seed)
    return IdentityReport(rep.identity, rep.left, rep.right, resid, rep.grid,
                          rep.seconds, rep.level, rep.n, rep.seed)


def solvable_spectral_identity(f, g, x_grid, u_grid, b_grid,
                            seed: int = 0) -> IdentityReport:
    """Spectral solvable identity: the frequency-integrated transform of the
    convolution against the product of the factor transforms.

    Left: (g * ft) on the (x, ua, ub) grid, 3-axis FT, then (1/2pi) integral
    over the ub-frequency axis.  Right: FT of ft(., ., identity) times the FT
    of g.  The two sides are fully independent quadrature pipelines.
    """
    t0 = time.perf_counter()
    ft = solvable_tilde_coords(f)
    x, wx = _grid_and_weights(x_grid)
    u, wu = _grid_and_weights(u_grid)
    b, wb = _grid_and_weights(b_grid)

    # pipeline 1: convolution on the triple grid, via the group-side formula
    yy, vv = np.meshgrid(x, u, indexing="ij")
    gv = (g(yy, vv) * np.outer(wx, wu)).ravel()
    yf, vf = yy.ravel(), vv.ravel()
    h = np.empty((len(x), len(u), len(b)), dtype=complex)
    for i, xi in enumerate(x):
        arg_x = np.exp(-2.0 * vf) * (xi - yf)
        for j, ua in enumerate(u):
            # ft(e^{-2v}(x-y), ua, ub - v) summed against g(y, v)
            vals = ft(arg_x[None, :], ua, b[:, None] - vf[None, :])
            h[i, j, :] = vals @ gv
    hf = SampledFunction((x, u, b), h, ("n0", "a0", "b0"))
    hspec = spectra.euclid_ft(hf, check_decay=False)
    nu = hspec.grids[2]
    left = np.tensordot(hspec.values, trapezoid_weights(nu), axes=([2], [0])) \
        / (2.0 * np.pi)

    # pipeline 2: product of spectra
    lam = nyquist_frequencies(x)
    mu = nyquist_frequencies(u)
    xx, uu = np.meshgrid(x, u, indexing="ij")
    h0 = ft(xx, uu, 0.0)
    h0spec = spectra.euclid_ft(SampledFunction((x, u), h0.astype(complex),
                                               ("n0", "a0")), check_decay=False)
    gspec = spectra.euclid_ft(SampledFunction((x, u), g(xx, uu).astype(complex),
                                              ("n0", "a0")), check_decay=False)
    right = h0spec.values * gspec.values

    scale = max(np.max(np.abs(left)), RESIDUAL_FLOOR)
    resid = float(np.max(np.abs(left - right)) / scale)
    rep = make_report("convolution[solvable-spectral]", np.max(np.abs(left)),
                      np.max(np.abs(right)),
                      f"{len(x)}x{len(u)}x{len(b)}", time.perf_counter() - t0,
                      "S", 2, seed)
    return IdentityReport(rep.identity, rep.left, rep.right, resid, rep.grid,
                          rep.seconds, rep.level, rep.n, rep.seed)


def chart_gaussian(wx: float, wu: float, wt: float, ws: float):
    """Gaussian in ANK chart coordinates (x, u, theta, s) of a 2x2 matrix.

    Decays along every chart ray, unlike an entrywise Gaussian, which stays
    bounded on rays where one singular value is pinned near 1 while the
    determinant contracts; that makes spectral-side integrands with a
    1/|det| factor absolutely convergent.  The angle enters through the
    chord 2 sin(theta/2), so the factor is smooth and periodic.
    """
    def f(m):
        cx, cu, ct, cs = groups.gl2_ank_coords(np.asarray(m))
        ang = 2.0 * np.sin(ct / 2.0)
        return np.exp(-(cx ** 2 / wx + cu ** 2 / wu
                        + ang ** 2 / wt + cs ** 2 / ws))

    def unimodular_part(m):
        cx, cu, ct, _ = groups.gl2_ank_coords(np.asarray(m))
        ang = 2.0 * np.sin(ct / 2.0)
        return np.exp(-(cx ** 2 / wx + cu ** 2 / wu + ang ** 2 / wt))

    def scale_part(s):
        return np.exp(-np.asarray(s) ** 2 / ws)

    # the factorization f(e^s M1) = unimodular_part(M1) * scale_part(s) lets
    # pairwise spectral sums collapse the scale axis to difference values
    f.unimodular_part = unimodular_part
    f.scale_part = scale_part
    return f


def affine_pointwise_identity(f, g, a_grid, gl_coord_grids, sample_points,
                           seed: int = 0) -> IdentityReport:
    """Both sides of g * ft = ft *_c g on the affine auxiliary group, n = 2.

    ``f`` and ``g`` are callables (vector, matrix) -> complex; integration is
    over the (B, Q) grid with B on a_grid^2 and Q in ANK chart coordinates
    (x, u, theta, s) on ``gl_coord_grids``.
    """
    t0 = time.perf_counter()
    ft = groups.tilde_extend(f)
    a, wa = _grid_and_weights(a_grid)
    coords = []
    wq = np.ones(())
    for lbl, grd in zip(("x", "u", "theta", "s"), gl_coord_grids):
        gg, ww = _grid_and_weights(grd)
        coords.append(gg)
        if lbl == "theta":
            # periodic axis: uniform weights, no endpoint halving
            ww = np.full(len(gg), 2.0 * np.pi / len(gg))
        wq = np.multiply.outer(wq, ww)
    b1, b2 = np.meshgrid(a, a, indexing="ij")
    bvec = np.stack([b1.ravel(), b2.ravel()], axis=-1)
    bw = np.outer(wa, wa).ravel()
    xm, um, tm, sm = np.meshgrid(*coords, indexing="ij")
    q = groups.gl2_ank_matrix(xm.ravel(), um.ravel(), tm.ravel(), sm.ravel())
    qw = wq.ravel()
    q_inv = np.linalg.inv(q)
    gvals = (g(bvec[:, None, :] * np.ones((1, len(q), 1)),
               np.broadcast_to(q, (len(bvec),) + q.shape))
             * bw[:, None] * qw[None, :])
    lefts, rights = [], []
    for (avec, x_mat, y_mat) in sample_points:
        diff = avec[None, :] - bvec                      # (B, 2)
        rot = np.einsum("qij,bj->bqi", q_inv, diff)      # rho(Q^-1)(A - B)
        ymat = np.einsum("qij,jk->qik", q_inv, y_mat)    # Q^-1 Y
        lefts.append(np.sum(gvals * ft(rot, x_mat, ymat[None, :, :, :])))
        xq = np.einsum("ij,qjk->qik", x_mat, q_inv)      # X Q^-1
        rights.append(np.sum(gvals * ft(diff[:, None, :], xq[None, :, :, :], y_mat)))
    lefts = np.asarray(lefts)
    rights = np.asarray(rights)
    scale = max(np.max(np.abs(lefts)), RESIDUAL_FLOOR)
    resid = float(np.max(np.abs(lefts - rights)) / scale)
    grid = f"{len(a)}^2x" + "x".join(str(len(c)) for c in coords)
    rep = make_report("convolution[affine-pointwise]", np.max(np.abs(lefts)),
                      np.max(np.abs(rights)), grid, time.perf_counter() - t0,
                      "GA+", 2, seed)
    return IdentityReport(rep.identity, rep.left, rep.right, resid, rep.grid,
                          rep.seconds, rep.level, rep.n, rep.seed)


def _gram2(r):
    """Entries of R^T R and det R for a batch of 2x2 matrices."""
    rtr00 = r[..., 0, 0] ** 2 + r[..., 1, 0] ** 2
    rtr01 = r[..., 0, 0] * r[..., 0, 1] + r[..., 1, 0] * r[..., 1, 1]
    rtr11 = r[..., 0, 1] ** 2 + r[..., 1, 1] ** 2
    det = r[..., 0, 0] * r[..., 1, 1] - r[..., 0, 1] * r[..., 1, 0]
    return rtr00, rtr01, rtr11, det


def _fa_hat_gram(gr, mu, wf2):
    """Closed-form slot transform of A -> exp(-|R A|^2 / (2 wf2)) at mu."""
    rtr00, rtr01, rtr11, det = gr
    quad = (rtr11 * mu[0] ** 2 - 2.0 * rtr01 * mu[0] * mu[1]
            + rtr00 * mu[1] ** 2) / det ** 2
    return 2.0 * np.pi * wf2 / np.abs(det) * np.exp(-wf2 * quad / 2.0)


def _scale_split_inner(fg, gg, coords, axis_w, mus, fa_width, chunk):
    """Pairwise spectral sums with the scale axis collapsed to differences.

    For R = X Q^-1 the scale coordinate subtracts exactly, and a factorized
    test function f(e^s M1) = f1(M1) fs(s) makes every pair term depend on
    the scale pair only through s_X - s_Q.  The O(m^2) scale pairs then
    collapse to 2m - 1 difference values, which turns the full pair sum from
    quartic-grid x quartic-grid into cubic-grid x cubic-grid work.  Exact
    (same sums reassociated); the generic path is the oracle for it.
    """
    wf2 = fa_width ** 2
    x3, u3, t3 = (c.ravel() for c in np.meshgrid(*coords[:3], indexing="ij"))
    mats3 = groups.gl2_ank_matrix(x3, u3, t3, np.zeros_like(x3))
    mats3_inv = np.linalg.inv(mats3)
    w3 = np.multiply.outer(np.multiply.outer(axis_w[0], axis_w[1]),
                           axis_w[2]).ravel()
    n3 = len(mats3)
    s_nodes, sw = coords[3], axis_w[3]
    ns = len(s_nodes)
    g3w = w3 * gg.unimodular_part(mats3)
    gsw = sw * gg.scale_part(s_nodes)
    deltas = (s_nodes[1] - s_nodes[0]) * np.arange(-(ns - 1), ns)
    c_d = fg.scale_part(deltas) * 2.0 * np.pi * wf2 * np.exp(-2.0 * deltas)
    live = c_d > np.max(c_d) * 1e-16
    n_pts = len(mus)
    bsum = np.zeros((n_pts, n3, 2 * ns - 1))
    rows = max(1, chunk // n3)
    for i0 in range(0, n3, rows):
        i1 = min(i0 + rows, n3)
        r = mats3[i0:i1, None, :, :] @ mats3_inv[None, :, :, :]
        h3 = fg.unimodular_part(r)
        rtr00, rtr01, rtr11, det = _gram2(r)
        pre = h3 / np.abs(det)
        for p, mu in enumerate(mus):
            quad = (rtr11 * mu[0] ** 2 - 2.0 * rtr01 * mu[0] * mu[1]
                    + rtr00 * mu[1] ** 2) / det ** 2
            # contraction scales the slot-transform argument by e^{-2 delta}
            for d in np.nonzero(live)[0]:
                damp = np.exp(-wf2 * quad * np.exp(-2.0 * deltas[d]) / 2.0)
                bsum[p, i0:i1, d] = (pre * damp) @ g3w
    inner = np.zeros((n_pts, n3, ns))
    for p in range(n_pts):
        bc = bsum[p] * c_d
        for i_s in range(ns):
            idx = i_s - np.arange(ns) + ns - 1
            inner[p, :, i_s] = bc[:, idx] @ gsw
    return inner.reshape(n_pts, n3 * ns)


def affine_spectral_identity(fg, gg, gl_coord_grids, spectral_points,
                              fa_width: float = 1.0, ga_width: float = 1.0,
                              seed: int = 0,
                              chunk: int = 2_000_000) -> IdentityReport:
    """Spectral affine identity: transform of the convolution against the
    product of the factor transforms, n = 2.

    The test function is f(A, M) = exp(-|A|^2 / (2 fa_width^2)) fg(M), and
    likewise for g.  The translation-slot Gaussians have closed-form
    Euclidean transforms, which are used on both sides: a quadrature for
    that slot would need an unboundedly wide grid whenever a matrix argument
    is strongly contracting, while the closed form is exact for every matrix.
    The two pipelines therefore differ exactly in the noncommutative part,
    which is the content of the identity.  The second auxiliary copy is
    collapsed at the identity through the inversion theorem (the literal
    frequency-integral collapse is exercised at the solvable level, where it
    is affordable).  Spectral points are tuples (mu[2], m, xi, lam, eta) for
    the translation, compact, unipotent, diagonal and scale frequencies.

    Left:  sum_X w k(X) sum_Q w gg(Q) fg(X Q^-1) ga_hat(mu) fa_hat(X Q^-1; mu)
    Right: [sum_X w fg(X) k(X) fa_hat(X; mu)] * [ga_hat(mu) sum_Q w gg(Q) k(Q)]
    with fa_hat(R; mu) = integral exp(-|R z|^2 / (2 fa_width^2)) e^{-i mu.z} dz.
    """
    t0 = time.perf_counter()
    coords, axis_w = [], []
    wq = np.ones(())
    for lbl, grd in zip(("x", "u", "theta", "s"), gl_coord_grids):
        gg_, ww = _grid_and_weights(grd)
        coords.append(gg_)
        if lbl == "theta":
            # periodic axis: uniform weights, no endpoint halving
            ww = np.full(len(gg_), 2.0 * np.pi / len(gg_))
        axis_w.append(ww)
        wq = np.multiply.outer(wq, ww)
    xm, um, tm, sm = (c.ravel() for c in np.meshgrid(*coords, indexing="ij"))
    mats = groups.gl2_ank_matrix(xm, um, tm, sm)
    w_flat = wq.ravel()
    fg_mats = fg(mats)
    gg_mats = gg(mats)
    n_g = len(mats)
    wf2 = fa_width ** 2
    mus = [np.asarray(p[0], dtype=float) for p in spectral_points]
    n_pts = len(spectral_points)
    gq = w_flat * gg_mats
    s_nodes = coords[3]
    s_steps = np.diff(s_nodes)
    splittable = (all(hasattr(h, "unimodular_part") and hasattr(h, "scale_part")
                      for h in (fg, gg))
                  and len(s_nodes) > 1
                  and np.allclose(s_steps, s_steps[0]))
    if splittable:
        inner = _scale_split_inner(fg, gg, coords, axis_w, mus, fa_width, chunk)
    else:
        # generic path: the pairwise block is the expensive part; build it
        # once per chunk and contract against g for every spectral point
        inner = np.zeros((n_pts, n_g), dtype=float)
        mats_inv = np.linalg.inv(mats)
        rows = max(1, chunk // n_g)
        for i0 in range(0, n_g, rows):
            i1 = min(i0 + rows, n_g)
            r = mats[i0:i1, None, :, :] @ mats_inv[None, :, :, :]
            fg_r = fg(r)
            gr = _gram2(r)
            for p in range(n_pts):
                inner[p, i0:i1] = (fg_r * _fa_hat_gram(gr, mus[p], wf2)) @ gq
    gram_mats = _gram2(mats)
    lefts, rights = [], []
    for p, (mu, m_lab, xi, lam, eta) in enumerate(spectral_points):
        mu = mus[p]
        kern = np.exp(-1j * (xi * xm + lam * um + m_lab * tm + eta * sm))
        ga_hat = (2.0 * np.pi * ga_width ** 2
                  * np.exp(-ga_width ** 2 * float(mu @ mu) / 2.0))
        lefts.append(np.sum(w_flat * kern * inner[p]) * ga_hat)
        rights.append(np.sum(w_flat * fg_mats * kern
                             * _fa_hat_gram(gram_mats, mu, wf2))
                      * ga_hat * np.sum(gq * kern))
    lefts = np.asarray(lefts)
    rights = np.asarray(rights)
    scale = max(np.max(np.abs(lefts)), RESIDUAL_FLOOR)
    resid = float(np.max(np.abs(lefts - rights)) / scale)
    grid = "x".join(str(len(c)) for c in coords)
    rep = make_report("convolution[affine-spectral]", np.max(np.abs(lefts)),
                      np.max(np.abs(rights)), grid, time.perf_counter() - t0,
                      "GA+", 2, seed)
    return IdentityReport(rep.identity, rep.left, rep.right, resid, rep.grid,
                          rep.seconds, rep.level, rep.n, rep.seed)


def convolution_identity_residual(which: str, **kw) -> IdentityReport:
    """Dispatcher over the four convolution identities."""
    table = {
        "solvable-pointwise": solvable_pointwise_identity,
        "solvable-spectral": solvable_spectral_identity,
        "affine-pointwise": affine_pointwise_identity,
        "affine-spectral": affine_spectral_identity,
    }
    if which not in table:
        raise ContractViolation(f"unknown identity {which!r}")
    return table[which](**kw)


# ---------------------------------------------------------------------------
# Component doubling on the full (disconnected) groups


def gl_full_integrals(f_plus: SampledFunction, f_minus: SampledFunction,
                      rule: QuadratureRule | None = None,
                      level: str = "GL", n: int = 2, seed: int = 0) -> IdentityReport:
    """Total integral over both components against the GL+ part.

    ``f_minus`` is the pullback of the negative-component function along the
    reflection transport, sampled on the same chart grid as ``f_plus``.
    The report's left value is the two-component total, the right value the
    doubled positive part; their residual is 0 exactly when the components
    agree through the transport.
    """
    t0 = time.perf_counter()
    compact_axis = "k" if "k" in f_plus.axes else None
    i_plus = _component_integral(f_plus, compact_axis, rule)
    i_minus = _component_integral(f_minus, compact_axis, rule)
    grid = "x".join(str(len(g)) for g in f_plus.grids)
    return make_report(f"component-doubling[{level}]", i_plus + i_minus,
                       2.0 * i_plus, grid, time.perf_counter() - t0, level, n, seed)


def _component_integral(f: SampledFunction, compact_axis, rule) -> float:
    w = np.ones(())
    for label, g in zip(f.axes, f.grids):
        if label == compact_axis:
            w = np.multiply.outer(w, rule.weights)
        else:
            w = np.multiply.outer(w, trapezoid_weights(g))
    return float(np.real(np.sum(w * f.values)))
