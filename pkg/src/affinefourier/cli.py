"""Command-line entry point.

Subcommands run identity suites from a profile or a JSON config file and
write line-JSON or CSV reports.  The process exits 0 exactly when every
asserted tolerance in the selected suite passes.
"""

from __future__ import annotations

import dataclasses
import os
import sys
from pathlib import Path

import click

from . import harness
from .errors import AffineFourierError

# asserted tolerances per identity family at the default desk-scale profile
TOLERANCES = {
    "plancherel": 1e-3,
    "component-doubling": 1e-12,
    "convolution": 5e-2,
    "invariance": 1e-6,
    "order-swap": 1e-6,
    "shift-equivariance": 1e-8,
}


def _tolerance_for(identity: str) -> float:
    family = identity.split("[", 1)[0]
    return TOLERANCES.get(family, 1e-6)


def _resolve_config(config, profile, seed):
    if config is not None:
        cfg = harness.load_config(config)
    else:
        if profile not in harness.PROFILES:
            raise click.UsageError(f"unknown profile {profile!r}; "
                                   f"choose from {sorted(harness.PROFILES)}")
        cfg = harness.PROFILES[profile]
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


def _emit_and_check(reports, cfg, out, fmt, name):
    text = harness.emit_report(reports, fmt=fmt)
    ext = "jsonl" if fmt == "line-json" else "csv"
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / f"{name}.{ext}").write_text(text)
    failed = []
    for rep in reports:
        tol = _tolerance_for(rep.identity)
        status = "ok" if rep.residual < tol else "FAIL"
        click.echo(f"{status:4s} {rep.identity:36s} residual {rep.residual:.3e}"
                   f" (tol {tol:.0e}) grid {rep.grid}")
        if rep.residual >= tol:
            failed.append(rep.identity)
    if failed:
        click.echo(f"{len(failed)} identity check(s) over tolerance: "
                   + ", ".join(failed), err=True)
        sys.exit(1)


common = [
    click.option("--config", type=click.Path(exists=True), default=None,
                 help="JSON config file; overrides --profile."),
    click.option("--profile", default="default", show_default=True,
                 help="named profile: default, deep, so3."),
    click.option("--out", type=click.Path(), default=None,
                 help="directory for report files."),
    click.option("--format", "fmt", type=click.Choice(["line-json", "csv"]),
                 default="line-json", show_default=True),
    click.option("--seed", type=int, default=None),
]


def _with_common(f):
    for opt in reversed(common):
        f = opt(f)
    return f


@click.group()
def main():
    """Identity suites for chained Fourier transforms on affine groups."""
    # results must not depend on the BLAS thread count; pin it if requested
    threads = os.environ.get("AFFINEFOURIER_THREADS")
    if threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = threads


def _run(which, config, profile, out, fmt, seed):
    try:
        cfg = _resolve_config(config, profile, seed)
        reports = harness.run_suite(cfg, which)
    except AffineFourierError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    _emit_and_check(reports, cfg, out, fmt, which)


@main.command()
@_with_common
def plancherel(config, profile, out, fmt, seed):
    """Spatial-vs-spectral mass identities at the configured level."""
    _run("plancherel", config, profile, out, fmt, seed)


@main.command()
@_with_common
def convolution(config, profile, out, fmt, seed):
    """Convolution identities on the solvable and affine auxiliary groups."""
    _run("convolution", config, profile, out, fmt, seed)


@main.command()
@_with_common
def invariance(config, profile, out, fmt, seed):
    """Translation invariance of the factor quadratures and order swaps."""
    _run("invariance", config, profile, out, fmt, seed)


@main.command()
@_with_common
def all(config, profile, out, fmt, seed):
    """Every suite, in declaration order."""
    _run("all", config, profile, out, fmt, seed)


@main.command()
@_with_common
@click.option("--steps", type=int, default=3, show_default=True)
@click.option("--factor", type=int, default=2, show_default=True)
def sweep(config, profile, out, fmt, seed, steps, factor):
    """Grid-refinement sweep of the Plancherel residual."""
    try:
        cfg = _resolve_config(config, profile, seed)
        rows = harness.sweep_convergence(cfg, steps=steps, factor=factor)
    except AffineFourierError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    flagged = False
    for grid, residual, flag in rows:
        mark = " (not decreasing)" if flag else ""
        click.echo(f"grid {grid:20s} residual {residual:.3e}{mark}")
        flagged = flagged or flag
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        lines = "".join(f"{g},{r:.17g},{int(fl)}\n" for g, r, fl in rows)
        (Path(out) / "sweep.csv").write_text("grid,residual,flagged\n" + lines)
    sys.exit(1 if flagged else 0)


if __name__ == "__main__":
    main()
