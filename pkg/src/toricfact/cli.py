"""Command-line front end: run verification suites, spectra and figure data.

Exit codes: 0 all checks pass, 1 some check failed, 2 invalid arguments,
3 output could not be written.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ToricFactError
from .geometry import exact_fibration, sphere_fibration, twisted_fibration
from .kk_verify import (
    LocalizingElement, verify_anticommutator, verify_commutator, verify_connection_condition,
    verify_curvature_obstruction, verify_eigenfamily, verify_factorization, verify_garding,
    verify_local_positivity, verify_sphere_relations, verify_spectrum, verify_torus,
)
from .kk_verify.localization import DEFAULT_SUPPORT
from .operators.eigen import eigen_family
from .operators.numeric import GridSpec
from .report import VerificationReport, merge

SUITES = ("factorization", "connection", "anticommutator", "positivity", "garding", "curvature",
          "torus", "sphere-relations", "eigenfamily", "commutator")
FIBRATIONS = {"sphere": sphere_fibration, "twisted": twisted_fibration, "exact": exact_fibration}

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    suite: str | None = None
    theta: float | None = None
    grid: int | None = None
    modes: int | None = None
    support: tuple = DEFAULT_SUPPORT
    seed: int = 0
    out: str | None = None
    backend: str = "symbolic"
    mutation: str | None = None
    spec: str = "all"
    lowest: int = 8
    trials: int | None = None
    timestamp: bool = True
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.grid is not None and self.grid < 4:
            raise ValueError("--grid must be at least 4")
        if self.modes is not None and self.modes < 0:
            raise ValueError("--modes must be nonnegative")
        if self.theta is not None and not math.isfinite(self.theta):
            raise ValueError("--theta must be finite")
        if self.lowest < 1:
            raise ValueError("--lowest must be positive")
        if self.trials is not None and self.trials < 0:
            raise ValueError("--trials must be nonnegative")


def _support(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("support needs four comma-separated numbers phi0,phi1,psi0,psi1")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", type=float, default=None, help="deformation parameter theta_12")
    common.add_argument("--grid", type=int, default=None, help="interior nodes per axis (>= 4)")
    common.add_argument("--modes", type=int, default=None, help="Fourier mode radius")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output path (stdout if omitted)")
    common.add_argument("--no-timestamp", dest="timestamp", action="store_false",
                        help="omit timing so identical runs give identical output")

    parser = argparse.ArgumentParser(prog="toricfact", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--backend", choices=("symbolic", "numeric", "both"), default="symbolic")
    v.add_argument("--support", type=_support, default=DEFAULT_SUPPORT, metavar="a,b,c,d")
    v.add_argument("--mutation", default=None, help="documented coefficient mutation (control run)")
    v.add_argument("--spec", choices=("all",) + tuple(FIBRATIONS), default="all",
                   help="fibration for the curvature suite")
    v.add_argument("--trials", type=int, default=None)

    s = sub.add_parser("spectrum", parents=[common], help="lowest |eigenvalues| over mode sectors")
    s.add_argument("--lowest", type=int, default=8)

    e = sub.add_parser("emit", parents=[common], help="emit figure data")
    e.add_argument("what", choices=("eigen-surfaces",))
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        suite=getattr(args, "suite", None) or getattr(args, "what", None),
        theta=args.theta, grid=args.grid, modes=args.modes, seed=args.seed, out=args.out,
        support=getattr(args, "support", DEFAULT_SUPPORT), backend=getattr(args, "backend", "symbolic"),
        mutation=getattr(args, "mutation", None), spec=getattr(args, "spec", "all"),
        lowest=getattr(args, "lowest", 8), trials=getattr(args, "trials", None), timestamp=args.timestamp,
    )


def _kw(**kwargs) -> dict:
    return {k: v for k, v in kwargs.items() if v is not None}


def run_suite(cfg: RunConfig) -> VerificationReport:
    s = cfg.suite
    if s == "factorization":
        kw = _kw(grids=(cfg.grid,) if cfg.grid else None, radii=(cfg.modes,) if cfg.modes is not None else None)
        return verify_factorization(cfg.backend, mutation=cfg.mutation, **kw)
    if s == "connection":
        return verify_connection_condition(seed=cfg.seed, mutation=cfg.mutation, **_kw(trials=cfg.trials))
    if s == "anticommutator":
        return verify_anticommutator(cfg.mutation)
    if s == "positivity":
        return verify_local_positivity(LocalizingElement(cfg.support), seed=cfg.seed,
                                       **_kw(grid=cfg.grid, modes=cfg.modes, trials=cfg.trials))
    if s == "garding":
        kw = _kw(modes=cfg.modes, trials=cfg.trials)
        if cfg.grid:
            kw["grids"] = (cfg.grid, 2 * cfg.grid, 4 * cfg.grid)
        return verify_garding(LocalizingElement(cfg.support), seed=cfg.seed, **kw)
    if s == "curvature":
        names = tuple(FIBRATIONS) if cfg.spec == "all" else (cfg.spec,)
        reports = [verify_curvature_obstruction(FIBRATIONS[n](), cfg.mutation) for n in names]
        if len(reports) == 1:
            return reports[0]
        for name, r in zip(names, reports):
            r.suite = name      # merged check names read spec.check
        return merge("curvature", reports, {"mutation": cfg.mutation})
    if s == "torus":
        return verify_torus(seed=cfg.seed, **_kw(cases=cfg.trials))
    if s == "sphere-relations":
        thetas = None if cfg.theta is None else (cfg.theta,)
        return verify_sphere_relations(**_kw(thetas=thetas, modes=cfg.modes, grid=cfg.grid))
    if s == "eigenfamily":
        return verify_eigenfamily(**_kw(radius=cfg.modes, grid=cfg.grid))
    if s == "commutator":
        return verify_commutator(**_kw(theta12=cfg.theta, grid=cfg.grid))
    raise ValueError(f"unknown suite {s!r}")


def eigen_surfaces(modes: int, grid: int) -> np.ndarray:
    """Rows (n1, n2, phi, psi, lambda) for every mode |n|_inf <= modes and grid node."""
    g = GridSpec(grid, grid)
    P, S = g.mesh()
    rows = []
    r = range(-modes, modes + 1)
    for n1 in r:
        for n2 in r:
            lam = eigen_family(n1, n2).lam(P, S)
            rows.append(np.column_stack([np.full_like(P, n1), np.full_like(P, n2), P, S, lam]))
    return np.vstack(rows)


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)


def run(cfg: RunConfig) -> int:
    if cfg.command == "emit":
        data = eigen_surfaces(3 if cfg.modes is None else cfg.modes, 64 if cfg.grid is None else cfg.grid)
        lines = ["n1,n2,phi,psi,lambda"] + [",".join(f"{v:.12e}" for v in row) for row in data]
        _write("\n".join(lines) + "\n", cfg.out)
        return EXIT_OK
    if cfg.command == "spectrum":
        if cfg.grid is None:
            grids = (64, 128)
        else:
            grids = (cfg.grid // 2, cfg.grid) if cfg.grid >= 8 else (cfg.grid,)
        report = verify_spectrum(radius=2 if cfg.modes is None else cfg.modes, grids=grids, lowest=cfg.lowest)
    else:
        report = run_suite(cfg)
    if not report.checks:
        raise ValueError("suite produced no checks")
    _write(report.to_json(timestamp=cfg.timestamp) + "\n", cfg.out)
    for line in report.lines():
        print(line, file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _config(args)
    try:
        cfg.validate()
    except ValueError as exc:
        parser.error(str(exc))
    try:
        return run(cfg)
    except OSError as exc:
        print(f"toricfact: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ToricFactError) as exc:
        print(f"toricfact: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
