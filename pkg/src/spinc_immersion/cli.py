"""Command line entry point: ``spinc-immersion run|study CONFIG``.

Exit codes: 0 when every check passes, 1 when some check fails (reports are
still written), 2 on configuration or usage errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, DebugFlags, RunConfig, load_config, parse_resolution
from .expressions import ExpressionError, ScalarField
from .pipeline import CHECKS, RunReport, run_levels
from .report import write_csv, write_json, write_mesh

log = logging.getLogger("spinc_immersion")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2


def run_scenario(cfg: RunConfig) -> tuple[RunReport, int]:
    report = run_levels(cfg)
    return report, EXIT_OK if report.passed else EXIT_CHECK_FAILED


def check_doubling(resolutions) -> None:
    if len(resolutions) < 2:
        raise ConfigError("a convergence study needs at least two resolutions")
    for coarse, fine in zip(resolutions, resolutions[1:]):
        if any(b != 2 * a for a, b in zip(coarse, fine)):
            raise ConfigError(f"resolutions must double at every step, got {list(coarse)} -> {list(fine)}")


def convergence_study(cfg: RunConfig, resolutions=None) -> tuple[RunReport, int]:
    if resolutions is not None:
        cfg = cfg.with_resolutions(resolutions)
    check_doubling(cfg.resolutions)
    return run_scenario(cfg)


def _parse_tol(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or name not in CHECKS:
            raise ConfigError(f"--tol expects CHECK=VALUE with CHECK one of {', '.join(CHECKS)}; got {item!r}")
        try:
            out[name] = float(value)
        except ValueError:
            raise ConfigError(f"--tol {item!r}: {value!r} is not a number") from None
        if not out[name] > 0:
            raise ConfigError(f"--tol {item!r}: tolerance must be positive")
    return out


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.resolutions:
        cfg = cfg.with_resolutions([_res_token(r, cfg.scenario.p) for r in args.resolutions])
    if args.tol:
        cfg = dataclasses.replace(cfg, tolerances={**cfg.tolerances, **_parse_tol(args.tol)})
    if args.phase_twist is not None:
        try:
            cfg = dataclasses.replace(cfg, gauge_twist=ScalarField.parse(args.phase_twist))
        except ExpressionError as exc:
            raise ConfigError(f"--phase-twist: {exc}") from None
    d = cfg.debug
    debug = DebugFlags(
        zero_b=d.zero_b or args.zero_b,
        zero_nu=d.zero_nu or args.zero_nu,
        zero_a=d.zero_a or args.zero_a,
        perturb_a=args.perturb_a if args.perturb_a is not None else d.perturb_a,
    )
    return dataclasses.replace(cfg, debug=debug)


def _res_token(token: str, p: int):
    """``64`` or ``64x32``."""
    try:
        parts = [int(t) for t in token.lower().split("x")]
    except ValueError:
        raise ConfigError(f"invalid resolution {token!r}") from None
    return parse_resolution(parts[0] if len(parts) == 1 else parts, p)


def emit(report: RunReport, out_dir: Path, fmt: str, mesh: Optional[Path] = None, timings: bool = False) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        written.append(write_json(report, out_dir / "report.json", timings))
    if fmt in ("csv", "both"):
        written.append(write_csv(report, out_dir / "report.csv"))
    if mesh is not None:
        written.append(write_mesh(report, mesh))
    return written


def _summary(report: RunReport) -> str:
    lines = []
    for c in report.checks:
        last = c.levels[-1][1]
        ratios = ", ".join("-" if r is None else f"{r:.2f}" for r in c.ratios)
        lines.append(
            f"{'PASS' if c.passed else 'FAIL'}  {c.name:<24} max={last.max:.3e} tol={c.tolerance:.1e}"
            + (f" ratios=[{ratios}]" if ratios else "")
        )
    lines.append("all checks passed" if report.passed else "some checks FAILED")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinc-immersion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run every check on one scenario"), ("study", "convergence study over doubling resolutions")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path, help="YAML scenario config")
        p.add_argument(
            "-r",
            "--resolution",
            dest="resolutions",
            action="append",
            metavar="N[xM]",
            help="resolution level, repeatable (overrides the config)",
        )
        p.add_argument("--tol", action="append", metavar="CHECK=VALUE", help="per-check tolerance override, repeatable")
        p.add_argument("-o", "--out", type=Path, default=Path("out"), help="output directory (default: out)")
        p.add_argument("--format", choices=("json", "csv", "both"), default="json")
        p.add_argument("--mesh", type=Path, help="write the reconstructed finest-level samples here")
        p.add_argument("--timings", action="store_true", help="include wall-clock per stage in the JSON report")
        p.add_argument("--zero-b", action="store_true", help="negative control: drop B from the Killing right-hand side")
        p.add_argument("--zero-nu", action="store_true", help="negative control: drop the nu-term")
        p.add_argument("--zero-a", action="store_true", help="negative control: replace A by 0 on the right-hand side")
        p.add_argument("--perturb-a", type=float, metavar="EPS", help="negative control: add EPS to A on the right-hand side")
        p.add_argument("--phase-twist", metavar="EXPR", help="phase theta(u, v) for the gauge covariance check")
        p.add_argument("-v", "--verbose", action="count", default=0)
        p.add_argument("-q", "--quiet", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.quiet else (logging.DEBUG if args.verbose > 1 else logging.INFO)
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "study":
            check_doubling(cfg.resolutions)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    log.debug("resolutions: %s", [list(r) for r in cfg.resolutions])
    report, code = run_scenario(cfg)
    try:
        for path in emit(report, args.out, args.format, args.mesh, args.timings):
            log.debug("wrote %s", path)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    log.info("%s", _summary(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
