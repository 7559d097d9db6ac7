"""End-to-end scenario runs: forward spinor, residual, reconstruction, verifiers."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import RunConfig
from .geometry import (
    GeometryData,
    PatchGrid,
    analytic_second_fundamental_form,
    build_adapted_frames,
    connection_forms,
    sample_scenario,
)
from .immersion import (
    ErrorStats,
    procrustes_align,
    reconstruct_F,
    verify_differential,
    verify_isometry,
    verify_normal_connection,
    verify_second_fundamental_form,
)
from .expressions import ScalarField
from .killing import covariant_derivative, forward_spinor, gauge_transform, killing_rhs

ALGEBRAIC_TOL = 1e-10
FD_TOL = 5e-3
# errors below this are roundoff; a convergence ratio is meaningless there
ROUNDOFF_FLOOR = 1e-11

# name -> (kind, description)
CHECKS: dict[str, tuple[str, str]] = {
    "spinc_membership": ("algebraic", "every [phi] is a unit even element preserving vectors"),
    "killing_residual": ("fd", "covariant derivative minus Killing right-hand side"),
    "reconstruction": ("algebraic", "|<<nu phi, phi>> - x|"),
    "F_unit_norm": ("algebraic", "||F| - 1|"),
    "F_purity": ("algebraic", "non-real or non-vector content of <<nu phi, phi>>"),
    "procrustes": ("algebraic", "RMS after best rotation of F onto the samples"),
    "differential": ("fd", "dF(e_k) against xi(e_k)"),
    "isometry": ("algebraic", "Gram matrix of xi over the adapted basis minus identity"),
    "second_fundamental_form": ("fd", "{e_i xi(e_k)}^perp against xi(B(e_i, e_k)), closed-form B"),
    "sff_tangential": ("fd", "<e_i xi(e_k), F> + <e_i, e_k>"),
    "normal_connection": ("fd", "xi(nabla' eta) against {e_k xi(eta)}^perp"),
    "geometry_B": ("fd", "differenced B against the closed-form Hessian oracle"),
    "B_symmetry": ("fd", "|B(e_i, e_k) - B(e_k, e_i)|"),
    "gauge_covariance": ("fd", "twisted residual against exp(i theta) times the original"),
}


@dataclass
class LevelResult:
    resolution: tuple[int, ...]
    stats: dict[str, ErrorStats]
    timings: dict[str, float] = field(default_factory=dict)
    grid: Optional[PatchGrid] = None
    F: Optional[np.ndarray] = None


def default_tolerance(name: str) -> float:
    return ALGEBRAIC_TOL if CHECKS[name][0] == "algebraic" else FD_TOL


def _rhs_controls(cfg: RunConfig, geo: GeometryData) -> tuple[GeometryData, float, Optional[np.ndarray]]:
    dbg = cfg.debug
    rhs_geo = geo.with_zero_B() if dbg.zero_b else geo
    nu_scale = 0.0 if dbg.zero_nu else 1.0
    A_rhs = None
    if dbg.zero_a or dbg.perturb_a:
        A_rhs = (np.zeros_like(geo.A) if dbg.zero_a else geo.A) + dbg.perturb_a
    return rhs_geo, nu_scale, A_rhs


def _residual_with_controls(cfg, field_, geo, A_rhs_override=None) -> np.ndarray:
    """Residual vectors with the debug controls applied to the right-hand side only."""
    rhs_geo, nu_scale, A_rhs = _rhs_controls(cfg, geo)
    if A_rhs_override is not None:
        A_rhs = A_rhs_override if A_rhs is None else A_rhs_override + (A_rhs - geo.A)
    p = field_.grid.p
    return np.stack(
        [covariant_derivative(field_, k, geo) - killing_rhs(field_, k, rhs_geo, nu_scale, A_rhs) for k in range(p)],
        axis=-2,
    )


def evaluate_level(cfg: RunConfig, resolution: tuple[int, ...]) -> LevelResult:
    timings: dict[str, float] = {}
    stats: dict[str, ErrorStats] = {}

    def stage(name):
        timings[name] = time.perf_counter()

    def done(name):
        timings[name] = time.perf_counter() - timings[name]

    stage("geometry")
    grid = sample_scenario(cfg.scenario, resolution)
    fr = build_adapted_frames(grid)
    geo = connection_forms(fr)
    B_exact = analytic_second_fundamental_form(fr)
    done("geometry")
    stats["geometry_B"] = ErrorStats.of(geo.B - B_exact)
    stats["B_symmetry"] = ErrorStats.of(geo.B - np.swapaxes(geo.B, -1, -2))

    stage("forward_spinor")
    field_ = forward_spinor(fr)
    done("forward_spinor")
    stats["spinc_membership"] = ErrorStats.of(field_.spinc_residue())

    stage("residual")
    res = _residual_with_controls(cfg, field_, geo)
    stats["killing_residual"] = ErrorStats.of(np.linalg.norm(res, axis=-1))
    if cfg.gauge_twist is not None:
        u, v = grid.uv()
        theta = cfg.gauge_twist(u, v)
        twisted, A_twisted = gauge_transform(field_, theta, geo)
        res_t = _residual_with_controls(cfg, twisted, geo, A_twisted)
        z = np.exp(1j * theta)[..., None, None]
        stats["gauge_covariance"] = ErrorStats.of(np.linalg.norm(res_t - z * res, axis=-1))
    done("residual")

    stage("reconstruction")
    rec = reconstruct_F(field_)
    stats["reconstruction"] = ErrorStats.of(np.linalg.norm(rec.F - grid.x, axis=-1))
    stats["F_unit_norm"] = ErrorStats.of(rec.norm_error)
    stats["F_purity"] = ErrorStats.of(rec.purity)
    align = procrustes_align(rec.F, grid.x)
    stats["procrustes"] = ErrorStats(align.residual, align.residual, align.residual)
    done("reconstruction")

    stage("verifiers")
    stats["differential"] = verify_differential(field_, geo)
    stats["isometry"] = verify_isometry(field_)
    sff = verify_second_fundamental_form(field_, geo, B_exact)
    stats["second_fundamental_form"] = sff.normal
    stats["sff_tangential"] = sff.tangential
    if grid.q >= 1:
        eta_fields = cfg.eta or tuple(_default_eta(grid.q))
        u, v = grid.uv()
        eta = np.stack([c(u, v) for c in eta_fields], axis=-1)
        # exact parameter derivatives pushed onto e_k
        d_param = np.stack([np.stack([c.derivative(a)(u, v) for c in eta_fields], -1) for a in range(grid.p)], axis=-2)
        d_eta = np.einsum("...as,...ak->...ks", d_param, fr.coframe)
        stats["normal_connection"] = verify_normal_connection(field_, geo, eta, d_eta)
    done("verifiers")
    return LevelResult(tuple(resolution), stats, timings, grid, rec.F)


def _default_eta(q: int) -> list[ScalarField]:
    return [ScalarField.parse("cos(u)")] + [ScalarField.parse("1")] * (q - 1)


def convergence_ratios(errors: list[float]) -> list[Optional[float]]:
    """error(h)/error(h/2) between consecutive levels; None where the finer error is roundoff."""
    out: list[Optional[float]] = []
    for coarse, fine in zip(errors, errors[1:]):
        out.append(None if fine <= ROUNDOFF_FLOOR else coarse / fine)
    return out


@dataclass
class CheckRecord:
    name: str
    kind: str
    tolerance: float
    levels: list[tuple[tuple[int, ...], ErrorStats]]
    ratios: list[Optional[float]]
    passed: bool


@dataclass
class RunReport:
    config: RunConfig
    resolutions: list[tuple[int, ...]]
    checks: list[CheckRecord]
    timings: list[dict[str, float]]
    finest: LevelResult

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckRecord:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def judge(kind: str, errors: list[float], tol: float, window: tuple[float, float]) -> tuple[list[Optional[float]], bool]:
    ratios = convergence_ratios(errors) if kind == "fd" else [None] * (len(errors) - 1)
    ok = errors[-1] <= tol
    if kind == "fd":
        ok = ok and all(r is None or window[0] <= r <= window[1] for r in ratios)
    return ratios, bool(ok)


def run_levels(cfg: RunConfig) -> RunReport:
    levels = [evaluate_level(cfg, r) for r in cfg.resolutions]
    checks = []
    for name, (kind, _) in CHECKS.items():
        if name not in levels[0].stats:
            continue
        tol = float(cfg.tolerances.get(name, default_tolerance(name)))
        per_level = [(lvl.resolution, lvl.stats[name]) for lvl in levels]
        ratios, ok = judge(kind, [s.max for _, s in per_level], tol, cfg.ratio_window)
        checks.append(CheckRecord(name, kind, tol, per_level, ratios, ok))
    return RunReport(cfg, [lvl.resolution for lvl in levels], checks, [lvl.timings for lvl in levels], levels[-1])
