"""Sampled immersions M^p -> S^n in R^{n+1}, adapted frames and connection data.

Conventions used throughout:

* ``nu`` is the outward unit normal of the sphere, i.e. the position itself.
* ``omega_M[..., k, i, j] = <D_{e_k} e_i, e_j>`` and likewise ``omega_E`` for
  the normal frame. With this orientation the spin connection reads
  ``X(psi) + 1/2 sum_{i<j} omega_ij(X) e_i e_j psi``.
* ``B[..., s, i, k] = <D_{e_i} e_k, f_s>``.
* ``A[..., k]`` is the real one-form A1 + A2 evaluated on ``e_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np
import sympy as sp

from .expressions import U, V, ScalarField

KINDS = ("great_circle", "latitude_circle", "great_subsphere", "clifford_torus", "torus_family")
MIN_RESOLUTION = 8


class ScenarioError(ValueError):
    pass


class DegenerateImmersion(ValueError):
    def __init__(self, message: str, samples: np.ndarray):
        super().__init__(message)
        self.samples = samples


@dataclass(frozen=True)
class Axis:
    start: float
    length: float
    periodic: bool


@dataclass(frozen=True)
class Scenario:
    """An explicit immersion into S^n plus the prescribed S^1 one-forms.

    ``A1`` and ``A2`` hold the (du, dv) coefficients of the tangent and normal
    S^1-connection forms. Curves only use the du slot.
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    A1: tuple[ScalarField, ScalarField] = (ScalarField.zero(), ScalarField.zero())
    A2: tuple[ScalarField, ScalarField] = (ScalarField.zero(), ScalarField.zero())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        allowed = {
            "great_circle": {"ambient"},
            "latitude_circle": {"theta0"},
            "great_subsphere": {"u_min", "u_max"},
            "clifford_torus": set(),
            "torus_family": {"a"},
        }[self.kind]
        extra = set(self.params) - allowed
        if extra:
            raise ScenarioError(f"unknown parameter(s) for {self.kind}: {', '.join(sorted(extra))}")
        if self.kind == "latitude_circle":
            t0 = self.param("theta0")
            if not 0 < t0 < np.pi:
                raise ScenarioError(f"invalid parameter theta0={t0}: must lie in (0, pi)")
        if self.kind == "torus_family":
            a = self.param("a")
            if not 0 < a < 1:
                raise ScenarioError(f"invalid parameter a={a}: must lie in (0, 1)")
        if self.kind == "great_circle":
            amb = self.param("ambient")
            if amb != int(amb) or amb < 3:
                raise ScenarioError(f"invalid parameter ambient={amb}: need an integer >= 3")
        if self.kind == "great_subsphere":
            lo, hi = self.param("u_min"), self.param("u_max")
            if not 0 < lo < hi < np.pi:
                raise ScenarioError(f"invalid parameters u_min={lo}, u_max={hi}: need 0 < u_min < u_max < pi")

    _DEFAULTS = {"ambient": 3, "theta0": np.pi / 3, "u_min": 0.5, "u_max": np.pi - 0.5, "a": 0.6}

    def param(self, name: str) -> float:
        if name in self.params:
            return float(self.params[name])
        return float(self._DEFAULTS[name])

    @property
    def p(self) -> int:
        return 1 if self.kind in ("great_circle", "latitude_circle") else 2

    @property
    def ambient(self) -> int:
        if self.kind == "great_circle":
            return int(self.param("ambient"))
        return 3 if self.kind == "latitude_circle" else 4

    @property
    def axes(self) -> tuple[Axis, ...]:
        full = Axis(0.0, 2 * np.pi, True)
        if self.kind == "great_subsphere":
            lo, hi = self.param("u_min"), self.param("u_max")
            return (Axis(lo, hi - lo, False), full)
        return (full,) * self.p

    def embedding(self) -> list[sp.Expr]:
        """Closed-form immersion as sympy expressions in (u, v)."""
        cos, sin = sp.cos, sp.sin
        if self.kind == "great_circle":
            return [cos(U), sin(U)] + [sp.Integer(0)] * (self.ambient - 2)
        if self.kind == "latitude_circle":
            t0 = sp.Float(self.param("theta0"))
            return [sin(t0) * cos(U), sin(t0) * sin(U), cos(t0)]
        if self.kind == "great_subsphere":
            return [sin(U) * cos(V), sin(U) * sin(V), cos(U), sp.Integer(0)]
        a = 1 / sp.sqrt(2) if self.kind == "clifford_torus" else sp.Float(self.param("a"))
        b = sp.sqrt(1 - a**2)
        return [a * cos(U), a * sin(U), b * cos(V), b * sin(V)]

    def connection_one_form(self) -> tuple[ScalarField, ScalarField]:
        """Coefficients of A = A1 + A2 on (du, dv)."""
        return tuple(ScalarField(f"({a.source}) + ({b.source})", a.expr + b.expr) for a, b in zip(self.A1, self.A2))


@dataclass(frozen=True, eq=False)
class PatchGrid:
    scenario: Scenario
    axes: tuple[Axis, ...]
    shape: tuple[int, ...]
    params: tuple[np.ndarray, ...]  # parameter values, each of full grid shape
    x: np.ndarray  # (*shape, n+1)
    partials: Optional[np.ndarray] = None  # (*shape, p, n+1), closed form when present
    hessian: Optional[np.ndarray] = None  # (*shape, p, p, n+1)

    @property
    def p(self) -> int:
        return len(self.shape)

    @property
    def ambient(self) -> int:
        return self.x.shape[-1]

    @property
    def n(self) -> int:
        return self.ambient - 1

    @property
    def q(self) -> int:
        return self.n - self.p

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(ax.length / (N if ax.periodic else N - 1) for ax, N in zip(self.axes, self.shape))

    @property
    def periodic(self) -> tuple[bool, ...]:
        return tuple(ax.periodic for ax in self.axes)

    def uv(self) -> tuple[np.ndarray, np.ndarray]:
        u = self.params[0]
        v = self.params[1] if self.p > 1 else np.zeros_like(u)
        return u, v


def _lambdify_array(exprs, shape_out, u, v):
    flat = list(np.ravel(np.array(exprs, dtype=object)))
    f = sp.lambdify((U, V), flat, "numpy")
    vals = [np.broadcast_to(np.asarray(c, dtype=float), u.shape) for c in f(u, v)]
    return np.stack(vals, axis=-1).reshape(u.shape + shape_out)


def sample_scenario(s: Scenario, resolution: int | Sequence[int]) -> PatchGrid:
    """Sample the immersion on a regular parameter grid (endpoint excluded on periodic axes)."""
    axes = s.axes
    res = (resolution,) * s.p if np.isscalar(resolution) else tuple(int(r) for r in resolution)
    if len(res) != s.p:
        raise ScenarioError(f"{s.kind} needs {s.p} resolution value(s), got {len(res)}")
    if min(res) < MIN_RESOLUTION:
        raise ScenarioError(f"resolution must be >= {MIN_RESOLUTION} per axis, got {res}")
    lines = []
    for ax, N in zip(axes, res):
        if ax.periodic:
            lines.append(ax.start + ax.length * np.arange(N) / N)
        else:
            lines.append(ax.start + ax.length * np.arange(N) / (N - 1))
    params = tuple(np.meshgrid(*lines, indexing="ij"))
    u = params[0]
    v = params[1] if s.p > 1 else np.zeros_like(u)
    syms = (U, V)[: s.p]
    emb = s.embedding()
    m = len(emb)
    x = _lambdify_array(emb, (m,), u, v)
    jac = [[sp.diff(c, a) for c in emb] for a in syms]
    hes = [[[sp.diff(c, a, b) for c in emb] for b in syms] for a in syms]
    partials = _lambdify_array(jac, (s.p, m), u, v)
    hessian = _lambdify_array(hes, (s.p, s.p, m), u, v)
    norm_err = np.max(np.abs(np.linalg.norm(x, axis=-1) - 1))
    if norm_err > 1e-12:
        raise ScenarioError(f"samples leave the unit sphere (|x| - 1 = {norm_err:.2e})")
    return PatchGrid(s, axes, res, params, x, partials, hessian)


def fd_derivative(f: np.ndarray, axis: int, h: float, periodic: bool) -> np.ndarray:
    """Second-order central difference along a grid axis.

    Periodic axes wrap; otherwise the two end samples use one-sided
    three-point stencils.
    """
    f = np.asarray(f)
    if periodic:
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2 * h)
    n = f.shape[axis]
    if n < 3:
        raise ValueError("need at least three samples for a second-order stencil")
    out = np.empty_like(f)
    sl = lambda i: tuple(slice(None) if d != axis else i for d in range(f.ndim))  # noqa: E731
    out[sl(slice(1, -1))] = (f[sl(slice(2, None))] - f[sl(slice(None, -2))]) / (2 * h)
    out[sl(0)] = (-3 * f[sl(0)] + 4 * f[sl(1)] - f[sl(2)]) / (2 * h)
    out[sl(-1)] = (3 * f[sl(-1)] - 4 * f[sl(-2)] + f[sl(-3)]) / (2 * h)
    return out


@dataclass(frozen=True, eq=False)
class AdaptedFrameField:
    """Per-sample orthonormal frame (e_1..e_p, f_1..f_q, nu) with det = +1."""

    grid: PatchGrid
    e: np.ndarray  # (*shape, p, n+1)
    f: np.ndarray  # (*shape, q, n+1)
    nu: np.ndarray  # (*shape, n+1)
    coframe: np.ndarray  # (*shape, p, p): D_{e_k} = sum_a coframe[a, k] d/du_a

    @cached_property
    def matrix(self) -> np.ndarray:
        """G with columns (e_1..e_p, f_1..f_q, nu), shape (*shape, n+1, n+1)."""
        cols = np.concatenate([self.e, self.f, self.nu[..., None, :]], axis=-2)
        return np.swapaxes(cols, -1, -2)

    def directional(self, field_: np.ndarray, k: int, periodic: Optional[Sequence[bool]] = None) -> np.ndarray:
        """Central-difference derivative of a sampled field along e_k."""
        g = self.grid
        periodic = g.periodic if periodic is None else periodic
        extra = field_.ndim - g.p
        out = 0.0
        for a in range(g.p):
            d = fd_derivative(field_, a, g.spacing[a], periodic[a])
            w = self.coframe[..., a, k].reshape(g.shape + (1,) * extra)
            out = out + w * d
        return out


def _orthonormal_complement(basis: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Project candidate vectors off ``basis`` (orthonormal rows), per sample."""
    coeff = np.einsum("...jn,cn->...cj", basis, candidates)
    return candidates - np.einsum("...cj,...jn->...cn", coeff, basis)


def build_adapted_frames(g: PatchGrid, rank_tol: float = 1e-8) -> AdaptedFrameField:
    """Gram-Schmidt tangent frame, projected normal frame, nu = x."""
    if g.partials is not None:
        partials = g.partials
    else:
        partials = np.stack([fd_derivative(g.x, a, g.spacing[a], g.periodic[a]) for a in range(g.p)], axis=-2)
    # partials rows are d/du_a; QR of the (n+1) x p matrix gives e = d R^{-1}
    Q, R = np.linalg.qr(np.swapaxes(partials, -1, -2))
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    bad = np.argwhere(np.min(np.abs(diag), axis=-1) < rank_tol)
    if bad.size:
        raise DegenerateImmersion(f"differential is rank deficient at {len(bad)} sample(s), first at {tuple(bad[0])}", bad)
    sign = np.sign(diag)
    Q = Q * sign[..., None, :]
    R = R * sign[..., :, None]
    e = np.swapaxes(Q, -1, -2)
    coframe = np.linalg.inv(R)
    nu = g.x.copy()
    q = g.q
    m = g.ambient
    basis = np.concatenate([e, nu[..., None, :]], axis=-2)
    ref = np.eye(m)
    chosen: list[int] = []
    f_rows: list[np.ndarray] = []
    # f_1..f_{q-1}: one fixed reference vector per patch each, projected and normalised
    for _ in range(q - 1):
        current = np.concatenate([basis] + [r[..., None, :] for r in f_rows], axis=-2)
        proj = _orthonormal_complement(current, ref)
        worst = np.min(np.linalg.norm(proj, axis=-1).reshape(-1, m), axis=0)
        worst[chosen] = -1.0
        c = int(np.argmax(worst))
        if worst[c] < 1e-6:
            raise DegenerateImmersion("no reference vector spans the normal complement on the whole patch", np.empty((0, g.p), dtype=int))
        chosen.append(c)
        v = proj[..., c, :]
        f_rows.append(v / np.linalg.norm(v, axis=-1, keepdims=True))
    if q:
        # f_q completes the frame with det = +1 (generalised cross product)
        others = np.concatenate([e] + [r[..., None, :] for r in f_rows] + [nu[..., None, :]], axis=-2)
        w = np.empty(g.shape + (m,))
        for j in range(m):
            rows = np.concatenate([others, np.broadcast_to(ref[j], g.shape + (1, m))], axis=-2)
            w[..., j] = np.linalg.det(rows)
        # det[e, f', nu, w] = |w|^2 > 0, and swapping the last two rows flips it
        f_rows.append(-w / np.linalg.norm(w, axis=-1, keepdims=True))
        f = np.stack(f_rows, axis=-2)
    else:
        f = np.zeros(g.shape + (0, m))
        det = np.linalg.det(np.concatenate([e, nu[..., None, :]], axis=-2))
        e[..., -1, :] *= np.sign(det)[..., None]
        coframe[..., :, -1] *= np.sign(det)[..., None]
    return AdaptedFrameField(g, e, f, nu, coframe)


@dataclass(frozen=True, eq=False)
class GeometryData:
    omega_M: np.ndarray  # (*shape, p, p, p)  [k, i, j]
    omega_E: np.ndarray  # (*shape, p, q, q)  [k, s, t]
    B: np.ndarray  # (*shape, q, p, p)  [s, i, k]
    A: np.ndarray  # (*shape, p)

    def with_zero_B(self) -> GeometryData:
        return replace(self, B=np.zeros_like(self.B))

    def with_A(self, A: np.ndarray) -> GeometryData:
        return replace(self, A=np.broadcast_to(A, self.A.shape).copy())

    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.B - np.swapaxes(self.B, -1, -2)), initial=0.0))


def one_form_on_frame(fr: AdaptedFrameField, coeffs: Sequence[ScalarField]) -> np.ndarray:
    """Evaluate a one-form sum_a c_a du_a on each e_k."""
    g = fr.grid
    u, v = g.uv()
    vals = np.stack([coeffs[a](u, v) for a in range(g.p)], axis=-1)
    return np.einsum("...a,...ak->...k", vals, fr.coframe)


def connection_forms(fr: AdaptedFrameField) -> GeometryData:
    g = fr.grid
    p, q = g.p, g.q
    dE = np.stack([fr.directional(fr.e, k) for k in range(p)], axis=-3)  # (*s, k, i, n+1)
    dF = np.stack([fr.directional(fr.f, k) for k in range(p)], axis=-3)  # (*s, k, s, n+1)
    omega_M = np.einsum("...kin,...jn->...kij", dE, fr.e)
    omega_E = np.einsum("...ksn,...tn->...kst", dF, fr.f)
    B = np.einsum("...ikn,...sn->...sik", dE, fr.f)
    A = one_form_on_frame(fr, g.scenario.connection_one_form())
    return GeometryData(omega_M, omega_E, B, A)


def analytic_second_fundamental_form(fr: AdaptedFrameField) -> np.ndarray:
    """B[s, i, k] from the closed-form Hessian of x: <d_a d_b x, f_s> X^a Y^b."""
    g = fr.grid
    if g.hessian is None:
        raise ValueError("grid carries no closed-form Hessian")
    hf = np.einsum("...abn,...sn->...sab", g.hessian, fr.f)
    return np.einsum("...sab,...ai,...bk->...sik", hf, fr.coframe, fr.coframe)


def sphere_second_fundamental_form(X: Sequence[float], Y: Sequence[float], nu: Sequence[float]) -> np.ndarray:
    """Second fundamental form of the unit sphere w.r.t. the outward normal: -<X, Y> nu."""
    return -float(np.dot(X, Y)) * np.asarray(nu, dtype=float)
