"""Forward construction of the spinor field and the generalized Killing residual.

A :class:`SpinorField` stores, at every grid sample, the coefficients of
[phi] in Cl_{n+1} relative to the adapted frame: generator e_i is the tangent
vector e_i (i <= p), e_{p+s} is f_s and e_{n+1} is nu.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .clifford import gp_array, tau_array
from .geometry import AdaptedFrameField, GeometryData
from .spin import lift_rotations, spinc_residues

SIGN_BREAK_THRESHOLD = 0.5


class LiftContinuityError(RuntimeError):
    def __init__(self, locations: list[tuple[int, ...]]):
        super().__init__(f"lift sign is discontinuous at {len(locations)} sample(s), first at {locations[0]}")
        self.locations = locations


@dataclass(frozen=True, eq=False)
class SpinorField:
    frames: AdaptedFrameField
    values: np.ndarray  # (*shape, 2^(n+1)) complex
    gauge: str = "adapted"
    # per grid axis: +1/-1 sign relating the last sample to the first (None if not periodic)
    wrap_mismatch: tuple[Optional[float], ...] = ()
    phase: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def grid(self):
        return self.frames.grid

    @property
    def dim(self) -> int:
        return self.values.shape[-1].bit_length() - 1

    @property
    def stencil_periodic(self) -> tuple[bool, ...]:
        """Periodic stencils are used only across seams where the field closes up with sign +1."""
        return tuple(bool(per and mm == 1.0) for per, mm in zip(self.grid.periodic, self.wrap_mismatch))

    def directional(self, k: int) -> np.ndarray:
        return self.frames.directional(self.values, k, periodic=self.stencil_periodic)

    def spinc_residue(self) -> np.ndarray:
        odd, unit, vec = spinc_residues(self.values)
        return np.maximum(np.maximum(odd, unit), vec)


def _continuity_signs(g: np.ndarray) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Row-major sign continuation: each sample follows its predecessor along the last
    axis; the first sample of each row follows the first sample of the previous row."""
    shape = g.shape[:-1]
    breaks: list[tuple[int, ...]] = []

    def step_signs(a, b):
        overlap = np.real(np.sum(np.conj(a) * b, axis=-1))
        return np.where(overlap < 0, -1.0, 1.0), np.abs(overlap)

    if len(shape) == 1:
        s, mag = step_signs(g[:-1], g[1:])
        signs = np.concatenate([[1.0], np.cumprod(s)])
        breaks += [(int(i) + 1,) for i in np.flatnonzero(mag < SIGN_BREAK_THRESHOLD)]
        return signs, breaks
    col_s, col_mag = step_signs(g[:-1, 0], g[1:, 0])
    col = np.concatenate([[1.0], np.cumprod(col_s)])
    row_s, row_mag = step_signs(g[:, :-1], g[:, 1:])
    rows = np.concatenate([np.ones((shape[0], 1)), np.cumprod(row_s, axis=1)], axis=1)
    breaks += [(int(i) + 1, 0) for i in np.flatnonzero(col_mag < SIGN_BREAK_THRESHOLD)]
    breaks += [(int(i), int(j) + 1) for i, j in np.argwhere(row_mag < SIGN_BREAK_THRESHOLD)]
    return rows * col[:, None], breaks


def _wrap_mismatch(values: np.ndarray, periodic: tuple[bool, ...]) -> tuple[Optional[float], ...]:
    out: list[Optional[float]] = []
    for axis, per in enumerate(periodic):
        if not per:
            out.append(None)
            continue
        last = np.take(values, -1, axis=axis)
        first = np.take(values, 0, axis=axis)
        overlap = np.real(np.sum(np.conj(last) * first, axis=-1))
        if np.all(overlap > 0):
            out.append(1.0)
        elif np.all(overlap < 0):
            out.append(-1.0)
        else:
            out.append(float("nan"))
    return tuple(out)


def forward_spinor(fr: AdaptedFrameField, phase: Optional[np.ndarray] = None, tol: float = 1e-9) -> SpinorField:
    """[phi] = tau(lift(G)) * z with G the adapted frame matrix and z a unit phase field."""
    g = lift_rotations(fr.matrix)
    signs, breaks = _continuity_signs(g)
    if breaks:
        raise LiftContinuityError(breaks)
    g = g * signs[..., None]
    phi = tau_array(g)
    if phase is not None:
        phase = np.asarray(phase, dtype=np.complex128)
        if phase.shape != fr.grid.shape:
            raise ValueError(f"phase field has shape {phase.shape}, grid is {fr.grid.shape}")
        if np.max(np.abs(np.abs(phase) - 1)) > 1e-12:
            raise ValueError("phase field must take unit complex values")
        phi = phi * phase[..., None]
    field_ = SpinorField(fr, phi, "adapted", _wrap_mismatch(phi, fr.grid.periodic), phase)
    res = field_.spinc_residue()
    if np.max(res) > tol:
        raise ValueError(f"forward spinor leaves Spin^C (residue {np.max(res):.2e})")
    return field_


def _block_bivector(geo: GeometryData, k: int, m: int, p: int) -> np.ndarray:
    """sum_{i<j} w_ij(e_k) e_i e_j over the tangent and normal blocks."""
    shape = geo.A.shape[:-1]
    out = np.zeros(shape + (1 << m,), dtype=np.complex128)
    for i in range(p):
        for j in range(i + 1, p):
            out[..., (1 << i) | (1 << j)] += geo.omega_M[..., k, i, j]
    q = geo.omega_E.shape[-1]
    for s in range(q):
        for t in range(s + 1, q):
            out[..., (1 << (p + s)) | (1 << (p + t))] += geo.omega_E[..., k, s, t]
    return out


def covariant_derivative(field_: SpinorField, k: int, geo: GeometryData) -> np.ndarray:
    """X(phi) + 1/2 sum w_ij(X) e_i e_j phi + 1/2 i A(X) phi along X = e_k."""
    if geo is None:
        raise ValueError("covariant derivative needs geometry data")
    if field_.gauge != "adapted":
        raise ValueError(f"expected a field in the adapted gauge, got {field_.gauge!r}")
    phi = field_.values
    p = field_.grid.p
    out = field_.directional(k)
    out = out + 0.5 * gp_array(_block_bivector(geo, k, field_.dim, p), phi)
    out = out + 0.5j * geo.A[..., k, None] * phi
    return out


def killing_rhs(
    field_: SpinorField,
    k: int,
    geo: GeometryData,
    nu_scale: float = 1.0,
    A_rhs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """-1/2 sum_i e_i B(e_k, e_i) phi + 1/2 e_k nu phi + 1/2 i A(e_k) phi.

    ``A_rhs`` is the one-form in the last term, shape (*shape, p). It defaults
    to the connection form ``geo.A``, in which case the S^1 terms on both sides
    of the equation cancel. Gauge transforms and A-perturbations act on it.
    ``nu_scale`` multiplies the nu-term; it exists for negative controls.
    """
    phi = field_.values
    m = field_.dim
    p = field_.grid.p
    q = geo.B.shape[-3]
    size = 1 << m
    biv = np.zeros(phi.shape[:-1] + (size,), dtype=np.complex128)
    for i in range(p):
        for s in range(q):
            # e_i f_s with i < p + s, so the blade sign is +1
            biv[..., (1 << i) | (1 << (p + s))] += -0.5 * geo.B[..., s, k, i]
    biv[..., (1 << k) | (1 << (m - 1))] += 0.5 * nu_scale
    out = gp_array(biv, phi)
    A = geo.A if A_rhs is None else np.broadcast_to(A_rhs, geo.A.shape)
    out = out + 0.5j * A[..., k, None] * phi
    return out


@dataclass(frozen=True)
class ResidualStats:
    per_sample: np.ndarray  # (*shape, p) coefficient 2-norms
    max: float
    mean: float
    rms: float
    per_direction_max: tuple[float, ...]


def residual_vectors(
    field_: SpinorField, geo: GeometryData, nu_scale: float = 1.0, A_rhs: Optional[np.ndarray] = None
) -> np.ndarray:
    """Covariant derivative minus right-hand side, shape (*shape, p, 2^(n+1))."""
    p = field_.grid.p
    return np.stack(
        [covariant_derivative(field_, k, geo) - killing_rhs(field_, k, geo, nu_scale, A_rhs) for k in range(p)],
        axis=-2,
    )


def residual(
    field_: SpinorField, geo: GeometryData, nu_scale: float = 1.0, A_rhs: Optional[np.ndarray] = None
) -> ResidualStats:
    """Per-sample coefficient 2-norm of the Killing residual, aggregated over the grid."""
    r = np.linalg.norm(residual_vectors(field_, geo, nu_scale, A_rhs), axis=-1)
    flat = r.reshape(-1, r.shape[-1])
    return ResidualStats(
        per_sample=r,
        max=float(flat.max()),
        mean=float(flat.mean()),
        rms=float(np.sqrt(np.mean(flat**2))),
        per_direction_max=tuple(float(v) for v in flat.max(axis=0)),
    )


def phase_derivative(fr: AdaptedFrameField, theta: np.ndarray) -> np.ndarray:
    """d(theta)(e_k) from central differences of exp(i theta), so seams in theta do not matter."""
    z = np.exp(1j * np.asarray(theta, dtype=float))
    return np.stack([np.imag(np.conj(z) * fr.directional(z, k)) for k in range(fr.grid.p)], axis=-1)


def gauge_transform(
    field_: SpinorField, theta: np.ndarray, geo: GeometryData, A_rhs: Optional[np.ndarray] = None
) -> tuple[SpinorField, np.ndarray]:
    """Multiply [phi] by exp(i theta); return the new field and A + 2 d(theta).

    The returned one-form is meant for the right-hand side (``A_rhs``); the
    connection form in ``geo`` is left alone.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != field_.grid.shape:
        raise ValueError(f"theta has shape {theta.shape}, grid is {field_.grid.shape}")
    z = np.exp(1j * theta)
    values = field_.values * z[..., None]
    phase_ = z if field_.phase is None else field_.phase * z
    new = replace(field_, values=values, phase=phase_, wrap_mismatch=_wrap_mismatch(values, field_.grid.periodic))
    base = geo.A if A_rhs is None else A_rhs
    return new, base + 2 * phase_derivative(field_.frames, theta)
