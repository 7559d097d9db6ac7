"""Spin^C elements inside Cl_m: rotors, phases, rotor lifts of SO(m), inclusions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .clifford import (
    Multivector,
    extract_real_vector,
    gp_array,
    grades,
    promote,
    shift_generators,
    tau_array,
    vector_array,
    vector_part,
)


class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class SpinCDiagnostic:
    odd_residue: float
    unit_residue: float
    vector_residue: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.odd_residue, self.unit_residue, self.vector_residue) <= self.tol

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True, eq=False)
class SpinCElement:
    """A unit even multivector z*h, |z| = 1, h in Spin_m."""

    value: Multivector
    lift_sign_seed: Optional[Multivector] = None

    @property
    def dim(self) -> int:
        return self.value.dim

    def __mul__(self, other: SpinCElement) -> SpinCElement:
        return SpinCElement(self.value * other.value)

    def tau(self) -> SpinCElement:
        return SpinCElement(self.value.tau())


def spinc_residues(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Odd, unitarity and vector-preservation residues for stacked elements."""
    g = np.asarray(g, dtype=np.complex128)
    m = g.shape[-1].bit_length() - 1
    odd = np.max(np.abs(np.where(grades(m) % 2 == 1, g, 0)), axis=-1)
    tg = tau_array(g)
    unit = gp_array(tg, g)
    unit[..., 0] -= 1.0
    unit_res = np.max(np.abs(unit), axis=-1)
    vec_res = np.zeros(g.shape[:-1])
    for i in range(m):
        e = np.zeros(1 << m)
        e[1 << i] = 1.0
        _, r = vector_part(gp_array(gp_array(g, e), tg))
        vec_res = np.maximum(vec_res, r)
    return odd, unit_res, vec_res


def is_spinc(g: Multivector | SpinCElement, tol: float = 1e-10) -> SpinCDiagnostic:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(g, SpinCElement):
        g = g.value
    odd, unit, vec = spinc_residues(g.coeffs)
    return SpinCDiagnostic(float(odd), float(unit), float(vec), tol)


def rotor_array(i: int, j: int, theta: np.ndarray, m: int) -> np.ndarray:
    """cos(theta/2) + sin(theta/2) e_i e_j for an array of angles (1-based axes)."""
    if i == j:
        raise ValueError("rotor needs two distinct axes")
    if not (1 <= i <= m and 1 <= j <= m):
        raise ValueError(f"axes ({i}, {j}) out of range for Cl_{m}")
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (1 << m,), dtype=np.complex128)
    out[..., 0] = np.cos(theta / 2)
    blade = (1 << (i - 1)) | (1 << (j - 1))
    # e_i e_j with i > j is -e_{blade}
    out[..., blade] = np.sin(theta / 2) * (1.0 if i < j else -1.0)
    return out


def rotor(i: int, j: int, theta: float, m: int) -> SpinCElement:
    """Lift of the rotation taking e_i to cos(theta) e_i + sin(theta) e_j."""
    return SpinCElement(Multivector(rotor_array(i, j, theta, m)))


def phase(theta: float, m: int) -> SpinCElement:
    return SpinCElement(Multivector.scalar(np.exp(1j * theta), m))


def adjoint(g: SpinCElement, v: Sequence[float], tol: float = 1e-10) -> np.ndarray:
    """Ad(g)v = g v tau(g), as a real coordinate tuple."""
    gv = g.value.coeffs
    w = gp_array(gp_array(gv, vector_array(np.asarray(v, dtype=float))), tau_array(gv))
    return extract_real_vector(Multivector(w), tol)


def adjoint_matrix(g: np.ndarray) -> np.ndarray:
    """Matrix of Ad(g) on R^m for stacked g (columns are images of e_i); no purity check."""
    g = np.asarray(g)
    m = g.shape[-1].bit_length() - 1
    tg = tau_array(g)
    cols = []
    for i in range(m):
        e = np.zeros(1 << m)
        e[1 << i] = 1.0
        cols.append(vector_part(gp_array(gp_array(g, e), tg))[0])
    return np.stack(cols, axis=-1)


def _check_rotation(R: np.ndarray, tol: float = 1e-8) -> None:
    m = R.shape[-1]
    if R.shape[-2] != m:
        raise LiftError("rotation matrix must be square")
    eye = np.eye(m)
    orth = np.max(np.abs(np.swapaxes(R, -1, -2) @ R - eye), initial=0.0)
    if orth > tol:
        raise LiftError(f"matrix is not orthogonal (|R^T R - I| = {orth:.2e})")
    det = np.linalg.det(R) if m else np.ones(R.shape[:-2])
    if np.any(det < 0):
        raise LiftError("matrix has determinant -1; it is not in SO(m)")


def lift_rotations(R: np.ndarray) -> np.ndarray:
    """Rotor lifts of stacked SO(m) matrices via Givens factorisation.

    Returns coefficient arrays of shape ``R.shape[:-2] + (2**m,)``. The sign of
    each lift is whatever the factorisation produces; callers fix signs.
    """
    R = np.array(R, dtype=float)
    _check_rotation(R)
    m = R.shape[-1]
    work = R.copy()
    out = np.zeros(R.shape[:-2] + (1 << m,), dtype=np.complex128)
    out[..., 0] = 1.0
    for j in range(m - 1):
        for i in range(j + 1, m):
            theta = np.arctan2(work[..., i, j], work[..., j, j])
            c, s = np.cos(theta), np.sin(theta)
            rj = work[..., j, :].copy()
            ri = work[..., i, :].copy()
            work[..., j, :] = c[..., None] * rj + s[..., None] * ri
            work[..., i, :] = -s[..., None] * rj + c[..., None] * ri
            # R = Rot_1 Rot_2 ... so lifts multiply on the right
            out = gp_array(out, rotor_array(j + 1, i + 1, theta, m))
    return out


def _canonical_sign(g: np.ndarray) -> np.ndarray:
    """+-1 making the scalar part >= 0, ties broken by first nonzero coefficient."""
    g = np.asarray(g)
    flat = g.reshape(-1, g.shape[-1])
    signs = np.ones(flat.shape[0])
    for row, c in enumerate(flat):
        if abs(c[0].real) > 1e-12:
            signs[row] = np.sign(c[0].real)
            continue
        nz = np.flatnonzero(np.abs(c) > 1e-12)
        if nz.size:
            lead = c[nz[0]]
            signs[row] = 1.0 if (lead.real if abs(lead.real) > 1e-12 else lead.imag) > 0 else -1.0
    return signs.reshape(g.shape[:-1])


def lift_rotation(R: np.ndarray, seed: Optional[SpinCElement] = None) -> SpinCElement:
    """A Spin element g with Ad(g) = R; sign chosen to agree with ``seed`` when given."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2:
        raise LiftError("expected a single square matrix")
    g = lift_rotations(R)
    if seed is not None:
        if seed.dim != R.shape[0]:
            raise LiftError("seed lives in a different algebra")
        overlap = np.real(np.vdot(seed.value.coeffs, g))
        sign = -1.0 if overlap < 0 else 1.0
    else:
        sign = float(_canonical_sign(g))
    return SpinCElement(Multivector(sign * g), lift_sign_seed=seed.value if seed else None)


def include_pair(g_p: SpinCElement, g_q: SpinCElement, n_plus_1: int) -> SpinCElement:
    """Spin^C_p x Spin^C_q -> Spin^C_{n+1}: first block unchanged, second shifted by p."""
    p, q = g_p.dim, g_q.dim
    if p + q + 1 != n_plus_1:
        raise ValueError(f"p + q + 1 = {p + q + 1} does not equal n + 1 = {n_plus_1}")
    a = promote(g_p.value, n_plus_1)
    b = shift_generators(g_q.value, p, n_plus_1)
    return SpinCElement(a * b)
