"""Pointwise reconstruction F = <<nu phi, phi>> and checks of the induced geometry."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .clifford import NotARealVector, gp_array, tau_array, vector_array, vector_part
from .geometry import GeometryData
from .killing import SpinorField


@dataclass(frozen=True)
class ErrorStats:
    max: float
    mean: float
    rms: float

    @classmethod
    def of(cls, err: np.ndarray) -> ErrorStats:
        err = np.abs(np.asarray(err, dtype=float)).ravel()
        if err.size == 0:
            return cls(0.0, 0.0, 0.0)
        return cls(float(err.max()), float(err.mean()), float(np.sqrt(np.mean(err**2))))


@dataclass(frozen=True)
class Reconstruction:
    F: np.ndarray  # (*shape, n+1)
    purity: np.ndarray  # (*shape,)
    norm_error: np.ndarray  # (*shape,)


def _sandwich(field_: SpinorField, X: np.ndarray) -> np.ndarray:
    """tau[phi] X [phi] for stacked adapted coordinates X (..., n+1); returns multivectors."""
    phi = field_.values
    return gp_array(gp_array(tau_array(phi), vector_array(X)), phi)


def xi(field_: SpinorField, X, tol: float = 1e-9) -> np.ndarray:
    """xi(X) = <<X phi, phi>> in ambient coordinates; X in the adapted basis."""
    X = np.asarray(X, dtype=float)
    m = field_.dim
    if X.shape[-1] != m:
        raise ValueError(f"X needs {m} adapted coordinates")
    X = np.broadcast_to(X, field_.grid.shape + (m,))
    vec, residue = vector_part(_sandwich(field_, X))
    worst = float(np.max(residue))
    if worst > tol:
        raise NotARealVector(worst, tol)
    return vec


def reconstruct_F(field_: SpinorField, tol: float = 1e-9) -> Reconstruction:
    m = field_.dim
    nu = np.zeros(m)
    nu[-1] = 1.0
    vec, purity = vector_part(_sandwich(field_, np.broadcast_to(nu, field_.grid.shape + (m,))))
    worst = float(np.max(purity))
    if worst > tol:
        raise NotARealVector(worst, tol)
    return Reconstruction(vec, purity, np.abs(np.linalg.norm(vec, axis=-1) - 1))


def xi_basis(field_: SpinorField) -> np.ndarray:
    """xi of every adapted basis vector, shape (*shape, n+1 [basis], n+1 [ambient])."""
    m = field_.dim
    return np.stack([xi(field_, np.eye(m)[a]) for a in range(m)], axis=-2)


def verify_differential(field_: SpinorField, geo: Optional[GeometryData] = None) -> ErrorStats:
    """Central-difference dF(e_k) against xi(e_k)."""
    fr = field_.frames
    F = reconstruct_F(field_).F
    basis = xi_basis(field_)
    err = np.stack([np.linalg.norm(fr.directional(F, k) - basis[..., k, :], axis=-1) for k in range(fr.grid.p)], axis=-1)
    return ErrorStats.of(err)


def verify_isometry(field_: SpinorField) -> ErrorStats:
    """Gram matrix of xi over the whole adapted basis against the identity (algebraic)."""
    m = field_.dim
    phi = field_.values
    imgs = []
    for a in range(m):
        X = np.zeros(m)
        X[a] = 1.0
        imgs.append(vector_part(_sandwich(field_, np.broadcast_to(X, phi.shape[:-1] + (m,))))[0])
    basis = np.stack(imgs, axis=-2)
    gram = np.einsum("...an,...bn->...ab", basis, basis)
    return ErrorStats.of(gram - np.eye(m))


def _normal_projector(basis: np.ndarray, p: int) -> np.ndarray:
    """Project onto the complement of span{xi(e_1..e_p), F} (rows of ``basis``)."""
    keep = np.concatenate([basis[..., :p, :], basis[..., -1:, :]], axis=-2)
    m = basis.shape[-1]
    return np.eye(m) - np.einsum("...jn,...jk->...nk", keep, keep)


@dataclass(frozen=True)
class SecondFormCheck:
    normal: ErrorStats  # B_F against xi(B)
    tangential: ErrorStats  # <e_i(xi(e_k)), F> + <e_i, e_k>


def verify_second_fundamental_form(field_: SpinorField, geo: GeometryData, reference_B: Optional[np.ndarray] = None) -> SecondFormCheck:
    """Compare {e_i(xi(e_k))}^perp with xi(B(e_i, e_k)).

    ``reference_B`` (same layout as ``geo.B``) replaces ``geo.B`` on the right,
    e.g. a closed-form second fundamental form.
    """
    fr = field_.frames
    p, q = fr.grid.p, fr.grid.q
    B = geo.B if reference_B is None else reference_B
    basis = xi_basis(field_)
    F = basis[..., -1, :]
    proj = _normal_projector(basis, p)
    xi_f = basis[..., p : p + q, :]
    normal_err, tang_err = [], []
    for k in range(p):
        col = basis[..., k, :]
        for i in range(p):
            d = fr.directional(col, i)
            BF = np.einsum("...nk,...k->...n", proj, d)
            target = np.einsum("...s,...sn->...n", B[..., :, i, k], xi_f)
            normal_err.append(np.linalg.norm(BF - target, axis=-1))
            tang_err.append(np.einsum("...n,...n->...", d, F) + (1.0 if i == k else 0.0))
    return SecondFormCheck(ErrorStats.of(np.stack(normal_err, -1)), ErrorStats.of(np.stack(tang_err, -1)))


def verify_normal_connection(
    field_: SpinorField,
    geo: GeometryData,
    eta: np.ndarray,
    eta_derivative: Optional[np.ndarray] = None,
) -> ErrorStats:
    """xi(nabla'_{e_k} eta) against {e_k(xi(eta))}^perp.

    ``eta`` holds f-basis coefficients, shape (*shape, q). ``eta_derivative``
    optionally supplies their derivatives along each e_k, shape (*shape, p, q);
    otherwise they are differenced.
    """
    fr = field_.frames
    p, q = fr.grid.p, fr.grid.q
    if q < 1:
        raise ValueError("normal connection check needs q >= 1")
    eta = np.asarray(eta, dtype=float)
    if eta.shape != fr.grid.shape + (q,):
        raise ValueError(f"eta must have shape {fr.grid.shape + (q,)}")
    basis = xi_basis(field_)
    xi_f = basis[..., p : p + q, :]
    proj = _normal_projector(basis, p)
    xi_eta = np.einsum("...s,...sn->...n", eta, xi_f)
    errs = []
    for k in range(p):
        da = eta_derivative[..., k, :] if eta_derivative is not None else fr.directional(eta, k)
        # nabla'_X eta = sum_s (X a^s + sum_t a^t <D_X f_t, f_s>) f_s
        coeff = da + np.einsum("...t,...ts->...s", eta, geo.omega_E[..., k, :, :])
        lhs = np.einsum("...s,...sn->...n", coeff, xi_f)
        rhs = np.einsum("...nk,...k->...n", proj, fr.directional(xi_eta, k))
        errs.append(np.linalg.norm(lhs - rhs, axis=-1))
    return ErrorStats.of(np.stack(errs, -1))


@dataclass(frozen=True)
class Alignment:
    rotation: np.ndarray
    residual: float
    degenerate: bool


def procrustes_align(F: np.ndarray, reference: np.ndarray) -> Alignment:
    """Rotation R in SO(n+1) minimising sum |R F_i - ref_i|^2 (Kabsch with det correction)."""
    F = np.asarray(F, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if F.shape != reference.shape:
        raise ValueError(f"sample sets differ in shape: {F.shape} vs {reference.shape}")
    m = F.shape[-1]
    P = F.reshape(-1, m)
    Q = reference.reshape(-1, m)
    H = P.T @ Q
    U, S, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0
    D = np.diag([1.0] * (m - 1) + [d])
    R = Vt.T @ D @ U.T
    resid = float(np.sqrt(np.mean(np.sum((P @ R.T - Q) ** 2, axis=-1))))
    # with det fixed, the rotation is unique iff rank(H) >= m - 1
    degenerate = bool(m > 1 and S[-2] <= 1e-12 * max(S[0], 1.0))
    return Alignment(R, resid, degenerate)
