"""Finite-difference connection coefficients, Ricci tensors, and field-equation residuals.

Everything here is a verifier: metrics are supplied, never solved for.  The
routines are dimension-agnostic (used for the full 5D metric and for 4D
leaf metrics alike) and purely functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import FoliationX5
from .numeric import central_diff, second_diff

DEFAULT_STEP = 1e-3


def _matrix_at(metric, point):
    func = getattr(metric, "matrix", None)
    if func is not None:
        return np.asarray(func(point), dtype=float)
    return np.asarray(metric(np.asarray(point, dtype=float)), dtype=float)


def christoffel(metric, point, step: float = DEFAULT_STEP) -> np.ndarray:
    """Connection coefficients Gamma^a_{bc} by central differences.

    ``metric`` is either a matrix-valued callable or an object with a
    ``matrix`` method; the dimension is inferred from the point.
    """
    p = np.asarray(point, dtype=float)
    g = _matrix_at(metric, p)
    g_inv = np.linalg.inv(g)
    dim = len(p)
    dg = np.empty((dim, dim, dim))
    for axis in range(dim):
        dg[axis] = central_diff(lambda x: _matrix_at(metric, x), p, axis, step)
    # T[d,b,c] = d_b g_dc + d_c g_db - d_d g_bc
    T = np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg
    return 0.5 * np.einsum("ad,dbc->abc", g_inv, T)


def ricci(metric, point, step: float = DEFAULT_STEP) -> np.ndarray:
    """Ricci tensor R_ab from second-order differences of the connection."""
    p = np.asarray(point, dtype=float)
    dim = len(p)
    gamma = christoffel(metric, p, step)
    dgamma = np.empty((dim, dim, dim, dim))
    for axis in range(dim):
        hi = p.copy(); hi[axis] += step
        lo = p.copy(); lo[axis] -= step
        dgamma[axis] = (christoffel(metric, hi, step)
                        - christoffel(metric, lo, step)) / (2.0 * step)
    term1 = np.einsum("ccab->ab", dgamma)
    term2 = np.einsum("accb->ab", dgamma)
    contracted = np.einsum("ccd->d", gamma)
    term3 = np.einsum("d,dab->ab", contracted, gamma)
    term4 = np.einsum("cad,dcb->ab", gamma, gamma)
    return term1 - term2 + term3 - term4


@dataclass(frozen=True)
class FieldEqResidual:
    """Left-minus-right residuals of the sliced vacuum field equations."""

    einstein: np.ndarray  # (4, 4)
    maxwell: np.ndarray   # (4,)
    phi: float

    @property
    def max_abs(self) -> float:
        return max(float(np.max(np.abs(self.einstein))),
                   float(np.max(np.abs(self.maxwell))),
                   abs(self.phi))


def em_stress_tensor(F: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Electromagnetic stress block T_ab = g_bm F_al F^lm + (1/4) g_ab F_ml F^ml."""
    g_inv = np.linalg.inv(g)
    F_up = g_inv @ F @ g_inv.T  # F^{lm} = g^{la} g^{mb} F_ab
    scalar = float(np.einsum("ml,ml->", F, F_up))
    return np.einsum("bm,al,lm->ab", g, F, F_up) + 0.25 * g * scalar


def field_equation_residual(fol: FoliationX5, point4, step: float = DEFAULT_STEP) -> FieldEqResidual:
    """Evaluate the conformally rescaled Einstein / Maxwell / lapse equations.

    All three residuals vanish (to finite-difference accuracy) when the
    assembled 5D metric is Ricci flat.  Covariant derivatives and curvature
    use the rescaled 4D metric ``g / phi^2``.
    """
    p4 = np.asarray(point4, dtype=float)
    c, q = fol.c, fol.q

    def gt(x):
        return np.asarray(fol.g(x), dtype=float) / fol.phi_checked(x) ** 2

    def phi_s(x):
        return fol.phi_checked(x)

    def A_vec(x):
        return np.asarray(fol.A(x), dtype=float)

    g = gt(p4)
    g_inv = np.linalg.inv(g)
    gamma = christoffel(gt, p4, step)

    def F_at(x):
        x = np.asarray(x, dtype=float)
        dA = np.empty((4, 4))
        for axis in range(4):
            dA[axis] = central_diff(A_vec, x, axis, step)
        return dA - dA.T  # F_mn = d_m A_n - d_n A_m

    F = F_at(p4)
    F_up = g_inv @ F @ g_inv.T

    # Ricci of the rescaled metric and its scalar.
    R = ricci(gt, p4, step)
    R_scalar = float(np.einsum("ab,ab->", g_inv, R))

    # grad / covariant Hessian of the lapse scalar.
    grad_phi = np.array([float(central_diff(phi_s, p4, axis, step)) for axis in range(4)])
    hess_phi = np.empty((4, 4))
    for i in range(4):
        for j in range(i, 4):
            hess_phi[i, j] = float(second_diff(phi_s, p4, i, j, step))
            hess_phi[j, i] = hess_phi[i, j]
    cov_hess = hess_phi - np.einsum("lmn,l->mn", gamma, grad_phi)

    phi = phi_s(p4)
    bracket = cov_hess - (2.0 / phi) * np.outer(grad_phi, grad_phi)
    T_phi = (bracket - g * float(np.einsum("ab,ab->", g_inv, bracket))) / phi
    T_em = em_stress_tensor(F, g)

    einstein = (R - 0.5 * g * R_scalar
                - (q**2 / (2.0 * c**4)) * T_em - T_phi)

    # div F with the rescaled connection: nabla^m F_mn.
    dF = np.empty((4, 4, 4))
    for axis in range(4):
        dF[axis] = central_diff(F_at, p4, axis, step)
    cov_dF = dF - np.einsum("lam,lv->amv", gamma, F) - np.einsum("lav,ml->amv", gamma, F)
    div_F = np.einsum("am,amv->v", g_inv, cov_dF)
    grad_phi_up = g_inv @ grad_phi
    maxwell = div_F + 3.0 * np.einsum("m,mv->v", grad_phi_up, F) / phi

    box_phi = float(np.einsum("ab,ab->", g_inv, cov_hess))
    phi_res = (box_phi / phi
               - (q**2 / (4.0 * c**4)) * float(np.einsum("ml,ml->", F, F_up))
               - float(np.einsum("ab,ab->", g_inv, T_phi)) / 6.0)

    return FieldEqResidual(einstein=einstein, maxwell=maxwell, phi=phi_res)
