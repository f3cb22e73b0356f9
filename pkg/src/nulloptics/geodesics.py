"""Null geodesics of 5D metrics and their projected 4D charged trajectories.

The 5D integrator follows affinely parametrized null geodesics of the full
metric; the 4D integrator follows the equivalent charged-particle equation
of motion in the rescaled leaf metric, parametrized by the proper time
``dtau^2 = -gt_munu dx^mu dx^nu``.  Branch labels follow the action sign
convention: ``branch = -1`` is a particle propagating forward in time (the
default), ``branch = +1`` the antiparticle.  For the particle branch the
equation of motion reads

    xddot^t + Gamma^t_mn xdot^m xdot^n + (q/c^2) gt^{ts} F_sr xdot^r = 0,

which is what the action with a leading minus sign extremizes (flipping the
branch is the same as flipping the charge).

All integrators are fixed-step classical Runge-Kutta (4th order) and pure;
batches of trajectories can safely run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .curvature import christoffel
from .errors import (
    NormalizationError,
    NullConstraintError,
    ProjectionError,
    SignatureError,
    SymmetryError,
)
from .geometry import FoliationX5, MetricField5, _point5
from .numeric import as_matrix_field, as_vector_field, central_diff


@dataclass(frozen=True)
class GeodesicConfig:
    """Fixed-step integrator settings."""

    step: float
    n_steps: int
    null_projection_interval: int = 16  # 0 disables re-projection
    derivative_step: float = 1e-4       # finite-difference step for the connection

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")


@dataclass(frozen=True)
class Path5:
    """Sampled 5D path: parameter values, events, velocities, null residuals."""

    params: np.ndarray
    points: np.ndarray      # (n, 5)
    velocities: np.ndarray  # (n, 5)
    null_residuals: np.ndarray
    tag: str = "affine"

    def __post_init__(self):
        if np.any(np.diff(self.params) <= 0.0):
            raise ValueError("path parameter must be strictly increasing")


@dataclass(frozen=True)
class Path4:
    """Sampled 4D path over a foliation leaf."""

    params: np.ndarray
    points: np.ndarray      # (n, 4)
    velocities: np.ndarray  # (n, 4)
    tag: str = "proper-time"

    def __post_init__(self):
        if np.any(np.diff(self.params) <= 0.0):
            raise ValueError("path parameter must be strictly increasing")


@dataclass(frozen=True)
class ConservedSeries:
    """A conserved quantity sampled along a path, with its observed drift."""

    values: np.ndarray

    @property
    def max_drift(self) -> float:
        return float(np.max(np.abs(self.values - self.values.mean())))


def _rk4(deriv: Callable, y0: np.ndarray, h: float, n: int) -> np.ndarray:
    out = np.empty((n + 1, len(y0)))
    out[0] = y0
    y = np.array(y0, dtype=float)
    for i in range(n):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * h * k1)
        k3 = deriv(y + 0.5 * h * k2)
        k4 = deriv(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = y
    return out


def null_residual(h: MetricField5, x, v) -> float:
    m = h.matrix(x)
    return float(v @ m @ v)


def _reproject_null(h: MetricField5, x, v) -> np.ndarray:
    """Rescale the x5 velocity component so the velocity is exactly null."""
    m = h.matrix(x)
    alpha = m[4, 4]
    beta = 2.0 * float(m[:4, 4] @ v[:4])
    gamma = float(v[:4] @ m[:4, :4] @ v[:4])
    disc = beta**2 - 4.0 * alpha * gamma
    if disc < 0.0:
        return v  # no real null cone through this 4-velocity; leave untouched
    roots = ((-beta + np.sqrt(disc)) / (2.0 * alpha),
             (-beta - np.sqrt(disc)) / (2.0 * alpha))
    v_new = v.copy()
    v_new[4] = min(roots, key=lambda r: abs(r - v[4]))
    return v_new


def integrate_null_geodesic_5d(h: MetricField5, x0, v0,
                               cfg: GeodesicConfig) -> Path5:
    """Integrate a null geodesic of ``h`` in its affine parametrization.

    The initial velocity must satisfy the null constraint to 1e-10; drift is
    controlled by periodic re-projection onto the null cone.
    """
    x0 = _point5(x0)
    v0 = np.asarray(v0, dtype=float)
    scale = max(1.0, float(np.max(np.abs(v0))) ** 2)
    if abs(null_residual(h, x0, v0)) > 1e-10 * scale:
        raise NullConstraintError(
            f"initial velocity is not null: h(v,v) = {null_residual(h, x0, v0):.3e}"
        )

    def deriv(y):
        x, v = y[:5], y[5:]
        gamma = christoffel(h, x, cfg.derivative_step)
        acc = -np.einsum("abc,b,c->a", gamma, v, v)
        return np.concatenate((v, acc))

    n = cfg.n_steps
    samples = np.empty((n + 1, 10))
    samples[0] = np.concatenate((x0, v0))
    y = samples[0].copy()
    h_step = cfg.step
    for i in range(n):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * h_step * k1)
        k3 = deriv(y + 0.5 * h_step * k2)
        k4 = deriv(y + h_step * k3)
        y = y + (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if cfg.null_projection_interval and (i + 1) % cfg.null_projection_interval == 0:
            y[5:] = _reproject_null(h, y[:5], y[5:])
        samples[i + 1] = y

    params = np.arange(n + 1) * cfg.step
    points, vels = samples[:, :5], samples[:, 5:]
    residuals = np.array([null_residual(h, x, v) for x, v in zip(points, vels)])
    return Path5(params=params, points=points, velocities=vels,
                 null_residuals=residuals, tag="affine")


def _faraday(A_field, p4, step) -> np.ndarray:
    dA = np.empty((4, 4))
    for axis in range(4):
        dA[axis] = central_diff(A_field, p4, axis, step)
    return dA - dA.T


def integrate_charged_geodesic_4d(g_tilde, A, q: float, x0, u0,
                                  cfg: GeodesicConfig, branch: int = -1,
                                  c: float = 1.0) -> Path4:
    """Integrate the charged-particle trajectory in the rescaled 4D metric.

    ``u0`` must be normalized, ``gt(u0, u0) = -1``, consistent with the
    proper-time parametrization.
    """
    gt = as_matrix_field(getattr(g_tilde, "func", g_tilde), 4)
    A_field = as_vector_field(A, 4)
    x0 = np.asarray(x0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    norm = float(u0 @ gt(x0) @ u0)
    if abs(norm + 1.0) > 1e-10:
        raise NormalizationError(f"gt(u0, u0) = {norm}, expected -1")
    k = q / c**2

    def deriv(y):
        x, u = y[:4], y[4:]
        gamma = christoffel(gt, x, cfg.derivative_step)
        acc = -np.einsum("abc,b,c->a", gamma, u, u)
        if k != 0.0:
            F = _faraday(A_field, x, cfg.derivative_step)
            acc = acc + branch * k * (np.linalg.inv(gt(x)) @ F @ u)
        return np.concatenate((u, acc))

    samples = _rk4(deriv, np.concatenate((x0, u0)), cfg.step, cfg.n_steps)
    params = np.arange(cfg.n_steps + 1) * cfg.step
    return Path4(params=params, points=samples[:, :4],
                 velocities=samples[:, 4:], tag="proper-time")


@dataclass(frozen=True)
class Projection4:
    """4D projection of a 5D null path with its constraint residual."""

    path: Path4
    constraint_residual: np.ndarray  # per-sample residual of the unit x5-flux relation


def project_to_4d(p5: Path5, fol: FoliationX5) -> Projection4:
    """Drop x5, re-parametrize by the rescaled-metric proper time.

    Also reports, per sample, the residual of the null-cone relation
    ``(dx5/dtau + (q/c^2) A_mu dx^mu/dtau)^2 = 1`` that the projected
    trajectory of a null geodesic must satisfy.
    """
    k = fol.q / fol.c**2
    n = len(p5.params)
    speed = np.empty(n)
    residual = np.empty(n)
    for i in range(n):
        p4 = p5.points[i, :4]
        v4 = p5.velocities[i, :4]
        gt = np.asarray(fol.g(p4), dtype=float) / fol.phi_checked(p4) ** 2
        s2 = -float(v4 @ gt @ v4)
        if s2 <= 0.0:
            raise ProjectionError(
                f"projected segment at sample {i} is not timelike (dtau^2 = {s2:.3e})"
            )
        speed[i] = np.sqrt(s2)
        A = np.asarray(fol.A(p4), dtype=float)
        flux = (p5.velocities[i, 4] + k * float(A @ v4)) / speed[i]
        residual[i] = flux**2 - 1.0

    # cumulative proper time by the trapezoid rule
    dparam = np.diff(p5.params)
    tau = np.concatenate(([0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * dparam)))
    vels = p5.velocities[:, :4] / speed[:, None]
    return Projection4(
        path=Path4(params=tau, points=p5.points[:, :4], velocities=vels,
                   tag="proper-time"),
        constraint_residual=residual,
    )


def conserved_mbar(p5: Path5, fol: FoliationX5,
                   metric: MetricField5 | None = None) -> ConservedSeries:
    """Killing charge of x5 translations along an affinely parametrized null path.

    Defined with respect to the conformally rescaled metric ``h / phi^2``:
    along a null geodesic that is affine for ``h``, the rescaled affine
    parameter satisfies ``dsigma = dsigma_h / phi^2`` (constant fixed at the
    start), which collapses the charge to ``h_5B dx^B/dsigma_h``, i.e.
    ``phi^2 (dx5/dsigma + (q/c^2) A_mu dx^mu/dsigma)``.
    """
    if metric is not None and "x5" not in metric.independent_of:
        raise SymmetryError("x5-translation charge requires an x5-independent metric")
    k = fol.q / fol.c**2
    values = np.empty(len(p5.params))
    for i in range(len(values)):
        p4 = p5.points[i, :4]
        v = p5.velocities[i]
        phi2 = fol.phi_checked(p4) ** 2
        A = np.asarray(fol.A(p4), dtype=float)
        values[i] = phi2 * (v[4] + k * float(A @ v[:4]))
    return ConservedSeries(values=values)


def integrate_zero_kelvin(G_tilde, a, Q: float, x0, u0,
                          cfg: GeodesicConfig, c: float = 1.0) -> Path4:
    """Minimal-physical-time rays in the Riemannian leaf metric.

    Solves ``xddot^t + Gamma^t_mn xdot^m xdot^n + (Q/c^2) Gt^{ts} f_sr xdot^r = 0``
    in the unit-speed parametrization ``dtau = sqrt(Gt_mn dx^m dx^n)``.  With
    ``a = 0`` and a conformally flat ``Gt = n(x)^2 I`` this is the ray
    equation of geometrical optics with refractive index ``n``.
    """
    Gt = as_matrix_field(getattr(G_tilde, "func", G_tilde), 4)
    a_field = as_vector_field(a, 4)
    x0 = np.asarray(x0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    G0 = Gt(x0)
    if np.any(np.linalg.eigvalsh(G0) <= 0.0):
        raise SignatureError("leaf metric must be positive definite")
    norm = float(u0 @ G0 @ u0)
    if abs(norm - 1.0) > 1e-10:
        raise NormalizationError(f"Gt(u0, u0) = {norm}, expected +1")
    kappa = Q / c**2

    def deriv(y):
        x, u = y[:4], y[4:]
        gamma = christoffel(Gt, x, cfg.derivative_step)
        acc = -np.einsum("abc,b,c->a", gamma, u, u)
        if kappa != 0.0:
            f = _faraday(a_field, x, cfg.derivative_step)
            acc = acc - kappa * (np.linalg.inv(Gt(x)) @ f @ u)
        return np.concatenate((u, acc))

    samples = _rk4(deriv, np.concatenate((x0, u0)), cfg.step, cfg.n_steps)
    params = np.arange(cfg.n_steps + 1) * cfg.step
    return Path4(params=params, points=samples[:, :4],
                 velocities=samples[:, 4:], tag="unit-speed")


def conserved_mbar_statistical(path: Path4, G_tilde) -> ConservedSeries:
    """Killing charge of time translations along a minimal-time ray.

    Lifting the ray to the 5D null cone with a unit physical-time flux and
    converting to the affine parameter of the rescaled metric turns the
    charge into ``-sqrt(Gt_mn xdot^m xdot^n)``; its drift measures how well
    the integrator preserves the unit-speed normalization.
    """
    Gt = as_matrix_field(getattr(G_tilde, "func", G_tilde), 4)
    values = np.empty(len(path.params))
    for i in range(len(values)):
        u = path.velocities[i]
        values[i] = -np.sqrt(float(u @ Gt(path.points[i]) @ u))
    return ConservedSeries(values=values)
