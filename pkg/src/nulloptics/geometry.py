"""Construction, foliation, and conformal rescaling of 5D metrics.

Coordinates are ordered ``(x0, x1, x2, x3, x5)`` with signature
``diag(-1, 1, 1, 1, 1)``; geometric units with ``c = 1`` are the default and
every charge coupling carries an explicit ``c`` keyword so SI-style scale
factors can be threaded through from a scenario config.

A metric is a plain evaluator mapping a coordinate 5-vector to a symmetric
5x5 matrix.  Slicing along ``x5`` decomposes such a metric into a 4D metric
block, a shift covector (the electromagnetic potential up to the coupling
``q/c^2``), and a lapse scalar; slicing along ``x0`` produces the analogous
decomposition of the time-independent case.  All objects here are immutable
and every operation is pure, so concurrent evaluation is safe.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ConfigError,
    EvaluationError,
    InconsistentChargeError,
    SignatureError,
    SingularConformalError,
    SymmetryError,
)
from .numeric import as_scalar_field, as_vector_field, as_matrix_field

AXES = ("x0", "x1", "x2", "x3", "x5")
MINKOWSKI4 = np.diag([-1.0, 1.0, 1.0, 1.0])
MINKOWSKI5 = np.diag([-1.0, 1.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class Event5:
    """A point of the 5D manifold, components in geometric units."""

    x0: float
    x1: float
    x2: float
    x3: float
    x5: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.array)):
            raise EvaluationError(f"non-finite event components: {self}")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2, self.x3, self.x5])

    @classmethod
    def from_array(cls, arr) -> "Event5":
        a = np.asarray(arr, dtype=float)
        return cls(*a)


@dataclass(frozen=True)
class Event4:
    """A point of a 4D foliation leaf."""

    coords: tuple

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def _point5(point) -> np.ndarray:
    if isinstance(point, Event5):
        return point.array
    p = np.asarray(point, dtype=float)
    if p.shape != (5,):
        raise ValueError(f"expected a 5-component point, got shape {p.shape}")
    return p


@dataclass(frozen=True)
class MetricField5:
    """Position-dependent symmetric 5x5 metric with Lorentzian signature.

    ``independent_of`` declares coordinate symmetries ("x0", "x3", "x5");
    they are promises used by the foliation extractors and can be verified
    against a finite-difference probe with :meth:`verify_independence`.
    """

    func: Callable[[np.ndarray], np.ndarray]
    independent_of: frozenset = frozenset()
    name: str = ""
    symmetry_tol: float = 1e-12

    def matrix(self, point) -> np.ndarray:
        p = _point5(point)
        m = np.asarray(self.func(p), dtype=float)
        if m.shape != (5, 5):
            raise EvaluationError(f"metric evaluator returned shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise EvaluationError(f"non-finite metric at point {p}")
        if np.max(np.abs(m - m.T)) > self.symmetry_tol * max(1.0, np.max(np.abs(m))):
            raise SymmetryError(f"metric not symmetric at point {p}")
        return 0.5 * (m + m.T)

    def inverse(self, point) -> np.ndarray:
        return np.linalg.inv(self.matrix(point))

    def partial(self, point, axis: int, step: float = 1e-4) -> np.ndarray:
        p = _point5(point)
        hi = p.copy(); hi[axis] += step
        lo = p.copy(); lo[axis] -= step
        return (self.matrix(hi) - self.matrix(lo)) / (2.0 * step)

    def signature_ok(self, point) -> bool:
        eig = np.linalg.eigvalsh(self.matrix(point))
        return int(np.sum(eig < 0.0)) == 1 and int(np.sum(eig > 0.0)) == 4

    def verify_independence(self, points, step: float = 1e-4, tol: float = 1e-9):
        """Check declared coordinate independence by finite differences."""
        for point in points:
            for axis_name in self.independent_of:
                axis = AXES.index(axis_name)
                d = self.partial(point, axis, step)
                if np.max(np.abs(d)) >= tol:
                    raise SymmetryError(
                        f"metric '{self.name}' declared independent of {axis_name} "
                        f"but |dh/d{axis_name}| = {np.max(np.abs(d)):.3e} at {point}"
                    )

    def check_signature(self, points):
        for point in points:
            if not self.signature_ok(point):
                raise SignatureError(f"metric '{self.name}' has wrong signature at {point}")


@dataclass(frozen=True)
class FoliationX5:
    """Slice of an x5-independent metric: (4D metric, shift covector, lapse, coupling).

    Fields live on the leaf coordinates ``(x0, x1, x2, x3)``.  ``q`` is the
    passive specific charge of the observed particle; the same 5D metric
    admits one slicing per charge value.
    """

    g: Callable[[np.ndarray], np.ndarray]
    A: Callable[[np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], float]
    q: float
    c: float = 1.0

    def phi_checked(self, p4) -> float:
        value = float(self.phi(np.asarray(p4, dtype=float)))
        if not value > 0.0:
            raise SignatureError(f"lapse scalar must be positive, got {value} at {p4}")
        return value


@dataclass(frozen=True)
class FoliationX0:
    """Slice of a time-independent metric over leaf coordinates (x1, x2, x3, x5)."""

    G: Callable[[np.ndarray], np.ndarray]
    a: Callable[[np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], float]
    Q: float
    c: float = 1.0

    def phi_checked(self, p4) -> float:
        value = float(self.phi(np.asarray(p4, dtype=float)))
        if not value > 0.0:
            raise SignatureError(f"lapse scalar must be positive, got {value} at {p4}")
        return value


@dataclass(frozen=True)
class TildeMetric4:
    """Conformally rescaled 4D metric ``m / scalar^2`` governing trajectories."""

    func: Callable[[np.ndarray], np.ndarray]
    kind: str = "lorentzian"  # or "riemannian"

    def matrix(self, p4) -> np.ndarray:
        return np.asarray(self.func(np.asarray(p4, dtype=float)), dtype=float)

    def signature_ok(self, p4) -> bool:
        eig = np.linalg.eigvalsh(self.matrix(p4))
        if self.kind == "riemannian":
            return bool(np.all(eig > 0.0))
        return int(np.sum(eig < 0.0)) == 1 and int(np.sum(eig > 0.0)) == 3


def assemble_kk_metric(fol: FoliationX5, extra_independence=()) -> MetricField5:
    """Assemble the 5D metric from an x5 slicing.

    Block formula: ``h_55 = phi^2``, ``h_mu5 = (q/c^2) phi^2 A_mu`` and
    ``h_munu = g_munu + (q/c^2)^2 phi^2 A_mu A_nu``.
    """
    k = fol.q / fol.c**2

    def evaluator(p):
        p4 = p[:4]
        g = np.asarray(fol.g(p4), dtype=float)
        A = np.asarray(fol.A(p4), dtype=float)
        phi2 = fol.phi_checked(p4) ** 2
        h = np.empty((5, 5))
        h[:4, :4] = g + k**2 * phi2 * np.outer(A, A)
        h[:4, 4] = k * phi2 * A
        h[4, :4] = h[:4, 4]
        h[4, 4] = phi2
        return h

    flags = frozenset({"x5"} | set(extra_independence))
    return MetricField5(func=evaluator, independent_of=flags, name="kk-assembled")


def assemble_x0_metric(fol: FoliationX0, extra_independence=()) -> MetricField5:
    """Assemble the 5D metric from the time slicing.

    ``h_00 = -phi^2``, ``h_0nu = (Q/c^2) phi^2 a_nu`` and
    ``h_munu = G_munu - (Q/c^2)^2 phi^2 a_mu a_nu`` over mu, nu in {1,2,3,5}.
    """
    k = fol.Q / fol.c**2

    def evaluator(p):
        p4 = p[[1, 2, 3, 4]]
        G = np.asarray(fol.G(p4), dtype=float)
        a = np.asarray(fol.a(p4), dtype=float)
        phi2 = fol.phi_checked(p4) ** 2
        h = np.empty((5, 5))
        h[0, 0] = -phi2
        h[0, 1:] = k * phi2 * a
        h[1:, 0] = h[0, 1:]
        h[1:, 1:] = G - k**2 * phi2 * np.outer(a, a)
        return h

    flags = frozenset({"x0"} | set(extra_independence))
    return MetricField5(func=evaluator, independent_of=flags, name="x0-assembled")


def extract_foliation_x5(h: MetricField5, q: float, c: float = 1.0,
                         x5_ref: float = 0.0) -> FoliationX5:
    """Invert the x5 block formula: phi, A and the 4D metric block from ``h``.

    Requires ``h`` independent of x5 (declared flag) and ``h_55 > 0``.  With
    ``q = 0`` the shift must vanish, otherwise the slicing is inconsistent.
    """
    if "x5" not in h.independent_of:
        raise SymmetryError("metric must be declared independent of x5 to slice along it")

    def embed(p4):
        p4 = np.asarray(p4, dtype=float)
        return np.array([p4[0], p4[1], p4[2], p4[3], x5_ref])

    def block(p4):
        m = h.matrix(embed(p4))
        h55 = m[4, 4]
        if not h55 > 0.0:
            raise SignatureError(f"h_55 must be positive for an x5 slicing, got {h55}")
        return m, h55

    def phi(p4):
        _, h55 = block(p4)
        return float(np.sqrt(h55))

    def A(p4):
        m, h55 = block(p4)
        shift = m[:4, 4]
        if q == 0.0:
            if np.max(np.abs(shift)) > 1e-12 * max(1.0, h55):
                raise InconsistentChargeError(
                    "h_mu5 != 0 with q = 0: no consistent potential exists"
                )
            return np.zeros(4)
        return (c**2 / q) * shift / h55

    def g(p4):
        m, h55 = block(p4)
        shift = m[:4, 4]
        return m[:4, :4] - np.outer(shift, shift) / h55

    return FoliationX5(g=g, A=A, phi=phi, q=q, c=c)


def extract_foliation_x0(h: MetricField5, Q: float, c: float = 1.0,
                         x0_ref: float = 0.0) -> FoliationX0:
    """Invert the time-slicing block formula.  Requires ``h_00 < 0``."""
    if "x0" not in h.independent_of:
        raise SymmetryError("metric must be declared independent of x0 to slice along it")

    def embed(p4):
        p4 = np.asarray(p4, dtype=float)
        return np.array([x0_ref, p4[0], p4[1], p4[2], p4[3]])

    def block(p4):
        m = h.matrix(embed(p4))
        h00 = m[0, 0]
        if not h00 < 0.0:
            raise SignatureError(f"h_00 must be negative for a time slicing, got {h00}")
        return m, -h00

    def phi(p4):
        _, phi2 = block(p4)
        return float(np.sqrt(phi2))

    def a(p4):
        m, phi2 = block(p4)
        shift = m[0, 1:]
        if Q == 0.0:
            if np.max(np.abs(shift)) > 1e-12 * max(1.0, phi2):
                raise InconsistentChargeError(
                    "h_0nu != 0 with Q = 0: no consistent potential exists"
                )
            return np.zeros(4)
        return (c**2 / Q) * shift / phi2

    def G(p4):
        m, phi2 = block(p4)
        shift = m[0, 1:]
        return m[1:, 1:] + np.outer(shift, shift) / phi2

    return FoliationX0(G=G, a=a, phi=phi, Q=Q, c=c)


def conformal_tilde(metric4, scalar, kind: str = "lorentzian") -> TildeMetric4:
    """Divide a 4D metric field componentwise by ``scalar**2``."""
    m_field = as_matrix_field(metric4, 4)
    s_field = as_scalar_field(scalar)

    def func(p4):
        s = s_field(p4)
        if s == 0.0:
            raise SingularConformalError(f"conformal scalar vanishes at {p4}")
        return m_field(p4) / s**2

    return TildeMetric4(func=func, kind=kind)


def kk_inverse_blocks(fol: FoliationX5, point5) -> np.ndarray:
    """Inverse 5D metric from the lapse/shift block formula.

    With shift ``N_mu = -(q/c^2) A_mu`` and lapse ``N = 1/phi`` the inverse is
    ``[[g^munu, N^mu], [N^nu, N_rho N^rho + N^2]]``.
    """
    p4 = _point5(point5)[:4]
    g = np.asarray(fol.g(p4), dtype=float)
    A = np.asarray(fol.A(p4), dtype=float)
    phi = fol.phi_checked(p4)
    k = fol.q / fol.c**2
    n_lo = -k * A
    g_inv = np.linalg.inv(g)
    n_up = g_inv @ n_lo
    out = np.empty((5, 5))
    out[:4, :4] = g_inv
    out[:4, 4] = n_up
    out[4, :4] = n_up
    out[4, 4] = float(n_lo @ n_up) + 1.0 / phi**2
    return out


def weak_field_metric(V=0.0, m: float = 1.0, A0=0.0, Ai=(0.0, 0.0, 0.0),
                      q: float = 0.0, phi=1.0, c: float = 1.0,
                      warn_threshold: float = 0.1,
                      probe_points=None) -> MetricField5:
    """5D metric for weak gravitational and electromagnetic fields.

    Builds the observable 4D metric ``diag(-1 - 2V/(m c^2), 1, 1, 1)``,
    undoes the conformal rescaling with ``phi`` and assembles the full
    metric.  Perturbations larger than ``warn_threshold`` at the probe
    points trigger a warning (the first-order identifications degrade).
    """
    V_f = as_scalar_field(V)
    A0_f = as_scalar_field(A0)
    Ai_f = as_vector_field(Ai, 3)
    phi_f = as_scalar_field(phi)

    def g_tilde(p4):
        out = MINKOWSKI4.copy()
        out[0, 0] = -1.0 - 2.0 * V_f(p4) / (m * c**2)
        return out

    def g(p4):
        return g_tilde(p4) * phi_f(p4) ** 2

    def A(p4):
        return np.concatenate(([A0_f(p4)], Ai_f(p4)))

    if probe_points is None:
        span = np.array([-1.0, 0.0, 1.0])
        probe_points = [np.array([t, x, 0.0, z])
                        for t in span for x in span for z in span]
    worst = 0.0
    for p4 in probe_points:
        worst = max(worst,
                    abs(2.0 * V_f(p4) / (m * c**2)),
                    abs(q / c**2) * float(np.max(np.abs(A(p4)))))
    if worst > warn_threshold:
        warnings.warn(
            f"weak-field perturbation reaches {worst:.3g} (> {warn_threshold}); "
            "first-order identifications may be poor",
            stacklevel=2,
        )

    fol = FoliationX5(g=g, A=A, phi=phi_f, q=q, c=c)
    return assemble_kk_metric(fol)


@dataclass(frozen=True)
class NamedMetric:
    """A built-in metric together with its x5 slicing and parameters."""

    metric: MetricField5
    foliation: FoliationX5
    params: dict = field(default_factory=dict)


def flat5(q: float = 0.0, c: float = 1.0) -> NamedMetric:
    fol = FoliationX5(g=lambda p: MINKOWSKI4, A=lambda p: np.zeros(4),
                      phi=lambda p: 1.0, q=q, c=c)
    metric = MetricField5(func=lambda p: MINKOWSKI5,
                          independent_of=frozenset({"x0", "x3", "x5"}),
                          name="flat5")
    return NamedMetric(metric=metric, foliation=fol, params={"q": q})


def named_metric(name: str, **params) -> NamedMetric:
    """Look up one of the built-in metrics.

    ``flat5`` | ``weak-field`` (uniform gravity ``g_accel``) |
    ``constant-E`` (potential ``A_0 = -E x1``) | ``constant-B``
    (Landau gauge ``A_2 = B x1``).
    """
    c = float(params.get("c", 1.0))
    q = float(params.get("q", 0.0))
    m = float(params.get("m", 1.0))
    if name == "flat5":
        return flat5(q=q, c=c)
    if name == "weak-field":
        g_accel = float(params.get("g_accel", 1e-3))
        fol = FoliationX5(
            g=lambda p4: np.diag([-1.0 - 2.0 * g_accel * p4[3] / c**2, 1.0, 1.0, 1.0]),
            A=lambda p4: np.zeros(4), phi=lambda p4: 1.0, q=q, c=c)
        metric = assemble_kk_metric(fol, extra_independence=("x0",))
        return NamedMetric(metric=metric, foliation=fol,
                           params={"g_accel": g_accel, "q": q, "m": m})
    if name == "constant-E":
        E = float(params.get("E", 1e-3))
        fol = FoliationX5(
            g=lambda p4: MINKOWSKI4,
            A=lambda p4: np.array([-E * p4[1], 0.0, 0.0, 0.0]),
            phi=lambda p4: 1.0, q=q, c=c)
        metric = assemble_kk_metric(fol, extra_independence=("x0", "x3"))
        return NamedMetric(metric=metric, foliation=fol, params={"E": E, "q": q})
    if name == "constant-B":
        B = float(params.get("B", 1e-3))
        fol = FoliationX5(
            g=lambda p4: MINKOWSKI4,
            A=lambda p4: np.array([0.0, 0.0, B * p4[1], 0.0]),
            phi=lambda p4: 1.0, q=q, c=c)
        metric = assemble_kk_metric(fol, extra_independence=("x0", "x3"))
        return NamedMetric(metric=metric, foliation=fol, params={"B": B, "q": q})
    raise ConfigError(f"unknown built-in metric '{name}'")
