"""Flat 5D kinematics: null 5-momenta, isometries, and collision processes.

Every on-shell particle carries a null 5-momentum ``(E/c, p_vec, m c)`` in
the flat metric ``diag(-1,1,1,1,1)``; the usual 4D mass shell is the null
condition in disguise.  The isometries are the pseudo-orthogonal 5x5
matrices; the discrete ones flip time, space, or the fifth axis (the last
being a charge/mass conjugation).  Spins and charge dynamics are ignored:
the only interaction is 5-momentum-conserving collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NullConstraintError, PseudoOrthogonalityError, ThresholdError

ETA5 = np.diag([-1.0, 1.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class FiveMomentum:
    """On-shell 5-momentum; ``p5 = m c`` carries the mass."""

    p0: float
    p1: float
    p2: float
    p3: float
    p5: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2, self.p3, self.p5])

    @property
    def spatial(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])

    def null_residual(self) -> float:
        a = self.array
        return float(a @ ETA5 @ a)

    def energy(self, c: float = 1.0) -> float:
        return self.p0 * c

    def mass(self, c: float = 1.0) -> float:
        return self.p5 / c

    @classmethod
    def from_array(cls, arr) -> "FiveMomentum":
        return cls(*np.asarray(arr, dtype=float))


def make_null_momentum(E: float, direction, m: float, c: float = 1.0) -> FiveMomentum:
    """Null 5-momentum with energy ``E``, 3-direction, and mass ``m``.

    Requires ``E^2 >= (m c^2)^2``; the spatial magnitude is fixed by the
    null condition.
    """
    if E**2 < (m * c**2) ** 2:
        raise ThresholdError(
            f"energy {E} below the mass shell of m = {m} (need E^2 >= m^2 c^4)"
        )
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        if E**2 > (m * c**2) ** 2:
            raise ValueError("nonzero momentum needs a direction")
        n = np.array([0.0, 0.0, 1.0])
        norm = 1.0
    n = n / norm
    p_mag = math.sqrt(E**2 / c**2 - (m * c) ** 2)
    return FiveMomentum(E / c, *(p_mag * n), m * c)


@dataclass(frozen=True)
class Transform5:
    """Isometry of the flat 5D metric; validated on construction."""

    matrix: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.shape != (5, 5):
            raise PseudoOrthogonalityError(f"expected a 5x5 matrix, got {M.shape}")
        defect = np.max(np.abs(M.T @ ETA5 @ M - ETA5))
        if defect > 1e-12:
            raise PseudoOrthogonalityError(
                f"matrix does not preserve the flat metric (defect {defect:.3e})"
            )
        object.__setattr__(self, "matrix", M)

    def __matmul__(self, other: "Transform5") -> "Transform5":
        return Transform5(self.matrix @ other.matrix,
                          kind=f"{self.kind}*{other.kind}")


def rotation(axis_a: int, axis_b: int, angle: float) -> Transform5:
    """Rotation in the (axis_a, axis_b) plane; axes 1..3 or 5 (index 4)."""
    i = 4 if axis_a == 5 else axis_a
    j = 4 if axis_b == 5 else axis_b
    if 0 in (i, j):
        raise ValueError("rotation axes must be spatial (1, 2, 3, or 5)")
    M = np.eye(5)
    M[i, i] = M[j, j] = math.cos(angle)
    M[i, j] = -math.sin(angle)
    M[j, i] = math.sin(angle)
    return Transform5(M, kind="rotation")


def boost(axis: int, rapidity: float) -> Transform5:
    """Boost mixing time with one spatial axis (1..3) or the fifth (5)."""
    i = 4 if axis == 5 else axis
    if i == 0:
        raise ValueError("boost axis must be spatial (1, 2, 3, or 5)")
    M = np.eye(5)
    M[0, 0] = M[i, i] = math.cosh(rapidity)
    M[0, i] = M[i, 0] = -math.sinh(rapidity)
    kind = "x5-boost" if i == 4 else "boost"
    return Transform5(M, kind=kind)


def charge_conjugation() -> Transform5:
    return Transform5(np.diag([1.0, 1.0, 1.0, 1.0, -1.0]), kind="C")


def parity() -> Transform5:
    return Transform5(np.diag([1.0, -1.0, -1.0, -1.0, 1.0]), kind="P")


def time_reversal() -> Transform5:
    return Transform5(np.diag([-1.0, 1.0, 1.0, 1.0, 1.0]), kind="T")


def apply_transform(T: Transform5, obj):
    """Apply an isometry to a 5-momentum, event, or raw 5-vector."""
    arr = getattr(obj, "array", obj)
    out = T.matrix @ np.asarray(arr, dtype=float)
    if isinstance(obj, FiveMomentum):
        return FiveMomentum.from_array(out)
    if hasattr(obj, "array") and not isinstance(obj, FiveMomentum):
        return type(obj)(*out)
    return out


def _boost_matrix_4d(beta_vec: np.ndarray) -> np.ndarray:
    """General 4D boost embedded in the 5x5 identity (fifth row untouched)."""
    beta2 = float(beta_vec @ beta_vec)
    M = np.eye(5)
    if beta2 == 0.0:
        return M
    gamma = 1.0 / math.sqrt(1.0 - beta2)
    M[0, 0] = gamma
    M[0, 1:4] = -gamma * beta_vec
    M[1:4, 0] = -gamma * beta_vec
    M[1:4, 1:4] = np.eye(3) + (gamma - 1.0) * np.outer(beta_vec, beta_vec) / beta2
    return M


def pair_creation(photon1: FiveMomentum, photon2: FiveMomentum,
                  m_X: float, c: float = 1.0) -> tuple:
    """Two massless quanta into a particle-antiparticle pair of mass ``m_X``.

    Conservation of all five momentum components forces the antiparticle
    mass to ``-m_X`` and reduces the rest to equal-mass two-body
    kinematics, solved in the center-of-momentum frame and boosted back.
    The returned pair conserves the total exactly by construction.
    """
    for p in (photon1, photon2):
        scale = max(1.0, p.p0**2)
        if abs(p.null_residual()) > 1e-10 * scale or abs(p.p5) > 1e-10 * math.sqrt(scale):
            raise NullConstraintError("pair creation requires massless null inputs")
    total = photon1.array + photon2.array
    E_tot = total[0] * c
    p_tot = total[1:4]
    w2 = E_tot**2 - float(p_tot @ p_tot) * c**2  # invariant mass^2 * c^4
    if w2 < (2.0 * m_X * c**2) ** 2 - 1e-12 * max(1.0, E_tot**2):
        raise ThresholdError(
            f"total invariant mass {math.sqrt(max(w2, 0.0)):.3g} below pair threshold "
            f"{2.0 * m_X * c**2:.3g}"
        )
    w = math.sqrt(w2)

    beta = p_tot * c / E_tot
    to_cm = Transform5(_boost_matrix_4d(beta), kind="boost")
    back = Transform5(_boost_matrix_4d(-beta), kind="boost")

    p1_cm = to_cm.matrix @ photon1.array
    E_star = 0.5 * w
    p_star = math.sqrt(max(E_star**2 / c**2 - (m_X * c) ** 2, 0.0))
    axis = p1_cm[1:4]
    norm = np.linalg.norm(axis)
    direction = axis / norm if norm > 0.0 else np.array([0.0, 0.0, 1.0])

    pX_cm = np.concatenate(([E_star / c], p_star * direction, [m_X * c]))
    pX = back.matrix @ pX_cm
    pX[4] = m_X * c  # 4D boosts leave the fifth component alone
    pXbar = total - pX
    return FiveMomentum.from_array(pX), FiveMomentum.from_array(pXbar)


@dataclass(frozen=True)
class RestFramePictures:
    """The two readings of a rest-frame null 5-momentum.

    The mechanical picture reads ``(E/c, 0, m c)``; the thermal picture
    reads the same components as ``(M c, 0, e/c)``.  Only ratios between
    different momenta are meaningful; the absolute proportionality
    constants are not fixed.
    """

    energy_over_c: float
    mass_times_c: float
    thermal_mass_times_c: float
    thermal_energy_over_c: float
    degenerate: bool


def rest_frame_pictures(p: FiveMomentum, tol: float = 1e-12) -> RestFramePictures:
    """Read a macroscopically-at-rest momentum in both ensemble pictures."""
    scale = max(abs(p.p0), abs(p.p5), 1.0)
    if float(np.max(np.abs(p.spatial))) > tol * scale:
        raise ValueError("rest-frame pictures require vanishing 3-momentum")
    degenerate = abs(p.p5) <= tol * scale or abs(p.p0) <= tol * scale
    return RestFramePictures(
        energy_over_c=p.p0,
        mass_times_c=p.p5,
        thermal_mass_times_c=p.p0,
        thermal_energy_over_c=p.p5,
        degenerate=degenerate,
    )


def picture_ratios(a: FiveMomentum, b: FiveMomentum) -> tuple:
    """Ratios (thermal-mass ratio, mechanical-mass ratio) between two rest momenta."""
    pa = rest_frame_pictures(a)
    pb = rest_frame_pictures(b)
    if pa.degenerate or pb.degenerate:
        raise ValueError("degenerate picture: zero mass or energy component")
    return (pb.thermal_mass_times_c / pa.thermal_mass_times_c,
            pb.mass_times_c / pa.mass_times_c)
