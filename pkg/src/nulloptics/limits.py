"""Nonrelativistic and ultrarelativistic reductions of the canonical kernels.

Covers the expansion of the path action around slow motion, time-sliced
evaluation of the resulting quadratic path integral, the positive-kernel
diffusion limit and its thermal parameter maps, the spectral form of the
stationary diffusion generator, and the transverse reduction obtained by
slicing along a proper space direction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NullOpticsError
from .numeric import as_scalar_field, as_vector_field


# ---------------------------------------------------------------------------
# Nonrelativistic expansion of the path action.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonrelExpansion:
    """Leading rest term, sampled bracket integrand, total, and truncation scale."""

    leading: float
    bracket: np.ndarray
    total: float
    truncation_estimate: float


def nonrel_action(times, positions, m: float, q: float = 0.0, V=0.0, A0=0.0,
                  Avec=(0.0, 0.0, 0.0), branch: int = -1, c: float = 1.0,
                  hbar: float = 1.0, vmax_fraction: float = 0.1) -> NonrelExpansion:
    """First-order slow-motion expansion of the dimensionless path action.

    For the particle branch the total is
    ``-lam_inv c (t2 - t1) + lam_inv c * int dt [v^2/2c^2 - (q/c^3) A.v
    - (q/c^2) A0 - V/(m c^2)]`` with ``lam_inv = m c / hbar``; the
    antiparticle branch is the negative of the same expression with the
    charge reversed.  Fields are evaluated at midpoints; the truncation
    estimate is the first neglected velocity order.
    """
    if branch == 1:
        flipped = nonrel_action(times, positions, m, -q, V, A0, Avec,
                                branch=-1, c=c, hbar=hbar,
                                vmax_fraction=vmax_fraction)
        return NonrelExpansion(leading=-flipped.leading, bracket=-flipped.bracket,
                               total=-flipped.total,
                               truncation_estimate=flipped.truncation_estimate)
    if branch != -1:
        raise ValueError("branch must be -1 (particle) or +1 (antiparticle)")

    t = np.asarray(times, dtype=float)
    x = np.asarray(positions, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] != 3:
        x = np.pad(x, ((0, 0), (0, 3 - x.shape[1])))
    V_f = as_scalar_field(V)
    A0_f = as_scalar_field(A0)
    Av_f = as_vector_field(Avec, 3)

    dt = np.diff(t)
    vel = np.diff(x, axis=0) / dt[:, None]
    speed = np.linalg.norm(vel, axis=1)
    if np.max(speed) / c > vmax_fraction:
        raise NullOpticsError(
            f"path speed {np.max(speed):.3g} exceeds {vmax_fraction} c; "
            "the slow-motion expansion does not apply"
        )
    t_mid = 0.5 * (t[1:] + t[:-1])
    x_mid = 0.5 * (x[1:] + x[:-1])
    pts = np.column_stack((c * t_mid, x_mid))  # (x0, x1, x2, x3)

    bracket = np.empty(len(dt))
    for i in range(len(dt)):
        p = pts[i]
        bracket[i] = (speed[i] ** 2 / (2.0 * c**2)
                      - (q / c**3) * float(Av_f(p) @ vel[i])
                      - (q / c**2) * A0_f(p)
                      - V_f(p) / (m * c**2))

    lam_inv = m * c / hbar
    duration = t[-1] - t[0]
    leading = -lam_inv * c * duration
    total = leading + lam_inv * c * float(np.sum(bracket * dt))
    truncation = lam_inv * float(np.sum(speed**4 / (8.0 * c**3) * dt))
    return NonrelExpansion(leading=leading, bracket=bracket, total=total,
                           truncation_estimate=truncation)


# ---------------------------------------------------------------------------
# Time-sliced oscillatory propagator (quadratic action).
# ---------------------------------------------------------------------------

def free_propagator(m: float, t: float, x1: float, x2: float,
                    hbar: float = 1.0) -> complex:
    """Closed-form free propagator ``sqrt(m/2 pi i hbar t) exp(i m dx^2 / 2 hbar t)``."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    pref = np.sqrt(m / (2.0j * np.pi * hbar * t))
    return complex(pref * np.exp(1j * m * (x2 - x1) ** 2 / (2.0 * hbar * t)))


def sliced_propagator(m: float, t: float, x1: float, x2: float, n_slices: int,
                      hbar: float = 1.0, omega: float = 0.0) -> complex:
    """Time-sliced path integral with the quadratic slow-motion action.

    Composes per-slice Gaussian factors ``sqrt(m/2 pi i hbar eps)
    exp(i m dx^2 / 2 hbar eps)``, each followed by the potential phase
    ``exp(-i eps V(x)/hbar)`` at the slice start (first-order splitting).
    A quadratic potential ``V = m omega^2 x^2 / 2`` keeps the composition
    Gaussian, so each slice is integrated in closed form and the only error
    is the splitting error; with ``omega = 0`` the composition is exact.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    eps = t / n_slices
    a = m / (2.0 * hbar * eps)
    v_coeff = eps * m * omega**2 / (2.0 * hbar)

    # State after the first slice, as  P * exp(i (alpha y^2 + beta y)).
    pref = np.sqrt(a / (1j * np.pi))
    P = pref * np.exp(1j * a * x1**2) * np.exp(-1j * v_coeff * x1**2)
    alpha = a + 0.0j
    beta = -2.0 * a * x1 + 0.0j
    for _ in range(n_slices - 1):
        # potential phase at the slice start, then one Gaussian convolution
        alpha = alpha - v_coeff
        denom = a + alpha
        P = P * np.sqrt(a / denom) * np.exp(-1j * beta**2 / (4.0 * denom))
        beta = a * beta / denom
        alpha = a * alpha / denom
    return complex(P * np.exp(1j * (alpha * x2**2 + beta * x2)))


def harmonic_propagator(m: float, omega: float, t: float, x1: float, x2: float,
                        hbar: float = 1.0) -> complex:
    """Closed-form harmonic-oscillator propagator (valid below the first caustic)."""
    s = np.sin(omega * t)
    pref = np.sqrt(m * omega / (2.0j * np.pi * hbar * s))
    phase = (m * omega / (2.0 * hbar * s)
             * ((x1**2 + x2**2) * np.cos(omega * t) - 2.0 * x1 * x2))
    return complex(pref * np.exp(1j * phase))


@dataclass(frozen=True)
class PropagatorCheck:
    sliced: complex
    analytic: complex
    rel_error: float


def schrodinger_free_check(m: float, t: float, x1: float, x2: float,
                           n_slices: int, hbar: float = 1.0) -> PropagatorCheck:
    """Sliced free propagator against the closed-form Gaussian."""
    sliced = sliced_propagator(m, t, x1, x2, n_slices, hbar=hbar)
    exact = free_propagator(m, t, x1, x2, hbar=hbar)
    return PropagatorCheck(sliced=sliced, analytic=exact,
                           rel_error=abs(sliced - exact) / abs(exact))


def free_convolution_residual(m: float, t1: float, t2: float, x1: float,
                              x2: float, hbar: float = 1.0,
                              n_nodes: int = 4001, span: float = 10.0) -> float:
    """Numeric check of ``K(t1+t2) = int dy K(t1; y,x1) K(t2; x2,y)``.

    The oscillatory y-integral is evaluated on the rotated contour
    ``y = y* + exp(i pi/4) s`` through the stationary point, where the
    integrand decays as a real Gaussian; both kernels are entire in y, so
    the rotation is exact.
    """
    a1 = m / (2.0 * hbar * t1)
    a2 = m / (2.0 * hbar * t2)
    y_star = (a1 * x1 + a2 * x2) / (a1 + a2)
    sigma = 1.0 / math.sqrt(a1 + a2)
    s = np.linspace(-span * sigma, span * sigma, n_nodes)
    rot = np.exp(1j * np.pi / 4.0)
    y = y_star + rot * s
    pref1 = np.sqrt(m / (2.0j * np.pi * hbar * t1))
    pref2 = np.sqrt(m / (2.0j * np.pi * hbar * t2))
    integrand = (pref1 * np.exp(1j * a1 * (y - x1) ** 2)
                 * pref2 * np.exp(1j * a2 * (x2 - y) ** 2))
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    integral = rot * trapezoid(integrand, s)
    exact = free_propagator(m, t1 + t2, x1, x2, hbar=hbar)
    return abs(integral - exact) / abs(exact)


# ---------------------------------------------------------------------------
# Diffusion limit of the positive kernel.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WalkKernelCheck:
    walk: float
    analytic: float
    rel_error: float
    normalization: float
    second_moment: float
    second_moment_expected: float


def _binomial_pmf(n: int, ks: np.ndarray) -> np.ndarray:
    logp = (gammaln(n + 1) - gammaln(ks + 1) - gammaln(n - ks + 1)
            - n * math.log(2.0))
    return np.exp(logp)


def fokker_planck_check(Lam: float, u: float, x1: float, x2: float,
                        n_steps: int, c: float = 1.0) -> WalkKernelCheck:
    """Lattice random-walk kernel against the decaying heat kernel.

    The walk takes ``n_steps`` steps of size ``sqrt(c Lam eps)`` over
    physical time ``u`` with per-step survival weight matching an overall
    ``exp(-c u / Lam)``; the continuum limit is
    ``exp(-c u / Lam) (2 pi c Lam u)^{-1/2} exp(-dx^2 / 2 c Lam u)``.
    """
    if u <= 0.0 or Lam <= 0.0:
        raise ValueError("u and Lam must be positive")
    eps = u / n_steps
    step = math.sqrt(c * Lam * eps)
    decay = math.exp(-c * u / Lam)

    # walk sites have pitch 2*step after n steps; evaluate at the nearest site
    j_target = int(round((x2 - x1) / (2.0 * step)))
    net = 2 * j_target
    if abs(net) > n_steps:
        raise ValueError("endpoint farther than the walk can reach")
    if n_steps % 2 != abs(net) % 2:
        net += 1
    x_site = x1 + net * step

    k_up = (n_steps + net) // 2
    pmf = _binomial_pmf(n_steps, np.array([float(k_up)]))[0]
    walk_density = decay * pmf / (2.0 * step)

    var = c * Lam * u
    analytic = decay * math.exp(-(x_site - x1) ** 2 / (2.0 * var)) / math.sqrt(2.0 * np.pi * var)

    ks = np.arange(n_steps + 1, dtype=float)
    pmf_all = _binomial_pmf(n_steps, ks)
    positions = (2.0 * ks - n_steps) * step
    normalization = float(np.sum(pmf_all))  # integral of density * exp(+cu/Lam)
    second = float(np.sum(pmf_all * positions**2))
    return WalkKernelCheck(
        walk=walk_density, analytic=analytic,
        rel_error=abs(walk_density - analytic) / analytic,
        normalization=normalization,
        second_moment=second, second_moment_expected=var,
    )


@dataclass(frozen=True)
class ThermalMap:
    """Thermal-equilibrium parameter dictionary for the diffusion picture."""

    beta: float
    zeta: float
    m: float
    gamma: float
    D_diff: float
    Lam: float
    Lam_inv: float
    M: float
    u_quantum: float


def thermal_map(beta: float, zeta: float, m: float, c: float = 1.0,
                hbar: float = 1.0, k_B: float = 1.0) -> ThermalMap:
    """Map (inverse temperature, drag, mass) to the diffusion-picture constants.

    ``D = 1/(beta zeta)``, ``Lam = 2 D / c``, ``Lam_inv = beta zeta c / 2``,
    ``M = hbar gamma beta m / 2`` (so ``Lam`` is the Compton length of ``M``),
    and the physical-time quantum is twice the friction time, ``2 m / zeta``.
    """
    if beta <= 0.0 or zeta <= 0.0 or m <= 0.0:
        raise ValueError("beta, zeta, m must all be positive")
    gamma = zeta / m
    D = 1.0 / (beta * zeta)
    Lam = 2.0 * D / c
    M = hbar / (Lam * c)
    return ThermalMap(beta=beta, zeta=zeta, m=m, gamma=gamma, D_diff=D,
                      Lam=Lam, Lam_inv=1.0 / Lam, M=M, u_quantum=2.0 / gamma)


def beta_from_Lam(Lam: float, zeta: float, c: float = 1.0) -> float:
    """Round-trip inverse of :func:`thermal_map` in the temperature slot."""
    return 2.0 / (Lam * zeta * c)


@dataclass(frozen=True)
class SpectrumCheck:
    """Mode-resolved decay constants: generator spectrum vs measured walk rates."""

    generator_e: np.ndarray      # e_a for modes 0..n_modes-1 (hbar * rate)
    walk_e: np.ndarray           # same constants measured from the walk kernel
    rel_errors: np.ndarray


def stationary_spectrum_check(Lam: float, box_length: float, n_sites: int,
                              n_fit_steps: int = 400, n_modes: int = 4,
                              c: float = 1.0, hbar: float = 1.0) -> SpectrumCheck:
    """Spectral decomposition of the discrete diffusion generator vs the walk.

    The generator ``(c Lam / 2) Lap - (c / Lam)`` on a periodic grid has
    decay constants ``e_a = hbar [c/Lam + (c Lam / 2) k_eff^2]`` per Fourier
    mode (the zero mode is the pure rest constant).  The decaying random
    walk matched to the same diffusion constant must reproduce them; its
    rates are measured by evolving a point source and fitting the per-mode
    decay between two times.
    """
    dx = box_length / n_sites
    eps = dx**2 / (c * Lam)  # ties the one-site step to the diffusion constant
    modes = np.arange(n_sites)
    k_eff2 = (2.0 - 2.0 * np.cos(2.0 * np.pi * modes / n_sites)) / dx**2
    generator = hbar * (c / Lam + 0.5 * c * Lam * k_eff2)

    decay = math.exp(-c * eps / Lam)

    def step(s):
        return decay * 0.5 * (np.roll(s, 1) + np.roll(s, -1))

    state = np.zeros(n_sites)
    state[0] = 1.0 / dx
    for _ in range(n_fit_steps):
        state = step(state)
    f1 = np.fft.fft(state)[:n_modes]
    for _ in range(n_fit_steps):
        state = step(state)
    f2 = np.fft.fft(state)[:n_modes]
    walk_sel = hbar * (-np.log(np.abs(f2 / f1)) / (n_fit_steps * eps))

    gen_sel = generator[:n_modes]
    return SpectrumCheck(
        generator_e=gen_sel,
        walk_e=walk_sel,
        rel_errors=np.abs(walk_sel - gen_sel) / gen_sel,
    )


def spectrum_identity_ratio(E_values, tmap: ThermalMap, hbar: float = 1.0):
    """Ratio form of the spectral identity between the two ensemble pictures.

    For decay constants in fixed proportion ``e_a / E_a = M / m``, one
    physical-time quantum satisfies ``e_a u / hbar = E_a beta`` exactly.
    Returns the elementwise ratio of the two sides (ones when the map is
    consistent).
    """
    E = np.asarray(E_values, dtype=float)
    e = (tmap.M / tmap.m) * E
    lhs = e * tmap.u_quantum / hbar
    rhs = E * tmap.beta
    return lhs / rhs


# ---------------------------------------------------------------------------
# Transverse reduction: slicing along a proper space direction.
# ---------------------------------------------------------------------------

def transverse_kernel(p_z: float, t: float, r1, r2, m: float, q: float = 0.0,
                      V: float = 0.0, A0: float = 0.0, c: float = 1.0,
                      hbar: float = 1.0, branch: int = -1) -> complex:
    """2D propagator of the ultrarelativistic transverse reduction.

    A particle with large momentum ``p_z`` behaves transversally as a 2D
    quantum particle of effective mass ``p_z / c``; constant ``V`` and
    ``A0`` enter as the energy offset
    ``(c/2p_z)(m c + p_z q A0 / c^2)^2 + (p_z/m c) V + p_z c``.
    """
    ratio = (p_z * c) ** 2 / (m * c**2) ** 2 if m else np.inf
    if ratio < 1.0:
        raise NullOpticsError("p_z^2 must dominate (m c)^2 for the transverse reduction")
    if ratio < 10.0:
        warnings.warn(f"p_z^2/(m c)^2 = {ratio:.2f} < 10; reduction is marginal",
                      stacklevel=2)
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    m_eff = p_z / c
    pref = m_eff / (2.0j * np.pi * hbar * t)
    kinetic = np.exp(1j * m_eff * float(np.sum((r2 - r1) ** 2)) / (2.0 * hbar * t))
    offset = transverse_energy_offset(p_z, m, q=q, V=V, A0=A0, c=c)
    sgn = 1.0 if branch == -1 else -1.0
    return complex(pref * kinetic * np.exp(-1j * sgn * offset * t / hbar))


def transverse_energy_offset(p_z: float, m: float, q: float = 0.0,
                             V: float = 0.0, A0: float = 0.0, c: float = 1.0) -> float:
    """The constant bracket term of the transverse reduction."""
    return ((c / (2.0 * p_z)) * (m * c + p_z * q * A0 / c**2) ** 2
            + ((p_z / (m * c)) * V if V else 0.0) + p_z * c)


@dataclass(frozen=True)
class ModeProjectionCheck:
    projected: complex
    direct: complex
    abs_error: float


def transverse_mode_projection_check(p_z: float, t: float, r1, r2, m: float,
                                     n5: int, c: float = 1.0,
                                     hbar: float = 1.0) -> ModeProjectionCheck:
    """Project the x5-resolved kernel onto the mass mode and compare.

    On a periodic x5 lattice whose modes include ``k = m c / hbar`` exactly,
    the x5-resolved free kernel Fourier-projected onto that mode must equal
    the reduced 2D kernel (no charge, no potential).
    """
    # choose the lattice so the mass mode is the first harmonic
    k_star = m * c / hbar
    L5 = 2.0 * np.pi / k_star
    a5 = L5 / n5
    x5 = np.arange(n5) * a5
    ks = 2.0 * np.pi * np.fft.fftfreq(n5, d=a5)

    # x5-sector kernel from x5=0, spectral dispersion (c/2p_z) (hbar k)^2
    phases = np.exp(-1j * (c / (2.0 * p_z)) * hbar * ks**2 * t)
    kernel5 = (phases[None, :] * np.exp(1j * np.outer(x5, ks))).mean(axis=1) / a5

    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    m_eff = p_z / c
    trans = (m_eff / (2.0j * np.pi * hbar * t)
             * np.exp(1j * m_eff * float(np.sum((r2 - r1) ** 2)) / (2.0 * hbar * t)))
    rest = np.exp(-1j * p_z * c * t / hbar)

    projected = a5 * np.sum(np.exp(-1j * k_star * x5) * kernel5) * trans * rest
    direct = transverse_kernel(p_z, t, r1, r2, m=m, q=0.0, V=0.0, A0=0.0,
                               c=c, hbar=hbar, branch=-1)
    return ModeProjectionCheck(projected=complex(projected), direct=complex(direct),
                               abs_error=abs(complex(projected) - complex(direct)))


def gaussian_spreading_rate(p_z: float, sigma0: float, c: float = 1.0,
                            hbar: float = 1.0) -> float:
    """Asymptotic transverse width growth rate ``hbar / (m_eff sigma0)``."""
    return hbar / ((p_z / c) * sigma0)


def physical_state(coefficients, tol: float = 0.0) -> bool:
    """Positivity rule for statistical wavefunctions: no negative coefficients."""
    return bool(np.all(np.asarray(coefficients, dtype=float) >= -tol))
