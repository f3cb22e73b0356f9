"""Lattice path sums and their transforms: microcanonical counts, oscillatory
and positive canonical kernels, gauge behavior, entropy and Massieu functions.

The lattice realizes per-step nullity in a flat 5D metric: every step
advances time by one spacing ``a`` and moves exactly one of the axes
``x1``/``x5`` by ``+-a`` (so each step has zero 5D interval).  Fixing the
endpoints and the net ``x5`` displacement gives an exactly countable
microcanonical ensemble; a Fourier transform over that displacement gives
the oscillatory quantum kernel, a Laplace transform over the path length
gives the positive statistical kernel.  Transfer-matrix evaluation is exact
(no sampling) for the oscillatory case; a seeded sampling estimator is
provided for the positive case only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import SpacelikeSegmentError
from .numeric import as_matrix_field, as_vector_field, line_integral

VALID_AXES = ("x1", "x5")
ENUMERATION_LIMIT = 24


@dataclass(frozen=True)
class LatticePathModel:
    """Null-step lattice between two events.

    ``axes`` is the nonempty subset of ("x1", "x5") the walk may move in,
    ``n_steps`` the number of time steps (so the endpoints are ``n_steps * a``
    apart in time), ``dx`` the net x1 displacement in lattice units.  The
    origins place the lattice in coordinate space, which matters only when a
    gauge potential is attached.
    """

    axes: tuple
    spacing: float
    n_steps: int
    dx: int = 0
    x_origin: float = 0.0
    t_origin: float = 0.0

    def __post_init__(self):
        if not self.axes or any(a not in VALID_AXES for a in self.axes):
            raise ValueError(f"axes must be a nonempty subset of {VALID_AXES}")
        if len(set(self.axes)) != len(self.axes):
            raise ValueError("duplicate axes")
        if self.spacing <= 0.0:
            raise ValueError("spacing must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be nonnegative")
        if self.dx != 0 and "x1" not in self.axes:
            raise ValueError("dx != 0 requires the x1 axis")

    @property
    def dt(self) -> float:
        return self.n_steps * self.spacing

    def reachable(self, dx5: int = 0) -> bool:
        if dx5 != 0 and "x5" not in self.axes:
            return False
        used = abs(self.dx) + abs(dx5)
        return used <= self.n_steps and (self.n_steps - used) % 2 == 0


@dataclass(frozen=True)
class KernelEstimate:
    """A kernel value with provenance: method, discretization, optional error bar."""

    value: complex
    method: str
    discretization: dict = field(default_factory=dict)
    statistical_error: float | None = None


@dataclass(frozen=True)
class GaugeFunction:
    """Scalar gauge function with its gradient evaluator (4D leaf points)."""

    chi: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]


def _axis_walk_count(n: int, net: int) -> int:
    """Number of n-step +-1 walks with net displacement ``net``."""
    if n < abs(net) or (n - net) % 2:
        return 0
    return math.comb(n, (n + net) // 2)


def count_null_paths(model: LatticePathModel, dx5: int = 0) -> int:
    """Exact number of lattice null paths with the given net x5 displacement.

    Multinomial sum over step tallies; returns 0 when the parity or range
    makes the endpoint unreachable.
    """
    if dx5 != 0 and "x5" not in model.axes:
        return 0
    n = model.n_steps
    if len(model.axes) == 1:
        net = model.dx if model.axes[0] == "x1" else dx5
        if model.axes[0] == "x1" and dx5 != 0:
            return 0
        return _axis_walk_count(n, net)
    total = 0
    for j in range(abs(model.dx), n - abs(dx5) + 1):
        if (j - model.dx) % 2:
            continue
        total += (math.comb(n, j)
                  * _axis_walk_count(j, model.dx)
                  * _axis_walk_count(n - j, dx5))
    return total


def count_table(model: LatticePathModel) -> dict:
    """All endpoint counts at once, by dynamic-programming lattice propagation.

    Returns a map ``(dx, dx5) -> count`` over every reachable endpoint; an
    independent route to :func:`count_null_paths` (site propagation instead
    of closed-form tallies).
    """
    table = {(0, 0): 1}
    moves = []
    if "x1" in model.axes:
        moves += [(1, 0), (-1, 0)]
    if "x5" in model.axes:
        moves += [(0, 1), (0, -1)]
    for _ in range(model.n_steps):
        new: dict = {}
        for (x, x5), cnt in table.items():
            for mx, m5 in moves:
                key = (x + mx, x5 + m5)
                new[key] = new.get(key, 0) + cnt
        table = new
    return table


def enumerate_step_sequences(model: LatticePathModel) -> Iterable[tuple]:
    """Every raw step sequence; exhaustive, so refuses n_steps > 24."""
    if model.n_steps > ENUMERATION_LIMIT:
        raise ValueError(
            f"exhaustive enumeration refused for n_steps > {ENUMERATION_LIMIT}; "
            "use the transfer matrix"
        )
    moves = []
    if "x1" in model.axes:
        moves += [(1, 0), (-1, 0)]
    if "x5" in model.axes:
        moves += [(0, 1), (0, -1)]
    return itertools.product(moves, repeat=model.n_steps)


def count_by_enumeration(model: LatticePathModel, dx5: int = 0) -> int:
    """Brute-force count over all step sequences (small ``n_steps`` only)."""
    total = 0
    for seq in enumerate_step_sequences(model):
        x = sum(s[0] for s in seq)
        x5 = sum(s[1] for s in seq)
        if x == model.dx and x5 == dx5:
            total += 1
    return total


def selfconsistency_residual(model: LatticePathModel, split_step: int,
                             dx5: int = 0) -> int:
    """Concatenation identity for the microcanonical counts.

    The full count must equal the sum over intermediate sites and length
    splits of the product of partial counts; the residual is an exact
    integer and zero for a correct counting rule.
    """
    if not 0 <= split_step <= model.n_steps:
        raise ValueError("split_step out of range")
    first = LatticePathModel(model.axes, model.spacing, split_step)
    second = LatticePathModel(model.axes, model.spacing, model.n_steps - split_step)
    t1 = count_table(first)
    t2 = count_table(second)
    total = 0
    for (x, x5), c1 in t1.items():
        c2 = t2.get((model.dx - x, dx5 - x5), 0)
        total += c1 * c2
    return count_null_paths(model, dx5) - total


# ---------------------------------------------------------------------------
# Oscillatory (quantum) kernel: Fourier transform over the x5 displacement.
# ---------------------------------------------------------------------------

class _StepPhases:
    """Per-step transfer phases on a 1D site array of half-width W.

    With no gauge potential the phases are position-independent.  With a
    potential, each link carries ``exp(-i lam_inv (q/c^2) int A . dx)`` with
    the line integral taken along the straight 4D link (gauge-exact up to
    quadrature error).
    """

    def __init__(self, model, lam_inv, A, q, c, halfwidth, gl_order=16):
        self.model = model
        self.lam_inv = lam_inv
        self.A = None if A is None else as_vector_field(A, 4)
        self.k = q / c**2
        self.W = halfwidth
        self.gl_order = gl_order
        a = model.spacing
        self.fourier5 = np.exp(1j * a * lam_inv) + np.exp(-1j * a * lam_inv)
        self._cache: dict = {}

    def _link_phase(self, start4, end4) -> complex:
        if self.A is None or self.k == 0.0:
            return 1.0
        integral = line_integral(self.A, start4, end4, self.gl_order)
        return np.exp(-1j * self.lam_inv * self.k * integral)

    def site_x(self, j):
        return self.model.x_origin + j * self.model.spacing

    def phases(self, step_index: int):
        if step_index in self._cache:
            return self._cache[step_index]
        a = self.model.spacing
        t0 = self.model.t_origin + step_index * a
        t1 = t0 + a
        sites = np.arange(-self.W, self.W + 1)
        xs = self.model.x_origin + sites * a
        if self.A is None or self.k == 0.0:
            up = dn = np.ones(len(sites), dtype=complex)
            stay = np.full(len(sites), self.fourier5, dtype=complex)
        else:
            up = np.array([self._link_phase((t0, x, 0.0, 0.0), (t1, x + a, 0.0, 0.0))
                           for x in xs])
            dn = np.array([self._link_phase((t0, x, 0.0, 0.0), (t1, x - a, 0.0, 0.0))
                           for x in xs])
            stay = np.array([self._link_phase((t0, x, 0.0, 0.0), (t1, x, 0.0, 0.0))
                             for x in xs]) * self.fourier5
        out = (up, dn, stay)
        self._cache[step_index] = out
        return out

    def apply(self, amp: np.ndarray, step_index: int, adjoint: bool = False) -> np.ndarray:
        up, dn, stay = self.phases(step_index)
        new = np.zeros_like(amp)
        has_x = "x1" in self.model.axes
        has_5 = "x5" in self.model.axes
        if not adjoint:
            if has_x:
                new[1:] += up[:-1] * amp[:-1]
                new[:-1] += dn[1:] * amp[1:]
            if has_5:
                new += stay * amp
        else:
            if has_x:
                new[:-1] += np.conj(up[:-1]) * amp[1:]
                new[1:] += np.conj(dn[1:]) * amp[:-1]
            if has_5:
                new += np.conj(stay) * amp
        return new


def quantum_kernel(model: LatticePathModel, lam_inv: float, *, A=None,
                   q: float = 0.0, c: float = 1.0, sign: int = -1,
                   gl_order: int = 16) -> KernelEstimate:
    """Oscillatory canonical kernel by exact transfer-matrix propagation.

    Equals ``sum_D exp(i D lam_inv) count(D)`` over the net x5 displacement
    ``D``; the flat lattice weighs both cone sheets symmetrically, so the
    branch label only conjugates the value and is recorded as metadata.
    """
    W = model.n_steps
    stepper = _StepPhases(model, lam_inv, A, q, c, W, gl_order)
    amp = np.zeros(2 * W + 1, dtype=complex)
    amp[W] = 1.0
    for n in range(model.n_steps):
        amp = stepper.apply(amp, n)
    value = complex(amp[W + model.dx])
    return KernelEstimate(
        value=value, method="transfer-matrix",
        discretization={"spacing": model.spacing, "n_steps": model.n_steps,
                        "axes": model.axes, "sign": sign},
    )


def quantum_kernel_direct(model: LatticePathModel, lam_inv: float) -> complex:
    """Explicit Fourier sum over microcanonical counts (no gauge potential)."""
    a = model.spacing
    total = 0.0 + 0.0j
    if "x5" not in model.axes:
        return complex(count_null_paths(model, 0))
    for dx5 in range(-model.n_steps, model.n_steps + 1):
        cnt = count_null_paths(model, dx5)
        if cnt:
            total += cnt * np.exp(1j * a * dx5 * lam_inv)
    return total


def quantum_loop_kernel(model: LatticePathModel, lam_inv: float, *, A=None,
                        q: float = 0.0, c: float = 1.0,
                        gl_order: int = 16) -> complex:
    """Kernel over closed loops: ``n_steps`` up the cone then back down.

    The returning leg conjugates every link phase (traversing a link
    backwards negates its action increment).
    """
    W = 2 * model.n_steps
    stepper = _StepPhases(model, lam_inv, A, q, c, W, gl_order)
    amp = np.zeros(2 * W + 1, dtype=complex)
    amp[W] = 1.0
    for n in range(model.n_steps):
        amp = stepper.apply(amp, n)
    for n in reversed(range(model.n_steps)):
        amp = stepper.apply(amp, n, adjoint=True)
    return complex(amp[W])


def probability_identity_residual(model: LatticePathModel, lam_inv: float, *,
                                  A=None, q: float = 0.0, c: float = 1.0) -> float:
    """Residual of the loop-kernel identity against the split form.

    The loop kernel from a point back to itself must equal the sum over
    intermediate sites of the squared modulus of the open kernel.
    """
    loop = quantum_loop_kernel(model, lam_inv, A=A, q=q, c=c)
    W = model.n_steps
    stepper = _StepPhases(model, lam_inv, A, q, c, W)
    amp = np.zeros(2 * W + 1, dtype=complex)
    amp[W] = 1.0
    for n in range(model.n_steps):
        amp = stepper.apply(amp, n)
    split = float(np.sum(np.abs(amp) ** 2))
    return abs(loop - split)


@dataclass(frozen=True)
class GaugeCheck:
    """Measured vs predicted gauge behavior of open and loop kernels."""

    predicted_phase: complex
    measured_ratio: complex
    open_residual: float   # |ratio - predicted|
    loop_delta: float      # relative change of the loop kernel


def gauge_transform_kernel(model: LatticePathModel, lam_inv: float,
                           chi: GaugeFunction, *, A=None, q: float = 1.0,
                           c: float = 1.0, gl_order: int = 16) -> GaugeCheck:
    """Effect of a gauge transformation ``A -> A + grad(chi)`` on the kernels.

    The open kernel must pick up exactly the boundary phase
    ``exp(-i lam_inv (q/c^2) [chi(end) - chi(start)])``; the loop kernel must
    not change.
    """
    base_A = as_vector_field(A, 4) if A is not None else (lambda p: np.zeros(4))

    def shifted(p):
        return base_A(p) + np.asarray(chi.grad(p), dtype=float)

    k0 = quantum_kernel(model, lam_inv, A=base_A, q=q, c=c, gl_order=gl_order).value
    k1 = quantum_kernel(model, lam_inv, A=shifted, q=q, c=c, gl_order=gl_order).value
    a = model.spacing
    start4 = np.array([model.t_origin, model.x_origin, 0.0, 0.0])
    end4 = np.array([model.t_origin + model.n_steps * a,
                     model.x_origin + model.dx * a, 0.0, 0.0])
    predicted = np.exp(-1j * lam_inv * (q / c**2)
                       * (chi.chi(end4) - chi.chi(start4)))
    ratio = k1 / k0
    loop0 = quantum_loop_kernel(model, lam_inv, A=base_A, q=q, c=c, gl_order=gl_order)
    loop1 = quantum_loop_kernel(model, lam_inv, A=shifted, q=q, c=c, gl_order=gl_order)
    return GaugeCheck(
        predicted_phase=complex(predicted),
        measured_ratio=complex(ratio),
        open_residual=abs(ratio - predicted),
        loop_delta=abs(loop1 - loop0) / abs(loop0),
    )


# ---------------------------------------------------------------------------
# Positive (statistical) kernel: Laplace transform over the path length.
# ---------------------------------------------------------------------------

def _axis_targets(model: LatticePathModel, dx5: int) -> tuple:
    target = []
    for axis in model.axes:
        target.append(model.dx if axis == "x1" else dx5)
    return tuple(target)


def _min_steps(model: LatticePathModel, dx5: int) -> int:
    return sum(abs(t) for t in _axis_targets(model, dx5))


def thermal_kernel(model: LatticePathModel, Lam_inv: float, dx5: int = 0,
                   n_max: int | None = None, d_min: float = 0.0) -> KernelEstimate:
    """Positive canonical kernel: Laplace sum over path lengths.

    ``k = sum_n w^n count_n`` with per-step weight ``w = exp(-a Lam_inv)``
    and ``count_n`` the number of n-step walks between the endpoints (all
    axes are site coordinates here).  Lengths below ``d_min`` are cut off
    hard.  ``n_max`` defaults to ``model.n_steps``; pass ``None`` with a
    subcritical weight to sum until the geometric tail is negligible.
    """
    if Lam_inv <= 0.0:
        raise ValueError("Lam_inv must be positive")
    a = model.spacing
    w = math.exp(-a * Lam_inv)
    if n_max is None:
        n_max = model.n_steps
    n_min = max(_min_steps(model, dx5), int(math.ceil(d_min / a - 1e-12)))

    target = _axis_targets(model, dx5)
    ndim = len(model.axes)
    W = max(n_max, 1)
    shape = (2 * W + 1,) * ndim
    amp = np.zeros(shape)
    origin = (W,) * ndim
    amp[origin] = 1.0
    read = tuple(W + t for t in target)
    # Walks of at most n_max steps stay strictly inside the array, so the
    # periodic wrap of np.roll is never populated.
    total = amp[read] if n_min == 0 else 0.0
    for n in range(1, n_max + 1):
        new = np.zeros_like(amp)
        for axis in range(ndim):
            new += w * (np.roll(amp, 1, axis=axis) + np.roll(amp, -1, axis=axis))
        amp = new
        if n >= n_min:
            total += amp[read]
    return KernelEstimate(
        value=float(total), method="transfer-matrix",
        discretization={"spacing": a, "n_max": n_max, "n_min": n_min,
                        "axes": model.axes, "Lam_inv": Lam_inv},
    )


def thermal_kernel_direct(model: LatticePathModel, Lam_inv: float, dx5: int = 0,
                          n_max: int | None = None, d_min: float = 0.0) -> float:
    """Explicit Laplace sum over closed-form microcanonical counts."""
    if Lam_inv <= 0.0:
        raise ValueError("Lam_inv must be positive")
    a = model.spacing
    w = math.exp(-a * Lam_inv)
    if n_max is None:
        n_max = model.n_steps
    n_min = max(_min_steps(model, dx5), int(math.ceil(d_min / a - 1e-12)))
    total = 0.0
    for n in range(n_min, n_max + 1):
        sub = LatticePathModel(model.axes, a, n, dx=model.dx)
        cnt = count_null_paths(sub, dx5)
        if cnt:
            total += w**n * cnt
    return total


def thermal_kernel_sampled(model: LatticePathModel, Lam_inv: float, dx5: int = 0,
                           n_samples: int = 2000, seed: int = 0,
                           n_max: int | None = None) -> KernelEstimate:
    """Sampled estimator of the positive kernel, deterministic per sample index.

    Each sample walks ``n_max`` steps uniformly over moves and scores
    ``(degree * w)^n`` whenever it sits on the target at step ``n``; the
    mean is an unbiased estimate of the Laplace sum.
    """
    a = model.spacing
    w = math.exp(-a * Lam_inv)
    if n_max is None:
        n_max = model.n_steps
    degree = 2 * len(model.axes)
    target = np.array(_axis_targets(model, dx5))
    n_min = _min_steps(model, dx5)
    scores = np.empty(n_samples)
    moves = []
    for axis in range(len(model.axes)):
        for s in (1, -1):
            m = np.zeros(len(model.axes), dtype=int)
            m[axis] = s
            moves.append(m)
    moves = np.array(moves)
    for i in range(n_samples):
        rng = np.random.default_rng((seed, i))
        pos = np.zeros(len(model.axes), dtype=int)
        score = 1.0 if (n_min == 0 and np.all(pos == target)) else 0.0
        factor = 1.0
        picks = rng.integers(0, degree, size=n_max)
        for n in range(1, n_max + 1):
            pos = pos + moves[picks[n - 1]]
            factor *= degree * w
            if n >= n_min and np.all(pos == target):
                score += factor
        scores[i] = score
    mean = float(np.mean(scores))
    err = float(np.std(scores, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return KernelEstimate(
        value=mean, method="sampled",
        discretization={"spacing": a, "n_max": n_max, "n_samples": n_samples,
                        "seed": seed, "Lam_inv": Lam_inv},
        statistical_error=err,
    )


# ---------------------------------------------------------------------------
# Loop ensembles on a finite periodic lattice: entropy and Massieu function.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicLattice:
    """Uniform periodic lattice with ``sites`` sites along each walk axis."""

    axes: tuple
    spacing: float
    sites: int

    def __post_init__(self):
        if not self.axes or any(a not in VALID_AXES for a in self.axes):
            raise ValueError(f"axes must be a nonempty subset of {VALID_AXES}")
        if self.sites < 1:
            raise ValueError("sites must be >= 1")

    def adjacency_spectrum(self) -> np.ndarray:
        """Eigenvalues of the walk adjacency operator (cosine bands)."""
        theta = 2.0 * np.pi * np.arange(self.sites) / self.sites
        band = 2.0 * np.cos(theta)
        eig = band
        for _ in range(len(self.axes) - 1):
            eig = np.add.outer(eig, band).ravel()
        return eig


@dataclass(frozen=True)
class EnsembleLog:
    """Logarithmic ensemble size; ``empty`` flags a zero count (-inf value)."""

    value: float
    empty: bool = False


def entropy_micro(lattice: PeriodicLattice, d: float, k_B: float = 1.0) -> EnsembleLog:
    """Log of the number of closed loops of length ``d``, summed over base points.

    The loop total is the trace of the n-th adjacency power with
    ``n = d / spacing``.
    """
    n = d / lattice.spacing
    n_int = int(round(n))
    if abs(n - n_int) > 1e-9 or n_int < 0:
        raise ValueError(f"length {d} is not a nonnegative multiple of the spacing")
    eig = lattice.adjacency_spectrum()
    total = float(np.sum(eig**n_int)) if n_int else float(len(eig))
    # alternating bands can cancel to roundoff noise; treat that as empty
    floor = 1e-12 * float(np.sum(np.abs(eig) ** n_int)) if n_int else 0.0
    if total <= floor:
        return EnsembleLog(value=float("-inf"), empty=True)
    return EnsembleLog(value=k_B * math.log(total))


def massieu_canonical(lattice: PeriodicLattice, Lam_inv: float,
                      d_min: float = 0.0, n_max: int | None = None,
                      k_B: float = 1.0) -> EnsembleLog:
    """Log of the Laplace-weighted loop sum, the transform partner of the entropy."""
    if Lam_inv <= 0.0:
        raise ValueError("Lam_inv must be positive")
    w = math.exp(-lattice.spacing * Lam_inv)
    eig = lattice.adjacency_spectrum()
    r = w * eig
    n_min = int(math.ceil(d_min / lattice.spacing - 1e-12))
    if n_max is None:
        if np.max(np.abs(r)) >= 1.0:
            raise ValueError("divergent loop sum: w * max|eigenvalue| >= 1")
        partial = np.where(np.abs(1.0 - r) < 1e-300, np.inf,
                           r**n_min / (1.0 - r))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            partial = np.where(np.isclose(r, 1.0),
                               float(n_max - n_min + 1),
                               (r**n_min - r**(n_max + 1)) / (1.0 - r))
    total = float(np.sum(partial))
    if total <= 0.0:
        return EnsembleLog(value=float("-inf"), empty=True)
    return EnsembleLog(value=k_B * math.log(total))


# ---------------------------------------------------------------------------
# Continuum path action over a sampled 4D path.
# ---------------------------------------------------------------------------

def path_action(points, g_tilde, A=None, q: float = 0.0, branch: int = -1,
                c: float = 1.0) -> float:
    """Length-plus-coupling action of a sampled timelike path.

    Per segment: ``branch * sgn(dt) * sqrt(-gt(dx, dx)) - (q/c^2) A(mid) . dx``
    with midpoint field evaluation.  The sign factor makes reversing a path
    negate its action, as the cone-sheet convention requires.  Raises on the
    first spacelike segment.
    """
    pts = np.asarray(getattr(points, "points", points), dtype=float)
    gt = as_matrix_field(getattr(g_tilde, "func", g_tilde), 4)
    A_field = as_vector_field(A, 4) if A is not None else None
    k = q / c**2
    total = 0.0
    for i in range(len(pts) - 1):
        delta = pts[i + 1] - pts[i]
        mid = 0.5 * (pts[i + 1] + pts[i])
        s2 = -float(delta @ gt(mid) @ delta)
        if s2 <= 0.0:
            raise SpacelikeSegmentError(i, -s2)
        total += branch * math.copysign(1.0, delta[0]) * math.sqrt(s2)
        if A_field is not None and k != 0.0:
            total -= k * float(A_field(mid) @ delta)
    return total
