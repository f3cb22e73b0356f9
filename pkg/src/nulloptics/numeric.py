"""Small finite-difference and field-coercion helpers used by several modules."""

from __future__ import annotations

from typing import Callable

import numpy as np


def central_diff(func: Callable, point: np.ndarray, axis: int, step: float):
    """Second-order central difference of ``func`` along one coordinate axis."""
    hi = np.array(point, dtype=float)
    lo = np.array(point, dtype=float)
    hi[axis] += step
    lo[axis] -= step
    return (np.asarray(func(hi)) - np.asarray(func(lo))) / (2.0 * step)


def second_diff(func: Callable, point: np.ndarray, i: int, j: int, step: float):
    """Central second derivative d_i d_j of a scalar or array field."""
    p = np.array(point, dtype=float)
    if i == j:
        hi = p.copy(); hi[i] += step
        lo = p.copy(); lo[i] -= step
        return (np.asarray(func(hi)) - 2.0 * np.asarray(func(p))
                + np.asarray(func(lo))) / step**2
    pp = p.copy(); pp[i] += step; pp[j] += step
    pm = p.copy(); pm[i] += step; pm[j] -= step
    mp = p.copy(); mp[i] -= step; mp[j] += step
    mm = p.copy(); mm[i] -= step; mm[j] -= step
    return (np.asarray(func(pp)) - np.asarray(func(pm))
            - np.asarray(func(mp)) + np.asarray(func(mm))) / (4.0 * step**2)


def as_scalar_field(value) -> Callable[[np.ndarray], float]:
    """Coerce a constant or callable into a scalar field over points."""
    if callable(value):
        return lambda p: float(value(np.asarray(p, dtype=float)))
    const = float(value)
    return lambda p: const


def as_vector_field(value, dim: int) -> Callable[[np.ndarray], np.ndarray]:
    """Coerce a constant sequence or callable into a ``dim``-vector field."""
    if callable(value):
        def field(p):
            out = np.asarray(value(np.asarray(p, dtype=float)), dtype=float)
            if out.shape != (dim,):
                raise ValueError(f"vector field returned shape {out.shape}, expected ({dim},)")
            return out
        return field
    const = np.asarray(value, dtype=float)
    if const.shape != (dim,):
        raise ValueError(f"constant vector has shape {const.shape}, expected ({dim},)")
    return lambda p: const


def as_matrix_field(value, dim: int) -> Callable[[np.ndarray], np.ndarray]:
    """Coerce a constant matrix or callable into a ``dim x dim`` matrix field."""
    if callable(value):
        return lambda p: np.asarray(value(np.asarray(p, dtype=float)), dtype=float)
    const = np.asarray(value, dtype=float)
    if const.shape != (dim, dim):
        raise ValueError(f"constant matrix has shape {const.shape}, expected ({dim},{dim})")
    return lambda p: const


# Gauss-Legendre nodes/weights on [0, 1], used for line integrals along links.
_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_01(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


def line_integral(vector_field: Callable, start: np.ndarray, end: np.ndarray,
                  order: int = 16) -> float:
    """Gauss-Legendre approximation of ``int A . dx`` along a straight segment."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    delta = end - start
    nodes, weights = gauss_legendre_01(order)
    total = 0.0
    for s, w in zip(nodes, weights):
        total += w * float(np.dot(vector_field(start + s * delta), delta))
    return total
