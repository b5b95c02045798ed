"""Periodic quadrature and grid utilities.

Every boundary integral in the package is reduced to an integral over one
period of a parameter θ and evaluated with the equispaced trapezoid rule.
Refinement doubles the node count and reuses the previous samples.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, List, Sequence, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Ceiling used when callers do not pass their own n_max.
DEFAULT_N_MAX = 2 ** 20

T = TypeVar("T")
R = TypeVar("R")


class QuadratureDomainError(ValueError):
    """Raised for empty sample sequences or malformed grids."""


# ── Grids ─────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class PeriodicGrid:
    """Equispaced nodes θ_j = offset + 2πj/n on one period."""

    n: int
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise QuadratureDomainError(f"grid needs at least one node, got n={self.n}")
        if not 0.0 <= self.offset < self.step:
            raise QuadratureDomainError(
                f"offset {self.offset!r} outside [0, 2π/n) for n={self.n}"
            )

    @classmethod
    def shifted(cls, n: int, phase: float) -> "PeriodicGrid":
        """Grid whose nodes include ``phase`` (reduced into the admissible offset range)."""
        step = TWO_PI / n
        offset = math.fmod(phase, step) % step
        if offset >= step:
            offset = 0.0
        return cls(n, offset)

    @property
    def step(self) -> float:
        return TWO_PI / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.offset + self.step * np.arange(self.n)

    def refined(self) -> "PeriodicGrid":
        """The doubled grid; it contains every node of this one."""
        return PeriodicGrid(2 * self.n, self.offset)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    n_used: int
    est_error: float
    converged: bool = True


# ── Rules ─────────────────────────────────────────────────────────────────


def periodic_trapezoid(samples: Sequence[complex] | np.ndarray) -> complex:
    """Return (2π/n)·Σ samples for samples taken on an equispaced periodic grid."""
    arr = np.asarray(samples, dtype=complex).ravel()
    if arr.size == 0:
        raise QuadratureDomainError("periodic_trapezoid needs at least one sample")
    return complex(arr.sum() * (TWO_PI / arr.size))


def _sample(integrand: Callable[[np.ndarray], np.ndarray], theta: np.ndarray) -> np.ndarray:
    values = np.asarray(integrand(theta), dtype=complex)
    if values.ndim == 0:
        values = np.full(theta.shape, complex(values))
    return values


def adaptive_integral(
    integrand: Callable[[np.ndarray], np.ndarray],
    n0: int = 16,
    tol: float = 1e-10,
    n_max: int = DEFAULT_N_MAX,
    offset: float = 0.0,
) -> QuadratureResult:
    """Integrate a vectorized periodic integrand over [0, 2π) by grid doubling.

    Stops once two successive levels differ by less than ``tol``. If the next
    doubling would exceed ``n_max`` the last value is returned with
    ``converged=False``.
    """
    if n0 < 8:
        raise QuadratureDomainError(f"n0 must be at least 8, got {n0}")
    if tol <= 0:
        raise QuadratureDomainError(f"tol must be positive, got {tol}")

    grid = PeriodicGrid.shifted(n0, offset)
    samples = _sample(integrand, grid.nodes)
    value = periodic_trapezoid(samples)
    est_error = math.inf

    while 2 * grid.n <= n_max:
        fresh_nodes = grid.nodes + 0.5 * grid.step
        fresh = _sample(integrand, fresh_nodes)
        merged = np.empty(2 * grid.n, dtype=complex)
        merged[0::2] = samples
        merged[1::2] = fresh
        samples = merged
        grid = grid.refined()

        new_value = periodic_trapezoid(samples)
        est_error = abs(new_value - value)
        value = new_value
        logger.debug("adaptive_integral n=%d diff=%.3e", grid.n, est_error)
        if est_error < tol:
            return QuadratureResult(value, grid.n, est_error, True)

    logger.warning(
        "adaptive_integral stopped at n=%d without reaching tol=%.1e (diff=%.3e)",
        grid.n, tol, est_error,
    )
    return QuadratureResult(value, grid.n, est_error, False)


def periodic_antiderivative(samples: Sequence[float] | np.ndarray) -> np.ndarray:
    """Cumulative integral from the first node for equispaced periodic samples.

    The mean is integrated linearly and every other Fourier mode is divided
    by ik, so the result is spectrally accurate for smooth samples. The value
    at the first node is 0; the full-period total is ``periodic_trapezoid``.
    """
    arr = np.asarray(samples)
    n = arr.size
    if n == 0:
        raise QuadratureDomainError("periodic_antiderivative needs at least one sample")

    coeffs = np.fft.fft(arr)
    mean = coeffs[0] / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    divided = np.zeros(n, dtype=complex)
    nonzero = k != 0
    divided[nonzero] = coeffs[nonzero] / (1j * k[nonzero])
    if n % 2 == 0:
        divided[n // 2] = 0.0
    oscillating = np.fft.ifft(divided)
    result = mean * (TWO_PI / n) * np.arange(n) + (oscillating - oscillating[0])
    if np.isrealobj(arr):
        return result.real
    return result


# ── Parallel sweeps ───────────────────────────────────────────────────────


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Ordered map over ``items`` on a thread pool; ``threads <= 1`` runs inline."""
    work = list(items)
    if threads <= 1 or len(work) <= 1:
        return [func(item) for item in work]

    n_workers = min(threads, len(work))
    results: List[R] = []
    with ThreadPool(n_workers) as pool:
        for i, result in enumerate(pool.imap(func, work)):
            results.append(result)
            if (i + 1) % 50 == 0 or (i + 1) == len(work):
                logger.debug("  %d/%d items done", i + 1, len(work))
    return results


__all__ = [
    "DEFAULT_N_MAX",
    "PeriodicGrid",
    "QuadratureDomainError",
    "QuadratureResult",
    "TWO_PI",
    "adaptive_integral",
    "parallel_map",
    "periodic_antiderivative",
    "periodic_trapezoid",
]
