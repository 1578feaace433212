"""Symmetric alpha-stable sampling and characteristic functions.

A symmetric alpha-stable (SaS) law with stability index ``alpha`` and scale
``sigma`` has characteristic function ``exp(-sigma**alpha * |s|**alpha)``.
Draws use the polar Chambers-Mallows-Stuck construction.  Moving averages
``X(t) = integral m(t-x) dLambda(x)`` against an SaS random measure have

    E exp(i s X(t))              = exp(-|s|**alpha * ||m||_alpha^alpha)
    E exp(i(s1 X(0) + s2 X(t))) = exp(-integral |s1 m(-x) + s2 m(t-x)|**alpha dx)

and a linear SaS time series ``Y(t) = sum_j a_j Z(t-j)`` embeds as such a
moving average with a step kernel on unit cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from ._quad import power_plus_one_tail_sum
from ._rng import generator
from .errors import ConvergenceError
from .kernels import CausalSeriesKernel, Kernel, StepKernel, alpha_norm, pair_exponent

__all__ = [
    "StableParams",
    "SamplePath",
    "sample_sas",
    "simulate_linear_sas",
    "char_univariate",
    "char_bivariate",
    "sas_tail_constant",
]


@dataclass(frozen=True)
class StableParams:
    """Index and scale of a symmetric alpha-stable law.

    ``alpha`` may equal 2.0 only as the saturation boundary of quantile
    estimators (a Gaussian-looking sample); samplers require alpha < 2.
    """

    alpha: float
    sigma: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")


@dataclass
class SamplePath:
    """A finite realization on an equispaced grid."""

    values: np.ndarray
    time_step: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size == 0:
            raise ValueError("empty sample path")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample path contains non-finite values")
        if self.time_step <= 0:
            raise ValueError("time_step must be positive")

    def __len__(self):
        return self.values.size


def _cms_draws(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Standard (scale 1) SaS draws via Chambers-Mallows-Stuck."""
    u = rng.uniform(-np.pi / 2.0, np.pi / 2.0, size=n)
    w = rng.standard_exponential(size=n)
    if alpha == 1.0:
        return np.tan(u)
    return (np.sin(alpha * u) / np.cos(u) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha))


def _require_samplable(params: StableParams):
    if params.alpha >= 2.0:
        raise ValueError("alpha = 2 (Gaussian boundary) is outside the sampling domain")


def sample_sas(params: StableParams, n: int, seed: int, *, stream: tuple = ()) -> SamplePath:
    """Draw ``n`` independent SaS(alpha, sigma) variates.

    Deterministic for fixed (seed, stream); substreams address parallel
    replicates without overlap.
    """
    _require_samplable(params)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = generator(seed, *stream)
    values = params.sigma * _cms_draws(params.alpha, int(n), rng)
    return SamplePath(values, time_step=1.0, seed=seed)


def _series_window(kernel: CausalSeriesKernel, alpha: float, trunc_tol: float,
                   max_window: int) -> int:
    """Smallest J with relative alpha-norm tail mass below trunc_tol."""
    d = kernel.tail_exponent
    total = power_plus_one_tail_sum(d, alpha, 1)

    def rel_tail(j):
        return power_plus_one_tail_sum(d, alpha, j + 1) / total

    if rel_tail(max_window) > trunc_tol:
        raise ValueError(
            f"series truncation at tolerance {trunc_tol:g} needs a window beyond "
            f"max_window={max_window}; pass a larger max_window or a looser trunc_tol")
    lo, hi = 1, max_window
    while lo < hi:
        mid = (lo + hi) // 2
        if rel_tail(mid) <= trunc_tol:
            hi = mid
        else:
            lo = mid + 1
    return lo


def simulate_linear_sas(kernel: Kernel, params: StableParams, n: int, seed: int, *,
                        trunc_tol: float = 1e-10, max_window: int = 1 << 24,
                        stream: tuple = ()) -> SamplePath:
    """Simulate ``Y(t) = sum_j a_j Z(t-j)`` with i.i.d. SaS innovations.

    The coefficient window is truncated where the discarded alpha-norm mass
    falls below ``trunc_tol`` of the total; the returned segment is fully
    stationary (every output uses a complete coefficient window, so the
    burn-in is consumed internally).

    Parameters
    ----------
    kernel : CausalSeriesKernel or StepKernel
        Coefficient source; the causal series needs tail_exponent > 1 so the
        coefficients are absolutely summable, and a window satisfying
        ``trunc_tol`` within ``max_window`` terms.
    params : innovation law (sigma is the innovation scale).
    """
    _require_samplable(params)
    if n < 1:
        raise ValueError("n must be at least 1")
    if isinstance(kernel, CausalSeriesKernel):
        if kernel.tail_exponent <= 1.0:
            raise ValueError("linear series needs tail_exponent > 1 for summable coefficients")
        j_max = _series_window(kernel, params.alpha, trunc_tol, max_window)
        coeffs = np.asarray(kernel.coeff(np.arange(1, j_max + 1)), dtype=float)
        start = 1
    elif isinstance(kernel, StepKernel):
        coeffs = kernel.coeffs
        start = kernel.start
    else:
        raise ValueError("simulate_linear_sas needs a coefficient kernel "
                         "(CausalSeriesKernel or StepKernel)")
    rng = generator(seed, *stream)
    n_innov = int(n) + coeffs.size - 1
    z = params.sigma * _cms_draws(params.alpha, n_innov, rng)
    if coeffs.size * n > 4_000_000:
        y = fftconvolve(z, coeffs, mode="valid")
    else:
        y = np.convolve(z, coeffs, mode="valid")
    assert y.size == n
    return SamplePath(y, time_step=1.0, seed=seed)


def char_univariate(s: float, kernel: Kernel, alpha: float) -> float:
    """Marginal characteristic function of the moving average at frequency s."""
    norm = alpha_norm(kernel, alpha)
    if not np.isfinite(norm):
        raise ValueError(f"kernel alpha-norm diverges for alpha={alpha}")
    return float(np.exp(-np.abs(s) ** alpha * norm))


def char_bivariate(s1: float, s2: float, t: float, kernel: Kernel, alpha: float,
                   rtol: float = 1e-9) -> float:
    """Joint characteristic function of (X(0), X(t)) at (s1, s2).

    Always in (0, 1]; reduces to the product of marginals when the lag
    separates the kernel supports.
    """
    g = pair_exponent(kernel, alpha, t, s1, s2, rtol=rtol)
    return float(np.exp(-g))


def sas_tail_constant(alpha: float) -> float:
    """``lim x**alpha * P(|X| > x)`` for a standard SaS(alpha) variable."""
    if not (0.0 < alpha < 2.0):
        raise ValueError("tail constant defined for alpha in (0, 2)")
    if alpha == 1.0:
        return 2.0 / np.pi
    from scipy.special import gamma
    return (1.0 - alpha) / (gamma(2.0 - alpha) * np.cos(np.pi * alpha / 2.0))
