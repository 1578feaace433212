"""Moving-average kernels and their integrability functionals.

A kernel ``m >= 0`` defines a stationary symmetric alpha-stable moving
average ``X(t) = integral m(t - x) dLambda(x)``.  Everything this package
decides about the memory of ``X`` reduces to integrability properties of
``m``: the p-norms ``||m||_p^p``, the half-power overlap

    rho_t = integral m(-x)**(a/2) * m(t-x)**(a/2) dx,

and the joint exponent ``integral |s1*m(-x) + s2*m(t-x)|**a dx`` of the
bivariate characteristic function of ``(X(0), X(t))``.

Four kernel families are supported (power-law with a bounded plateau,
causal series with coefficients ``c/(1+k**delta)``, explicit step
coefficients, and tabulated values with a declared tail exponent), plus an
exponential kernel whose closed forms make it the natural cross-check case.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from ._quad import (
    ConvergenceError,
    geometric_edges,
    panel_nodes,
    power_plus_one_tail_sum,
    transformed_tail_integral,
)

__all__ = [
    "Kernel",
    "PowerLawKernel",
    "CausalSeriesKernel",
    "StepKernel",
    "TabulatedKernel",
    "ExponentialKernel",
    "alpha_norm",
    "spectral_covariance",
    "pair_exponent",
    "parse_kernel",
]


class Kernel(ABC):
    """Nonnegative moving-average kernel."""

    @abstractmethod
    def value(self, x: np.ndarray) -> np.ndarray:
        """Evaluate m(x) elementwise."""

    @abstractmethod
    def norm_power(self, p: float) -> float:
        """``||m||_p^p``; ``inf`` when the integral diverges."""

    @abstractmethod
    def scaled(self, lam: float) -> "Kernel":
        """The kernel ``lam * m``."""

    # -- classification predicates (None = undecidable from this object) ----

    def half_power_integrable(self, alpha: float) -> bool | None:
        """Whether ``m`` is in L^(alpha/2)."""
        v = self.norm_power(alpha / 2.0)
        return bool(np.isfinite(v))

    @abstractmethod
    def min_overlap_diverges(self, alpha: float) -> bool | None:
        """Whether the double integral of ``min(m(x), m(t))**alpha`` diverges."""

    @abstractmethod
    def monotone_tail_diverges(self, alpha: float) -> bool | None:
        """Eventually monotone tail with divergent ``integral t*m(t)**alpha dt``."""

    # -- numerics ------------------------------------------------------------

    def require_valid(self, alpha: float) -> float:
        total = self.norm_power(alpha)
        if not np.isfinite(total) or total <= 0.0:
            raise ValueError(
                f"kernel has non-finite or zero alpha-norm for alpha={alpha}: {total}"
            )
        return total

    def spectral_cov(self, alpha: float, t: float, tol: float = 1e-10) -> float:
        """``rho_t`` by quadrature; subclasses override with exact forms."""
        t = abs(float(t))
        a2 = alpha / 2.0
        prev = None
        for level in (1, 2, 4, 8):
            x, w = self._pair_nodes(alpha, t, refine=level)
            val = float(np.dot(self.value(-x) ** a2 * self.value(t - x) ** a2, w))
            if prev is not None and abs(val - prev) <= max(tol, 1e-13 * abs(val)):
                return val
            prev = val
        raise ConvergenceError("spectral covariance quadrature did not converge",
                               value=val, error=abs(val - prev))

    def mass_interval(self, p: float, eps: float) -> tuple[float, float]:
        """Interval holding all but an ``eps`` fraction of ``||m||_p^p``."""
        m_lo, m_hi = self._support()
        if np.isfinite(m_lo) and np.isfinite(m_hi):
            return m_lo, m_hi
        total = self.norm_power(p)
        decay = self._tail_decay(p)

        def tail_mass(r):
            return transformed_tail_integral(lambda x: self.value(x) ** p, r, decay)

        r = 1.0
        for b in self._breakpoints():
            r = max(r, 2.0 * abs(b))
        while tail_mass(r) > eps * total:
            r *= 2.0
            if r > 1e12:
                raise ConvergenceError("kernel mass interval did not close")
        hi = r if not np.isfinite(m_hi) else m_hi
        lo = -r if not np.isfinite(m_lo) else m_lo
        return lo, hi

    def pair_exponent_grid(self, alpha: float, t: float,
                           s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
        """``integral |s1*m(-x) + s2*m(t-x)|**alpha dx`` on arrays of (s1, s2).

        Fixed-panel quadrature tuned for the tensor integrators; accuracy is
        around 1e-6 relative for the smooth families and exact for the
        piecewise-constant ones.
        """
        if t < 0:
            return self.pair_exponent_grid(alpha, -t, s2, s1)
        x, w = self._pair_nodes(alpha, t)
        m1 = self.value(-x)
        m2 = self.value(t - x)
        s1 = np.asarray(s1, dtype=float)
        s2 = np.asarray(s2, dtype=float)
        out = np.empty(s1.shape, dtype=float)
        flat1, flat2, oflat = s1.ravel(), s2.ravel(), out.ravel()
        chunk = max(1, 4_000_000 // max(1, x.size))
        for i0 in range(0, flat1.size, chunk):
            i1 = min(flat1.size, i0 + chunk)
            f = np.abs(flat1[i0:i1, None] * m1[None, :] + flat2[i0:i1, None] * m2[None, :]) ** alpha
            oflat[i0:i1] = f @ w
        return out

    def pair_exponent(self, alpha: float, t: float, s1: float, s2: float,
                      rtol: float = 1e-9) -> float:
        """Scalar joint exponent with refinement-based error control.

        Raises
        ------
        ConvergenceError
            If panel doubling cannot push the relative change below ``rtol``.
        """
        if t < 0:
            return self.pair_exponent(alpha, -t, s2, s1, rtol)
        prev = None
        for level in (1, 2, 4, 8):
            x, w = self._pair_nodes(alpha, t, refine=level,
                                    roots=self._sign_roots(alpha, t, s1, s2))
            val = float(np.dot(np.abs(s1 * self.value(-x) + s2 * self.value(t - x)) ** alpha, w))
            if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
                return val
            prev = val
        raise ConvergenceError(
            f"pair exponent did not converge to rtol={rtol}", value=val,
            error=abs(val - prev))

    # -- helpers for the generic quadrature path -----------------------------

    def _breakpoints(self) -> np.ndarray:
        """Interior knots of m (kink locations)."""
        return np.array([])

    @abstractmethod
    def _support(self) -> tuple[float, float]:
        """(lo, hi) support of m; +-inf for power tails."""

    def _tail_decay(self, alpha: float) -> float:
        """Power decay exponent of ``m**alpha`` at infinity (inf if compact)."""
        return np.inf

    def _sign_roots(self, alpha, t, s1, s2):
        if s1 * s2 >= 0:
            return ()
        lo, hi, _, _ = self._central_box(t)
        grid = np.linspace(lo, hi, 4097)
        h = s1 * self.value(-grid) + s2 * self.value(t - grid)
        flips = np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]
        roots = []
        for i in flips:
            f = lambda x: s1 * float(self.value(np.array([-x]))[0]) + \
                s2 * float(self.value(np.array([t - x]))[0])
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-12))
        return tuple(roots)

    def _central_box(self, t: float) -> tuple[float, float, bool, bool]:
        """Central interval for the pair integrand plus tail flags."""
        mlo, mhi = self._support()
        # m(-x) lives on [-mhi, -mlo]; m(t-x) lives on [t-mhi, t-mlo]
        lo_candidates = [v for v in (-mhi, t - mhi) if np.isfinite(v)]
        hi_candidates = [v for v in (-mlo, t - mlo) if np.isfinite(v)]
        left_tail = not np.isfinite(mhi)
        right_tail = not np.isfinite(mlo)
        span = max(abs(t), 1.0)
        lo = min(lo_candidates) if lo_candidates else -4.0 * span
        hi = max(hi_candidates) if hi_candidates else 4.0 * span
        if left_tail:
            lo = lo - 4.0 * span - 40.0
        if right_tail:
            hi = hi + 4.0 * span + 40.0
        return lo, hi, left_tail, right_tail

    def _pair_nodes(self, alpha: float, t: float, refine: int = 1,
                    roots: tuple = ()) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes/weights for integrals of products of m(-x), m(t-x)."""
        lo, hi, left_tail, right_tail = self._central_box(t)
        knots = {lo, hi}
        for b in self._breakpoints():
            for v in (-b, t - b):
                if lo < v < hi:
                    knots.add(float(v))
        for r in roots:
            if lo < r < hi:
                knots.add(float(r))
        edges = np.array(sorted(knots))
        # subdivide long panels so none exceeds ~1/refine of the box
        max_len = (hi - lo) / (16.0 * refine)
        pieces = [np.linspace(a, b, max(2, int(np.ceil((b - a) / max_len)) + 1))
                  for a, b in zip(edges[:-1], edges[1:])]
        full_edges = np.unique(np.concatenate(pieces))
        x, w = panel_nodes(full_edges, n_nodes=12)
        parts = [(x, w)]
        decay = self._tail_decay(alpha)
        if left_tail:
            xt, wt = _tail_nodes(-lo, decay, refine)
            parts.append((-xt, wt))
        if right_tail:
            xt, wt = _tail_nodes(hi, decay, refine)
            parts.append((xt, wt))
        xs = np.concatenate([p[0] for p in parts])
        ws = np.concatenate([p[1] for p in parts])
        return xs, ws


def _tail_nodes(cutoff: float, decay: float, refine: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights realizing ``integral_cutoff^inf f`` for f ~ x**-decay."""
    if not np.isfinite(decay) or decay <= 1.0:
        raise ValueError("tail nodes require a finite decay exponent > 1")
    q = 1.0 / (decay - 1.0)
    v, w = panel_nodes(geometric_edges(0.0, 1.0, 10 + 4 * refine, "left"), 16)
    u = v ** q
    x = cutoff / u
    jac = cutoff * u ** (-2.0) * q * v ** (q - 1.0)
    return x, jac * w


# ---------------------------------------------------------------------------
# Exponential kernel: m(x) = A exp(-rate x) on x >= 0
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentialKernel(Kernel):
    rate: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.rate <= 0 or self.amplitude <= 0:
            raise ValueError("rate and amplitude must be positive")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, self.amplitude * np.exp(-self.rate * np.minimum(
            np.maximum(x, 0.0), 745.0 / self.rate)), 0.0)

    def norm_power(self, p):
        return self.amplitude ** p / (p * self.rate)

    def scaled(self, lam):
        return replace(self, amplitude=lam * self.amplitude)

    def spectral_cov(self, alpha, t):
        t = abs(float(t))
        return self.amplitude ** alpha * np.exp(-self.rate * alpha * t / 2.0) / (self.rate * alpha)

    def pair_exponent(self, alpha, t, s1, s2, rtol=1e-9):
        if t < 0:
            return self.pair_exponent(alpha, -t, s2, s1)
        lam, amp = self.rate, self.amplitude
        shared = np.abs(s1 + s2 * np.exp(-lam * t)) ** alpha
        solo = np.abs(s2) ** alpha * (1.0 - np.exp(-alpha * lam * t))
        return float(amp ** alpha * (shared + solo) / (alpha * lam))

    def pair_exponent_grid(self, alpha, t, s1, s2):
        if t < 0:
            return self.pair_exponent_grid(alpha, -t, s2, s1)
        lam, amp = self.rate, self.amplitude
        s1 = np.asarray(s1, dtype=float)
        s2 = np.asarray(s2, dtype=float)
        shared = np.abs(s1 + s2 * np.exp(-lam * t)) ** alpha
        solo = np.abs(s2) ** alpha * (1.0 - np.exp(-alpha * lam * t))
        return amp ** alpha * (shared + solo) / (alpha * lam)

    def min_overlap_diverges(self, alpha):
        return False

    def monotone_tail_diverges(self, alpha):
        return False

    def mass_interval(self, p, eps):
        return 0.0, np.log(1.0 / eps) / (p * self.rate)

    def _breakpoints(self):
        # support edge: m(-x) and m(t-x) jump there
        return np.array([0.0])

    def _support(self):
        return 0.0, np.inf

    def _tail_decay(self, alpha):
        # exponential decay: reuse the power-tail transform with a steep proxy
        return np.inf

    def _central_box(self, t):
        depth = 60.0 / self.rate
        return -depth, max(t, 0.0), False, False


# ---------------------------------------------------------------------------
# Power-law kernel with bounded plateau
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLawKernel(Kernel):
    """``m(x) = C |x|**-delta`` for |x| >= a, constant ``C a**-delta`` inside.

    ``symmetric=False`` restricts the support to x >= 0.  The plateau keeps
    every p-norm finite at the origin regardless of delta, so integrability
    is governed by the tail alone.
    """

    amplitude: float
    tail_exponent: float
    plateau_radius: float = 1.0
    symmetric: bool = True

    def __post_init__(self):
        if self.amplitude <= 0 or self.tail_exponent <= 0:
            raise ValueError("amplitude and tail_exponent must be positive")
        if self.plateau_radius <= 0:
            raise ValueError("plateau_radius must be positive")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        q = np.abs(x)
        out = self.amplitude * np.maximum(q, self.plateau_radius) ** (-self.tail_exponent)
        if not self.symmetric:
            out = np.where(x >= 0.0, out, 0.0)
        return out

    def norm_power(self, p):
        dp = self.tail_exponent * p
        if dp <= 1.0:
            return np.inf
        a = self.plateau_radius
        one_side = self.amplitude ** p * a ** (1.0 - dp) * dp / (dp - 1.0)
        return 2.0 * one_side if self.symmetric else one_side

    def scaled(self, lam):
        return replace(self, amplitude=lam * self.amplitude)

    def min_overlap_diverges(self, alpha):
        return self.tail_exponent * alpha <= 2.0

    def monotone_tail_diverges(self, alpha):
        return self.tail_exponent * alpha <= 2.0

    def _breakpoints(self):
        a = self.plateau_radius
        return np.array([-a, 0.0, a]) if self.symmetric else np.array([0.0, a])

    def _support(self):
        return (-np.inf, np.inf) if self.symmetric else (0.0, np.inf)

    def _tail_decay(self, alpha):
        return self.tail_exponent * alpha


# ---------------------------------------------------------------------------
# Causal series kernel: coefficients c / (1 + k**delta) on unit cells
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CausalSeriesKernel(Kernel):
    """``m(x) = sum_k c/(1+k**delta) * 1{x in [k-1, k)}``, k >= 1."""

    level: float
    tail_exponent: float

    def __post_init__(self):
        if self.level <= 0 or self.tail_exponent <= 0:
            raise ValueError("level and tail_exponent must be positive")

    def coeff(self, k):
        k = np.asarray(k, dtype=float)
        out = self.level / (1.0 + np.maximum(k, 0.0) ** self.tail_exponent)
        return np.where(k >= 1.0, out, 0.0)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x) + 1.0
        return np.where(x >= 0.0, self.coeff(k), 0.0)

    def norm_power(self, p):
        dp = self.tail_exponent * p
        if dp <= 1.0:
            return np.inf
        return self.level ** p * power_plus_one_tail_sum(self.tail_exponent, p, 1)

    def scaled(self, lam):
        return replace(self, level=lam * self.level)

    def min_overlap_diverges(self, alpha):
        return self.tail_exponent * alpha <= 2.0

    def monotone_tail_diverges(self, alpha):
        return self.tail_exponent * alpha <= 2.0

    def mass_interval(self, p, eps):
        total = power_plus_one_tail_sum(self.tail_exponent, p, 1)
        k = 64
        while power_plus_one_tail_sum(self.tail_exponent, p, k) > eps * total:
            k *= 2
            if k > 10 ** 9:
                raise ConvergenceError("series kernel mass interval did not close")
        return 0.0, float(k)

    # exact cell arithmetic ---------------------------------------------------

    def _lag_split(self, t: float) -> tuple[int, float]:
        q = int(np.floor(t))
        return q, float(t - q)

    def _shifted_product_sum(self, alpha: float, shift: int, direct: int = 20_000) -> float:
        """``sum_j b_j * b_(j+shift)`` with ``b_j = coeff(j)**(alpha/2)``."""
        d, a2 = self.tail_exponent, alpha / 2.0
        j = np.arange(1.0, float(direct))
        head = float(np.sum((self.coeff(j) * self.coeff(j + shift)) ** a2))

        def f(x):
            return (self.level ** 2 / ((1.0 + x ** d) * (1.0 + (x + shift) ** d))) ** a2

        K = float(direct)
        tail_int = transformed_tail_integral(f, K, decay=d * alpha)
        fp = float((f(np.array([K + 1.0])) - f(np.array([K - 1.0])))[0]) / 2.0
        return head + tail_int + 0.5 * float(f(np.array([K]))[0]) - fp / 12.0

    def spectral_cov(self, alpha, t):
        t = abs(float(t))
        q, r = self._lag_split(t)
        out = (1.0 - r) * self._shifted_product_sum(alpha, q)
        if r > 0.0:
            out += r * self._shifted_product_sum(alpha, q + 1)
        return out

    def _pair_cells(self, alpha, t, s1, s2, direct):
        """Vectorized exact cell sum plus smooth tail for the pair exponent.

        s1, s2 are flat arrays of equal length; t >= 0.
        """
        q, r = self._lag_split(t)
        j = np.arange(1.0, float(direct))
        aj = self.coeff(j)
        aq = self.coeff(j + q)
        aq1 = self.coeff(j + q + 1)
        s1c = s1[:, None]
        s2c = s2[:, None]
        vals = (1.0 - r) * np.abs(s1c * aj[None, :] + s2c * aq[None, :]) ** alpha
        if r > 0.0:
            vals += r * np.abs(s1c * aj[None, :] + s2c * aq1[None, :]) ** alpha
        head = vals.sum(axis=1)

        # one-sided stretch x in (0, t]: only m(t-x) contributes
        solo_idx = np.arange(1.0, q + 1.0)
        solo = float(np.sum(self.coeff(solo_idx) ** alpha))
        if r > 0.0:
            solo += r * float(self.coeff(np.array([q + 1.0]))[0] ** alpha)
        head = head + np.abs(s2) ** alpha * solo

        # smooth tail, vectorized over the s-grid
        d = self.tail_exponent
        K = float(direct)
        decay = d * alpha
        p = 1.0 / (decay - 1.0)
        v, w = panel_nodes(geometric_edges(0.0, 1.0, 14, "left"), 16)
        u = v ** p
        x = K / u
        jac = K * u ** (-2.0) * p * v ** (p - 1.0)

        def g(xx):
            return self.level / (1.0 + xx ** d)

        def tail_f(xx):
            base = (1.0 - r) * np.abs(s1[:, None] * g(xx)[None, :]
                                      + s2[:, None] * g(xx + q)[None, :]) ** alpha
            if r > 0.0:
                base += r * np.abs(s1[:, None] * g(xx)[None, :]
                                   + s2[:, None] * g(xx + q + 1)[None, :]) ** alpha
            return base

        tail_int = tail_f(x) @ (jac * w)
        fK = tail_f(np.array([K]))[:, 0]
        fp = (tail_f(np.array([K + 1.0]))[:, 0] - tail_f(np.array([K - 1.0]))[:, 0]) / 2.0
        return head + tail_int + 0.5 * fK - fp / 12.0

    def pair_exponent(self, alpha, t, s1, s2, rtol=1e-9):
        if t < 0:
            return self.pair_exponent(alpha, -t, s2, s1, rtol)
        return float(self._pair_cells(alpha, float(t), np.array([float(s1)]),
                                      np.array([float(s2)]), direct=20_000)[0])

    def pair_exponent_grid(self, alpha, t, s1, s2):
        if t < 0:
            return self.pair_exponent_grid(alpha, -t, s2, s1)
        s1 = np.asarray(s1, dtype=float)
        s2 = np.asarray(s2, dtype=float)
        out = np.empty(s1.shape)
        flat1, flat2, oflat = s1.ravel(), s2.ravel(), out.ravel()
        chunk = max(1, 4_000_000 // 2_000)
        for i0 in range(0, flat1.size, chunk):
            i1 = min(flat1.size, i0 + chunk)
            oflat[i0:i1] = self._pair_cells(alpha, float(t), flat1[i0:i1],
                                            flat2[i0:i1], direct=2_000)
        return out

    def _support(self):
        return 0.0, np.inf

    def _tail_decay(self, alpha):
        return self.tail_exponent * alpha


# ---------------------------------------------------------------------------
# Explicit step-coefficient kernel (finite window)
# ---------------------------------------------------------------------------

class StepKernel(Kernel):
    """``m(x) = a_j`` on the cell ``[(j-1)*width, j*width)``.

    Coefficients cover j = start .. start+len(coeffs)-1 and vanish outside;
    the cell width is the embedding step of a discrete-time linear series.
    """

    def __init__(self, coeffs, start: int = 1, width: float = 1.0):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        if np.any(coeffs < 0) or not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite and nonnegative")
        if not np.any(coeffs > 0):
            raise ValueError("at least one coefficient must be positive")
        if width <= 0:
            raise ValueError("width must be positive")
        self.coeffs = coeffs
        self.start = int(start)
        self.width = float(width)

    def __repr__(self):
        return (f"StepKernel(n={self.coeffs.size}, start={self.start}, "
                f"width={self.width})")

    def coeff(self, j):
        j = np.asarray(j)
        idx = j - self.start
        ok = (idx >= 0) & (idx < self.coeffs.size)
        return np.where(ok, self.coeffs[np.clip(idx, 0, self.coeffs.size - 1).astype(int)], 0.0)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        j = np.floor(x / self.width).astype(int) + 1
        return self.coeff(j)

    def norm_power(self, p):
        return self.width * float(np.sum(self.coeffs ** p))

    def scaled(self, lam):
        return StepKernel(lam * self.coeffs, start=self.start, width=self.width)

    def min_overlap_diverges(self, alpha):
        return False

    def monotone_tail_diverges(self, alpha):
        return False

    def spectral_cov(self, alpha, t):
        t = abs(float(t)) / self.width
        q = int(np.floor(t))
        r = t - q
        b = self.coeffs ** (alpha / 2.0)

        def overlap(shift):
            if shift >= b.size:
                return 0.0
            return float(np.sum(b[: b.size - shift] * b[shift:]))

        out = (1.0 - r) * overlap(q)
        if r > 0.0:
            out += r * overlap(q + 1)
        return self.width * out

    def _pair_terms(self, alpha, t, s1, s2):
        """Exact pair exponent for flat arrays s1, s2; t >= 0."""
        tw = float(t) / self.width
        q = int(np.floor(tw))
        r = tw - q
        # index range that can contribute to either factor
        j = np.arange(self.start - q - 1, self.start + self.coeffs.size + 1)
        a_j = self.coeff(j)
        a_q = self.coeff(j + q)
        a_q1 = self.coeff(j + q + 1)
        v = (1.0 - r) * np.abs(s1[:, None] * a_j[None, :] + s2[:, None] * a_q[None, :]) ** alpha
        if r > 0.0:
            v += r * np.abs(s1[:, None] * a_j[None, :] + s2[:, None] * a_q1[None, :]) ** alpha
        return self.width * v.sum(axis=1)

    def pair_exponent(self, alpha, t, s1, s2, rtol=1e-9):
        if t < 0:
            return self.pair_exponent(alpha, -t, s2, s1, rtol)
        return float(self._pair_terms(alpha, float(t), np.array([float(s1)]),
                                      np.array([float(s2)]))[0])

    def pair_exponent_grid(self, alpha, t, s1, s2):
        if t < 0:
            return self.pair_exponent_grid(alpha, -t, s2, s1)
        s1 = np.asarray(s1, dtype=float)
        s2 = np.asarray(s2, dtype=float)
        out = np.empty(s1.shape)
        flat1, flat2, oflat = s1.ravel(), s2.ravel(), out.ravel()
        chunk = max(1, 4_000_000 // max(1, self.coeffs.size + 2))
        for i0 in range(0, flat1.size, chunk):
            i1 = min(flat1.size, i0 + chunk)
            oflat[i0:i1] = self._pair_terms(alpha, float(t), flat1[i0:i1], flat2[i0:i1])
        return out

    def _support(self):
        return (self.start - 1) * self.width, (self.start + self.coeffs.size - 1) * self.width


# ---------------------------------------------------------------------------
# Tabulated kernel with declared tail behaviour
# ---------------------------------------------------------------------------

class TabulatedKernel(Kernel):
    """Piecewise-linear kernel from a grid, with a declared power tail.

    Beyond the last grid point the kernel continues as
    ``m(x_end) * (x/x_end)**-tail_exponent`` when a tail exponent is
    declared, and as zero otherwise.  Memory classification relies on the
    declared exponent; with no declaration the classifiers report the
    question as undecidable rather than extrapolate from the grid.
    """

    def __init__(self, x, m, tail_exponent: float | None = None):
        x = np.asarray(x, dtype=float)
        m = np.asarray(m, dtype=float)
        if x.ndim != 1 or x.size < 2 or x.shape != m.shape:
            raise ValueError("need matching 1-d grids with at least two points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("kernel values must be finite and nonnegative")
        if not np.any(m > 0):
            raise ValueError("kernel must be positive somewhere")
        if tail_exponent is not None and tail_exponent <= 0:
            raise ValueError("tail_exponent must be positive when given")
        if tail_exponent is not None and m[-1] <= 0:
            raise ValueError("declared tail needs a positive last grid value")
        self.x = x
        self.m = m
        self.tail_exponent = tail_exponent

    def __repr__(self):
        return (f"TabulatedKernel(n={self.x.size}, tail_exponent={self.tail_exponent})")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.x, self.m, left=0.0, right=0.0)
        if self.tail_exponent is not None:
            tail = self.m[-1] * (np.maximum(x, self.x[-1]) / self.x[-1]) ** (-self.tail_exponent)
            out = np.where(x > self.x[-1], tail, out)
        return out

    def norm_power(self, p):
        # exact integral of the piecewise-linear part segment by segment
        total = 0.0
        for (x0, x1, m0, m1) in zip(self.x[:-1], self.x[1:], self.m[:-1], self.m[1:]):
            if m0 == m1:
                total += (x1 - x0) * m0 ** p
            else:
                b = (m1 - m0) / (x1 - x0)
                total += (m1 ** (p + 1.0) - m0 ** (p + 1.0)) / (b * (p + 1.0))
        if self.tail_exponent is not None:
            dp = self.tail_exponent * p
            if dp <= 1.0:
                return np.inf
            total += self.m[-1] ** p * self.x[-1] / (dp - 1.0)
        return total

    def scaled(self, lam):
        return TabulatedKernel(self.x, lam * self.m, self.tail_exponent)

    def half_power_integrable(self, alpha):
        if self.tail_exponent is None:
            return None
        return self.tail_exponent * alpha / 2.0 > 1.0

    def min_overlap_diverges(self, alpha):
        if self.tail_exponent is None:
            return None
        return self.tail_exponent * alpha <= 2.0

    def monotone_tail_diverges(self, alpha):
        if self.tail_exponent is None:
            return None
        return self.tail_exponent * alpha <= 2.0

    def _breakpoints(self):
        return self.x

    def _support(self):
        hi = np.inf if self.tail_exponent is not None else self.x[-1]
        return self.x[0], hi

    def _tail_decay(self, alpha):
        return np.inf if self.tail_exponent is None else self.tail_exponent * alpha


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def alpha_norm(kernel: Kernel, p: float) -> float:
    """``||m||_p^p``, possibly ``inf`` (divergence is a valid answer)."""
    if p <= 0:
        raise ValueError("p must be positive")
    return float(kernel.norm_power(p))


def spectral_covariance(kernel: Kernel, alpha: float, t: float) -> float:
    """Half-power overlap ``rho_t`` of the kernel with its lag-t shift.

    Symmetric in t; equals ``||m||_alpha^alpha`` at t = 0 and is bounded by
    that value for every lag (Cauchy-Schwarz).
    """
    _check_alpha(alpha)
    kernel.require_valid(alpha)
    return float(kernel.spectral_cov(alpha, t))


def pair_exponent(kernel: Kernel, alpha: float, t: float, s1: float, s2: float,
                  rtol: float = 1e-9) -> float:
    """``integral |s1*m(-x) + s2*m(t-x)|**alpha dx``."""
    _check_alpha(alpha)
    kernel.require_valid(alpha)
    return kernel.pair_exponent(alpha, t, s1, s2, rtol=rtol)


def _check_alpha(alpha: float):
    if not (0.0 < alpha < 2.0):
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")


# ---------------------------------------------------------------------------
# Kernel literals:  power:C=..,delta=..[,a=..][,sym=0|1]
#                   series:c=..,delta=..
#                   steps:@file.csv          (columns j, a)
#                   table:@file.csv[,tail=..] (columns x, m)
#                   expdecay:rate=..[,amp=..]
# ---------------------------------------------------------------------------

def parse_kernel(literal: str) -> Kernel:
    """Build a kernel from its command-line literal form."""
    head, _, body = literal.partition(":")
    head = head.strip().lower()
    if head == "power":
        kv = _parse_kv(body, {"c", "delta", "a", "sym"})
        return PowerLawKernel(
            amplitude=_need(kv, "c", literal),
            tail_exponent=_need(kv, "delta", literal),
            plateau_radius=kv.get("a", 1.0),
            symmetric=bool(int(kv.get("sym", 1))),
        )
    if head == "series":
        kv = _parse_kv(body, {"c", "delta"})
        return CausalSeriesKernel(level=_need(kv, "c", literal),
                                  tail_exponent=_need(kv, "delta", literal))
    if head == "steps":
        path, kv = _parse_file_body(body, set())
        j, a = _load_two_columns(path)
        start = int(round(j[0]))
        if np.any(np.diff(j) != 1):
            raise ValueError(f"step kernel indices must be consecutive in {path}")
        return StepKernel(a, start=start)
    if head == "table":
        path, kv = _parse_file_body(body, {"tail"})
        x, m = _load_two_columns(path)
        return TabulatedKernel(x, m, tail_exponent=kv.get("tail"))
    if head == "expdecay":
        kv = _parse_kv(body, {"rate", "amp"})
        return ExponentialKernel(rate=kv.get("rate", 1.0), amplitude=kv.get("amp", 1.0))
    raise ValueError(f"unknown kernel literal {literal!r}")


def _parse_kv(body: str, allowed: set[str]) -> dict[str, float]:
    out: dict[str, float] = {}
    if not body.strip():
        return out
    for item in body.split(","):
        if not item.strip():
            continue
        mm = re.fullmatch(r"\s*(\w+)\s*=\s*([-+0-9.eE]+)\s*", item)
        if not mm:
            raise ValueError(f"cannot parse kernel parameter {item!r}")
        key = mm.group(1).lower()
        if key not in allowed:
            raise ValueError(f"unknown kernel parameter {key!r}")
        out[key] = float(mm.group(2))
    return out


def _parse_file_body(body: str, allowed: set[str]):
    parts = body.split(",")
    if not parts or not parts[0].strip().startswith("@"):
        raise ValueError("file-backed kernel literal must start with @path")
    path = parts[0].strip()[1:]
    kv = _parse_kv(",".join(parts[1:]), allowed)
    return path, kv


def _load_two_columns(path: str) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 2:
        raise ValueError(f"{path} must have two numeric columns")
    return data[:, 0], data[:, 1]


def _need(kv: dict, key: str, literal: str) -> float:
    if key not in kv:
        raise ValueError(f"kernel literal {literal!r} is missing {key}=")
    return kv[key]
