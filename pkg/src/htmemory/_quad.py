"""Shared quadrature and series-summation helpers.

The slowly decaying sums that appear throughout this package (terms like
``(1 + k**delta)**-p`` with ``delta * p`` barely above 1) cannot be summed
to the target precision by brute force, so tails are handled analytically:
an exact hypergeometric form of the tail integral plus Euler-Maclaurin
corrections.  Double integrals of characteristic-function differences are
computed on tensor-product Gauss-Legendre panels with one refinement pass
for an error estimate.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.special import hyp2f1

from .errors import ConvergenceError

__all__ = [
    "ConvergenceError",
    "panel_nodes",
    "geometric_edges",
    "power_plus_one_tail_integral",
    "power_plus_one_tail_sum",
    "transformed_tail_integral",
    "euler_maclaurin_tail_sum",
    "tensor_integral_2d",
]


# ---------------------------------------------------------------------------
# Gauss-Legendre panels
# ---------------------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (x, w)
    return _GL_CACHE[n]


def panel_nodes(edges: np.ndarray, n_nodes: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over consecutive panels.

    Parameters
    ----------
    edges : increasing 1-d array of panel boundaries.
    n_nodes : nodes per panel.

    Returns
    -------
    (nodes, weights) flattened over all panels.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = _gl_rule(n_nodes)
    lo = edges[:-1][:, None]
    hi = edges[1:][:, None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def geometric_edges(a: float, b: float, n_panels: int, refine_at: str = "left",
                    ratio: float = 0.5) -> np.ndarray:
    """Panel edges on [a, b] geometrically refined toward one endpoint."""
    fracs = ratio ** np.arange(n_panels, 0, -1)
    fracs = np.concatenate([[0.0], fracs / fracs[-1]])
    if refine_at == "left":
        return a + (b - a) * fracs
    elif refine_at == "right":
        return b - (b - a) * fracs[::-1]
    raise ValueError(f"refine_at must be 'left' or 'right', got {refine_at!r}")


# ---------------------------------------------------------------------------
# Tails of power-type series
# ---------------------------------------------------------------------------

def power_plus_one_tail_integral(delta: float, p: float, cutoff: float) -> float:
    """Exact ``integral_K^inf (1 + x**delta)**-p dx`` for delta*p > 1.

    Substituting w = x**-delta turns the integral into an incomplete-Beta
    form with the closed expression ``z**a / (delta*a) * 2F1(p, a; a+1; -z)``
    where ``z = K**-delta`` and ``a = p - 1/delta``.
    """
    if delta * p <= 1.0:
        return np.inf
    a = p - 1.0 / delta
    z = cutoff ** (-delta)
    return float(z ** a / (delta * a) * hyp2f1(p, a, a + 1.0, -z))


def power_plus_one_tail_sum(delta: float, p: float, start: int,
                            direct_terms: int = 20_000) -> float:
    """``sum_{k >= start} (1 + k**delta)**-p`` for delta*p > 1.

    Direct summation up to a cutoff, then the exact tail integral with
    Euler-Maclaurin endpoint corrections f(K)/2 - f'(K)/12.
    """
    if delta * p <= 1.0:
        return np.inf
    start = int(start)
    cutoff = max(start, direct_terms)
    k = np.arange(start, cutoff, dtype=float)
    head = float(np.sum((1.0 + k ** delta) ** (-p))) if k.size else 0.0

    K = float(cutoff)
    f = (1.0 + K ** delta) ** (-p)
    fprime = -p * delta * K ** (delta - 1.0) * (1.0 + K ** delta) ** (-p - 1.0)
    tail = power_plus_one_tail_integral(delta, p, K) + 0.5 * f - fprime / 12.0
    return head + tail


def transformed_tail_integral(f: Callable[[np.ndarray], np.ndarray], cutoff: float,
                              decay: float, n_panels: int = 16, n_nodes: int = 32) -> float:
    """``integral_K^inf f(x) dx`` for f ~ x**-decay, decay > 1.

    Maps x = K/u and then u = v**(1/(decay-1)) so that a pure power-law
    integrand becomes constant; composite Gauss-Legendre handles the
    deviation from the pure power.
    """
    if decay <= 1.0:
        raise ValueError("tail integral requires decay exponent > 1")
    q = 1.0 / (decay - 1.0)
    v, w = panel_nodes(geometric_edges(0.0, 1.0, n_panels, "left"), n_nodes)
    u = v ** q
    x = cutoff / u
    # dx = K u^-2 du, du = q v^(q-1) dv
    jac = cutoff * u ** (-2.0) * q * v ** (q - 1.0)
    return float(np.sum(f(x) * jac * w))


def euler_maclaurin_tail_sum(f: Callable[[np.ndarray], np.ndarray], cutoff: int,
                             tail_integral: float) -> float:
    """``sum_{k >= K} f(k)`` from the tail integral plus EM corrections.

    f'(K) is taken by a central difference; adequate because the correction
    itself is already far below the leading terms for smooth power-like f.
    """
    K = float(cutoff)
    fk = float(f(np.array([K]))[0])
    fp = float((f(np.array([K + 1.0])) - f(np.array([K - 1.0])))[0]) / 2.0
    return tail_integral + 0.5 * fk - fp / 12.0


# ---------------------------------------------------------------------------
# Tensor-product 2-D quadrature with one refinement pass
# ---------------------------------------------------------------------------

def tensor_integral_2d(fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                       edges: np.ndarray, n_nodes: int = 16,
                       chunk: int = 200_000) -> tuple[float, float]:
    """Integrate ``fn`` over [edges[0], edges[-1]]**2 on a tensor GL grid.

    ``fn`` must accept flat coordinate arrays and return the integrand.
    The integral is evaluated on the given panels and once more on halved
    panels; the difference serves as the error estimate.

    Returns
    -------
    (value, error_estimate)
    """

    def pass_once(es: np.ndarray) -> float:
        nodes, weights = panel_nodes(es, n_nodes)
        n = nodes.size
        total = 0.0
        # row-chunked evaluation keeps peak memory bounded
        rows_per_chunk = max(1, chunk // n)
        for i0 in range(0, n, rows_per_chunk):
            i1 = min(n, i0 + rows_per_chunk)
            s1 = np.repeat(nodes[i0:i1], n)
            s2 = np.tile(nodes, i1 - i0)
            vals = fn(s1, s2)
            w2 = (weights[i0:i1, None] * weights[None, :]).ravel()
            total += float(np.dot(vals, w2))
        return total

    coarse = pass_once(edges)
    fine_edges = np.sort(np.concatenate([edges, 0.5 * (edges[:-1] + edges[1:])]))
    fine = pass_once(fine_edges)
    return fine, abs(fine - coarse)
