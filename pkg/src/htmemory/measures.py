"""Finite discrete measures and their Fourier transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["DiscreteMeasure", "parse_measure"]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite measure given by point masses ``w_k`` at locations ``u_k``.

    The Fourier transform ``psi(s) = sum_k w_k exp(i s u_k)`` is evaluated
    on demand through its real and imaginary parts.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise ValueError("measure needs at least one atom")
        for u, w in self.atoms:
            if not (np.isfinite(u) and np.isfinite(w)):
                raise ValueError("atoms must be finite")
            if w <= 0:
                raise ValueError(f"atom weights must be positive, got {w}")

    @staticmethod
    def dirac(u: float) -> "DiscreteMeasure":
        return DiscreteMeasure(((float(u), 1.0),))

    @property
    def total_mass(self) -> float:
        return float(sum(w for _, w in self.atoms))

    @property
    def max_location(self) -> float:
        return float(max(abs(u) for u, _ in self.atoms))

    def fourier_parts(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(Re psi(s), Im psi(s)) for an array of frequencies."""
        s = np.asarray(s, dtype=float)
        re = np.zeros_like(s)
        im = np.zeros_like(s)
        for u, w in self.atoms:
            re += w * np.cos(s * u)
            im += w * np.sin(s * u)
        return re, im

    def fourier(self, s: np.ndarray) -> np.ndarray:
        re, im = self.fourier_parts(s)
        return re + 1j * im


def parse_measure(literal: str) -> DiscreteMeasure:
    """Parse ``dirac:u`` or ``mix:u1:w1,u2:w2,...``."""
    head, _, body = literal.partition(":")
    head = head.strip().lower()
    try:
        if head == "dirac":
            return DiscreteMeasure.dirac(float(body))
        if head == "mix":
            atoms = []
            for part in body.split(","):
                u_str, _, w_str = part.partition(":")
                atoms.append((float(u_str), float(w_str)))
            return DiscreteMeasure(tuple(atoms))
    except ValueError as exc:
        raise ConfigError(f"bad measure literal {literal!r}: {exc}") from exc
    raise ConfigError(f"unknown measure literal {literal!r}")
