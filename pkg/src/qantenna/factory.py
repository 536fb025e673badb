"""Analytic antenna states and the closed-form envelopes of their field amplitude.

Envelope arguments are the reduced detector variables ``x_i = k*Delta*cos(theta_i)``
of an equispaced array.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .states import ExcitationState

__all__ = [
    "SubdiagonalSpec",
    "DarkSpec",
    "antidiagonal_state",
    "subdiagonal_state",
    "dicke_state",
    "dark_state",
    "nn_triples_state",
    "dirichlet_ratio",
    "envelope_antidiagonal",
    "envelope_subdiagonal",
    "envelope_triples",
    "DEFAULT_DARK_SIGMA",
]

DEFAULT_DARK_SIGMA = 3.2


@dataclass(frozen=True)
class SubdiagonalSpec:
    """Real weight ``c_l`` for every populated sub-diagonal offset ``l >= 1``."""

    weights: Mapping[int, float]

    def __post_init__(self):
        w = {int(l): float(c) for l, c in dict(self.weights).items()}
        if any(l < 1 for l in w):
            raise ValueError("sub-diagonal offsets must be >= 1")
        if not any(c != 0 for c in w.values()):
            raise ValueError("at least one weight must be nonzero")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class DarkSpec:
    sigma: float = DEFAULT_DARK_SIGMA

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def _check_N(N, minimum):
    if int(N) != N or N < minimum:
        raise ValueError(f"N must be an integer >= {minimum}, got {N}")
    return int(N)


def antidiagonal_state(N: int) -> ExcitationState:
    """Equal-weight pairs ``(j, N+1-j)`` of mirror-image emitters.

    For odd ``N`` the middle emitter would pair with itself; that term is
    dropped before normalizing.
    """
    N = _check_N(N, 2)
    terms = {(j, N + 1 - j): 1.0 for j in range(1, N + 1) if j > N + 1 - j}
    return ExcitationState.from_terms(N, terms, order=2)


def subdiagonal_state(N: int, spec: SubdiagonalSpec | Mapping[int, float]) -> ExcitationState:
    """Amplitude ``c_l`` on every pair ``(j + l, j)``, then normalized."""
    N = _check_N(N, 2)
    if not isinstance(spec, SubdiagonalSpec):
        spec = SubdiagonalSpec(spec)
    bad = [l for l in spec.weights if l > N - 1]
    if bad:
        raise ValueError(f"offsets {bad} out of range for N={N} (need 1 <= l <= N-1)")
    terms = {}
    for l, c in spec.weights.items():
        for j in range(1, N - l + 1):
            terms[(j + l, j)] = c
    return ExcitationState.from_terms(N, terms, order=2)


def dicke_state(N: int) -> ExcitationState:
    """Symmetric two-excitation Dicke state."""
    N = _check_N(N, 2)
    terms = {(j, m): 1.0 for j in range(2, N + 1) for m in range(1, j)}
    return ExcitationState.from_terms(N, terms, order=2)


def dark_state(N: int, spec: DarkSpec | float | None = None) -> ExcitationState:
    """Gaussian-tapered, sign-alternating pair state that suppresses far-field G2.

    ``c_jm ~ (-1)^l l^2 exp(-(l^2 + q^2) / (4 sigma^2))`` with ``l = j - m``
    and ``q = j + m - (N + 1)``.
    """
    N = _check_N(N, 2)
    if spec is None:
        spec = DarkSpec()
    elif not isinstance(spec, DarkSpec):
        spec = DarkSpec(float(spec))
    s2 = 4.0 * spec.sigma**2
    terms = {}
    for j in range(2, N + 1):
        for m in range(1, j):
            l, q = j - m, j + m - (N + 1)
            terms[(j, m)] = (-1) ** l * l**2 * np.exp(-(l**2 + q**2) / s2)
    return ExcitationState.from_terms(N, terms, order=2)


def nn_triples_state(N: int) -> ExcitationState:
    """Equal superposition of the ``N - 2`` nearest-neighbour triples."""
    N = _check_N(N, 3)
    terms = {(j + 2, j + 1, j): 1.0 for j in range(1, N - 1)}
    return ExcitationState.from_terms(N, terms, order=3)


def dirichlet_ratio(n: int, s):
    """``sin(n s / 2) / sin(s / 2)`` with the removable singularities filled in.

    At ``s = 2 pi p`` the limit is ``n * (-1)^(p (n - 1))``.
    """
    s = np.asarray(s, dtype=float)
    half = s / 2
    den = np.sin(half)
    p = np.rint(s / (2 * np.pi))
    # exact zeros of the denominator only occur at multiples of 2*pi
    singular = np.isclose(s, 2 * np.pi * p, rtol=0.0, atol=1e-9)
    safe = np.where(singular, 1.0, den)
    out = np.where(singular, n * np.where((p * (n - 1)) % 2 == 0, 1.0, -1.0), np.sin(n * half) / safe)
    return out[()] if out.ndim == 0 else out


def envelope_antidiagonal(N: int, dx):
    """``|sin(N dx / 2) / (sqrt(N) sin(dx / 2))|`` with ``dx = x1 - x2``; equals ``sqrt(N)`` at 0."""
    return np.abs(dirichlet_ratio(N, dx)) / np.sqrt(N)


def envelope_subdiagonal(N: int, l: int, x1, x2):
    """Single sub-diagonal amplitude modulus; peak value ``2 sqrt(N - l)``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return 2.0 * np.abs(np.cos(l * (x1 - x2) / 2)) * np.abs(dirichlet_ratio(N - l, x1 + x2)) / np.sqrt(N - l)


def envelope_triples(N: int, x1, x2, x3):
    """Nearest-neighbour-triple amplitude modulus; peak value ``6 sqrt(N - 2)``.

    The pair-cosine factor is ``cos(x_a - x_b)`` summed over the three
    detector pairs, which is what the symmetrized triple sum evaluates to.
    """
    x1, x2, x3 = (np.asarray(v, dtype=float) for v in (x1, x2, x3))
    pair = np.cos(x1 - x2) + np.cos(x1 - x3) + np.cos(x2 - x3)
    return 2.0 * np.abs(pair) * np.abs(dirichlet_ratio(N - 2, x1 + x2 + x3)) / np.sqrt(N - 2)
