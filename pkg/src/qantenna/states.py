"""Sparse multi-excitation states of an emitter chain and their file format.

A state of ``order`` excitations is stored as a map from strictly decreasing
1-based index tuples ``(j, m)`` or ``(j, m, n)`` to complex amplitudes.  The
tuple basis used for dense vectors is :func:`tuple_basis`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations, permutations
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

__all__ = [
    "ExcitationState",
    "tuple_basis",
    "save_state",
    "load_state",
    "NORM_TOL",
    "LOAD_RENORM_TOL",
]

NORM_TOL = 1e-12
LOAD_RENORM_TOL = 1e-6


def tuple_basis(N: int, order: int) -> list[tuple[int, ...]]:
    """Canonical ordering of the strictly decreasing index tuples.

    >>> tuple_basis(3, 2)
    [(2, 1), (3, 1), (3, 2)]
    """
    return [tuple(reversed(c)) for c in combinations(range(1, N + 1), order)]


def _check_tuple(t, N, order):
    if len(t) != order:
        raise ValueError(f"tuple {t} does not have {order} indices")
    if any(int(i) != i for i in t):
        raise ValueError(f"tuple {t} has non-integer indices")
    if any(not 1 <= i <= N for i in t):
        raise ValueError(f"tuple {t} has indices outside [1, {N}]")
    if any(t[k] <= t[k + 1] for k in range(order - 1)):
        raise ValueError(f"tuple {t} is not strictly decreasing")


@dataclass(frozen=True, eq=False)
class ExcitationState:
    """Unit-norm superposition of ``order``-excitation basis states.

    Use :meth:`from_terms` to build (and optionally normalize) a state; the
    plain constructor validates that the norm is already 1.
    """

    N: int
    order: int
    terms: Mapping[tuple[int, ...], complex]

    def __post_init__(self):
        if self.order not in (2, 3):
            raise ValueError(f"order must be 2 or 3, got {self.order}")
        if int(self.N) != self.N or self.N < self.order:
            raise ValueError(f"N={self.N} cannot hold {self.order} excitations")
        clean = {}
        for t, amp in dict(self.terms).items():
            t = tuple(int(i) for i in t)
            _check_tuple(t, self.N, self.order)
            if t in clean:
                raise ValueError(f"duplicate tuple {t}")
            clean[t] = complex(amp)
        if not clean:
            raise ValueError("state has no terms")
        norm2 = sum(abs(a) ** 2 for a in clean.values())
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state norm^2 is {norm2!r}, expected 1")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "terms", MappingProxyType(clean))

    @classmethod
    def from_terms(cls, N: int, terms: Mapping, order: int | None = None, normalize: bool = True):
        """Build a state from ``{tuple: amplitude}``; zero amplitudes are dropped."""
        terms = {tuple(t): complex(a) for t, a in dict(terms).items() if a != 0}
        if order is None:
            if not terms:
                raise ValueError("state has no nonzero terms")
            order = len(next(iter(terms)))
        if normalize:
            norm = np.sqrt(sum(abs(a) ** 2 for a in terms.values()))
            if norm == 0:
                raise ValueError("state has no nonzero terms")
            terms = {t: a / norm for t, a in terms.items()}
        return cls(N, order, terms)

    @classmethod
    def from_vector(cls, N: int, order: int, vec, normalize: bool = True, atol: float = 0.0):
        """Inverse of :meth:`to_vector`; entries with modulus <= ``atol`` are dropped."""
        basis = tuple_basis(N, order)
        vec = np.asarray(vec)
        if vec.shape != (len(basis),):
            raise ValueError(f"expected vector of length {len(basis)}, got {vec.shape}")
        terms = {t: a for t, a in zip(basis, vec.tolist()) if abs(a) > atol}
        return cls.from_terms(N, terms, order=order, normalize=normalize)

    def to_vector(self) -> np.ndarray:
        """Dense complex amplitudes in :func:`tuple_basis` order."""
        return np.array([self.terms.get(t, 0.0) for t in tuple_basis(self.N, self.order)], dtype=complex)

    def coefficient_matrix(self) -> np.ndarray:
        """Lower-triangular ``(N, N)`` matrix ``C[j-1, m-1] = c_{jm}`` (order 2)."""
        if self.order != 2:
            raise ValueError("coefficient_matrix is defined for order 2 only")
        C = np.zeros((self.N, self.N), dtype=complex)
        for (j, m), a in self.terms.items():
            C[j - 1, m - 1] = a
        return C

    def symmetric_tensor(self) -> np.ndarray:
        """Amplitudes symmetrized over all index placements (matrix or rank-3 tensor)."""
        shape = (self.N,) * self.order
        T = np.zeros(shape, dtype=complex)
        for t, a in self.terms.items():
            idx = tuple(i - 1 for i in t)
            for perm in set(permutations(idx)):
                T[perm] += a
        return T

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.terms.values())))

    def overlap(self, other: "ExcitationState") -> float:
        """``|<self|other>|^2``."""
        if (self.N, self.order) != (other.N, other.order):
            raise ValueError("states live in different spaces")
        return float(abs(sum(np.conj(a) * other.terms.get(t, 0.0) for t, a in self.terms.items())) ** 2)

    def __eq__(self, other):
        if not isinstance(other, ExcitationState):
            return NotImplemented
        return (self.N, self.order) == (other.N, other.order) and dict(self.terms) == dict(other.terms)

    def __repr__(self):
        return f"ExcitationState(N={self.N}, order={self.order}, n_terms={len(self.terms)})"


def state_to_dict(state: ExcitationState) -> dict:
    terms = [
        [*t, float(np.real(a)), float(np.imag(a))]
        for t, a in sorted(state.terms.items())
    ]
    return {"N": state.N, "order": state.order, "terms": terms}


def state_from_dict(doc: Mapping) -> ExcitationState:
    try:
        N = doc["N"]
        order = doc["order"]
        records = doc["terms"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"state document is missing key {exc}") from None
    if not isinstance(N, int) or order not in (2, 3):
        raise ValueError("state document needs integer 'N' and 'order' in {2, 3}")
    terms = {}
    for rec in records:
        if len(rec) != order + 2:
            raise ValueError(f"record {rec} should have {order} indices plus re, im")
        t = tuple(rec[:order])
        if t in terms:
            raise ValueError(f"duplicate tuple {t} in state document")
        terms[t] = complex(rec[order], rec[order + 1])
    norm2 = sum(abs(a) ** 2 for a in terms.values())
    if abs(norm2 - 1.0) > LOAD_RENORM_TOL:
        raise ValueError(f"state norm^2 {norm2:.3g} deviates from 1 by more than {LOAD_RENORM_TOL}")
    # already-normalized documents load verbatim, so save/load is lossless
    renorm = abs(norm2 - 1.0) > NORM_TOL
    return ExcitationState.from_terms(N, terms, order=order, normalize=renorm)


def save_state(state: ExcitationState, path) -> None:
    """Write ``state`` as a JSON document ``{"N", "order", "terms": [[j, m, (n,) re, im], ...]}``."""
    Path(path).write_text(json.dumps(state_to_dict(state), indent=1) + "\n")


def load_state(path) -> ExcitationState:
    """Read a state file, renormalizing if the norm is off by less than 1e-6."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"state file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not a valid state document ({exc})") from None
    return state_from_dict(doc)
