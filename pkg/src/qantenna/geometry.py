"""Antenna geometries, angular grids and steering vectors.

All coordinates are dimensionless optical phases ``x_j = k * R_j``; the wave
number and the physical pitch are never stored separately.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AntennaGeometry",
    "AngularGrid",
    "CrossedArrayGeometry",
    "equispaced",
    "compound",
    "steering_vector",
]


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AntennaGeometry:
    """Emitters on a single axis.

    Parameters
    ----------
    positions : array_like of float
        Strictly increasing axial coordinates in radians of optical phase.
    """

    positions: np.ndarray

    def __post_init__(self):
        pos = _frozen(self.positions)
        if pos.ndim != 1 or pos.size < 2:
            raise ValueError("a geometry needs at least 2 emitters")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if np.any(np.diff(pos) <= 0):
            raise ValueError("positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)

    @property
    def N(self) -> int:
        return int(self.positions.size)

    @property
    def pitch(self) -> float | None:
        """Common spacing ``k*Delta`` if the array is equispaced, else None."""
        d = np.diff(self.positions)
        if np.allclose(d, d[0], rtol=1e-12, atol=0.0):
            return float(d[0])
        return None

    def __eq__(self, other):
        if not isinstance(other, AntennaGeometry):
            return NotImplemented
        return np.array_equal(self.positions, other.positions)

    def __hash__(self):
        return hash(self.positions.tobytes())

    def __repr__(self):
        return f"AntennaGeometry(N={self.N}, positions={self.positions.tolist()})"


def equispaced(N: int, k_delta: float) -> AntennaGeometry:
    """Regular array with positions ``k_delta * j`` for ``j = 1..N``."""
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if not k_delta > 0:
        raise ValueError(f"k_delta must be positive, got {k_delta}")
    return AntennaGeometry(k_delta * np.arange(1, int(N) + 1, dtype=float))


def compound(n_per_arm: int, k_delta: float, u: float) -> AntennaGeometry:
    """Two regular sub-arrays on one axis with pitches ``u*k_delta`` and ``k_delta``.

    Emitters ``1..n_per_arm`` form the large-pitch arm, the remaining ones the
    small-pitch arm. The arms are separated by one large pitch, so ``u = 1``
    reduces to an equispaced array of ``2*n_per_arm`` emitters.
    """
    if int(n_per_arm) != n_per_arm or n_per_arm < 1:
        raise ValueError(f"n_per_arm must be a positive integer, got {n_per_arm}")
    if not k_delta > 0:
        raise ValueError(f"k_delta must be positive, got {k_delta}")
    if not u >= 1:
        raise ValueError(f"pitch ratio u must be >= 1, got {u}")
    n = int(n_per_arm)
    big = u * k_delta * np.arange(1, n + 1, dtype=float)
    small = big[-1] + u * k_delta + k_delta * np.arange(n, dtype=float)
    return AntennaGeometry(np.concatenate([big, small]))


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Detection angles in ``[0, pi]`` (strictly increasing) with cached cosines."""

    thetas: np.ndarray
    cosines: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        th = _frozen(np.atleast_1d(self.thetas))
        if th.ndim != 1 or th.size == 0:
            raise ValueError("grid must be a non-empty 1-d sequence")
        if th[0] < 0 or th[-1] > np.pi:
            raise ValueError("grid angles must lie in [0, pi]")
        if np.any(np.diff(th) <= 0):
            raise ValueError("grid angles must be strictly increasing")
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "cosines", _frozen(np.cos(th)))

    @classmethod
    def uniform(cls, n: int = 100) -> "AngularGrid":
        if n < 1:
            raise ValueError("n must be positive")
        if n == 1:
            return cls(np.array([np.pi / 2]))
        return cls(np.linspace(0.0, np.pi, int(n)))

    def __len__(self):
        return int(self.thetas.size)

    def __repr__(self):
        return f"AngularGrid(n={len(self)})"


def steering_vector(g: AntennaGeometry, theta) -> np.ndarray:
    """Per-emitter phases ``exp(-i x_j cos(theta))``.

    A scalar ``theta`` gives shape ``(N,)``; an array gives ``theta.shape + (N,)``.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > np.pi):
        raise ValueError("theta must lie in [0, pi]")
    return np.exp(-1j * np.multiply.outer(np.cos(theta), g.positions))


@dataclass(frozen=True, eq=False)
class CrossedArrayGeometry:
    """Two perpendicular linear arms with 3-d optical-phase positions.

    ``arm1``/``arm2`` have shape ``(M, 3)``; ``axis1``/``axis2`` are the arm
    directions and must be orthogonal.
    """

    arm1: np.ndarray
    arm2: np.ndarray
    axis1: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    axis2: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))

    def __post_init__(self):
        for name in ("arm1", "arm2"):
            arm = _frozen(np.atleast_2d(getattr(self, name)))
            if arm.size == 0 or arm.ndim != 2 or arm.shape[1] != 3:
                raise ValueError(f"{name} must be a non-empty (M, 3) array")
            object.__setattr__(self, name, arm)
        for name in ("axis1", "axis2"):
            ax = np.asarray(getattr(self, name), dtype=float)
            n = np.linalg.norm(ax)
            if ax.shape != (3,) or n == 0:
                raise ValueError(f"{name} must be a non-zero 3-vector")
            object.__setattr__(self, name, _frozen(ax / n))
        if abs(float(self.axis1 @ self.axis2)) >= 1e-12:
            raise ValueError("arm axes must be orthogonal")

    @classmethod
    def from_offsets(cls, offsets1, offsets2, axis1=(1.0, 0.0, 0.0), axis2=(0.0, 1.0, 0.0)):
        """Place emitters at scalar distances along each axis from the origin."""
        a1 = np.asarray(axis1, float) / np.linalg.norm(axis1)
        a2 = np.asarray(axis2, float) / np.linalg.norm(axis2)
        p1 = np.multiply.outer(np.atleast_1d(np.asarray(offsets1, float)), a1)
        p2 = np.multiply.outer(np.atleast_1d(np.asarray(offsets2, float)), a2)
        return cls(p1, p2, a1, a2)

    @classmethod
    def random(cls, M: int, length: float, rng=None):
        """``M`` emitters per arm, uniform over ``[0, length]`` on the x and y axes."""
        rng = np.random.default_rng(rng)
        return cls.from_offsets(rng.uniform(0, length, M), rng.uniform(0, length, M))
