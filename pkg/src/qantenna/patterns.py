"""Far-field photon correlation patterns of an emitter chain.

Two independent evaluation paths are provided:

* the amplitude formula, ``Phi = u(theta1)^T S u(theta2)`` with ``S`` the
  symmetrized coefficient matrix (or rank-3 tensor) and ``u`` steering
  vectors, evaluated over a grid as a few matrix products;
* :func:`brute_force_pattern`, which applies the array-factor lowering
  operators literally to the state in the occupation basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import SizeLimitError
from .geometry import AngularGrid, AntennaGeometry, CrossedArrayGeometry, steering_vector
from .states import ExcitationState

__all__ = [
    "PatternGrid",
    "amplitude2",
    "amplitude3",
    "pattern",
    "brute_force_pattern",
    "pattern_integral",
    "crossed_array_phase",
    "export_pattern",
    "read_pattern",
    "BRUTE_FORCE_MAX_N",
]

BRUTE_FORCE_MAX_N = 12


@dataclass(frozen=True, eq=False)
class PatternGrid:
    """Correlation values on the Cartesian product of ``grid`` with itself.

    ``values`` has one axis per detector (2 or 3 axes).
    """

    grid: AngularGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim not in (2, 3) or any(n != len(self.grid) for n in v.shape):
            raise ValueError("values must be a square matrix or cube matching the grid")
        if np.any(v < 0):
            raise ValueError("pattern values must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def order(self) -> int:
        return self.values.ndim

    def max(self) -> float:
        return float(self.values.max())

    def normalized(self) -> "PatternGrid":
        """Copy scaled so the peak equals 1 (unchanged if identically zero)."""
        peak = self.values.max()
        return self if peak == 0 else PatternGrid(self.grid, self.values / peak)


def _check_order(s: ExcitationState, order: int):
    if s.order != order:
        raise ValueError(f"expected an order-{order} state, got order {s.order}")


def _check_geometry(g: AntennaGeometry, s: ExcitationState):
    if g.N != s.N:
        raise ValueError(f"state has N={s.N} but geometry has N={g.N}")


def amplitude2(g: AntennaGeometry, s: ExcitationState, theta1, theta2):
    """Two-photon detection amplitude; broadcasts over the angle arguments."""
    _check_order(s, 2)
    _check_geometry(g, s)
    S = s.symmetric_tensor()
    u1 = steering_vector(g, theta1)
    u2 = steering_vector(g, theta2)
    return np.einsum("...j,jm,...m->...", u1, S, u2)


def amplitude3(g: AntennaGeometry, s: ExcitationState, theta1, theta2, theta3):
    """Three-photon detection amplitude, fully symmetric in the detector angles."""
    _check_order(s, 3)
    _check_geometry(g, s)
    T = s.symmetric_tensor()
    u1, u2, u3 = (steering_vector(g, t) for t in (theta1, theta2, theta3))
    return np.einsum("...a,...b,...c,abc->...", u1, u2, u3, T)


def _grid_amplitudes(g: AntennaGeometry, s: ExcitationState, grid: AngularGrid) -> np.ndarray:
    _check_geometry(g, s)
    U = steering_vector(g, grid.thetas)
    T = s.symmetric_tensor()
    if s.order == 2:
        return U @ T @ U.T
    A = np.einsum("ia,abc->ibc", U, T)
    A = np.einsum("jb,ibc->ijc", U, A)
    return np.einsum("kc,ijc->ijk", U, A)


def pattern(g: AntennaGeometry, s: ExcitationState, grid: AngularGrid, normalize: bool = False) -> PatternGrid:
    """``|Phi|^2`` on every detector-angle combination of ``grid``."""
    p = PatternGrid(grid, np.abs(_grid_amplitudes(g, s, grid)) ** 2)
    return p.normalized() if normalize else p


def _lower(amplitudes: dict, phases: np.ndarray) -> dict:
    # phases[j] is the array-factor weight of emitter j, broadcast over the grid
    out: dict = {}
    for occupied, amp in amplitudes.items():
        for j in occupied:
            rest = occupied - {j}
            term = phases[j] * amp
            out[rest] = out[rest] + term if rest in out else term
    return out


def brute_force_pattern(g: AntennaGeometry, s: ExcitationState, grid: AngularGrid) -> PatternGrid:
    """Evaluate ``|| A(theta_1) ... A(theta_n) |psi> ||^2`` operator by operator.

    ``A(theta) = sum_j exp(-i x_j cos theta) sigma_j^-`` acts on occupation
    sets; each detector's phases live on their own grid axis, so the whole
    pattern comes out of a single pass. Limited to ``N <= 12``.
    """
    _check_geometry(g, s)
    if s.N > BRUTE_FORCE_MAX_N:
        raise SizeLimitError(f"brute-force oracle supports N <= {BRUTE_FORCE_MAX_N}, got N={s.N}")
    n = s.order
    G = len(grid)
    amplitudes = {frozenset(i - 1 for i in t): np.asarray(a, dtype=complex) for t, a in s.terms.items()}
    base = np.exp(-1j * np.multiply.outer(g.positions, grid.cosines))  # (N, G)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = G
        amplitudes = _lower(amplitudes, base.reshape((g.N, *shape)))
    total = np.zeros((G,) * n)
    for amp in amplitudes.values():
        total = total + np.abs(np.broadcast_to(amp, (G,) * n)) ** 2
    return PatternGrid(grid, total)


def pattern_integral(g: AntennaGeometry, s: ExcitationState, resolution: int = 400) -> float:
    """Trapezoidal ``int int p dx1 dx2`` over ``x_i = k*Delta*cos(theta_i) in [-k*Delta, k*Delta]``.

    The quadrature nodes are uniform in ``x``, not in the angle.
    """
    _check_order(s, 2)
    _check_geometry(g, s)
    kd = g.pitch
    if kd is None:
        raise ValueError("pattern_integral needs an equispaced geometry")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    x = np.linspace(-kd, kd, int(resolution))
    U = np.exp(-1j * np.multiply.outer(x / kd, g.positions))
    p = np.abs(U @ s.symmetric_tensor() @ U.T) ** 2
    return float(trapezoid(trapezoid(p, x, axis=1), x))


def crossed_array_phase(g: CrossedArrayGeometry, k1_dir, k2_dir) -> complex:
    """Phase factor of a state pairing every emitter of arm 1 with every emitter of arm 2."""
    k1 = np.asarray(k1_dir, dtype=float)
    k2 = np.asarray(k2_dir, dtype=float)
    for k in (k1, k2):
        if k.shape != (3,) or abs(np.linalg.norm(k) - 1.0) > 1e-9:
            raise ValueError("direction vectors must be unit 3-vectors")
    return complex(np.exp(-1j * (g.arm1 @ k1)).sum() * np.exp(-1j * (g.arm2 @ k2)).sum())


def export_pattern(p: PatternGrid, path) -> None:
    """Write a CSV table ``theta1,theta2[,theta3],p`` in lexicographic angle order."""
    n = p.order
    axes = np.meshgrid(*([p.grid.thetas] * n), indexing="ij")
    cols = [a.ravel() for a in axes] + [p.values.ravel()]
    header = ",".join([f"theta{i + 1}" for i in range(n)] + ["p"])
    np.savetxt(Path(path), np.column_stack(cols), fmt="%.11e", delimiter=",", header=header, comments="")


def read_pattern(path) -> PatternGrid:
    """Inverse of :func:`export_pattern`."""
    path = Path(path)
    header = path.open().readline().strip().split(",")
    n = len(header) - 1
    if n not in (2, 3) or header[-1] != "p":
        raise ValueError(f"{path}: unexpected header {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    # 12 significant digits can push pi slightly past the end of the range
    thetas = np.clip(np.unique(data[:, 0]), 0.0, np.pi)
    G = thetas.size
    return PatternGrid(AngularGrid(thetas), data[:, -1].reshape((G,) * n))
