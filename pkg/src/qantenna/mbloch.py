"""Semiclassical Maxwell-Bloch dynamics of a dipole chain and post-semiclassical G2.

Units: time is measured in inverse single-pair coupling rates (the
``d^2 k^3 / hbar`` prefactor is 1).  Every emitter couples to every other one
through :func:`coupling_kernel`; retardation is neglected.

Noise: emitter ``j`` of realization ``r`` draws its complex Gaussian
increments from the stream seeded by ``(base_seed, r, j)``.  Every component
run of a superposition shares these streams; in ``"mirrored"`` mode the
odd-numbered components read them reflected (emitter ``j`` takes stream
``N + 1 - j``), in ``"uncorrelated"`` mode they read them unchanged, so the
sources at different emitters are independent in both cases.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .exceptions import IntegrationError
from .geometry import AngularGrid, AntennaGeometry
from .patterns import PatternGrid
from .states import ExcitationState

logger = logging.getLogger(__name__)

__all__ = [
    "MBParams",
    "BlochTrajectory",
    "Component",
    "ComponentSpec",
    "SemiclassicalRun",
    "coupling_kernel",
    "coupling_matrix",
    "integrate",
    "pulse_peak_time",
    "poynting_pattern",
    "run_components",
    "post_semiclassical_g2",
    "export_trajectory",
    "Z_BLOWUP",
]

Z_BLOWUP = 1.1
_NOISE_CHUNK = 4096


def coupling_kernel(x):
    """Field of a transverse dipole at separation ``x = k * distance``.

    ``G(x) = -(1/x^3 - i/x^2 - 1/x) exp(i x)``
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("separation must be positive (self-coupling is excluded)")
    out = -(1.0 / x**3 - 1j / x**2 - 1.0 / x) * np.exp(1j * x)
    return out[()] if out.ndim == 0 else out


def coupling_matrix(g: AntennaGeometry) -> np.ndarray:
    """Symmetric ``(N, N)`` matrix of :func:`coupling_kernel` with zero diagonal.

    Equispaced arrays use ``pitch * |j - l|`` so that mirror-image pairs get
    bit-identical entries.
    """
    N = g.N
    idx = np.arange(N)
    pitch = g.pitch
    if pitch is not None:
        dist = pitch * np.abs(idx[:, None] - idx[None, :]).astype(float)
    else:
        dist = np.abs(g.positions[:, None] - g.positions[None, :])
    K = np.zeros((N, N), dtype=complex)
    off = ~np.eye(N, dtype=bool)
    K[off] = coupling_kernel(dist[off])
    return K


@dataclass(frozen=True, eq=False)
class MBParams:
    """Integration and noise settings.

    The relaxation times default to 1000 so that they exceed the pulse
    build-up time (~40 for ``N = 3``, ``k*Delta = 4.5`` at the default noise
    level) by more than an order of magnitude.
    """

    geometry: AntennaGeometry
    tau1: float = 1000.0
    tau2: float = 1000.0
    dt: float = 1e-3
    t_end: float = 60.0
    noise_amplitude: float = 1e-3
    realizations: int = 100
    base_seed: int = 0
    noise_mode: Literal["mirrored", "uncorrelated"] = "mirrored"
    record_every: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > self.dt:
            raise ValueError("t_end must exceed dt")
        if not (self.tau1 > 0 and self.tau2 > 0):
            raise ValueError("relaxation times must be positive")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be non-negative")
        if self.noise_mode not in ("mirrored", "uncorrelated"):
            raise ValueError(f"unknown noise mode {self.noise_mode!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True, eq=False)
class BlochTrajectory:
    """Sampled polarizations ``R`` (complex, ``(T, N)``) and inversions ``Z`` (``(T, N)``)."""

    times: np.ndarray
    R: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        if len(self.times) == 0:
            raise ValueError("empty trajectory")
        if self.R.shape != self.Z.shape or self.R.shape[0] != len(self.times):
            raise ValueError("times, R and Z do not line up")

    def intensity(self) -> np.ndarray:
        """``sum_j |R_j(t)|^2``."""
        return np.sum(np.abs(self.R) ** 2, axis=1)

    def index_at(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))


class _NoiseSource:
    """Chunked complex N(0, 1) increments for one (realization, emitter) stream."""

    def __init__(self, base_seed: int, realization: int, emitter: int):
        self.rng = np.random.default_rng([base_seed, realization, emitter])

    def draw(self, n: int) -> np.ndarray:
        x = self.rng.standard_normal((n, 2))
        return (x[:, 0] + 1j * x[:, 1]) / np.sqrt(2.0)


def _rhs(K, R, Z, tau1, tau2):
    N = K.shape[0]
    f = np.zeros_like(R)
    # fixed summation order keeps results independent of batch size
    for l in range(N):
        f = f + K[:, l][None, :] * R[:, l][:, None]
    dR = -1j * f * Z - R / tau2
    dZ = np.real(1j * f * np.conj(R)) - (1.0 + Z) / tau1
    return dR, dZ


def _integrate_batch(p: MBParams, z0: np.ndarray, realizations: Sequence[int], stream_map: Sequence[int]):
    """Integrate ``len(realizations)`` runs side by side.

    ``stream_map[j]`` is the noise stream read by emitter ``j``.  Returns
    ``times``, ``R (T, B, N)``, ``Z (T, B, N)`` and a per-run failure mask.
    """
    g = p.geometry
    N = g.N
    K = coupling_matrix(g)
    B = len(realizations)
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (N,):
        raise ValueError(f"initial inversion must have length {N}")
    R = np.zeros((B, N), dtype=complex)
    Z = np.tile(z0, (B, 1))
    dt = p.dt
    n = p.n_steps
    scale = p.noise_amplitude * np.sqrt(dt)
    use_noise = p.noise_amplitude > 0
    sources = [[_NoiseSource(p.base_seed, r, stream_map[j]) for j in range(N)] for r in realizations]
    every = p.record_every
    n_rec = n // every + 1
    times = np.arange(n_rec) * every * dt
    Rh = np.empty((n_rec, B, N), dtype=complex)
    Zh = np.empty((n_rec, B, N))
    Rh[0], Zh[0] = R, Z
    failed = np.zeros(B, dtype=bool)
    noise = None
    for step in range(n):
        k = step % _NOISE_CHUNK
        if use_noise and k == 0:
            m = min(_NOISE_CHUNK, n - step)
            noise = np.stack([np.stack([s.draw(m) for s in row], axis=1) for row in sources], axis=1)
        k1R, k1Z = _rhs(K, R, Z, p.tau1, p.tau2)
        k2R, k2Z = _rhs(K, R + 0.5 * dt * k1R, Z + 0.5 * dt * k1Z, p.tau1, p.tau2)
        k3R, k3Z = _rhs(K, R + 0.5 * dt * k2R, Z + 0.5 * dt * k2Z, p.tau1, p.tau2)
        k4R, k4Z = _rhs(K, R + dt * k3R, Z + dt * k3Z, p.tau1, p.tau2)
        R = R + dt / 6.0 * (k1R + 2.0 * k2R + 2.0 * k3R + k4R)
        Z = Z + dt / 6.0 * (k1Z + 2.0 * k2Z + 2.0 * k3Z + k4Z)
        if use_noise:
            R = R + scale * noise[k]
        bad = ~np.all(np.abs(Z) <= Z_BLOWUP, axis=1)
        if bad.any():
            failed |= bad
            R[bad] = 0.0
            Z[bad] = 0.0
        if (step + 1) % every == 0:
            i = (step + 1) // every
            Rh[i], Zh[i] = R, Z
    return times, Rh, Zh, failed


def integrate(p: MBParams, z0, realization: int = 0) -> BlochTrajectory:
    """RK4 integration from ``R = 0`` and inversions ``z0``, Langevin kicks after each step.

    Raises :class:`IntegrationError` if any ``|Z|`` exceeds 1.1.
    """
    times, Rh, Zh, failed = _integrate_batch(p, z0, [realization], list(range(p.geometry.N)))
    if failed[0]:
        raise IntegrationError(f"inversion left [-{Z_BLOWUP}, {Z_BLOWUP}]; reduce dt")
    return BlochTrajectory(times, Rh[:, 0], Zh[:, 0])


def pulse_peak_time(t: BlochTrajectory) -> float:
    """Time of the largest ``sum_j |R_j|^2`` (earliest on ties)."""
    return float(t.times[int(np.argmax(t.intensity()))])


def poynting_pattern(t: BlochTrajectory, g: AntennaGeometry, grid: AngularGrid, time: float) -> np.ndarray:
    """Axial Poynting flux ``|sum_m R_m exp(-i x_m cos theta)|^2`` at the sample nearest ``time``."""
    R = t.R[t.index_at(time)]
    U = np.exp(-1j * np.multiply.outer(grid.cosines, g.positions))
    return np.abs(U @ R) ** 2


@dataclass(frozen=True)
class Component:
    """One basis term of the initial superposition.

    ``excited`` are the 1-based emitters started at ``Z = +1`` (the rest at
    ``-1``); each ``(j, m)`` in ``pairs`` contributes ``R_j R_m`` with the
    symmetrized detector phases; ``weight`` is the superposition amplitude.
    """

    excited: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    weight: complex = 1.0


@dataclass(frozen=True)
class ComponentSpec:
    components: tuple[Component, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("at least one component is required")

    def validate(self, N: int):
        for c in self.components:
            idx = list(c.excited) + [i for pair in c.pairs for i in pair]
            if not c.excited or not c.pairs:
                raise ValueError("components need excited emitters and pairs")
            if any(not 1 <= i <= N for i in idx):
                raise ValueError(f"component {c} has indices outside [1, {N}]")

    @classmethod
    def from_state(cls, state: ExcitationState) -> "ComponentSpec":
        """One component per pair term of an order-2 state, in sorted tuple order."""
        if state.order != 2:
            raise ValueError("post-semiclassical components are built from pair states")
        comps = tuple(
            Component(tuple(sorted(t)), (tuple(sorted(t)),), a) for t, a in sorted(state.terms.items())
        )
        return cls(comps)


@dataclass(frozen=True, eq=False)
class SemiclassicalRun:
    """Per-realization pair products at the detection time.

    ``products[r, k, q]`` is ``R_j R_m`` of pair ``q`` in component ``k``;
    realizations that blew up are excluded.
    """

    geometry: AntennaGeometry
    spec: ComponentSpec
    products: np.ndarray
    detection_times: np.ndarray
    kept: np.ndarray
    failed: np.ndarray
    trajectories: tuple = field(default=(), repr=False)

    def amplitude(self, theta1, theta2) -> np.ndarray:
        """``A(theta1, theta2)`` per kept realization, shape ``(R,) + broadcast shape``."""
        x = self.geometry.positions
        c1 = np.cos(np.asarray(theta1, dtype=float))
        c2 = np.cos(np.asarray(theta2, dtype=float))
        A = 0.0
        for k, comp in enumerate(self.spec.components):
            for q, (j, m) in enumerate(comp.pairs):
                xj, xm = x[j - 1], x[m - 1]
                phase = np.exp(1j * (xj * c1 + xm * c2)) + np.exp(1j * (xm * c1 + xj * c2))
                w = comp.weight * self.products[:, k, q]
                A = A + np.multiply.outer(w, phase)
        return A

    def g2(self, theta1, theta2) -> np.ndarray:
        """Realization-averaged ``|A|^2``."""
        return np.mean(np.abs(self.amplitude(theta1, theta2)) ** 2, axis=0)

    def pattern(self, grid: AngularGrid, normalize: bool = False) -> PatternGrid:
        t1, t2 = np.meshgrid(grid.thetas, grid.thetas, indexing="ij")
        vals = self.g2(t1, t2)
        # A is symmetric by construction; this only removes rounding asymmetry
        p = PatternGrid(grid, (vals + vals.T) / 2)
        return p.normalized() if normalize else p


def run_components(
    p: MBParams,
    spec: ComponentSpec,
    time_factor: float = 1.0,
    detection_time: float | None = None,
    keep_trajectories: bool = False,
) -> SemiclassicalRun:
    """Integrate every component for every realization and collect pair products.

    The detection time of a realization is ``time_factor`` times the peak of
    the summed intensity of all its component runs, unless ``detection_time``
    is given.  Raises :class:`IntegrationError` if fewer than half of the
    realizations survive.
    """
    g = p.geometry
    N = g.N
    spec.validate(N)
    reals = list(range(p.realizations))
    runs = []
    for k, comp in enumerate(spec.components):
        z0 = -np.ones(N)
        z0[[i - 1 for i in comp.excited]] = 1.0
        mirrored = p.noise_mode == "mirrored" and k % 2 == 1
        stream_map = [N - 1 - j for j in range(N)] if mirrored else list(range(N))
        runs.append(_integrate_batch(p, z0, reals, stream_map))
    times = runs[0][0]
    failed = np.zeros(len(reals), dtype=bool)
    for r in runs:
        failed |= r[3]
    if failed.sum() * 2 > len(reals):
        raise IntegrationError(f"{int(failed.sum())} of {len(reals)} realizations blew up")
    if failed.any():
        logger.warning("dropping %d failed realizations: %s", failed.sum(), np.flatnonzero(failed).tolist())
    kept = np.flatnonzero(~failed)
    intensity = sum(np.sum(np.abs(r[1]) ** 2, axis=2) for r in runs)  # (T, B)
    if detection_time is None:
        t_det = times[np.argmax(intensity, axis=0)] * time_factor
    else:
        t_det = np.full(len(reals), float(detection_time))
    idx = np.argmin(np.abs(times[:, None] - t_det[None, :]), axis=0)
    n_pairs = max(len(c.pairs) for c in spec.components)
    prods = np.zeros((len(kept), len(spec.components), n_pairs), dtype=complex)
    for k, comp in enumerate(spec.components):
        Rh = runs[k][1]
        for q, (j, m) in enumerate(comp.pairs):
            prods[:, k, q] = Rh[idx[kept], kept, j - 1] * Rh[idx[kept], kept, m - 1]
    trajs = ()
    if keep_trajectories:
        trajs = tuple(
            tuple(BlochTrajectory(times, r[1][:, b], r[2][:, b]) for b in range(len(reals))) for r in runs
        )
    return SemiclassicalRun(g, spec, prods, times[idx[kept]], kept, np.flatnonzero(failed), trajs)


def post_semiclassical_g2(
    p: MBParams,
    spec: ComponentSpec,
    grid: AngularGrid,
    normalize: bool = False,
    time_factor: float = 1.0,
) -> PatternGrid:
    """Realization-averaged ``|A(theta1, theta2)|^2`` from per-component runs."""
    return run_components(p, spec, time_factor=time_factor).pattern(grid, normalize=normalize)


def export_trajectory(t: BlochTrajectory, path) -> None:
    """CSV with columns ``t, re_R1, im_R1, Z1, ..., re_RN, im_RN, ZN``."""
    N = t.R.shape[1]
    cols = [t.times]
    names = ["t"]
    for j in range(N):
        cols += [t.R[:, j].real, t.R[:, j].imag, t.Z[:, j]]
        names += [f"re_R{j + 1}", f"im_R{j + 1}", f"Z{j + 1}"]
    np.savetxt(Path(path), np.column_stack(cols), fmt="%.11e", delimiter=",", header=",".join(names), comments="")
