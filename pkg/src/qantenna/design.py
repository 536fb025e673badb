"""State design over the two-excitation pair basis.

Every detector arrangement ``(theta1, theta2)`` defines a rank-1 measurement
form ``Pi = phi phi^H`` with ``p = |phi^H c|^2``; summing them over a grid
gives the visibility operator ``C_V``.  Designs are found either in closed
form (eigenvectors) or by projected gradient descent on the unit sphere.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.linalg as sla

from .geometry import AngularGrid, AntennaGeometry
from .states import ExcitationState, tuple_basis

logger = logging.getLogger(__name__)

__all__ = [
    "PairBasisForm",
    "Target",
    "DesignProblem",
    "OptimizeOptions",
    "RestartRecord",
    "OptimizeResult",
    "pi_vector",
    "pi_form",
    "visibility_matrix",
    "expectation",
    "probability_range",
    "feasibility_boundary",
    "is_convex_polygon",
    "optimize",
    "dark_optimize",
    "directivity_optimize",
    "directivity_ratio",
    "co_directional_problem",
    "contra_directional_problem",
]


@dataclass(frozen=True, eq=False)
class PairBasisForm:
    """Hermitian PSD matrix over :func:`~qantenna.states.tuple_basis` ``(N, 2)``."""

    matrix: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        M = np.array(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("form must be a square matrix")
        scale = max(1.0, float(np.abs(M).max(initial=0.0)))
        if np.abs(M - M.conj().T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("form is not Hermitian")
        M = (M + M.conj().T) / 2
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigh(self):
        return np.linalg.eigh(self.matrix)


def _pair_indices(N: int):
    basis = tuple_basis(N, 2)
    J = np.array([t[0] - 1 for t in basis])
    M = np.array([t[1] - 1 for t in basis])
    return J, M


def _amplitude_rows(g: AntennaGeometry, theta1, theta2) -> np.ndarray:
    """Rows ``phi^H`` so that ``rows @ c`` gives detection amplitudes."""
    J, M = _pair_indices(g.N)
    c1 = np.cos(np.atleast_1d(np.asarray(theta1, dtype=float)))
    c2 = np.cos(np.atleast_1d(np.asarray(theta2, dtype=float)))
    x = g.positions
    u1 = np.exp(-1j * np.multiply.outer(c1, x))
    u2 = np.exp(-1j * np.multiply.outer(c2, x))
    return u1[:, J] * u2[:, M] + u1[:, M] * u2[:, J]


def pi_vector(g: AntennaGeometry, theta1: float, theta2: float) -> np.ndarray:
    """``phi`` with ``p(theta1, theta2) = |<phi, c>|^2`` (``np.vdot(phi, c)`` is the amplitude)."""
    for t in (theta1, theta2):
        if not 0 <= t <= np.pi:
            raise ValueError("angles must lie in [0, pi]")
    return _amplitude_rows(g, theta1, theta2)[0].conj()


def pi_form(g: AntennaGeometry, theta1: float, theta2: float) -> PairBasisForm:
    phi = pi_vector(g, theta1, theta2)
    return PairBasisForm(np.outer(phi, phi.conj()), {"theta1": float(theta1), "theta2": float(theta2)})


def _grid_pairs(grid: AngularGrid):
    i, j = np.triu_indices(len(grid))
    return grid.thetas[i], grid.thetas[j]


def visibility_matrix(g: AntennaGeometry, grid: AngularGrid) -> PairBasisForm:
    """``C_V = sum_{i <= j} Pi(theta_i, theta_j)`` over the grid."""
    th = grid.thetas
    D = g.N * (g.N - 1) // 2
    C = np.zeros((D, D), dtype=complex)
    for i in range(len(th)):
        rows = _amplitude_rows(g, np.full(len(th) - i, th[i]), th[i:])
        C += rows.conj().T @ rows
    return PairBasisForm(C, {"grid_size": len(grid)})


def expectation(form: PairBasisForm, state) -> float:
    """``c^H M c`` for a state or a raw coefficient vector."""
    c = state.to_vector() if isinstance(state, ExcitationState) else np.asarray(state)
    return float(np.real(np.vdot(c, form.matrix @ c)))


def probability_range(form: PairBasisForm) -> tuple[float, float]:
    """Extreme eigenvalues: the attainable range of ``p`` over all states."""
    w = np.linalg.eigvalsh(form.matrix)
    return float(w[0]), float(w[-1])


def feasibility_boundary(form_a: PairBasisForm, form_b: PairBasisForm, sweep: int = 360) -> np.ndarray:
    """Boundary points ``(p_a, p_b)`` of the joint numerical range of two forms.

    For each direction ``phi_k = 2 pi k / sweep`` the top eigenvector of
    ``cos(phi_k) A + sin(phi_k) B`` is a boundary point; returns ``(sweep, 2)``.
    """
    if form_a.dim != form_b.dim:
        raise ValueError("forms have different dimensions")
    if sweep < 8:
        raise ValueError("sweep must be >= 8")
    A, B = form_a.matrix, form_b.matrix
    pts = np.empty((sweep, 2))
    for k in range(sweep):
        ang = 2 * np.pi * k / sweep
        _, v = np.linalg.eigh(np.cos(ang) * A + np.sin(ang) * B)
        top = v[:, -1]
        pts[k] = np.real(np.vdot(top, A @ top)), np.real(np.vdot(top, B @ top))
    return pts


def is_convex_polygon(points, tol: float = 1e-9) -> bool:
    """True if consecutive edge cross products never turn clockwise (beyond ``tol``)."""
    P = np.asarray(points, dtype=float)
    e = np.roll(P, -1, axis=0) - P
    f = np.roll(e, -1, axis=0)
    cross = e[:, 0] * f[:, 1] - e[:, 1] * f[:, 0]
    scale = max(1.0, float(np.abs(P).max())) ** 2
    return bool(np.all(cross >= -tol * scale))


@dataclass(frozen=True)
class Target:
    theta1: float
    theta2: float
    value: float
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class DesignProblem:
    """Weighted visibility plus quadratic target distance.

    ``F(c) = visibility_weight * c^H C_V c + sum_t w_t (c^H Pi_t c - p_t)^2``
    """

    geometry: AntennaGeometry
    grid: AngularGrid
    visibility_weight: float = 1.0
    targets: tuple[Target, ...] = ()
    mode: Literal["co-directional", "contra-directional", "custom"] = "custom"

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.visibility_weight < 0 or any(t.weight < 0 for t in self.targets):
            raise ValueError("weights must be non-negative")
        if not (self.visibility_weight > 0 or self.targets):
            raise ValueError("problem needs a positive visibility weight or at least one target")
        if self.mode not in ("co-directional", "contra-directional", "custom"):
            raise ValueError(f"unknown mode {self.mode!r}")


def _directional_problem(g, grid, mode, pairs, target_value, visibility_weight, target_weight):
    n_cells = len(grid) * (len(grid) + 1) // 2
    p0 = 2.0 * g.N if target_value is None else float(target_value)
    wv = 10.0 / n_cells if visibility_weight is None else float(visibility_weight)
    wt = 10.0 / len(pairs) if target_weight is None else float(target_weight)
    targets = tuple(Target(float(a), float(b), p0, wt) for a, b in pairs)
    return DesignProblem(g, grid, wv, targets, mode)


def co_directional_problem(g: AntennaGeometry, grid: AngularGrid, target_value=None, visibility_weight=None, target_weight=None):
    """Targets on the diagonal ``(theta_i, theta_i)`` of the grid.

    Defaults: ``p0 = 2N`` (the ridge height of a unit-norm anti-diagonal
    state), visibility weight ``10 / n_cells`` and target weight
    ``10 / n_targets``, so both terms enter as averages.
    """
    pairs = [(t, t) for t in grid.thetas]
    return _directional_problem(g, grid, "co-directional", pairs, target_value, visibility_weight, target_weight)


def contra_directional_problem(g: AntennaGeometry, grid: AngularGrid, target_value=None, visibility_weight=None, target_weight=None):
    """Targets on the mirrored pairs ``(theta_i, pi - theta_i)``; defaults as for co-directional."""
    pairs = [(t, min(max(np.pi - t, 0.0), np.pi)) for t in grid.thetas]
    return _directional_problem(g, grid, "contra-directional", pairs, target_value, visibility_weight, target_weight)


@dataclass(frozen=True)
class OptimizeOptions:
    """Projected-gradient settings.

    ``field="auto"`` searches complex coefficients for ``N <= 10`` and real
    ones above.  Restart ``r`` starts from a Gaussian vector drawn with seed
    ``(seed, r)``.
    """

    restarts: int = 20
    max_iter: int = 5000
    tol: float = 1e-8
    field: Literal["auto", "real", "complex"] = "auto"
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.field not in ("auto", "real", "complex"):
            raise ValueError(f"unknown coefficient field {self.field!r}")


@dataclass(frozen=True)
class RestartRecord:
    restart: int
    iterations: int
    objective: float
    grad_norm: float
    converged: bool


@dataclass(frozen=True, eq=False)
class OptimizeResult:
    state: ExcitationState
    objective: float
    diagnostics: tuple[RestartRecord, ...]
    best_restart: int
    vector: np.ndarray = field(repr=False)


class _Objective:
    def __init__(self, problem: DesignProblem, real: bool):
        g = problem.geometry
        self.wv = problem.visibility_weight
        self.C = visibility_matrix(g, problem.grid).matrix if self.wv > 0 else None
        t = problem.targets
        if t:
            self.rows = _amplitude_rows(g, [x.theta1 for x in t], [x.theta2 for x in t])
            self.p0 = np.array([x.value for x in t])
            self.wt = np.array([x.weight for x in t])
        else:
            self.rows = None
        self.real = real

    def value_and_grad(self, c):
        f = 0.0
        grad = np.zeros_like(c, dtype=complex)
        if self.C is not None:
            Cc = self.C @ c
            f += self.wv * float(np.real(np.vdot(c, Cc)))
            grad += 2 * self.wv * Cc
        if self.rows is not None:
            amp = self.rows @ c
            r = np.abs(amp) ** 2 - self.p0
            f += float(np.sum(self.wt * r**2))
            grad += self.rows.conj().T @ (4 * self.wt * r * amp)
        if self.real:
            grad = grad.real
        return f, grad

    def value(self, c):
        return self.value_and_grad(c)[0]


def _descend(obj: _Objective, c0: np.ndarray, opts: OptimizeOptions):
    """Armijo-backtracked projected gradient descent with BB trial steps."""
    c = c0 / np.linalg.norm(c0)
    f, g = obj.value_and_grad(c)
    g = g - np.real(np.vdot(c, g)) * c
    step = 1.0 / max(np.linalg.norm(g), 1e-300)
    prev = None
    it = 0
    gn = float(np.linalg.norm(g))
    converged = gn <= opts.tol
    while not converged and it < opts.max_iter:
        if prev is not None:
            s, y = c - prev[0], g - prev[1]
            sy = float(np.real(np.vdot(s, y)))
            if sy > 0:
                step = float(np.real(np.vdot(s, s))) / sy
        while True:
            trial = c - step * g
            trial = trial / np.linalg.norm(trial)
            f_trial = obj.value(trial)
            if f_trial <= f - 1e-4 * step * gn**2:
                break
            step *= 0.5
            if step < 1e-300:
                return c, f, it, gn, False
        prev = (c, g)
        c = trial
        f, g = obj.value_and_grad(c)
        g = g - np.real(np.vdot(c, g)) * c
        gn = float(np.linalg.norm(g))
        it += 1
        converged = gn <= opts.tol
    return c, f, it, gn, converged


def _canonical_phase(c: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(c)))
    return c * (np.abs(c[k]) / c[k]) if c[k] != 0 else c


def optimize(problem: DesignProblem, options: OptimizeOptions | None = None) -> OptimizeResult:
    """Minimize the design objective over unit-norm pair states.

    The best restart (lowest objective, ties to the lowest index) is
    returned; non-converged restarts are flagged in ``diagnostics``.
    """
    opts = options or OptimizeOptions()
    N = problem.geometry.N
    real = opts.field == "real" or (opts.field == "auto" and N > 10)
    obj = _Objective(problem, real)
    D = N * (N - 1) // 2

    def run(r):
        rng = np.random.default_rng([opts.seed, r])
        c0 = rng.standard_normal(D)
        if not real:
            c0 = c0 + 1j * rng.standard_normal(D)
        return _descend(obj, c0.astype(complex) if not real else c0, opts)

    if opts.n_jobs == 1:
        results = [run(r) for r in range(opts.restarts)]
    else:
        with ThreadPoolExecutor(max_workers=opts.n_jobs if opts.n_jobs > 0 else None) as ex:
            results = list(ex.map(run, range(opts.restarts)))

    records = tuple(
        RestartRecord(r, it, float(f), gn, conv) for r, (_, f, it, gn, conv) in enumerate(results)
    )
    best = min(range(len(results)), key=lambda r: (results[r][1], r))
    if not records[best].converged:
        logger.info("best restart %d stopped with gradient norm %.3g", best, records[best].grad_norm)
    vec = _canonical_phase(results[best][0].astype(complex))
    state = ExcitationState.from_vector(N, 2, vec)
    return OptimizeResult(state, float(results[best][1]), records, best, vec)


def dark_optimize(g: AntennaGeometry, grid: AngularGrid) -> ExcitationState:
    """State minimizing ``<C_V>``: the lowest eigenvector of the visibility operator."""
    _, v = visibility_matrix(g, grid).eigh()
    return ExcitationState.from_vector(g.N, 2, _canonical_phase(v[:, 0]))


def _regularized_visibility(C: np.ndarray, regularization: float) -> np.ndarray:
    D = C.shape[0]
    eps = regularization * np.trace(C).real / D
    return C + eps * np.eye(D)


def directivity_optimize(
    g: AntennaGeometry,
    grid: AngularGrid,
    thetas: Sequence[float],
    regularization: float = 1.0,
) -> ExcitationState:
    """Top generalized eigenvector of ``(Pi(theta1, theta2), C_V + eps I)``.

    ``eps = regularization * trace(C_V) / dim``.  Without a shift comparable
    to the mean eigenvalue the ratio is dominated by near-dark states whose
    numerator and denominator both vanish.
    """
    t1, t2 = thetas
    phi = pi_vector(g, t1, t2)
    C = visibility_matrix(g, grid).matrix
    B = _regularized_visibility(C, regularization)
    if regularization == 0:
        try:
            np.linalg.cholesky(B)
        except np.linalg.LinAlgError:
            B = _regularized_visibility(C, 1e-10)
    # rank-1 numerator: the maximizer is B^{-1} phi
    c = sla.solve(B, phi, assume_a="pos")
    return ExcitationState.from_vector(g.N, 2, _canonical_phase(c))


def directivity_ratio(g: AntennaGeometry, grid: AngularGrid, thetas: Sequence[float], state, regularization: float = 0.0) -> float:
    """``p(theta1, theta2) / <C_V + eps I>`` for a state."""
    phi = pi_vector(g, *thetas)
    c = state.to_vector() if isinstance(state, ExcitationState) else np.asarray(state)
    B = _regularized_visibility(visibility_matrix(g, grid).matrix, regularization)
    return float(abs(np.vdot(phi, c)) ** 2 / np.real(np.vdot(c, B @ c)))
