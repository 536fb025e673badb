"""scikit-learn style front ends.

``fit`` takes the detection-angle grid (or nothing, for the default uniform
grid); ``predict`` maps rows of detector angles to correlation values.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import design, mbloch
from .geometry import equispaced
from .patterns import amplitude2
from .states import ExcitationState
from .validation import check_angles, check_grid

__all__ = ["StateDesigner", "SemiclassicalG2"]

_MODES = ("co-directional", "contra-directional", "dark", "directivity")


class StateDesigner(BaseEstimator):
    """Design a two-excitation state of an equispaced array.

    Parameters
    ----------
    n_emitters : int, default=20
    k_delta : float, default=2.0
        Pitch in radians of optical phase.
    mode : {"co-directional", "contra-directional", "dark", "directivity"}
    n_angles : int, default=100
        Size of the uniform grid used when ``fit`` gets no angles.
    target_angles : pair of float, default=(pi/2, pi/2)
        Detector pair for ``mode="directivity"``.
    target_value, visibility_weight, target_weight : float or None
        Overrides for the directional problems (see
        :func:`qantenna.design.co_directional_problem`).
    regularization : float, default=1.0
        Relative visibility shift for ``mode="directivity"``.
    restarts, max_iter, tol, field, n_jobs
        Passed to :class:`qantenna.design.OptimizeOptions`.
    random_state : int, default=0

    Attributes
    ----------
    state_ : ExcitationState
    geometry_, grid_ : fitted geometry and angle grid
    objective_ : float
        Design objective (``<C_V>`` for the eigen-solved modes).
    diagnostics_ : tuple of RestartRecord
        Empty for the eigen-solved modes.
    """

    def __init__(
        self,
        n_emitters=20,
        k_delta=2.0,
        mode="co-directional",
        n_angles=100,
        target_angles=(np.pi / 2, np.pi / 2),
        target_value=None,
        visibility_weight=None,
        target_weight=None,
        regularization=1.0,
        restarts=20,
        max_iter=5000,
        tol=1e-8,
        field="auto",
        n_jobs=1,
        random_state=0,
    ):
        self.n_emitters = n_emitters
        self.k_delta = k_delta
        self.mode = mode
        self.n_angles = n_angles
        self.target_angles = target_angles
        self.target_value = target_value
        self.visibility_weight = visibility_weight
        self.target_weight = target_weight
        self.regularization = regularization
        self.restarts = restarts
        self.max_iter = max_iter
        self.tol = tol
        self.field = field
        self.n_jobs = n_jobs
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        g = equispaced(self.n_emitters, self.k_delta)
        grid = check_grid(X, self.n_angles)
        self.diagnostics_ = ()
        if self.mode == "dark":
            self.state_ = design.dark_optimize(g, grid)
        elif self.mode == "directivity":
            self.state_ = design.directivity_optimize(g, grid, self.target_angles, self.regularization)
        else:
            build = design.co_directional_problem if self.mode == "co-directional" else design.contra_directional_problem
            problem = build(g, grid, self.target_value, self.visibility_weight, self.target_weight)
            opts = design.OptimizeOptions(
                restarts=self.restarts,
                max_iter=self.max_iter,
                tol=self.tol,
                field=self.field,
                seed=self.random_state,
                n_jobs=self.n_jobs,
            )
            res = design.optimize(problem, opts)
            self.state_ = res.state
            self.objective_ = res.objective
            self.diagnostics_ = res.diagnostics
        if self.mode in ("dark", "directivity"):
            self.objective_ = design.expectation(design.visibility_matrix(g, grid), self.state_)
        self.geometry_ = g
        self.grid_ = grid
        return self

    def predict(self, X):
        """``p(theta1, theta2)`` of the designed state for each row of ``X``."""
        check_is_fitted(self, "state_")
        X = check_angles(X, 2)
        return np.abs(amplitude2(self.geometry_, self.state_, X[:, 0], X[:, 1])) ** 2


class SemiclassicalG2(BaseEstimator):
    """Post-semiclassical two-photon correlations of an equispaced chain.

    ``state=None`` uses the contra-directional nearest-neighbour pair state
    ``(|++->  + |-++>) / sqrt(2)`` of three emitters (or its ``n_emitters``
    generalization over adjacent pairs).  ``fit`` runs the Maxwell-Bloch
    ensemble; ``predict`` evaluates the realization-averaged ``|A|^2``.
    """

    def __init__(
        self,
        n_emitters=3,
        k_delta=4.5,
        state=None,
        tau1=1000.0,
        tau2=1000.0,
        dt=1e-3,
        t_end=60.0,
        noise_amplitude=1e-3,
        realizations=100,
        noise_mode="mirrored",
        time_factor=1.0,
        random_state=0,
    ):
        self.n_emitters = n_emitters
        self.k_delta = k_delta
        self.state = state
        self.tau1 = tau1
        self.tau2 = tau2
        self.dt = dt
        self.t_end = t_end
        self.noise_amplitude = noise_amplitude
        self.realizations = realizations
        self.noise_mode = noise_mode
        self.time_factor = time_factor
        self.random_state = random_state

    def _state(self) -> ExcitationState:
        if self.state is not None:
            return self.state
        N = self.n_emitters
        return ExcitationState.from_terms(N, {(j + 1, j): 1.0 for j in range(1, N)}, order=2)

    def fit(self, X=None, y=None):
        g = equispaced(self.n_emitters, self.k_delta)
        params = mbloch.MBParams(
            geometry=g,
            tau1=self.tau1,
            tau2=self.tau2,
            dt=self.dt,
            t_end=self.t_end,
            noise_amplitude=self.noise_amplitude,
            realizations=self.realizations,
            base_seed=self.random_state,
            noise_mode=self.noise_mode,
        )
        self.run_ = mbloch.run_components(params, mbloch.ComponentSpec.from_state(self._state()), self.time_factor)
        self.n_failed_ = len(self.run_.failed)
        return self

    def predict(self, X):
        check_is_fitted(self, "run_")
        X = check_angles(X, 2)
        return self.run_.g2(X[:, 0], X[:, 1])
