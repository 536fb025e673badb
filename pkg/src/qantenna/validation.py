"""Input checks for detector-angle arrays."""
from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .geometry import AngularGrid


def check_angles(X, n_detectors: int = 2) -> np.ndarray:
    """Validate an ``(n_samples, n_detectors)`` array of angles in ``[0, pi]``."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != n_detectors:
        raise ValueError(f"expected {n_detectors} angle columns, got {X.shape[1]}")
    if np.any(X < 0) or np.any(X > np.pi):
        raise ValueError("angles must lie in [0, pi]")
    return X


def check_grid(X=None, n_angles: int = 100) -> AngularGrid:
    """Turn a 1-d array (or a single-column 2-d array) of angles into a grid.

    ``None`` gives the default uniform grid of ``n_angles`` points.
    """
    if X is None:
        return AngularGrid.uniform(n_angles)
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    X = check_array(X, dtype=np.float64, ensure_2d=False)
    if X.ndim != 1:
        raise ValueError("grid angles must be a 1-d array")
    return AngularGrid(np.unique(X))
