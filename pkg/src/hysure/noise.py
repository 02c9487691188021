"""Band noise estimation by multiple regression, plus whitening."""

from __future__ import annotations

import numpy as np

from .core import HsiCube, NoiseModel

RIDGE = 1e-10
FLOOR = 1e-12


def estimate_noise(cube: HsiCube, ridge: float = RIDGE, floor: float = FLOOR) -> NoiseModel:
    """Estimate per-band noise variance by regressing each band on all others.

    The regression for band i is solved in closed form for every band at once
    through the inverse of the regularized Gram matrix R = (Y^T Y + delta I)^-1:
    the residual of band i is ``Y @ R[:, i] / R[i, i]``. ``delta`` is
    ``ridge * trace(Y^T Y) / p`` and variances are floored at
    ``floor * mean(Y**2)``.

    Raises:
        ValueError: fewer than two bands, or n <= p (the regression is then
            ill-posed; decimate the bands or pass a NoiseModel explicitly).
    """
    Y = cube.data
    n, p = Y.shape
    if p < 2:
        raise ValueError("noise estimation needs at least two bands")
    if n <= p:
        raise ValueError(
            f"n={n} pixels <= p={p} bands: regression is ill-posed; "
            "decimate the bands or supply a NoiseModel"
        )
    G = Y.T @ Y
    tr = np.trace(G)
    if tr <= 0:
        raise ValueError("cube has zero energy; cannot estimate noise")
    R = np.linalg.inv(G + (ridge * tr / p) * np.eye(p))
    resid = (Y @ R) / np.diag(R)
    sigma2 = np.einsum("ij,ij->j", resid, resid) / n
    eps = floor * tr / (n * p)
    return NoiseModel(np.maximum(sigma2, eps))


def _check(cube, noise):
    if noise.bands != cube.bands:
        raise ValueError(f"noise model has {noise.bands} bands, cube has {cube.bands}")


def whiten(cube: HsiCube, noise: NoiseModel) -> HsiCube:
    _check(cube, noise)
    return cube.with_data(cube.data / np.sqrt(noise.sigma2))


def restore(cube: HsiCube, noise: NoiseModel) -> HsiCube:
    _check(cube, noise)
    return cube.with_data(cube.data * np.sqrt(noise.sigma2))
