"""SURE risk surfaces over (rank, threshold) grids, HySURE rank selection and model comparison.

For whitened data and an orthogonal basis pair the risk at grid point
(r, lam) is ``||E||_F^2 + 2 ed(r, lam) - n p`` where ``ed`` counts the
coefficients of B = A^T Y M_r with ``|b| > lam``.

Every column k of B contributes independently, so the whole surface is
assembled from per-column tables:

* ``c_k(lam)``  number of entries above ``lam``
* ``s_k(lam)``  residual energy kept in column k, ``sum(min(|b|, lam)^2)``
* ``e_k``       total energy of column k (dropped entirely when k >= r)

and prefix sums over k. Sorting each column of |B| once makes every
``(c_k, s_k)`` lookup a binary search.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import (
    HYSURE_MODEL,
    MODELS,
    SPATIAL_WAVELET,
    SPECTRAL_WAVELET,
    ModelSpec,
    ResolvedModel,
    SpectralBasis,
    eigenbasis,
    resolve_model,
)
from .core import HsiCube, NoiseModel, write_csv
from .estimate import soft_threshold
from .noise import estimate_noise, whiten
from .wavelet import WaveletSpec

log = logging.getLogger(__name__)


def default_lambda_grid() -> np.ndarray:
    return np.linspace(0.0, 4.0, 201)


def sure_value(residual_sq: float, survivors: int, n: int, p: int) -> float:
    return residual_sq + 2.0 * survivors - float(n) * float(p)


def mse_oracle(estimate, truth) -> float:
    """Squared Frobenius error ||X - X_hat||_F^2."""
    a = estimate.data if isinstance(estimate, HsiCube) else np.asarray(estimate, float)
    b = truth.data if isinstance(truth, HsiCube) else np.asarray(truth, float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    d = a - b
    return float(np.einsum("ij,ij->", d, d))


@dataclass(frozen=True)
class SureConfig:
    """Wavelets, grids and execution knobs shared by the selection entry points.

    ``lambda_grid=None`` means 201 points on [0, 4]; ``rank_grid=None`` means
    every integer rank up to min(n, p). ``noise`` skips noise estimation.
    """

    wavelet_spatial: WaveletSpec = SPATIAL_WAVELET
    wavelet_spectral: WaveletSpec = SPECTRAL_WAVELET
    lambda_grid: tuple | None = None
    rank_grid: tuple | None = None
    noise: NoiseModel | None = None
    workers: int | None = None

    def lambdas(self) -> np.ndarray:
        if self.lambda_grid is None:
            return default_lambda_grid()
        return np.asarray(self.lambda_grid, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class RiskSurface:
    """SURE values on a rank x threshold grid (rows follow ``rank_grid``)."""

    model_id: int
    n: int
    p: int
    lambda_grid: np.ndarray
    rank_grid: np.ndarray
    risk: np.ndarray
    ed: np.ndarray
    residual: np.ndarray
    mse: np.ndarray | None = None

    @property
    def argmin_index(self) -> tuple[int, int]:
        # row-major first minimum: smallest rank, then smallest lambda
        flat = int(np.argmin(self.risk))
        return divmod(flat, self.risk.shape[1])

    @property
    def argmin(self) -> tuple[float, int, float]:
        i, j = self.argmin_index
        return float(self.lambda_grid[j]), int(self.rank_grid[i]), float(self.risk[i, j])

    @property
    def lambda_hat(self) -> float:
        return self.argmin[0]

    @property
    def r_hat(self) -> int:
        return self.argmin[1]

    @property
    def min_risk(self) -> float:
        return self.argmin[2]

    def row(self, r: int) -> int:
        hits = np.flatnonzero(self.rank_grid == r)
        if not hits.size:
            raise KeyError(f"rank {r} not on the grid")
        return int(hits[0])

    def to_csv(self, path_or_file):
        rows = []
        for i, r in enumerate(self.rank_grid):
            for j, lam in enumerate(self.lambda_grid):
                rows.append((int(r), float(lam), float(self.risk[i, j]), int(self.ed[i, j])))
        write_csv(path_or_file, ("r", "lambda", "sure", "ed"), rows)


@dataclass(eq=False)
class SelectionReport:
    model_id: int
    r_hat: int
    lambda_hat: float
    sure_min: float
    ed: int
    per_model: dict[int, float]
    per_model_argmin: dict[int, tuple[int, float]]
    mse: dict[int, float] | None = None
    surfaces: dict[int, RiskSurface] = field(default_factory=dict, repr=False)

    @property
    def ordering(self) -> list[int]:
        return sorted(self.per_model, key=lambda m: (self.per_model[m], m))

    def to_dict(self) -> dict:
        out = {
            "model": self.model_id,
            "r_hat": self.r_hat,
            "lambda_hat": self.lambda_hat,
            "sure_min": self.sure_min,
            "ed": self.ed,
            "models": [
                {
                    "model": m,
                    "sure_min": self.per_model[m],
                    "r_hat": self.per_model_argmin[m][0],
                    "lambda_hat": self.per_model_argmin[m][1],
                    **({"mse": self.mse[m]} if self.mse else {}),
                }
                for m in sorted(self.per_model)
            ],
        }
        return out


def _pmap(fn, items, workers):
    if workers is not None and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _check_grids(model: ResolvedModel, lambdas, ranks, n, p):
    lambdas = np.asarray(lambdas, dtype=np.float64).ravel()
    if lambdas.size == 0 or (lambdas < 0).any() or (np.diff(lambdas) <= 0).any():
        raise ValueError("lambda grid must be non-empty, non-negative and increasing")
    if model.spec.low_rank:
        limit = min(n, p)
        ranks = np.arange(1, limit + 1) if ranks is None else np.asarray(ranks, int).ravel()
        if ranks.size == 0 or (np.diff(ranks) <= 0).any():
            raise ValueError("rank grid must be non-empty and increasing")
        if ranks[0] < 1 or ranks[-1] > limit:
            raise ValueError(f"rank grid must lie in [1, min(n, p) = {limit}]")
    else:
        if ranks is not None and list(np.ravel(ranks)) not in ([p], [model.max_rank]):
            raise ValueError(f"model {model.spec.id} is full-rank; rank grid must be [{p}]")
        ranks = np.array([model.max_rank])
    return lambdas, ranks


def _column_tables(B, support, lambdas):
    """Survivor counts c[k, j] and kept-residual energies s[k, j] for every column."""
    absB = np.abs(B)
    S = np.sort(absB, axis=0)
    P = np.vstack([np.zeros((1, B.shape[1])), np.cumsum(S * S, axis=0)])
    K = B.shape[1]
    idx = np.empty((K, lambdas.size), dtype=np.int64)
    for k in range(K):
        idx[k] = np.searchsorted(S[:, k], lambdas, side="right")
    rows = B.shape[0]
    s = P[idx, np.arange(K)[:, None]] + (lambdas**2)[None, :] * (rows - idx)
    e = P[-1]
    if support is None:
        c = rows - idx
    else:
        Sm = np.sort(np.where(support, absB, 0.0), axis=0)
        c = np.empty_like(idx)
        for k in range(K):
            c[k] = rows - np.searchsorted(Sm[:, k], lambdas, side="right")
    return c, s, e


def _cropped_errors(model, ref, B, lambdas, workers):
    """Per-column ||crop(A (ref_k - soft(b_k)))||^2 for every lambda, shape (K, L)."""
    sp = model.spatial

    def one(lam):
        D = ref - soft_threshold(B, lam)
        if sp.padded:
            D = sp.inverse(D, crop=True)
        return np.einsum("ij,ij->j", D, D)

    return np.stack(_pmap(one, list(lambdas), workers), axis=1)


def _direct_errors(model, Y, B, lambdas, workers):
    """||Y - synth(soft(B))||^2 on the original extent, one value per lambda."""

    def one(lam):
        E = Y - model.synthesize(soft_threshold(B, lam))
        return float(np.einsum("ij,ij->", E, E))

    return np.array(_pmap(one, list(lambdas), workers))[None, :]


def _assemble(tail, cum_rows, ranks):
    # tail[k] = sum of column energies from column k onward
    return tail[ranks][:, None] + cum_rows[ranks - 1]


def surface_from_whitened(
    cube_white: HsiCube,
    model: ResolvedModel,
    lambda_grid=None,
    rank_grid=None,
    truth_white: HsiCube | None = None,
    workers: int | None = None,
) -> RiskSurface:
    """Risk surface for an already whitened cube and resolved operators."""
    n, p = cube_white.n, cube_white.bands
    lambdas = default_lambda_grid() if lambda_grid is None else lambda_grid
    lambdas, ranks = _check_grids(model, lambdas, rank_grid, n, p)
    Y = cube_white.data
    B = model.coefficients(Y)
    support = model.support()
    c, s, e = _column_tables(B, support, lambdas)

    if model.spectral.padded:
        s = None
    elif model.spatial.padded:
        s = _cropped_errors(model, B, B, lambdas, workers)
        Q = model.spectral.forward(Y)
        e = np.einsum("ij,ij->j", Q, Q)

    ed = np.cumsum(c, axis=0)[ranks - 1]
    if s is None:
        residual = _direct_errors(model, Y, B, lambdas, workers)
    else:
        tail = np.concatenate([np.cumsum(e[::-1])[::-1], [0.0]])
        residual = _assemble(tail, np.cumsum(s, axis=0), ranks)

    # Same survivor set means the same estimate, hence the same residual.
    for i in range(1, len(ranks)):
        same = ed[i] == ed[i - 1]
        residual[i, same] = residual[i - 1, same]
    risk = residual + 2.0 * ed - float(n) * float(p)

    mse = None
    if truth_white is not None:
        mse = _mse_surface(model, truth_white, B, lambdas, ranks, workers)
        for i in range(1, len(ranks)):
            same = ed[i] == ed[i - 1]
            mse[i, same] = mse[i - 1, same]
    return RiskSurface(model.spec.id, n, p, lambdas, ranks, risk, ed, residual, mse)


def _mse_surface(model, truth_white, B, lambdas, ranks, workers):
    if truth_white.data.shape != (model.spatial.n, model.spectral.p):
        raise ValueError("truth cube shape does not match")
    X = truth_white.data
    if model.spectral.padded:
        return _direct_errors(model, X, B, lambdas, workers)
    C = model.coefficients(X)
    m = _cropped_errors(model, C, B, lambdas, workers)
    Q = model.spectral.forward(X)
    ce = np.einsum("ij,ij->j", Q, Q)
    tail = np.concatenate([np.cumsum(ce[::-1])[::-1], [0.0]])
    return _assemble(tail, np.cumsum(m, axis=0), ranks)


def risk_surface(
    cube: HsiCube,
    model,
    lambda_grid=None,
    rank_grid=None,
    noise: NoiseModel | None = None,
    *,
    wavelet_spatial: WaveletSpec = SPATIAL_WAVELET,
    wavelet_spectral: WaveletSpec = SPECTRAL_WAVELET,
    basis: SpectralBasis | None = None,
    truth: HsiCube | None = None,
    workers: int | None = None,
) -> RiskSurface:
    """Whiten ``cube`` with ``noise`` (estimated when None) and evaluate SURE on the grid.

    Low-rank models sweep ``rank_grid``; full-rank models use the single
    complete rank. ``truth`` adds the matching whitened-domain squared error
    surface for comparison.
    """
    if not isinstance(model, ModelSpec):
        model = ModelSpec.from_id(int(model))
    noise = estimate_noise(cube) if noise is None else noise
    cube_w = whiten(cube, noise)
    truth_w = None if truth is None else whiten(truth, noise)
    r_top = None
    if model.low_rank:
        r_top = min(cube.n, cube.bands)
    resolved = resolve_model(model, cube_w, wavelet_spatial, wavelet_spectral, r_top, basis)
    return surface_from_whitened(cube_w, resolved, lambda_grid, rank_grid, truth_w, workers)


def _report(surfaces: dict[int, RiskSurface]) -> SelectionReport:
    per_model = {m: s.min_risk for m, s in surfaces.items()}
    argmins = {m: (s.r_hat, s.lambda_hat) for m, s in surfaces.items()}
    best = min(per_model, key=lambda m: (per_model[m], m))
    s = surfaces[best]
    i, j = s.argmin_index
    mse = None
    if all(sf.mse is not None for sf in surfaces.values()):
        mse = {}
        for m, sf in surfaces.items():
            a, b = sf.argmin_index
            mse[m] = float(sf.mse[a, b])
    return SelectionReport(
        model_id=best,
        r_hat=s.r_hat,
        lambda_hat=s.lambda_hat,
        sure_min=s.min_risk,
        ed=int(s.ed[i, j]),
        per_model=per_model,
        per_model_argmin=argmins,
        mse=mse,
        surfaces=surfaces,
    )


def model_select(cube: HsiCube, models=MODELS, config: SureConfig = SureConfig(),
                 truth: HsiCube | None = None) -> SelectionReport:
    """Minimum SURE of each model in ``models``; the lowest one is chosen (ties: lower id)."""
    specs = [m if isinstance(m, ModelSpec) else ModelSpec.from_id(int(m)) for m in models]
    if not specs:
        raise ValueError("no models to compare")
    noise = estimate_noise(cube) if config.noise is None else config.noise
    cube_w = whiten(cube, noise)
    truth_w = None if truth is None else whiten(truth, noise)
    basis = None
    if any(m.spectral == "eigen" for m in specs):
        basis = eigenbasis(cube_w)
    lambdas = config.lambdas()
    surfaces = {}
    for spec in specs:
        r_top = min(cube.n, cube.bands) if spec.low_rank else None
        resolved = resolve_model(spec, cube_w, config.wavelet_spatial,
                                 config.wavelet_spectral, r_top, basis)
        ranks = config.rank_grid if spec.low_rank else None
        surfaces[spec.id] = surface_from_whitened(
            cube_w, resolved, lambdas, ranks, truth_w, config.workers
        )
        log.info("model %d: min SURE %.6g", spec.id, surfaces[spec.id].min_risk)
    return _report(surfaces)


def select_rank(cube: HsiCube, config: SureConfig = SureConfig(),
                truth: HsiCube | None = None) -> SelectionReport:
    """HySURE: noise estimation, whitening, then the model-7 (r, lam) search."""
    return model_select(cube, (HYSURE_MODEL,), config, truth)
