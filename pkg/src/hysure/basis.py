"""Spectral eigenbases, the seven-model zoo and the operator pairs they resolve to."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HsiCube
from .wavelet import (
    WaveletSpec,
    dwt1d_forward,
    dwt1d_inverse,
    dwt2d_forward,
    dwt2d_inverse,
    padded_length,
    support_mask,
    symmetric_pad,
)

SPATIAL_WAVELET = WaveletSpec(taps=8, levels=5)
SPECTRAL_WAVELET = WaveletSpec(taps=2, levels=5)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """p x r matrix of orthonormal columns with their (descending) Gram eigenvalues."""

    vectors: np.ndarray
    eigenvalues: np.ndarray

    @property
    def bands(self) -> int:
        return self.vectors.shape[0]

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    def truncate(self, r: int) -> "SpectralBasis":
        if not 1 <= r <= self.rank:
            raise ValueError(f"rank {r} outside [1, {self.rank}]")
        return SpectralBasis(self.vectors[:, :r], self.eigenvalues[:r])


def eigenbasis(cube: HsiCube) -> SpectralBasis:
    """Complete eigendecomposition of the uncentered Gram matrix Y^T Y.

    Columns are ordered by descending eigenvalue and signed so that the
    largest-magnitude entry of each is positive.
    """
    Y = cube.data
    w, V = np.linalg.eigh(Y.T @ Y)
    order = np.argsort(w, kind="stable")[::-1]
    w = np.clip(w[order], 0.0, None)
    V = V[:, order]
    peak = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[peak, np.arange(V.shape[1])])
    return SpectralBasis(V, w)


def spectral_eigenvectors(cube: HsiCube, r: int) -> SpectralBasis:
    """Top-r eigenvectors of Y^T Y; ``cube`` is expected to be whitened already."""
    limit = min(cube.n, cube.bands)
    if not 1 <= r <= limit:
        raise ValueError(f"rank {r} outside [1, min(n, p) = {limit}]")
    return eigenbasis(cube).truncate(r)


def project_spectral(cube: HsiCube, basis: SpectralBasis) -> np.ndarray:
    """Q = Y M_r, an (n, r) coefficient matrix."""
    if basis.bands != cube.bands:
        raise ValueError(f"basis has {basis.bands} bands, cube has {cube.bands}")
    return cube.data @ basis.vectors


def lift_spectral(coeffs, basis: SpectralBasis) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 2 or coeffs.shape[1] != basis.rank:
        raise ValueError(f"coefficients must have {basis.rank} columns")
    return coeffs @ basis.vectors.T


# ---------------------------------------------------------------------------
# the seven-model zoo

MODEL_TABLE = {
    1: ("wavelet2d", "wavelet1d", "full"),
    2: ("wavelet2d", "none", "full"),
    3: ("none", "wavelet1d", "full"),
    4: ("none", "eigen", "full"),
    5: ("wavelet2d", "eigen", "full"),
    6: ("none", "eigen", "low"),
    7: ("wavelet2d", "eigen", "low"),
}


@dataclass(frozen=True)
class ModelSpec:
    id: int
    spatial: str
    spectral: str
    rank_mode: str

    def __post_init__(self):
        row = MODEL_TABLE.get(self.id)
        if row is None:
            raise ValueError(f"model id must be 1-7, got {self.id}")
        if row != (self.spatial, self.spectral, self.rank_mode):
            raise ValueError(f"model {self.id} is {row}, not a free combination")

    @classmethod
    def from_id(cls, model_id: int) -> "ModelSpec":
        row = MODEL_TABLE.get(model_id)
        if row is None:
            raise ValueError(f"model id must be 1-7, got {model_id}")
        return cls(model_id, *row)

    @property
    def low_rank(self) -> bool:
        return self.rank_mode == "low"


MODELS = tuple(ModelSpec.from_id(i) for i in range(1, 8))
HYSURE_MODEL = MODELS[6]


# ---------------------------------------------------------------------------
# operators acting on (rows, columns) stacks


class SpatialOperator:
    """Action of A: identity, or the 2-D wavelet on a mirror-padded grid."""

    def __init__(self, height: int, width: int, spec: WaveletSpec | None = None):
        self.height, self.width, self.spec = height, width, spec
        if spec is None:
            self.grid = (height, width)
        else:
            self.grid = (padded_length(height, spec), padded_length(width, spec))
        self.padded = self.grid != (height, width)

    @property
    def n(self) -> int:
        return self.height * self.width

    @property
    def n_coeffs(self) -> int:
        return self.grid[0] * self.grid[1]

    def forward(self, Q: np.ndarray) -> np.ndarray:
        if self.spec is None:
            return np.asarray(Q, dtype=np.float64)
        k = Q.shape[1]
        x = np.asarray(Q).reshape(self.height, self.width, k)
        x = symmetric_pad(symmetric_pad(x, self.grid[0], 0), self.grid[1], 1)
        return dwt2d_forward(x, self.spec).reshape(self.n_coeffs, k)

    def inverse(self, B: np.ndarray, crop: bool = True) -> np.ndarray:
        if self.spec is None:
            return np.asarray(B, dtype=np.float64)
        k = B.shape[1]
        x = dwt2d_inverse(np.asarray(B).reshape(*self.grid, k), self.spec)
        if crop:
            return x[: self.height, : self.width].reshape(self.n, k)
        return x.reshape(self.n_coeffs, k)

    def crop(self, X: np.ndarray) -> np.ndarray:
        """Restrict an (n_coeffs, k) image-domain stack to the original grid."""
        if not self.padded:
            return X
        k = X.shape[1]
        return X.reshape(*self.grid, k)[: self.height, : self.width].reshape(self.n, k)

    def support(self) -> np.ndarray | None:
        """Coefficients touching the original grid, or None when unpadded."""
        if not self.padded:
            return None
        rows = support_mask(self.height, self.grid[0], self.spec)
        cols = support_mask(self.width, self.grid[1], self.spec)
        return np.outer(rows, cols).ravel()


class SpectralOperator:
    """Action of M: identity, 1-D wavelet over bands, or an eigenvector basis.

    ``forward`` always returns every available spectral coefficient (K
    columns); low-rank truncation is a column prefix handled by callers.
    """

    def __init__(self, p: int, kind: str, spec: WaveletSpec | None = None,
                 basis: SpectralBasis | None = None):
        self.p, self.kind, self.spec, self.basis = p, kind, spec, basis
        if kind == "wavelet1d":
            self.n_coeffs = padded_length(p, spec)
        elif kind in ("none", "eigen"):
            self.n_coeffs = p
        else:
            raise ValueError(f"unknown spectral basis {kind!r}")
        if kind == "eigen" and (basis is None or basis.bands != p or basis.rank != p):
            raise ValueError("eigen operator needs a complete p x p basis")
        self.padded = self.n_coeffs != p

    def forward(self, Y: np.ndarray) -> np.ndarray:
        if self.kind == "none":
            return np.asarray(Y, dtype=np.float64)
        if self.kind == "eigen":
            return Y @ self.basis.vectors
        return dwt1d_forward(symmetric_pad(np.asarray(Y), self.n_coeffs, 1), self.spec, axis=1)

    def inverse(self, Q: np.ndarray, crop: bool = True) -> np.ndarray:
        r = Q.shape[1]
        if self.kind == "none":
            return np.asarray(Q, dtype=np.float64)
        if self.kind == "eigen":
            return Q @ self.basis.vectors[:, :r].T
        if r != self.n_coeffs:
            raise ValueError("wavelet spectral inverse needs every coefficient column")
        x = dwt1d_inverse(Q, self.spec, axis=1)
        return x[:, : self.p] if crop else x

    def support(self) -> np.ndarray | None:
        if not self.padded:
            return None
        return support_mask(self.p, self.n_coeffs, self.spec)


@dataclass(frozen=True, eq=False)
class ResolvedModel:
    """A ModelSpec bound to concrete operators for one cube; ``rank`` columns are used."""

    spec: ModelSpec
    spatial: SpatialOperator
    spectral: SpectralOperator
    rank: int

    @property
    def padded(self) -> bool:
        return self.spatial.padded or self.spectral.padded

    @property
    def max_rank(self) -> int:
        return self.spectral.n_coeffs

    def coefficients(self, Y: np.ndarray) -> np.ndarray:
        """B = A^T Y M over all K spectral columns."""
        return self.spatial.forward(self.spectral.forward(Y))

    def synthesize(self, W: np.ndarray, crop: bool = True) -> np.ndarray:
        """A W M_r^T for an (n_coeffs, r) coefficient block."""
        return self.spectral.inverse(self.spatial.inverse(W, crop=crop), crop=crop)

    def support(self) -> np.ndarray | None:
        """(n_coeffs, K) mask of coefficients touching the original extent."""
        sp, sc = self.spatial.support(), self.spectral.support()
        if sp is None and sc is None:
            return None
        if sp is None:
            sp = np.ones(self.spatial.n_coeffs, bool)
        if sc is None:
            sc = np.ones(self.spectral.n_coeffs, bool)
        return np.outer(sp, sc)


def resolve_model(
    spec: ModelSpec,
    cube: HsiCube,
    wavelet_spatial: WaveletSpec = SPATIAL_WAVELET,
    wavelet_spectral: WaveletSpec = SPECTRAL_WAVELET,
    r: int | None = None,
    basis: SpectralBasis | None = None,
) -> ResolvedModel:
    """Bind ``spec`` to ``cube`` (already whitened).

    ``basis`` overrides the eigenbasis computed from ``cube``; it must be
    complete (p columns). ``r`` is required for low-rank models.
    """
    if not isinstance(spec, ModelSpec):
        spec = ModelSpec.from_id(int(spec))
    spatial = SpatialOperator(
        cube.height, cube.width, wavelet_spatial if spec.spatial == "wavelet2d" else None
    )
    if spec.spectral == "eigen":
        basis = eigenbasis(cube) if basis is None else basis
        spectral = SpectralOperator(cube.bands, "eigen", basis=basis)
    else:
        spectral = SpectralOperator(
            cube.bands, spec.spectral,
            spec=wavelet_spectral if spec.spectral == "wavelet1d" else None,
        )
    if spec.low_rank:
        if r is None:
            raise ValueError(f"model {spec.id} is low-rank and needs r")
        limit = min(cube.n, cube.bands)
        if not 1 <= r <= limit:
            raise ValueError(f"rank {r} outside [1, min(n, p) = {limit}]")
        rank = int(r)
    else:
        rank = spectral.n_coeffs
        if r is not None and r != cube.bands:
            raise ValueError(f"model {spec.id} is full-rank; r must be omitted")
    return ResolvedModel(spec, spatial, spectral, rank)
