"""Hyperspectral cube container, noise model and the HSR1 raster format."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"HSR1"
_HEADER = struct.Struct("<4sIII")


class CubeFormatError(ValueError):
    """Raised for malformed, truncated or non-finite raster files."""


@dataclass(frozen=True, eq=False)
class HsiCube:
    """An n-pixel by p-band scene stored as an (n, p) float64 matrix.

    Column j holds band j vectorized in row-major spatial order. ``extent``
    is set only on spatially padded cubes and records the original
    ``(height, width)`` that the padded grid extends.
    """

    height: int
    width: int
    data: np.ndarray
    extent: tuple[int, int] | None = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError("cube data must be a 2-D (pixels, bands) matrix")
        if self.height < 1 or self.width < 1:
            raise ValueError("height and width must be >= 1")
        if data.shape[0] != self.height * self.width:
            raise ValueError(
                f"data has {data.shape[0]} rows, expected "
                f"{self.height}*{self.width}={self.height * self.width}"
            )
        if data.shape[1] < 1:
            raise ValueError("cube needs at least one band")
        if not np.isfinite(data).all():
            raise ValueError("cube contains NaN or Inf")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def bands(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.height, self.width, self.bands

    def image(self, band: int) -> np.ndarray:
        return self.data[:, band].reshape(self.height, self.width)

    def to_array(self) -> np.ndarray:
        """(height, width, bands) view of the data."""
        return self.data.reshape(self.height, self.width, self.bands)

    def with_data(self, data) -> "HsiCube":
        return HsiCube(self.height, self.width, data, self.extent)

    @classmethod
    def from_array(cls, arr) -> "HsiCube":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError("expected a (height, width, bands) array")
        h, w, p = arr.shape
        return cls(h, w, arr.reshape(h * w, p))


def cube_from_image_stack(height: int, width: int, stack) -> HsiCube:
    """Build a cube from band-major voxels (``bands`` images of height x width)."""
    flat = np.asarray(stack, dtype=np.float64).ravel()
    plane = height * width
    if plane < 1 or flat.size == 0 or flat.size % plane:
        raise ValueError(
            f"{flat.size} voxels cannot be split into {height}x{width} bands"
        )
    return HsiCube(height, width, flat.reshape(-1, plane).T)


def cube_to_image_stack(cube: HsiCube) -> np.ndarray:
    """Inverse of :func:`cube_from_image_stack`; returns shape (bands, height, width)."""
    return cube.data.T.reshape(cube.bands, cube.height, cube.width).copy()


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Per-band noise variances sigma2[0..p-1], all strictly positive."""

    sigma2: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma2, dtype=np.float64).ravel()
        if s.size == 0:
            raise ValueError("noise model needs at least one band")
        if not np.isfinite(s).all() or (s <= 0).any():
            raise ValueError("noise variances must be finite and > 0")
        s.setflags(write=False)
        object.__setattr__(self, "sigma2", s)

    @property
    def bands(self) -> int:
        return self.sigma2.size

    @classmethod
    def unit(cls, p: int) -> "NoiseModel":
        return cls(np.ones(p))

    def to_json(self) -> str:
        return json.dumps([float(v) for v in self.sigma2])

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        values = json.loads(text)
        if not isinstance(values, list):
            raise ValueError("noise file must contain a JSON array of variances")
        return cls(np.asarray(values, dtype=np.float64))

    def save(self, path):
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "NoiseModel":
        return cls.from_json(Path(path).read_text())


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_cube(path, cube: HsiCube, metadata: dict | None = None):
    """Write ``cube`` as HSR1 (float32 BSQ); ``metadata`` goes to a JSON sidecar."""
    payload = np.ascontiguousarray(cube.data.T, dtype="<f4")
    if not np.isfinite(payload).all():
        raise CubeFormatError("values overflow float32 or are non-finite")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, cube.height, cube.width, cube.bands))
        fh.write(payload.tobytes())
    if metadata is not None:
        sidecar_path(path).write_text(json.dumps(metadata, indent=2, sort_keys=True))


def read_cube(path) -> tuple[HsiCube, dict]:
    """Read an HSR1 file; returns the cube and its sidecar metadata (or ``{}``)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CubeFormatError("file shorter than the HSR1 header")
    magic, height, width, bands = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CubeFormatError(f"bad magic {magic!r}")
    if height == 0 or width == 0 or bands == 0:
        raise CubeFormatError(f"degenerate dimensions {height}x{width}x{bands}")
    expected = height * width * bands * 4
    body = len(raw) - _HEADER.size
    if body < expected:
        raise CubeFormatError(f"truncated payload: {body} of {expected} bytes")
    if body > expected:
        raise CubeFormatError(f"{body - expected} trailing bytes after payload")
    values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    if not np.isfinite(values).all():
        raise CubeFormatError("payload contains NaN or Inf")
    data = values.astype(np.float64).reshape(bands, height * width).T
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    return HsiCube(height, width, data), meta


def write_csv(path_or_file, header, rows):
    """Minimal CSV emitter: '.' decimals, LF line endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="\n") as fh:
            fh.write(text)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)
