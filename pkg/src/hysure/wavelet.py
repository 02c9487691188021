"""Periodized orthogonal Daubechies wavelet transforms (1-D and separable 2-D).

Coefficient layout follows the usual Mallat convention. For a 1-D transform of
depth L the output is ``[a_L, d_L, d_{L-1}, ..., d_1]``; for 2-D the coarsest
approximation block sits in the top-left corner and every level stores its
three detail blocks around the current approximation block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Extremal-phase Daubechies scaling filters, keyed by tap count.
_DAUBECHIES = {
    2: (0.7071067811865476, 0.7071067811865476),
    4: (
        0.48296291314453416,
        0.8365163037378079,
        0.2241438680420134,
        -0.12940952255126037,
    ),
    6: (
        0.33267055295008263,
        0.8068915093110925,
        0.45987750211849154,
        -0.13501102001025458,
        -0.08544127388202666,
        0.03522629188570953,
    ),
    8: (
        0.2303778133088965,
        0.7148465705529157,
        0.6308807679298589,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.0328830116668852,
        -0.010597401785069032,
    ),
    10: (
        0.16010239797419293,
        0.6038292697971896,
        0.7243085284377729,
        0.13842814590132074,
        -0.24229488706638203,
        -0.032244869584638375,
        0.07757149384004572,
        -0.006241490212798274,
        -0.012580751999081999,
        0.0033357252854737712,
    ),
}

SUPPORTED_TAPS = tuple(sorted(_DAUBECHIES))


@dataclass(frozen=True)
class WaveletSpec:
    """Orthogonal wavelet family, filter length, depth and boundary rule."""

    taps: int = 8
    levels: int = 5
    family: str = "daubechies"
    boundary: str = "periodic"

    def __post_init__(self):
        if self.family != "daubechies":
            raise ValueError(f"unsupported wavelet family {self.family!r}")
        if self.boundary != "periodic":
            raise ValueError(f"unsupported boundary rule {self.boundary!r}")
        if self.taps not in _DAUBECHIES:
            raise ValueError(
                f"unsupported tap count {self.taps}; choose one of {SUPPORTED_TAPS}"
            )
        if self.levels < 1:
            raise ValueError("levels must be >= 1")

    @property
    def block(self) -> int:
        return 2**self.levels


HAAR = WaveletSpec(taps=2, levels=1)


def filters(spec: WaveletSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return the analysis pair ``(h, g)`` with ``g_k = (-1)^k h_{taps-1-k}``."""
    h = np.asarray(_DAUBECHIES[spec.taps], dtype=np.float64)
    k = np.arange(len(h))
    g = (-1.0) ** k * h[::-1]
    return h, g


def padded_length(length: int, spec: WaveletSpec) -> int:
    """Smallest multiple of ``2**levels`` that is >= ``length``."""
    b = spec.block
    return -(-length // b) * b


def symmetric_pad(x: np.ndarray, target: int, axis: int) -> np.ndarray:
    """Extend ``x`` along ``axis`` to ``target`` samples by half-sample mirroring."""
    extra = target - x.shape[axis]
    if extra < 0:
        raise ValueError("target shorter than input")
    if extra == 0:
        return x
    widths = [(0, 0)] * x.ndim
    widths[axis] = (0, extra)
    return np.pad(x, widths, mode="symmetric")


def _check_length(length: int, spec: WaveletSpec):
    if length % spec.block:
        raise ValueError(
            f"length {length} is not divisible by 2**levels = {spec.block}; "
            "pad the signal first"
        )


def _analysis(x, h, g):
    # One periodized analysis step along the last axis.
    m = x.shape[-1]
    base = 2 * np.arange(m // 2)
    low = np.zeros(x.shape[:-1] + (m // 2,))
    high = np.zeros_like(low)
    for k in range(len(h)):
        xs = x[..., (base + k) % m]
        low += h[k] * xs
        high += g[k] * xs
    return low, high


def _synthesis(low, high, h, g):
    # Adjoint of _analysis; each tap writes to distinct positions.
    half = low.shape[-1]
    m = 2 * half
    base = 2 * np.arange(half)
    x = np.zeros(low.shape[:-1] + (m,))
    for k in range(len(h)):
        x[..., (base + k) % m] += h[k] * low + g[k] * high
    return x


def _forward_axis(x, spec, axis, h=None, g=None):
    if h is None:
        h, g = filters(spec)
    x = np.moveaxis(np.array(x, dtype=np.float64), axis, -1).copy()
    _check_length(x.shape[-1], spec)
    m = x.shape[-1]
    for _ in range(spec.levels):
        low, high = _analysis(x[..., :m], h, g)
        x[..., : m // 2] = low
        x[..., m // 2 : m] = high
        m //= 2
    return np.moveaxis(x, -1, axis)


def _inverse_axis(c, spec, axis):
    h, g = filters(spec)
    x = np.moveaxis(np.array(c, dtype=np.float64), axis, -1).copy()
    _check_length(x.shape[-1], spec)
    m = x.shape[-1] // spec.block
    for _ in range(spec.levels):
        x[..., : 2 * m] = _synthesis(x[..., :m], x[..., m : 2 * m], h, g)
        m *= 2
    return np.moveaxis(x, -1, axis)


def dwt1d_forward(signal, spec: WaveletSpec, axis: int = -1) -> np.ndarray:
    """Multilevel periodized DWT along ``axis``; length must be divisible by ``2**levels``."""
    return _forward_axis(signal, spec, axis)


def dwt1d_inverse(coeffs, spec: WaveletSpec, axis: int = -1) -> np.ndarray:
    return _inverse_axis(coeffs, spec, axis)


def dwt2d_forward(image, spec: WaveletSpec, axes=(0, 1)) -> np.ndarray:
    """Separable 2-D Mallat transform over ``axes`` (rows then columns per level).

    Extra axes are carried along untouched, so a stack of bands shaped
    ``(height, width, p)`` is transformed band by band in one call.
    """
    h, g = filters(spec)
    x = np.moveaxis(np.array(image, dtype=np.float64), axes, (0, 1)).copy()
    _check_length(x.shape[0], spec)
    _check_length(x.shape[1], spec)
    mr, mc = x.shape[0], x.shape[1]
    for _ in range(spec.levels):
        blk = x[:mr, :mc]
        # along width (each row), then along height (each column)
        lo, hi = _analysis(np.moveaxis(blk, 1, -1), h, g)
        blk = np.moveaxis(np.concatenate([lo, hi], axis=-1), -1, 1)
        lo, hi = _analysis(np.moveaxis(blk, 0, -1), h, g)
        blk = np.moveaxis(np.concatenate([lo, hi], axis=-1), -1, 0)
        x[:mr, :mc] = blk
        mr //= 2
        mc //= 2
    return np.moveaxis(x, (0, 1), axes)


def dwt2d_inverse(coeffs, spec: WaveletSpec, axes=(0, 1)) -> np.ndarray:
    h, g = filters(spec)
    x = np.moveaxis(np.array(coeffs, dtype=np.float64), axes, (0, 1)).copy()
    _check_length(x.shape[0], spec)
    _check_length(x.shape[1], spec)
    mr, mc = x.shape[0] // spec.block, x.shape[1] // spec.block
    for _ in range(spec.levels):
        blk = x[: 2 * mr, : 2 * mc]
        t = np.moveaxis(blk, 0, -1)
        blk = np.moveaxis(_synthesis(t[..., :mr], t[..., mr:], h, g), -1, 0)
        t = np.moveaxis(blk, 1, -1)
        blk = np.moveaxis(_synthesis(t[..., :mc], t[..., mc:], h, g), -1, 1)
        x[: 2 * mr, : 2 * mc] = blk
        mr *= 2
        mc *= 2
    return np.moveaxis(x, (0, 1), axes)


def support_mask(length: int, padded: int, spec: WaveletSpec) -> np.ndarray:
    """Flag coefficients whose basis function overlaps the first ``length`` samples.

    Runs the analysis cascade with absolute-valued filters on the indicator of
    the original extent; a coefficient is positive iff its support reaches
    into that extent.
    """
    h, g = filters(spec)
    ind = np.zeros(padded)
    ind[:length] = 1.0
    return _forward_axis(ind, spec, -1, np.abs(h), np.abs(g)) > 0


def apply_spatial_basis(cube, spec: WaveletSpec, direction: str = "forward"):
    """Transform every band of ``cube`` with the 2-D wavelet.

    ``forward`` mirror-pads each spatial axis up to a multiple of
    ``2**levels`` and records the original size in ``extent``; ``inverse``
    crops back to ``extent`` when it is set.
    """
    from .core import HsiCube

    h, w, p = cube.shape
    if direction == "forward":
        ph, pw = padded_length(h, spec), padded_length(w, spec)
        x = symmetric_pad(symmetric_pad(cube.to_array(), ph, 0), pw, 1)
        c = dwt2d_forward(x, spec)
        extent = (h, w) if (ph, pw) != (h, w) else None
        return HsiCube(ph, pw, c.reshape(ph * pw, p), extent)
    if direction == "inverse":
        x = dwt2d_inverse(cube.to_array(), spec)
        if cube.extent is not None:
            h, w = cube.extent
            x = x[:h, :w]
        return HsiCube(h, w, x.reshape(h * w, p))
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
