"""Linear-mixture scene simulator with band-dependent Gaussian noise."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import HsiCube, NoiseModel, read_cube, write_cube

ABUNDANCE_MODES = ("dirichlet", "dirichlet-jitter", "spatial", "spatial-sum1")
_ALIASES = {"dirichlet-sum1": "dirichlet"}
_TINY = np.finfo(np.float64).tiny


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def spectral_angle(a, b) -> float:
    """Angle between two spectra in degrees."""
    c = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def generate_endmembers(p: int, r: int, seed=0, min_angle: float = 5.0,
                        max_tries: int = 1000) -> np.ndarray:
    """Smooth, non-negative synthetic signatures as a (p, r) matrix.

    Each signature is an offset plus slope plus 3-6 Gaussian bumps, clipped at
    zero and scaled to peak 1. Candidates within ``min_angle`` degrees of an
    accepted signature are redrawn.
    """
    if not 1 <= r <= p:
        raise ValueError(f"need 1 <= r <= p, got r={r}, p={p}")
    rng = _rng(seed)
    u = np.linspace(0.0, 1.0, p)
    accepted = []
    for _ in range(r):
        for _ in range(max_tries):
            nb = rng.integers(3, 7)
            centers = rng.uniform(0.0, 1.0, nb)
            widths = rng.uniform(0.02, 0.15, nb)
            amps = rng.uniform(0.2, 1.0, nb)
            s = rng.uniform(0.0, 0.3) + rng.uniform(-0.5, 0.5) * (u - 0.5)
            s = s + (amps * np.exp(-((u[:, None] - centers) ** 2) / (2 * widths**2))).sum(axis=1)
            s = np.clip(s, 0.0, None)
            if s.max() <= 0:
                continue
            s = s / s.max()
            if all(spectral_angle(s, a) >= min_angle for a in accepted):
                accepted.append(s)
                break
        else:
            raise RuntimeError(
                f"could not draw {r} signatures at least {min_angle} deg apart "
                f"after {max_tries} tries"
            )
    E = np.column_stack(accepted)
    if np.linalg.svd(E, compute_uv=False)[-1] <= 1e-6:
        raise RuntimeError("synthetic endmembers are numerically rank deficient")
    return E


def load_endmembers_csv(path) -> np.ndarray:
    """Read a (p, r) signature library: one column per endmember, optional header row."""
    try:
        E = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError:
        E = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=1)
    if not np.isfinite(E).all():
        raise ValueError("endmember library contains non-finite values")
    return E


def _smooth_fields(height, width, r, rng):
    scale = max(height, width) / 12.0
    fields = np.empty((height, width, r))
    for k in range(r):
        f = gaussian_filter(rng.standard_normal((height, width)), scale, mode="wrap")
        fields[..., k] = (f - f.mean()) / (f.std() + 1e-12)
    logits = 4.0 * fields.reshape(-1, r)
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    return w / w.sum(axis=1, keepdims=True)


def generate_abundances(n: int, r: int, mode: str = "dirichlet", seed=0,
                        height: int | None = None, width: int | None = None) -> np.ndarray:
    """(n, r) fractional abundances.

    Modes:
        dirichlet (alias dirichlet-sum1): rows ~ Dirichlet(1, ..., 1).
        dirichlet-jitter: Dirichlet rows scaled by Uniform(0.8, 1.0) (no sum-to-one).
        spatial-sum1: smooth random maps pushed through a softmax, so
            neighbouring pixels share materials; needs ``height*width == n``.
        spatial: spatial-sum1 with the same Uniform(0.8, 1.0) pixel jitter.
    """
    mode = _ALIASES.get(mode, mode)
    if mode not in ABUNDANCE_MODES:
        raise ValueError(f"unknown abundance mode {mode!r}; choose from {ABUNDANCE_MODES}")
    if r < 1:
        raise ValueError("r must be >= 1")
    rng = _rng(seed)
    if mode.startswith("spatial"):
        if height is None or width is None or height * width != n:
            raise ValueError("spatial abundances need height * width == n")
        S = _smooth_fields(height, width, r, rng)
    else:
        S = rng.dirichlet(np.ones(r), size=n)
    if mode in ("dirichlet-jitter", "spatial"):
        S = S * rng.uniform(0.8, 1.0, size=(n, 1))
    return S


ETA_MODES = ("inverse", "literal")


def noise_profile(p: int, eta: float, eta_mode: str = "literal") -> np.ndarray:
    """Relative per-band noise variances with mean 1 (so they sum to p).

    A Gaussian bell over the 1-based band index, centred on p/2.

    ``eta_mode="literal"`` (default) uses ``eta`` as the standard deviation
    in bands; the formula is 0/0 at ``eta == 0``, which is taken as white
    noise. ``"inverse"`` reads ``eta`` as an inverse width (standard
    deviation ``1/eta`` bands), where ``eta == 0`` is white noise naturally.
    With eta = 1/18 the literal bell is narrower than one band, so nearly all
    noise lands in band p/2.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    if eta_mode not in ETA_MODES:
        raise ValueError(f"eta_mode must be one of {ETA_MODES}")
    if eta == 0:
        return np.ones(p)
    i = np.arange(1, p + 1)
    width = 1.0 / eta if eta_mode == "inverse" else eta
    d2 = (i - p / 2.0) ** 2
    d2 -= d2.min()  # shift so the peak band(s) sit at 0; the ratio is unchanged
    var2 = 2.0 * width**2
    if var2 == 0.0 or not np.isfinite(var2):
        # width underflowed (or overflowed): one-hot peak, or white noise
        w = (d2 == 0).astype(float) if var2 == 0.0 else np.ones(p)
    else:
        with np.errstate(over="ignore"):
            w = np.exp(-d2 / var2)
    return p * w / w.sum()


def snr_db(clean, noise) -> float:
    X = clean.data if isinstance(clean, HsiCube) else np.asarray(clean)
    N = noise.data if isinstance(noise, HsiCube) else np.asarray(noise)
    return float(10.0 * np.log10(np.sum(X**2) / np.sum(N**2)))


def band_noise_profile(p: int, eta: float, snr: float, clean: HsiCube, seed=0,
                       eta_mode: str = "literal"):
    """Add band-dependent Gaussian noise to ``clean`` at exactly ``snr`` dB.

    Returns ``(NoiseModel, noisy cube)``. The draw is rescaled so the realized
    ``10 log10(||X||^2 / ||N||^2)`` equals ``snr``; the returned variances are
    the profile at that scale (bands with vanishing variance are floored at the
    smallest positive double).
    """
    if clean.bands != p:
        raise ValueError("clean cube band count differs from p")
    rng = _rng(seed)
    shape = noise_profile(p, eta, eta_mode)
    N = rng.standard_normal(clean.data.shape) * np.sqrt(shape)
    signal = np.sum(clean.data**2)
    sigma2 = signal / (np.sum(N**2) * 10.0 ** (snr / 10.0))
    N *= np.sqrt(sigma2)
    noise = NoiseModel(np.maximum(sigma2 * shape, _TINY))
    return noise, clean.with_data(clean.data + N)


@dataclass(frozen=True)
class SceneConfig:
    height: int = 128
    width: int = 128
    bands: int = 224
    rank: int = 10
    mode: str = "dirichlet"
    eta: float = 1.0 / 18.0
    snr_db: float = 15.0
    seed: int = 0
    eta_mode: str = "literal"

    def __post_init__(self):
        if min(self.height, self.width, self.bands) < 1:
            raise ValueError("scene dimensions must be >= 1")
        if not 1 <= self.rank <= self.bands:
            raise ValueError("rank must lie in [1, bands]")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.eta_mode not in ETA_MODES:
            raise ValueError(f"eta_mode must be one of {ETA_MODES}")


@dataclass(frozen=True, eq=False)
class Scene:
    config: SceneConfig
    endmembers: np.ndarray
    abundances: np.ndarray
    clean: HsiCube
    noisy: HsiCube
    noise: NoiseModel

    @property
    def realized_snr(self) -> float:
        return snr_db(self.clean.data, self.noisy.data - self.clean.data)


def simulate_scene(config: SceneConfig, library: np.ndarray | None = None) -> Scene:
    """Draw a scene; identical configs give bit-identical scenes.

    With ``library`` (p x m signatures) the endmembers are ``rank`` distinct
    columns picked at random instead of synthetic ones.
    """
    c = config
    e_seq, a_seq, n_seq = np.random.SeedSequence(c.seed).spawn(3)
    if library is None:
        E = generate_endmembers(c.bands, c.rank, _rng(e_seq))
    else:
        library = np.asarray(library, dtype=np.float64)
        if library.shape[0] != c.bands or library.shape[1] < c.rank:
            raise ValueError("library must be p x m with m >= rank")
        pick = _rng(e_seq).choice(library.shape[1], size=c.rank, replace=False)
        E = library[:, np.sort(pick)]
    n = c.height * c.width
    S = generate_abundances(n, c.rank, c.mode, _rng(a_seq), c.height, c.width)
    clean = HsiCube(c.height, c.width, S @ E.T)
    noise, noisy = band_noise_profile(c.bands, c.eta, c.snr_db, clean, _rng(n_seq), c.eta_mode)
    return Scene(c, E, S, clean, noisy, noise)


def scene_paths(prefix) -> tuple[Path, Path, Path]:
    prefix = Path(prefix)
    return (
        prefix.with_name(prefix.name + "_clean.hsr"),
        prefix.with_name(prefix.name + "_noisy.hsr"),
        prefix.with_name(prefix.name + ".json"),
    )


def save_scene(scene: Scene, prefix) -> tuple[Path, Path, Path]:
    """Write ``<prefix>_clean.hsr``, ``<prefix>_noisy.hsr`` and the ``<prefix>.json`` manifest."""
    clean_p, noisy_p, manifest_p = scene_paths(prefix)
    write_cube(clean_p, scene.clean)
    write_cube(noisy_p, scene.noisy)
    manifest = {
        "seed": scene.config.seed,
        "config": asdict(scene.config),
        "clean": clean_p.name,
        "noisy": noisy_p.name,
        "realized_snr_db": scene.realized_snr,
        "noise_variances": [float(v) for v in scene.noise.sigma2],
        "endmembers": scene.endmembers.T.tolist(),
    }
    manifest_p.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return clean_p, noisy_p, manifest_p


def load_scene(prefix) -> tuple[HsiCube, HsiCube, dict]:
    clean_p, noisy_p, manifest_p = scene_paths(prefix)
    manifest = json.loads(manifest_p.read_text())
    return read_cube(clean_p)[0], read_cube(noisy_p)[0], manifest
