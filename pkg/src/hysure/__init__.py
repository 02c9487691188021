"""Joint rank and sparsity selection for hyperspectral cubes via SURE."""

from .basis import (
    HYSURE_MODEL,
    MODELS,
    ModelSpec,
    SpectralBasis,
    eigenbasis,
    lift_spectral,
    project_spectral,
    resolve_model,
    spectral_eigenvectors,
)
from .core import (
    CubeFormatError,
    HsiCube,
    NoiseModel,
    cube_from_image_stack,
    cube_to_image_stack,
    read_cube,
    write_cube,
)
from .estimate import ShrinkResult, estimate, reconstruct_signal, soft_threshold
from .noise import estimate_noise, restore, whiten
from .sim import Scene, SceneConfig, simulate_scene
from .sure import (
    RiskSurface,
    SelectionReport,
    SureConfig,
    model_select,
    mse_oracle,
    risk_surface,
    select_rank,
    sure_value,
)
from .wavelet import WaveletSpec

__version__ = "0.1.0"
