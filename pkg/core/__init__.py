from .errores import ErrorFormato, ErrorNumerico
from .flag_transform import (
    BallGrid,
    BandLimit,
    FlagCoefficients,
    build_grid,
    flag_eval,
    flag_forward,
    flag_inverse,
)
from .flaglet_transform import FlagletCoefficients, flaglet_analysis, flaglet_synthesis
from .fourier_bessel import BesselCoefficients, flag_to_bessel
from .radial_laguerre import RadialBasis, radial_quadrature
from .tiling import HarmonicWindows, WaveletFamily, build_windows
from .voidfinder import Catalog, VoidCandidate, VoidSpec, find_voids, make_mock, voxelize

__all__ = [
    "BallGrid",
    "BandLimit",
    "BesselCoefficients",
    "Catalog",
    "ErrorFormato",
    "ErrorNumerico",
    "FlagCoefficients",
    "FlagletCoefficients",
    "HarmonicWindows",
    "RadialBasis",
    "VoidCandidate",
    "VoidSpec",
    "WaveletFamily",
    "build_grid",
    "build_windows",
    "find_voids",
    "flag_eval",
    "flag_forward",
    "flag_inverse",
    "flag_to_bessel",
    "flaglet_analysis",
    "flaglet_synthesis",
    "make_mock",
    "radial_quadrature",
    "voxelize",
]
