"""Análisis y síntesis con flaglets, y su representación en el espacio real."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from .flag_transform import BallGrid, FlagCoefficients, ball_convolve, flag_inverse
from .radial_laguerre import laguerre_basis_table, radial_dirac, radial_quadrature
from .sphere_harmonics import legendre_table
from .tiling import HarmonicWindows, WaveletFamily

logger = logging.getLogger(__name__)

Escala = Tuple[int, int]

_MUESTRAS_PERFIL = 801


class FlagletCoefficients:
    """
    Coeficientes de escala W^Φ y de wavelet W^{Ψ^{jj'}}.

    Attributes:
        scaling (FlagCoefficients): Coeficientes de la función de escala.
        wavelets (Dict[(int, int), FlagCoefficients]): Un juego por escala.
        family (WaveletFamily): Familia que los produjo.
    """

    def __init__(
        self,
        scaling: FlagCoefficients,
        wavelets: Dict[Escala, FlagCoefficients],
        family: WaveletFamily,
    ) -> None:
        if set(wavelets) != set(family.scales()):
            raise ValueError("Las escalas no cubren exactamente el rango de la familia.")
        self.scaling = scaling
        self.wavelets = wavelets
        self.family = family

    def __repr__(self) -> str:
        return f"FlagletCoefficients(escalas={len(self.wavelets)})"


# ==========================================================
# Análisis y síntesis
# ==========================================================

def _validar_compatibles(f: FlagCoefficients, windows: HarmonicWindows) -> None:
    b, w = f.bandlimit, windows.family.bandlimit
    if (b.L, b.P) != (w.L, w.P):
        raise ValueError(
            f"Límite de banda de la señal ({b.L}, {b.P}) distinto del de las ventanas ({w.L}, {w.P})."
        )


def flaglet_analysis(f: FlagCoefficients, windows: HarmonicWindows) -> FlagletCoefficients:
    """
    W^{Ψ^{jj'}}_ℓmp = sqrt(4π/(2ℓ+1)) f_ℓmp Ψ^{jj'}_ℓ0p, y lo mismo con Φ.

    Raises:
        ValueError: Si los límites de banda no coinciden.
    """
    _validar_compatibles(f, windows)
    familia = windows.family
    wavelets = {
        escala: ball_convolve(f, windows.psi_window(*escala)) for escala in familia.scales()
    }
    return FlagletCoefficients(ball_convolve(f, windows.phi), wavelets, familia)


def flaglet_synthesis(coeffs: FlagletCoefficients, windows: HarmonicWindows) -> FlagCoefficients:
    """
    Reconstrucción exacta a partir de los coeficientes de escala y wavelet.

    Raises:
        ValueError: Si la familia de los coeficientes no es la de las ventanas.
    """
    if coeffs.family != windows.family:
        raise ValueError("La familia de los coeficientes no coincide con la de las ventanas.")

    b = coeffs.scaling.bandlimit
    ell = np.arange(b.L)
    norma = np.sqrt(4.0 * np.pi / (2.0 * ell + 1.0))[None, :, None]

    total = coeffs.scaling.values * windows.phi.T[:, :, None]
    for escala, w in coeffs.wavelets.items():
        total = total + w.values * windows.psi_window(*escala).T[:, :, None]
    return FlagCoefficients(norma * total, b)


def flaglet_energy(coeffs: FlagletCoefficients) -> float:
    """Σ|W^Φ|² + Σ_{jj'}|W^Ψ|²; coincide con Σ|f|² por ser un marco ajustado."""
    return coeffs.scaling.energy() + sum(w.energy() for w in coeffs.wavelets.values())


# ==========================================================
# Espacio real
# ==========================================================

def _armonicos_trasladados(ventana: NDArray[np.float64], s: float, grid: BallGrid) -> FlagCoefficients:
    """Coeficientes de T_s aplicado a una ventana axisimétrica (solo m = 0)."""
    b = grid.bandlimit
    valores = np.zeros(b.coefficient_shape, dtype=complex)
    valores[:, :, b.L - 1] = (ventana * radial_dirac(s, grid.basis)[None, :]).T
    return FlagCoefficients(valores, b)


def render_flaglet(
    windows: HarmonicWindows, j: int, jp: int, s: float, grid: BallGrid
) -> NDArray[np.float64]:
    """
    Muestras en la grilla del flaglet Ψ^{jj'} trasladado radialmente a s.

    Raises:
        ValueError: Si (j, j') está fuera del rango de la familia o s < 0.
    """
    coeffs = _armonicos_trasladados(windows.psi_window(j, jp), s, grid)
    return flag_inverse(coeffs, grid).real


def render_scaling(windows: HarmonicWindows, s: float, grid: BallGrid) -> NDArray[np.float64]:
    """Muestras de la función de escala trasladada a s."""
    return flag_inverse(_armonicos_trasladados(windows.phi, s, grid), grid).real


def flaglet_profile(
    windows: HarmonicWindows,
    j: int,
    jp: int,
    s: float,
    radios: NDArray[np.float64],
    thetas: NDArray[np.float64],
) -> NDArray[np.float64]:
    """
    Evalúa T_s Ψ^{jj'} en los puntos (r, θ); no depende de φ.

    Solo intervienen términos m = 0, así que la suma es sum_ℓp
    Ψ_ℓp K_p(s) K_p(r) Λ_ℓ^0(cos θ).
    """
    b = windows.family.bandlimit
    radios = np.asarray(radios, dtype=float).ravel()
    thetas = np.asarray(thetas, dtype=float).ravel()
    ventana = windows.psi_window(j, jp)

    k_s = laguerre_basis_table(b.P, [s], b.tau)[:, 0]
    k_r = laguerre_basis_table(b.P, radios, b.tau)
    legendre = legendre_table(b.L, np.cos(thetas))[:, b.L - 1, :]
    return np.einsum("lp,p,pn,ln->n", ventana, k_s, k_r, legendre, optimize=True)


def _semiancho(x: NDArray[np.float64], y: NDArray[np.float64], pico: int) -> float:
    """Semiancho a media altura alrededor de ``pico``."""
    mitad = 0.5 * y[pico]
    izquierda = pico
    while izquierda > 0 and y[izquierda] > mitad:
        izquierda -= 1
    derecha = pico
    while derecha < y.size - 1 and y[derecha] > mitad:
        derecha += 1
    return max(0.5 * (x[derecha] - x[izquierda]), x[1] - x[0])


def nearest_peak(x: NDArray[np.float64], y: NDArray[np.float64], objetivo: float) -> int:
    """
    Índice del máximo local positivo de ``y`` más cercano a ``objetivo``.

    Los extremos no cuentan: la suma de K_p tiene un máximo espurio en r = 0
    que no pertenece al flaglet trasladado. Sin máximos interiores se usa el
    mayor valor fuera de los extremos.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size or x.size < 3:
        raise ValueError("Se necesitan al menos tres muestras con abscisas.")
    centro = y[1:-1]
    interiores = np.flatnonzero((centro > y[:-2]) & (centro >= y[2:]) & (centro > 0)) + 1
    if interiores.size == 0:
        logger.debug("Perfil sin máximos interiores; se usa el mayor valor")
        return int(np.argmax(centro)) + 1
    return int(interiores[np.argmin(np.abs(x[interiores] - objetivo))])


def flaglet_peak_width(
    windows: HarmonicWindows, j: int, jp: int, s: Optional[float] = None
) -> Tuple[float, float, float]:
    """
    Anchos del pico de un flaglet trasladado a s (por defecto R/2).

    El pico es el lóbulo principal alrededor de s, ver ``nearest_peak``.

    Returns:
        Tuple[float, float, float]: (semiancho radial, semiancho angular
        como longitud de arco, radio efectivo = media geométrica).
    """
    b = windows.family.bandlimit
    R = float(radial_quadrature(b.P, b.tau).nodes[-1])
    s = 0.5 * R if s is None else s

    radios = np.linspace(0.0, R, _MUESTRAS_PERFIL)
    perfil_radial = flaglet_profile(windows, j, jp, s, radios, np.zeros_like(radios))
    pico = nearest_peak(radios, perfil_radial, s)
    ancho_radial = _semiancho(radios, perfil_radial, pico)

    r_pico = float(radios[pico])
    thetas = np.linspace(0.0, np.pi, _MUESTRAS_PERFIL)
    perfil_angular = flaglet_profile(windows, j, jp, s, np.full_like(thetas, r_pico), thetas)
    ancho_angular = r_pico * _semiancho(thetas, perfil_angular, 0)

    return ancho_radial, ancho_angular, float(np.sqrt(ancho_radial * ancho_angular))


def wavelet_maps(
    coeffs: FlagletCoefficients, grid: BallGrid, max_workers: int = 1
) -> Dict[Escala, NDArray[np.float64]]:
    """
    Mapas reales W^{Ψ^{jj'}}(r⃗) en la grilla, uno por escala.

    Args:
        max_workers (int): Hilos para calcular escalas en paralelo.
    """

    def mapa(escala: Escala) -> Tuple[Escala, NDArray[np.float64]]:
        return escala, flag_inverse(coeffs.wavelets[escala], grid).real

    escalas = list(coeffs.wavelets)
    if max_workers <= 1:
        return dict(mapa(e) for e in escalas)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return dict(pool.map(mapa, escalas))
