"""Transformada armónica esférica exacta para señales de banda limitada.

Esquema de muestreo: L colatitudes de Gauss-Legendre por 2L-1 longitudes
equiespaciadas. Los coeficientes se guardan en memoria como una matriz
densa (L, 2L-1): la fila es ℓ y la columna m + L - 1; las entradas con
|m| > ℓ son cero.
"""

from __future__ import annotations

import logging
from functools import cached_property, lru_cache
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import roots_legendre

logger = logging.getLogger(__name__)

SphericalCoefficients = NDArray[np.complex128]

_REESCALA = 1e150
_LOG_REESCALA = np.log(_REESCALA)


# ==========================================================
# Índices
# ==========================================================

def lm_mask(L: int) -> NDArray[np.bool_]:
    """Máscara (L, 2L-1) con True donde |m| <= ℓ."""
    ell = np.arange(L)[:, None]
    m = np.arange(-(L - 1), L)[None, :]
    return np.abs(m) <= ell


def flatten_lm(coeffs: ArrayLike) -> np.ndarray:
    """
    Empaquetado triangular sobre los dos últimos ejes: índice ℓ² + ℓ + m.

    Returns:
        np.ndarray: Forma (..., L²).
    """
    coeffs = np.asarray(coeffs)
    L = coeffs.shape[-2]
    if coeffs.shape[-1] != 2 * L - 1:
        raise ValueError("Se esperaba una matriz de coeficientes (L, 2L-1).")
    return coeffs[..., lm_mask(L)]


def unflatten_lm(packed: ArrayLike, L: int) -> np.ndarray:
    """Inversa de ``flatten_lm``."""
    packed = np.asarray(packed)
    if packed.shape[-1] != L * L:
        raise ValueError(f"Se esperaban {L * L} coeficientes empaquetados.")
    denso = np.zeros(packed.shape[:-1] + (L, 2 * L - 1), dtype=packed.dtype)
    denso[..., lm_mask(L)] = packed
    return denso


# ==========================================================
# Legendre asociadas normalizadas
# ==========================================================

def legendre_table(L: int, x: ArrayLike) -> NDArray[np.float64]:
    """
    Funciones de Legendre asociadas normalizadas con fase de Condon-Shortley.

    Y_ℓm(θ, φ) = Λ_ℓ^m(cos θ) e^{imφ}. La recurrencia en ℓ se lleva con
    mantisa y exponente separados, así las semillas sin^m θ que subdesbordan
    a ℓ grande se recuperan sin perder precisión.

    Args:
        L (int): Límite de banda angular.
        x (ArrayLike): Valores de cos θ.

    Returns:
        NDArray: Tabla (L, 2L-1, n) con columnas m = -(L-1) … L-1.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    n = x.size
    positivos = np.zeros((L, L, n))

    seno = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    with np.errstate(divide="ignore"):
        log_seno = np.log(seno)

    log_producto = 0.0
    for m in range(L):
        if m > 0:
            log_producto += np.log((2.0 * m - 1.0) / (2.0 * m))
            log_semilla = (
                0.5 * np.log((2.0 * m + 1.0) / (4.0 * np.pi))
                + 0.5 * log_producto
                + m * log_seno
            )
        else:
            log_semilla = np.full(n, 0.5 * np.log(1.0 / (4.0 * np.pi)))

        escala = np.array(log_semilla, dtype=float)
        anterior = np.zeros(n)
        actual = np.full(n, -1.0 if m % 2 else 1.0)
        with np.errstate(under="ignore"):
            positivos[m, m] = actual * np.exp(escala)

        for ell in range(m + 1, L):
            a = np.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
            b = -np.sqrt(
                (2.0 * ell + 1.0) * ((ell - 1.0) ** 2 - m * m)
                / ((2.0 * ell - 3.0) * (ell * ell - m * m))
            ) if ell > m + 1 else 0.0
            anterior, actual = actual, a * x * actual + b * anterior

            grande = np.abs(actual) > _REESCALA
            if np.any(grande):
                actual[grande] /= _REESCALA
                anterior[grande] /= _REESCALA
                escala[grande] += _LOG_REESCALA

            with np.errstate(under="ignore"):
                positivos[ell, m] = actual * np.exp(escala)

    tabla = np.zeros((L, 2 * L - 1, n))
    tabla[:, L - 1:, :] = positivos
    for m in range(1, L):
        tabla[:, L - 1 - m, :] = (-1.0) ** m * positivos[:, m, :]
    return tabla


def ylm_table(L: int, thetas: ArrayLike, phis: ArrayLike) -> NDArray[np.complex128]:
    """Y_ℓm evaluadas en puntos arbitrarios, forma (L, 2L-1, n)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float)).ravel()
    phis = np.atleast_1d(np.asarray(phis, dtype=float)).ravel()
    if thetas.shape != phis.shape:
        raise ValueError("thetas y phis deben tener la misma longitud.")
    m = np.arange(-(L - 1), L)
    fases = np.exp(1j * m[:, None] * phis[None, :])
    return legendre_table(L, np.cos(thetas)) * fases[None, :, :]


# ==========================================================
# Muestreo
# ==========================================================

class SphereSampling:
    """
    Grilla de Gauss-Legendre en colatitud por 2L-1 longitudes.

    La cuadratura inducida integra exactamente cualquier producto de dos
    funciones de banda limitada L contra dΩ.
    """

    def __init__(self, L: int) -> None:
        if int(L) != L or L < 1:
            raise ValueError("L debe ser un entero mayor o igual a 1.")

        self.L: int = int(L)
        x, w = roots_legendre(self.L)
        orden = np.argsort(-x)
        self.cos_thetas = x[orden]
        self.thetas = np.arccos(self.cos_thetas)
        self.theta_weights = w[orden]
        self.n_phi = 2 * self.L - 1
        self.phis = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        self.phi_weight = 2.0 * np.pi / self.n_phi
        self.m_indices = np.arange(-(self.L - 1), self.L) % self.n_phi

        for arreglo in (self.cos_thetas, self.thetas, self.theta_weights, self.phis):
            arreglo.setflags(write=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.L, self.n_phi)

    @cached_property
    def legendre(self) -> NDArray[np.float64]:
        """Tabla de Legendre en las colatitudes del esquema, (L, 2L-1, L)."""
        tabla = legendre_table(self.L, self.cos_thetas)
        tabla.setflags(write=False)
        logger.debug("Tabla de Legendre construida para L=%d", self.L)
        return tabla

    def weights(self) -> NDArray[np.float64]:
        """Pesos de cuadratura sobre la grilla completa, forma (L, 2L-1)."""
        return np.repeat(self.theta_weights[:, None] * self.phi_weight, self.n_phi, axis=1)

    def __repr__(self) -> str:
        return f"SphereSampling(L={self.L})"


@lru_cache(maxsize=16)
def sphere_sampling(L: int) -> SphereSampling:
    return SphereSampling(L)


# ==========================================================
# Transformadas
# ==========================================================

def sht_forward(samples: ArrayLike, sampling: SphereSampling) -> SphericalCoefficients:
    """
    Coeficientes f_ℓm = ⟨f | Y_ℓm⟩ sobre la esfera.

    Acepta ejes iniciales adicionales (por ejemplo, una capa por radio).

    Raises:
        ValueError: Si la grilla no coincide con el muestreo.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape[-2:] != sampling.shape:
        raise ValueError(
            f"La grilla {samples.shape[-2:]} no coincide con el muestreo {sampling.shape}."
        )

    fourier = np.fft.fft(samples, axis=-1) * sampling.phi_weight
    fourier = fourier[..., sampling.m_indices] * sampling.theta_weights[:, None]
    return np.einsum("lcj,...jc->...lc", sampling.legendre, fourier, optimize=True)


def sht_inverse(coeffs: ArrayLike, sampling: SphereSampling) -> NDArray[np.complex128]:
    """Evalúa sum_ℓm f_ℓm Y_ℓm en la grilla del muestreo."""
    coeffs = np.asarray(coeffs, dtype=complex)
    L = sampling.L
    if coeffs.shape[-2:] != (L, 2 * L - 1):
        raise ValueError(f"Se esperaban coeficientes de forma ({L}, {2 * L - 1}).")

    por_m = np.einsum("lcj,...lc->...jc", sampling.legendre, coeffs, optimize=True)
    espectro = np.zeros(coeffs.shape[:-2] + (L, sampling.n_phi), dtype=complex)
    espectro[..., sampling.m_indices] = por_m
    return np.fft.ifft(espectro, axis=-1) * sampling.n_phi


def axisym_convolve(f: ArrayLike, h_ell0: ArrayLike) -> SphericalCoefficients:
    """(f ⋆ h)_ℓm = sqrt(4π/(2ℓ+1)) f_ℓm conj(h_ℓ0)."""
    f = np.asarray(f, dtype=complex)
    h_ell0 = np.asarray(h_ell0, dtype=complex)
    L = f.shape[-2]
    if h_ell0.shape != (L,):
        raise ValueError(f"El núcleo debe tener {L} coeficientes h_ℓ0.")

    ell = np.arange(L)
    factor = np.sqrt(4.0 * np.pi / (2.0 * ell + 1.0)) * np.conj(h_ell0)
    return f * factor[:, None]
