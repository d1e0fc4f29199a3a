"""Conversión exacta de coeficientes de Fourier-Laguerre a Fourier-Bessel.

Para una señal de banda limitada,

    f̃_ℓm(k) = sqrt(2/π) Σ_p f_ℓmp j_ℓp(k),

con j_ℓp(k) = ⟨K_p | j_ℓ(k·)⟩ escrito como suma finita de momentos
μ^ℓ_j(k) en forma hipergeométrica cerrada. La suma alterna en signo y
pierde muchos dígitos en doble precisión, de modo que todo se acumula con
mpmath y recién al final se convierte a float.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional

import mpmath
import numpy as np
from numpy.typing import ArrayLike, NDArray

from .flag_transform import BandLimit, FlagCoefficients

logger = logging.getLogger(__name__)

DIGITOS = 30
DIGITOS_EXTENDIDOS = 50
UMBRAL_EXTENDIDO = 40


# ==========================================================
# Coeficientes polinomiales
# ==========================================================

@lru_cache(maxsize=None)
def _c_coeffs_exactos(p: int) -> tuple:
    """c^p_j como fracciones exactas, por recurrencia desde c^p_0 = (p+2)(p+1)/2."""
    coeficientes: List[Fraction] = [Fraction((p + 2) * (p + 1), 2)]
    for j in range(1, p + 1):
        coeficientes.append(-Fraction(p - j + 1, j * (j + 2)) * coeficientes[-1])
    return tuple(coeficientes)


def c_coeffs(p: int) -> NDArray[np.float64]:
    """
    Coeficientes de L^{(2)}_p(x) = Σ_j c^p_j x^j.

    Args:
        p (int): Grado (p >= 0).

    Returns:
        NDArray: p + 1 valores reales.
    """
    if int(p) != p or p < 0:
        raise ValueError("p debe ser un entero no negativo.")
    return np.array([float(c) for c in _c_coeffs_exactos(int(p))])


# ==========================================================
# Momentos
# ==========================================================

def _hyp2f1_euler_terminante(a, b, c, z) -> Optional[mpmath.mpf]:
    """
    2F1(a,b;c;z) = (1-z)^{c-a-b} 2F1(c-a, c-b; c; z) cuando c-a o c-b
    es un entero no positivo; en ese caso la serie transformada es finita.
    """
    for primero, segundo in ((c - a, c - b), (c - b, c - a)):
        if primero <= 0 and mpmath.isint(primero):
            n = int(-primero)
            termino = mpmath.mpf(1)
            suma = mpmath.mpf(1)
            for i in range(n):
                termino *= (primero + i) * (segundo + i) / ((c + i) * (i + 1)) * z
                suma += termino
            return (1 - z) ** (c - a - b) * suma
    return None


def _moment_mu_mp(ell: int, j: int, k: float, tau: float) -> mpmath.mpf:
    k_tilde = mpmath.mpf(tau) * mpmath.mpf(k)
    z = -4 * k_tilde**2
    a = mpmath.mpf(j + ell + 1) / 2
    b = mpmath.mpf(j + ell) / 2 + 1
    c = ell + mpmath.mpf(3) / 2

    prefactor = (
        mpmath.sqrt(mpmath.pi)
        * mpmath.mpf(2) ** j
        * k_tilde**ell
        * mpmath.mpf(tau) ** mpmath.mpf(1.5)
        * mpmath.exp(mpmath.loggamma(j + ell + 1) - mpmath.loggamma(c))
    )
    hiper = _hyp2f1_euler_terminante(a, b, c, z)
    if hiper is None:
        hiper = mpmath.hyp2f1(a, b, c, z)
    return prefactor * hiper


def _digitos(ell: int, j: int) -> int:
    return DIGITOS_EXTENDIDOS if ell + j > UMBRAL_EXTENDIDO else DIGITOS


def _validar_momento(ell: int, j: int, k: float, tau: float) -> None:
    if ell < 0 or j + ell < 2:
        raise ValueError(f"Parámetros fuera de rango: ℓ={ell}, j={j} (se requiere j + ℓ >= 2).")
    if not k > 0:
        raise ValueError("k debe ser positivo.")
    if not tau > 0:
        raise ValueError("tau debe ser positivo.")


def moment_mu(ell: int, j: int, k: float, tau: float) -> float:
    """
    μ^ℓ_j(k) = τ^{-(j-1/2)} ∫ r^j j_ℓ(kr) e^{-r/2τ} dr en forma cerrada.

    Cuando la serie hipergeométrica no termina (ℓ >= j - 1) se evalúa con
    ``mpmath.hyp2f1`` a la misma precisión extendida.
    """
    _validar_momento(ell, j, k, tau)
    with mpmath.workdps(_digitos(ell, j)):
        return float(_moment_mu_mp(ell, j, k, tau))


def _proyeccion_mp(ell: int, p: int, k: float, tau: float, momentos: List[mpmath.mpf]) -> mpmath.mpf:
    suma = mpmath.mpf(0)
    for j, c in enumerate(_c_coeffs_exactos(p)):
        suma += mpmath.mpf(c.numerator) / c.denominator * momentos[j + 2]
    return suma / mpmath.sqrt((p + 1) * (p + 2))


def projection_jlp(ell: int, p: int, k: float, tau: float) -> float:
    """j_ℓp(k) = sqrt(p!/(p+2)!) Σ_j c^p_j μ^ℓ_{j+2}(k)."""
    if p < 0:
        raise ValueError("p debe ser no negativo.")
    _validar_momento(ell, 2, k, tau)
    with mpmath.workdps(_digitos(ell, p + 2)):
        momentos = [None, None] + [_moment_mu_mp(ell, j, k, tau) for j in range(2, p + 3)]
        return float(_proyeccion_mp(ell, p, k, tau, momentos))


# ==========================================================
# Tablas y conversión
# ==========================================================

class ProjectionTable:
    """
    Tabla j_ℓp(k) de forma (L, P, n_k).
    """

    def __init__(self, values: NDArray[np.float64], k_grid: NDArray[np.float64], tau: float) -> None:
        if values.ndim != 3 or values.shape[2] != k_grid.size:
            raise ValueError("La tabla no coincide con la grilla de k.")
        if not np.all(np.isfinite(values)):
            raise ValueError("La tabla contiene valores no finitos.")
        values.setflags(write=False)
        self.values = values
        self.k_grid = k_grid
        self.tau = float(tau)


def log_k_grid(kmin: float, kmax: float, n: int) -> NDArray[np.float64]:
    """Grilla logarítmica de n números de onda entre kmin y kmax."""
    if not 0 < kmin < kmax or n < 1:
        raise ValueError("Se requiere 0 < kmin < kmax y n >= 1.")
    return np.geomspace(kmin, kmax, n)


def _validar_k(k_grid: ArrayLike) -> NDArray[np.float64]:
    k_grid = np.atleast_1d(np.asarray(k_grid, dtype=float)).ravel()
    if k_grid.size == 0:
        raise ValueError("La grilla de k está vacía.")
    if np.any(k_grid <= 0):
        raise ValueError("Los números de onda deben ser positivos.")
    return k_grid


def projection_table(L: int, P: int, k_grid: ArrayLike, tau: float) -> ProjectionTable:
    """Calcula j_ℓp(k) para ℓ < L, p < P y cada k, reutilizando los momentos."""
    k_grid = _validar_k(k_grid)
    valores = np.empty((L, P, k_grid.size))

    for ell in range(L):
        with mpmath.workdps(_digitos(ell, P + 1)):
            for ik, k in enumerate(k_grid):
                momentos = [None, None] + [
                    _moment_mu_mp(ell, j, float(k), tau) for j in range(2, P + 2)
                ]
                for p in range(P):
                    valores[ell, p, ik] = float(_proyeccion_mp(ell, p, float(k), tau, momentos))

    logger.debug("Tabla de proyección L=%d P=%d con %d valores de k", L, P, k_grid.size)
    return ProjectionTable(valores, k_grid, tau)


class BesselCoefficients:
    """
    Coeficientes f̃_ℓm(k).

    Attributes:
        k_grid (np.ndarray): Números de onda.
        values (np.ndarray): Arreglo complejo (L, 2L-1, n_k).
        bandlimit (BandLimit): Límite de banda de la señal de origen.
    """

    def __init__(self, k_grid: ArrayLike, values: ArrayLike, bandlimit: BandLimit) -> None:
        k_grid = np.asarray(k_grid, dtype=float)
        values = np.asarray(values, dtype=complex)
        if values.shape != (bandlimit.L, 2 * bandlimit.L - 1, k_grid.size):
            raise ValueError("Coeficientes de Bessel con forma inconsistente.")
        if not np.all(np.isfinite(values)):
            raise ValueError("Coeficientes de Bessel no finitos.")
        self.k_grid = k_grid
        self.values = values
        self.bandlimit = bandlimit


def flag_to_bessel(
    f: FlagCoefficients,
    k_grid: ArrayLike,
    tabla: Optional[ProjectionTable] = None,
) -> BesselCoefficients:
    """
    f̃_ℓm(k) = sqrt(2/π) Σ_p f_ℓmp j_ℓp(k).

    Args:
        f (FlagCoefficients): Señal de banda limitada.
        k_grid (ArrayLike): Números de onda positivos.
        tabla (Optional[ProjectionTable]): Tabla precalculada para reutilizar.

    Raises:
        ValueError: Si la grilla de k está vacía.
    """
    k_grid = _validar_k(k_grid)
    b = f.bandlimit
    if tabla is None:
        tabla = projection_table(b.L, b.P, k_grid, b.tau)
    elif tabla.values.shape[:2] != (b.L, b.P) or not np.array_equal(tabla.k_grid, k_grid):
        raise ValueError("La tabla de proyección no corresponde a la señal.")

    valores = np.sqrt(2.0 / np.pi) * np.einsum("plc,lpk->lck", f.values, tabla.values)
    return BesselCoefficients(k_grid, valores, b)
