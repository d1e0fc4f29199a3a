"""Funciones generadoras y teselado armónico de los flaglets.

Las ventanas Ψ^{jj'} cubren bandas [λ^{j-1}, λ^{j+1}] × [ν^{j'-1}, ν^{j'+1}]
del plano (ℓ, p); la ventana de escala Φ recoge los modos bajos. Juntas
cumplen la resolución de la identidad

    (4π/(2ℓ+1)) (Φ_ℓ0p² + Σ Ψ^{jj'}_ℓ0p²) = 1.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Iterator, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from scipy.integrate import quad

from .errores import ErrorNumerico
from .flag_transform import BandLimit

logger = logging.getLogger(__name__)

TOLERANCIA_ADMISIBILIDAD = 1e-10
_TOLERANCIA_RADICANDO = 1e-12


# ==========================================================
# Funciones generadoras
# ==========================================================

def schwartz_s(t: ArrayLike) -> np.ndarray:
    """s(t) = exp(-1/(1-t²)) para |t| < 1; 0 en el resto (incluido |t| = 1)."""
    t = np.asarray(t, dtype=float)
    resultado = np.zeros_like(t)
    dentro = np.abs(t) < 1.0
    resultado[dentro] = np.exp(-1.0 / (1.0 - t[dentro] ** 2))
    return resultado if resultado.ndim else float(resultado)


def s_lambda(t: ArrayLike, lam: float) -> np.ndarray:
    """s reparametrizada con soporte compacto en [1/λ, 1]."""
    _validar_dilatacion(lam)
    t = np.asarray(t, dtype=float)
    return schwartz_s(2.0 * lam / (lam - 1.0) * (t - 1.0 / lam) - 1.0)


def _integrando(t: float, lam: float) -> float:
    return float(s_lambda(t, lam)) ** 2 / t


@lru_cache(maxsize=None)
def _normalizacion_k(lam: float) -> float:
    valor, _ = quad(_integrando, 1.0 / lam, 1.0, args=(lam,), epsabs=1e-14, epsrel=1e-13, limit=200)
    return valor


@lru_cache(maxsize=None)
def _k_lambda_escalar(t: float, lam: float) -> float:
    if t <= 1.0 / lam:
        return 1.0
    if t >= 1.0:
        return 0.0
    valor, _ = quad(_integrando, t, 1.0, args=(lam,), epsabs=1e-14, epsrel=1e-13, limit=200)
    return min(1.0, max(0.0, valor / _normalizacion_k(lam)))


def k_lambda(t: ArrayLike, lam: float) -> np.ndarray:
    """
    Función de escala suave: 1 para t <= 1/λ, 0 para t >= 1, decreciente entre medio.

    Las integrales se resuelven por cuadratura adaptativa y se memorizan por
    argumento, ya que el teselado usa un conjunto finito de valores ℓ/λ^j.
    """
    _validar_dilatacion(lam)
    t = np.asarray(t, dtype=float)
    resultado = np.array([_k_lambda_escalar(float(v), float(lam)) for v in t.ravel()])
    resultado = resultado.reshape(t.shape)
    return resultado if resultado.ndim else float(resultado)


def kappa_lambda(t: ArrayLike, lam: float) -> np.ndarray:
    """κ_λ(t) = sqrt(k_λ(t/λ) - k_λ(t))."""
    t = np.asarray(t, dtype=float)
    radicando = np.asarray(k_lambda(t / lam, lam)) - np.asarray(k_lambda(t, lam))
    resultado = np.sqrt(np.maximum(radicando, 0.0))
    return resultado if resultado.ndim else float(resultado)


def eta_lambda(t: ArrayLike, lam: float) -> np.ndarray:
    """η_λ(t) = sqrt(k_λ(t))."""
    return np.sqrt(k_lambda(t, lam))


def eta_lambda_nu(t: ArrayLike, tp: ArrayLike, lam: float, nu: float) -> np.ndarray:
    """
    η_λν(t, t') = sqrt(k_λ(t/λ)k_ν(t') + k_λ(t)k_ν(t'/ν) - k_λ(t)k_ν(t')).

    Raises:
        ErrorNumerico: Si el radicando es menor que -1e-12.
    """
    t = np.asarray(t, dtype=float)
    tp = np.asarray(tp, dtype=float)
    k_t = np.asarray(k_lambda(t, lam))
    k_tp = np.asarray(k_lambda(tp, nu))
    radicando = (
        np.asarray(k_lambda(t / lam, lam)) * k_tp
        + k_t * np.asarray(k_lambda(tp / nu, nu))
        - k_t * k_tp
    )
    if np.any(radicando < -_TOLERANCIA_RADICANDO):
        raise ErrorNumerico(f"Radicando negativo en η_λν: {radicando.min():.3e}")
    resultado = np.sqrt(np.maximum(radicando, 0.0))
    return resultado if resultado.ndim else float(resultado)


def _validar_dilatacion(valor: float) -> None:
    if not valor > 1:
        raise ValueError("El parámetro de dilatación debe ser mayor que 1.")


def _escala_maxima(n: int, base: float) -> int:
    """Menor entero J >= 0 con base**J >= n, es decir ⌈log_base(n)⌉."""
    J = 0
    while base**J < n:
        J += 1
    return J


# ==========================================================
# Familia de wavelets
# ==========================================================

class WaveletFamily(BaseModel):
    """Parámetros del teselado.

    Attributes:
        lam (float): Dilatación angular λ > 1 (alias "lambda").

        nu (float): Dilatación radial ν > 1.

        J0 (int): Primera escala angular de flaglets.

        J0p (int): Primera escala radial de flaglets.

        bandlimit (BandLimit): Límites de banda de la señal.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(gt=1, alias="lambda", description="Dilatación angular")

    nu: float = Field(gt=1, description="Dilatación radial")

    J0: int = Field(ge=0, description="Escala angular mínima")

    J0p: int = Field(ge=0, description="Escala radial mínima")

    bandlimit: BandLimit

    @computed_field
    @property
    def J(self) -> int:
        return _escala_maxima(self.bandlimit.L - 1, self.lam)

    @computed_field
    @property
    def Jp(self) -> int:
        return _escala_maxima(self.bandlimit.P - 1, self.nu)

    @model_validator(mode="after")
    def _validar_escalas(self) -> "WaveletFamily":
        if self.bandlimit.L < 2 or self.bandlimit.P < 2:
            raise ValueError("El teselado requiere L >= 2 y P >= 2.")
        if not self.J0 < self.J:
            raise ValueError(f"Se requiere J0 < J (J0={self.J0}, J={self.J}).")
        if not self.J0p < self.Jp:
            raise ValueError(f"Se requiere J0p < Jp (J0p={self.J0p}, Jp={self.Jp}).")
        return self

    def scales(self) -> Iterator[Tuple[int, int]]:
        """Pares (j, j') en orden lexicográfico."""
        for j in range(self.J0, self.J + 1):
            for jp in range(self.J0p, self.Jp + 1):
                yield (j, jp)


# ==========================================================
# Ventanas armónicas
# ==========================================================

class HarmonicWindows:
    """
    Ventanas Ψ^{jj'}_ℓ0p (con el factor sqrt((2ℓ+1)/4π)) y Φ_ℓ0p.

    Attributes:
        family (WaveletFamily): Parámetros del teselado.
        psi (np.ndarray): Forma (J-J0+1, Jp-J0p+1, L, P).
        phi (np.ndarray): Forma (L, P).
    """

    def __init__(self, family: WaveletFamily, psi: NDArray[np.float64], phi: NDArray[np.float64]) -> None:
        b = family.bandlimit
        esperada = (family.J - family.J0 + 1, family.Jp - family.J0p + 1, b.L, b.P)
        if psi.shape != esperada or phi.shape != (b.L, b.P):
            raise ValueError("Las ventanas no coinciden con la familia.")

        psi.setflags(write=False)
        phi.setflags(write=False)
        self.family = family
        self.psi = psi
        self.phi = phi

    def psi_window(self, j: int, jp: int) -> NDArray[np.float64]:
        f = self.family
        if not (f.J0 <= j <= f.J and f.J0p <= jp <= f.Jp):
            raise ValueError(f"Escala fuera de rango: (j, j')=({j}, {jp}).")
        return self.psi[j - f.J0, jp - f.J0p]

    def admissibility_residual(self) -> NDArray[np.float64]:
        """|(4π/(2ℓ+1))(Φ² + ΣΨ²) - 1| por cada (ℓ, p)."""
        ell = np.arange(self.family.bandlimit.L)
        factor = (4.0 * np.pi / (2.0 * ell + 1.0))[:, None]
        suma = self.phi**2 + np.sum(self.psi**2, axis=(0, 1))
        return np.abs(factor * suma - 1.0)

    def __repr__(self) -> str:
        f = self.family
        return f"HarmonicWindows(lambda={f.lam:g}, nu={f.nu:g}, J0={f.J0}, J0p={f.J0p})"


def _tabla_k(indices: NDArray[np.float64], base: float, escalas: range) -> dict:
    return {j: np.asarray(k_lambda(indices / base**j, base), dtype=float) for j in escalas}


@lru_cache(maxsize=16)
def build_windows(family: WaveletFamily) -> HarmonicWindows:
    """
    Construye Ψ^{jj'} para j ∈ [J0, J], j' ∈ [J0p, Jp] y la ventana Φ.

    Raises:
        ErrorNumerico: Si el residuo de admisibilidad supera 1e-10.
    """
    b = family.bandlimit
    lam, nu = family.lam, family.nu
    ell = np.arange(b.L, dtype=float)
    p = np.arange(b.P, dtype=float)
    norma = np.sqrt((2.0 * ell + 1.0) / (4.0 * np.pi))

    # k_λ(ℓ/λ^j) para j ∈ [J0, J+1]; κ_λ(ℓ/λ^j)² = k(ℓ/λ^{j+1}) - k(ℓ/λ^j)
    k_ell = _tabla_k(ell, lam, range(family.J0, family.J + 2))
    k_p = _tabla_k(p, nu, range(family.J0p, family.Jp + 2))
    kappa_ell = {
        j: np.sqrt(np.maximum(k_ell[j + 1] - k_ell[j], 0.0))
        for j in range(family.J0, family.J + 1)
    }
    kappa_p = {
        jp: np.sqrt(np.maximum(k_p[jp + 1] - k_p[jp], 0.0))
        for jp in range(family.J0p, family.Jp + 1)
    }

    psi = np.zeros((family.J - family.J0 + 1, family.Jp - family.J0p + 1, b.L, b.P))
    for j, jp in family.scales():
        psi[j - family.J0, jp - family.J0p] = (
            norma[:, None] * kappa_ell[j][:, None] * kappa_p[jp][None, :]
        )

    # Φ por tramos; la frontera ℓ = λ^J0 o p = ν^J0p cae en la rama η_λν
    a = ell / lam**family.J0
    c = p / nu**family.J0p
    ell_bajo = (ell <= lam**family.J0)[:, None]
    p_bajo = (p <= nu**family.J0p)[None, :]
    A, C = np.meshgrid(a, c, indexing="ij")

    eta = np.zeros((b.L, b.P))
    rama_radial = ~ell_bajo & p_bajo
    rama_angular = ell_bajo & ~p_bajo
    rama_mixta = ell_bajo & p_bajo
    if np.any(rama_radial):
        eta[rama_radial] = eta_lambda(C[rama_radial], nu)
    if np.any(rama_angular):
        eta[rama_angular] = eta_lambda(A[rama_angular], lam)
    if np.any(rama_mixta):
        eta[rama_mixta] = eta_lambda_nu(A[rama_mixta], C[rama_mixta], lam, nu)
    phi = norma[:, None] * eta

    ventanas = HarmonicWindows(family, psi, phi)
    residuo = ventanas.admissibility_residual()
    peor = np.unravel_index(np.argmax(residuo), residuo.shape)
    logger.debug("Ventanas %r: residuo máximo %.3e", ventanas, residuo[peor])

    if residuo[peor] > TOLERANCIA_ADMISIBILIDAD:
        raise ErrorNumerico(
            f"Residuo de admisibilidad {residuo[peor]:.3e} en (ℓ, p)=({peor[0]}, {peor[1]})."
        )
    return ventanas
