"""Transformada de Fourier-Laguerre separable sobre la bola.

La grilla es el producto de la cuadratura radial (P capas) por el muestreo
esférico (L colatitudes, 2L-1 longitudes). Los coeficientes se guardan
densos con forma (P, L, 2L-1): primero p, luego ℓ, luego m + L - 1.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Literal, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from .radial_laguerre import (
    RadialBasis,
    RadialQuadrature,
    radial_analysis,
    tau_for_radius,
)
from .sphere_harmonics import (
    SphereSampling,
    legendre_table,
    lm_mask,
    sht_forward,
    sht_inverse,
    sphere_sampling,
)

logger = logging.getLogger(__name__)

_BLOQUE_EVALUACION = 2048


class BandLimit(BaseModel):
    """Límites de banda angular y radial y factor de escala radial.

    Attributes:
        L (int): Límite de banda angular.

        P (int): Límite de banda radial.

        tau (float): Factor de escala radial (unidades de longitud).
    """

    model_config = ConfigDict(frozen=True)

    L: int = Field(ge=1, description="Límite de banda angular")

    P: int = Field(ge=1, description="Límite de banda radial")

    tau: float = Field(gt=0, description="Factor de escala radial")

    @classmethod
    def from_radius(cls, L: int, P: int, R: float) -> "BandLimit":
        """Límite de banda con el nodo radial más externo en R."""
        return cls(L=L, P=P, tau=tau_for_radius(R, P))

    @property
    def coefficient_shape(self) -> Tuple[int, int, int]:
        return (self.P, self.L, 2 * self.L - 1)


# ==========================================================
# Grilla
# ==========================================================

class BallGrid:
    """
    Capas esféricas ubicadas en los nodos radiales.

    Attributes:
        bandlimit (BandLimit): Límites de banda de la grilla.
        sampling (SphereSampling): Muestreo de cada capa.
        basis (RadialBasis): Base radial asociada.
        radial (RadialQuadrature): Cuadratura radial.
    """

    def __init__(self, bandlimit: BandLimit) -> None:
        self.bandlimit = bandlimit
        self.sampling: SphereSampling = sphere_sampling(bandlimit.L)
        self.basis = RadialBasis(bandlimit.P, bandlimit.tau)
        self.radial: RadialQuadrature = self.basis.quadrature

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.bandlimit.P,) + self.sampling.shape

    def nodes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coordenadas (r, θ, φ) de cada nodo, cada una con forma ``shape``."""
        return np.meshgrid(
            self.radial.nodes, self.sampling.thetas, self.sampling.phis, indexing="ij"
        )

    def weights(self) -> NDArray[np.float64]:
        """Pesos combinados radial × colatitud × longitud."""
        return self.radial.weights[:, None, None] * self.sampling.weights()[None, :, :]

    def __repr__(self) -> str:
        b = self.bandlimit
        return f"BallGrid(L={b.L}, P={b.P}, tau={b.tau:g})"


@lru_cache(maxsize=8)
def build_grid(bandlimit: BandLimit) -> BallGrid:
    return BallGrid(bandlimit)


# ==========================================================
# Coeficientes
# ==========================================================

class FlagCoefficients:
    """
    Coeficientes f_ℓmp de Fourier-Laguerre.

    Attributes:
        values (np.ndarray): Arreglo complejo (P, L, 2L-1).
        bandlimit (BandLimit): Límites de banda asociados.
    """

    def __init__(self, values: ArrayLike, bandlimit: BandLimit) -> None:
        values = np.asarray(values, dtype=complex)
        if values.shape != bandlimit.coefficient_shape:
            raise ValueError(
                f"Forma {values.shape} incompatible con el límite de banda "
                f"{bandlimit.coefficient_shape}."
            )
        self.values = values
        self.bandlimit = bandlimit

    @classmethod
    def zeros(cls, bandlimit: BandLimit) -> "FlagCoefficients":
        return cls(np.zeros(bandlimit.coefficient_shape, dtype=complex), bandlimit)

    def get(self, ell: int, m: int, p: int) -> complex:
        self._validar_indice(ell, m, p)
        return complex(self.values[p, ell, m + self.bandlimit.L - 1])

    def set(self, ell: int, m: int, p: int, valor: complex) -> None:
        self._validar_indice(ell, m, p)
        self.values[p, ell, m + self.bandlimit.L - 1] = valor

    def energy(self) -> float:
        """Suma de |f_ℓmp|²."""
        return float(np.sum(np.abs(self.values) ** 2))

    def copy(self) -> "FlagCoefficients":
        return FlagCoefficients(self.values.copy(), self.bandlimit)

    def _validar_indice(self, ell: int, m: int, p: int) -> None:
        if not (0 <= ell < self.bandlimit.L and abs(m) <= ell and 0 <= p < self.bandlimit.P):
            raise ValueError(f"Índice fuera de rango: ℓ={ell}, m={m}, p={p}.")

    def __repr__(self) -> str:
        b = self.bandlimit
        return f"FlagCoefficients(L={b.L}, P={b.P}, tau={b.tau:g})"


def flatten_coefficients(values: ArrayLike) -> NDArray[np.complex128]:
    """
    Orden del formato FLAG01: p mayor, luego ℓ, luego m de -ℓ a ℓ.

    El índice dentro de cada bloque p es ℓ² + ℓ + m.
    """
    values = np.asarray(values, dtype=complex)
    P, L, _ = values.shape
    return values[:, lm_mask(L)].reshape(P * L * L)


def unflatten_coefficients(flat: ArrayLike, L: int, P: int) -> NDArray[np.complex128]:
    flat = np.asarray(flat, dtype=complex)
    if flat.shape != (P * L * L,):
        raise ValueError(f"Se esperaban {P * L * L} coeficientes empaquetados.")
    values = np.zeros((P, L, 2 * L - 1), dtype=complex)
    values[:, lm_mask(L)] = flat.reshape(P, L * L)
    return values


# ==========================================================
# Transformadas
# ==========================================================

def flag_forward(
    samples: ArrayLike,
    grid: BallGrid,
    orden: Literal["angular", "radial"] = "angular",
) -> FlagCoefficients:
    """
    Transformada directa f_ℓmp = ⟨f | Z_ℓmp⟩.

    Args:
        samples (ArrayLike): Valores en la grilla, forma (P, L, 2L-1).
        grid (BallGrid): Grilla de muestreo.
        orden (str): "angular" aplica primero la transformada esférica por
            capa; "radial" aplica primero el análisis radial.

    Raises:
        ValueError: Si la forma no coincide con la grilla.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != grid.shape:
        raise ValueError(f"Muestras {samples.shape} incompatibles con la grilla {grid.shape}.")

    if orden == "angular":
        armonicos = sht_forward(samples, grid.sampling)
        valores = radial_analysis(armonicos, grid.basis)
    elif orden == "radial":
        radiales = radial_analysis(samples, grid.basis)
        valores = sht_forward(radiales, grid.sampling)
    else:
        raise ValueError(f"Orden desconocido: {orden}")

    return FlagCoefficients(valores, grid.bandlimit)


def flag_inverse(coeffs: FlagCoefficients, grid: BallGrid) -> NDArray[np.complex128]:
    """Evalúa la expansión truncada en todos los nodos de la grilla."""
    if coeffs.values.shape != grid.bandlimit.coefficient_shape:
        raise ValueError("Los coeficientes no coinciden con la grilla.")

    por_capa = np.tensordot(grid.basis.node_table, coeffs.values, axes=(0, 0))
    return sht_inverse(por_capa, grid.sampling)


def flag_eval(coeffs: FlagCoefficients, points: ArrayLike) -> NDArray[np.complex128]:
    """
    Suma directa de la expansión en puntos (r, θ, φ) arbitrarios.

    Args:
        coeffs (FlagCoefficients): Coeficientes a evaluar.
        points (ArrayLike): Arreglo (n, 3) de coordenadas esféricas.

    Returns:
        NDArray: n valores complejos.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 3:
        raise ValueError("Los puntos deben tener forma (n, 3).")

    b = coeffs.bandlimit
    basis = RadialBasis(b.P, b.tau)
    m = np.arange(-(b.L - 1), b.L)
    resultado = np.empty(points.shape[0], dtype=complex)

    for inicio in range(0, points.shape[0], _BLOQUE_EVALUACION):
        bloque = points[inicio:inicio + _BLOQUE_EVALUACION]
        radial = basis.evaluate(bloque[:, 0])
        angular = legendre_table(b.L, np.cos(bloque[:, 1]))
        fases = np.exp(1j * m[:, None] * bloque[None, :, 2])
        por_lm = np.einsum("plc,pn->lcn", coeffs.values, radial, optimize=True)
        resultado[inicio:inicio + bloque.shape[0]] = np.einsum(
            "lcn,lcn,cn->n", por_lm, angular, fases, optimize=True
        )

    return resultado


def ball_convolve(f: FlagCoefficients, h_ell0p: ArrayLike) -> FlagCoefficients:
    """
    Convolución con un núcleo axisimétrico:
    (f ⋆ h)_ℓmp = sqrt(4π/(2ℓ+1)) f_ℓmp conj(h_ℓ0p).

    Args:
        f (FlagCoefficients): Señal.
        h_ell0p (ArrayLike): Núcleo (L, P).
    """
    b = f.bandlimit
    h_ell0p = np.asarray(h_ell0p, dtype=complex)
    if h_ell0p.shape != (b.L, b.P):
        raise ValueError(f"El núcleo debe tener forma ({b.L}, {b.P}).")

    ell = np.arange(b.L)
    factor = np.sqrt(4.0 * np.pi / (2.0 * ell + 1.0))[:, None] * np.conj(h_ell0p)
    return FlagCoefficients(f.values * factor.T[:, :, None], b)


def sample_count(bandlimit: BandLimit, scheme: str = "gauss") -> int:
    """
    Cantidad total de nodos sobre la bola.

    Args:
        scheme (str): "gauss" para el esquema por defecto (P·L·(2L-1)),
            "mw" para el esquema equiangular de referencia
            (P[(2L-1)(L-1)+1]).
    """
    L, P = bandlimit.L, bandlimit.P
    if scheme == "gauss":
        return P * L * (2 * L - 1)
    if scheme == "mw":
        return P * ((2 * L - 1) * (L - 1) + 1)
    raise ValueError(f"Esquema de muestreo desconocido: {scheme}")
