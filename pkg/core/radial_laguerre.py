"""Base esférica de Laguerre sobre la semirrecta radial.

Incluye la evaluación estable de las funciones K_p, la cuadratura de Gauss
con peso r² sobre [0, ∞), las transformadas radiales exactas y los
operadores de traslación y delta de Dirac en el espacio de coeficientes.

Uso típico:

    base = RadialBasis(P=16, tau=0.05)
    valores = radial_synthesis(coeficientes, base.quadrature.nodes, base)
    recuperados = radial_analysis(valores, base)
"""

from __future__ import annotations

import logging
from functools import cached_property, lru_cache
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import bisect

from .errores import ErrorNumerico

logger = logging.getLogger(__name__)

TOLERANCIA_NODOS = 1e-14
MAX_ITERACIONES_NEWTON = 100
_REESCALA = 1e150


# ==========================================================
# Recurrencias
# ==========================================================

def _tabla_normalizada(P: int, x: ArrayLike) -> NDArray[np.float64]:
    """
    Evalúa e^{-x/2} L^{(2)}_p(x) / sqrt((p+1)(p+2)) para p < P.

    La recurrencia de tres términos se aplica directamente sobre las
    funciones normalizadas, sembrada con e^{-x/2}/sqrt(2), de modo que
    nunca se forman polinomios ni factoriales grandes.

    Args:
        P (int): Cantidad de funciones.
        x (ArrayLike): Abscisas adimensionales (r / tau).

    Returns:
        NDArray: Tabla de forma (P, n).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    tabla = np.empty((P, x.size))
    amortiguacion = np.exp(-0.5 * x)
    tabla[0] = amortiguacion / np.sqrt(2.0)
    if P > 1:
        tabla[1] = (3.0 - x) * amortiguacion / np.sqrt(6.0)

    for n in range(1, P - 1):
        h_ant = np.sqrt(n * (n + 1.0))
        h = np.sqrt((n + 1.0) * (n + 2.0))
        h_sig = np.sqrt((n + 2.0) * (n + 3.0))
        tabla[n + 1] = (
            (2.0 * n + 3.0 - x) * h * tabla[n] - (n + 2.0) * h_ant * tabla[n - 1]
        ) / ((n + 1.0) * h_sig)

    return tabla


def _laguerre_escalado(
    P: int, x: NDArray[np.float64]
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Devuelve (L_P, L_{P-1}) de orden 2 multiplicados por un mismo factor
    positivo por abscisa. Alcanza para el signo y para el cociente de Newton.
    """
    anterior = np.zeros_like(x)
    actual = np.ones_like(x)
    for n in range(P):
        siguiente = ((2.0 * n + 3.0 - x) * actual - (n + 2.0) * anterior) / (n + 1.0)
        anterior, actual = actual, siguiente
        grande = np.abs(actual) > _REESCALA
        if np.any(grande):
            actual[grande] /= _REESCALA
            anterior[grande] /= _REESCALA
    return actual, anterior


# ==========================================================
# Nodos y pesos
# ==========================================================

def _estimaciones_iniciales(P: int) -> NDArray[np.float64]:
    """Autovalores de la matriz de Jacobi de Laguerre generalizado (alfa = 2)."""
    if P == 1:
        return np.array([3.0])
    n = np.arange(P, dtype=float)
    diagonal = 2.0 * n + 3.0
    subdiagonal = np.sqrt(n[1:] * (n[1:] + 2.0))
    return np.sort(eigh_tridiagonal(diagonal, subdiagonal, eigvals_only=True))


def _pulir_newton(P: int, x: NDArray[np.float64]) -> Tuple[NDArray[np.float64], bool]:
    x = x.copy()
    for _ in range(MAX_ITERACIONES_NEWTON):
        lp, lp_ant = _laguerre_escalado(P, x)
        # x L_P' = P L_P - (P + 2) L_{P-1}
        paso = x * lp / (P * lp - (P + 2.0) * lp_ant)
        x = x - paso
        if not np.all(np.isfinite(x)):
            return x, False
        if np.all(np.abs(paso) <= TOLERANCIA_NODOS * np.abs(x)):
            return x, True
    return x, False


def _nodos_validos(x: NDArray[np.float64]) -> bool:
    return bool(np.all(np.isfinite(x)) and np.all(x > 0) and np.all(np.diff(x) > 0))


def _nodos_por_biseccion(P: int, estimaciones: NDArray[np.float64]) -> NDArray[np.float64]:
    """Bisección sobre intervalos delimitados por los puntos medios de las estimaciones."""

    def signo(valor: float) -> float:
        return float(_laguerre_escalado(P, np.array([valor]))[0][0])

    bordes = np.concatenate(
        ([0.0], 0.5 * (estimaciones[1:] + estimaciones[:-1]), [4.0 * P + 10.0])
    )
    nodos = np.empty(P)
    for i in range(P):
        a, b = bordes[i], bordes[i + 1]
        if signo(a) * signo(b) > 0:
            raise ErrorNumerico(
                f"No se pudo acotar la raíz {i} de L^(2)_{P} en [{a}, {b}]."
            )
        nodos[i] = bisect(signo, a, b, xtol=1e-300, rtol=1e-15, maxiter=2000)
    return nodos


@lru_cache(maxsize=None)
def _regla_unitaria(P: int) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodos y pesos (ya con la medida r² dr absorbida) para tau = 1."""
    estimaciones = _estimaciones_iniciales(P)
    nodos, convergio = _pulir_newton(P, estimaciones)

    if not (convergio and _nodos_validos(nodos)):
        logger.warning("Newton no convergió para P=%d; se usa bisección.", P)
        nodos = _nodos_por_biseccion(P, estimaciones)
        if not _nodos_validos(nodos):
            raise ErrorNumerico(
                f"La búsqueda de nodos no alcanzó la tolerancia relativa "
                f"{TOLERANCIA_NODOS} para P={P}."
            )

    # Christoffel: w_i = 1 / sum_p K_p(x_i)^2
    tabla = _tabla_normalizada(P, nodos)
    pesos = 1.0 / np.sum(tabla * tabla, axis=0)
    logger.debug("Cuadratura radial P=%d: nodo máximo %.6g", P, nodos[-1])

    nodos.setflags(write=False)
    pesos.setflags(write=False)
    return nodos, pesos


# ==========================================================
# Tipos
# ==========================================================

class RadialQuadrature:
    """
    Regla de Gauss sobre [0, ∞) con medida r² dr.

    Integra exactamente q(r/tau) e^{-r/tau} r² para q polinomio de grado
    menor o igual a 2P - 1.
    """

    def __init__(self, nodes: ArrayLike, weights: ArrayLike, tau: float) -> None:
        nodes = np.array(nodes, dtype=float)
        weights = np.array(weights, dtype=float)

        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("Nodos y pesos deben ser vectores de igual longitud.")
        if not _nodos_validos(nodes):
            raise ValueError("Los nodos deben ser positivos y estrictamente crecientes.")
        if np.any(weights <= 0):
            raise ValueError("Los pesos deben ser positivos.")

        nodes.setflags(write=False)
        weights.setflags(write=False)
        self.nodes = nodes
        self.weights = weights
        self.tau = float(tau)

    @property
    def P(self) -> int:
        return self.nodes.size

    def integrate(self, valores: ArrayLike) -> np.ndarray:
        """Suma de cuadratura sobre el primer eje de ``valores``."""
        valores = np.asarray(valores)
        return np.tensordot(self.weights, valores, axes=(0, 0))

    def __repr__(self) -> str:
        return f"RadialQuadrature(P={self.P}, tau={self.tau:g})"


class RadialBasis:
    """
    Funciones K_p, p < P, con factor de escala radial tau.
    """

    def __init__(self, P: int, tau: float) -> None:
        if int(P) != P or P < 1:
            raise ValueError("P debe ser un entero mayor o igual a 1.")
        if not tau > 0:
            raise ValueError("tau debe ser positivo.")

        self.P: int = int(P)
        self.tau: float = float(tau)

    def evaluate(self, r: ArrayLike) -> NDArray[np.float64]:
        """Tabla K_p(r) de forma (P, n)."""
        return laguerre_basis_table(self.P, r, self.tau)

    @cached_property
    def quadrature(self) -> RadialQuadrature:
        return radial_quadrature(self.P, self.tau)

    @cached_property
    def node_table(self) -> NDArray[np.float64]:
        """K_p(r_i) en los nodos de la cuadratura, forma (P, P)."""
        tabla = self.evaluate(self.quadrature.nodes)
        tabla.setflags(write=False)
        return tabla

    def __eq__(self, otro: object) -> bool:
        if not isinstance(otro, RadialBasis):
            return NotImplemented
        return self.P == otro.P and self.tau == otro.tau

    def __hash__(self) -> int:
        return hash((self.P, self.tau))

    def __repr__(self) -> str:
        return f"RadialBasis(P={self.P}, tau={self.tau:g})"


# ==========================================================
# Operaciones
# ==========================================================

def laguerre_basis_table(P: int, r: ArrayLike, tau: float) -> NDArray[np.float64]:
    """
    Evalúa K_0 … K_{P-1} en todos los radios pedidos.

    Args:
        P (int): Límite de banda radial.
        r (ArrayLike): Radios (no negativos).
        tau (float): Factor de escala radial.

    Returns:
        NDArray: Tabla de forma (P, n).
    """
    if not tau > 0:
        raise ValueError("tau debe ser positivo.")
    r = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
    if np.any(r < 0):
        raise ValueError("Los radios deben ser no negativos.")
    return _tabla_normalizada(P, r / tau) / tau**1.5


def laguerre_basis_eval(p: int, r: float, tau: float) -> float:
    """
    Evalúa K_p(r) = sqrt(p!/(p+2)!) e^{-r/2tau} tau^{-3/2} L^{(2)}_p(r/tau).

    Args:
        p (int): Índice radial (p >= 0).
        r (float): Radio (r >= 0).
        tau (float): Factor de escala radial.

    Returns:
        float: Valor de la función base.
    """
    if int(p) != p or p < 0:
        raise ValueError("p debe ser un entero no negativo.")
    return float(laguerre_basis_table(int(p) + 1, [r], tau)[int(p), 0])


def radial_quadrature(P: int, tau: float) -> RadialQuadrature:
    """
    Construye la cuadratura radial con P nodos.

    Los nodos son las raíces de L^{(2)}_P(r/tau); los pesos absorben la
    medida r² dr, de modo que sum_i w_i g(r_i) = ∫ g(r) r² dr.

    Raises:
        ValueError: Si P < 1 o tau <= 0.
        ErrorNumerico: Si los nodos no convergen.
    """
    if int(P) != P or P < 1:
        raise ValueError("P debe ser un entero mayor o igual a 1.")
    if not tau > 0:
        raise ValueError("tau debe ser positivo.")

    nodos, pesos = _regla_unitaria(int(P))
    return RadialQuadrature(nodos * tau, pesos * tau**3, tau)


def tau_for_radius(R: float, P: int) -> float:
    """Factor tau que coloca el nodo radial más externo exactamente en R."""
    if not R > 0:
        raise ValueError("R debe ser positivo.")
    nodos, _ = _regla_unitaria(int(P))
    return float(R / nodos[-1])


def radial_analysis(samples: ArrayLike, basis: RadialBasis) -> np.ndarray:
    """
    Coeficientes f_p = sum_i w_i f(r_i) K_p(r_i).

    ``samples`` tiene los nodos sobre el primer eje; los ejes restantes se
    transforman en bloque.

    Raises:
        ValueError: Si la cantidad de muestras no coincide con P.
    """
    samples = np.asarray(samples)
    if samples.ndim == 0 or samples.shape[0] != basis.P:
        raise ValueError(
            f"Se esperaban {basis.P} muestras radiales, "
            f"se recibieron {samples.shape[0] if samples.ndim else 0}."
        )

    matriz = basis.node_table * basis.quadrature.weights[None, :]
    plano = samples.reshape(basis.P, -1)
    return (matriz @ plano).reshape(samples.shape)


def radial_synthesis(coeffs: ArrayLike, radii: ArrayLike, basis: RadialBasis) -> np.ndarray:
    """
    Evalúa f(r) = sum_p f_p K_p(r) en los radios pedidos.

    Returns:
        np.ndarray: Forma (n_radios, *coeffs.shape[1:]).
    """
    coeffs = np.asarray(coeffs)
    if coeffs.ndim == 0 or coeffs.shape[0] != basis.P:
        raise ValueError(f"Se esperaban {basis.P} coeficientes radiales.")

    tabla = basis.evaluate(radii)
    plano = coeffs.reshape(basis.P, -1)
    return (tabla.T @ plano).reshape((tabla.shape[1],) + coeffs.shape[1:])


def radial_dirac(s: float, basis: RadialBasis) -> NDArray[np.float64]:
    """Delta de Dirac de banda limitada centrada en s: coeficientes K_p(s)."""
    if s < 0:
        raise ValueError("s debe ser no negativo.")
    return basis.evaluate([s])[:, 0]


def radial_translate(coeffs: ArrayLike, s: float, basis: RadialBasis) -> np.ndarray:
    """Traslación radial: (T_s f)_p = K_p(s) f_p."""
    coeffs = np.asarray(coeffs)
    if coeffs.ndim == 0 or coeffs.shape[0] != basis.P:
        raise ValueError(f"Se esperaban {basis.P} coeficientes radiales.")
    factor = radial_dirac(s, basis).reshape((basis.P,) + (1,) * (coeffs.ndim - 1))
    return coeffs * factor


def radial_convolve(f: ArrayLike, h: ArrayLike) -> np.ndarray:
    """
    Convolución sobre la semirrecta: (f ⋆ h)_p = f_p h_p.

    Con h = radial_dirac(s) coincide con la traslación radial por s.
    """
    f = np.asarray(f)
    h = np.asarray(h)
    if h.ndim != 1 or f.ndim == 0 or f.shape[0] != h.shape[0]:
        raise ValueError("f y h deben tener la misma cantidad de coeficientes radiales.")
    return f * h.reshape((h.shape[0],) + (1,) * (f.ndim - 1))
