"""Detección de vacíos en catálogos de galaxias con flaglets.

Flujo: catálogo → celdas de la grilla de la bola → sobredensidad δ →
coeficientes de Fourier-Laguerre → mapas de wavelet por escala → mínimos
locales significativos → fusión jerárquica de candidatos.
"""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.ndimage import minimum_filter
from scipy.stats import median_abs_deviation

from .flag_transform import BallGrid, flag_forward
from .flaglet_transform import flaglet_analysis, flaglet_peak_width, wavelet_maps
from .tiling import HarmonicWindows, WaveletFamily, build_windows

logger = logging.getLogger(__name__)

Escala = Tuple[int, int]


# ==========================================================
# Modelos
# ==========================================================

class VoidSpec(BaseModel):
    """Vacío plantado en un catálogo simulado.

    Attributes:
        center (Tuple[float, float, float]): Centro (r, θ, φ).

        radius (float): Radio de la esfera.

        depth (float): Reducción relativa de la intensidad, en (0, 1].
    """

    model_config = ConfigDict(frozen=True)

    center: Tuple[float, float, float]

    radius: float = Field(gt=0, description="Radio del vacío")

    depth: float = Field(gt=0, le=1, description="Profundidad del vacío")


class VoidCandidate(BaseModel):
    """Candidato a vacío.

    Attributes:
        center (Tuple[float, float, float]): Nodo (r, θ, φ) del mínimo.

        scale_pair (Tuple[int, int]): Escala (j, j') donde se detectó.

        response (float): Valor del mapa de wavelet (negativo).

        effective_radius (float): Radio asociado a la escala.

        significance (float): Respuesta en unidades de la dispersión robusta
            del mapa de su escala.

        children (List[VoidCandidate]): Subvacíos absorbidos en la fusión.
    """

    center: Tuple[float, float, float]

    scale_pair: Tuple[int, int]

    response: float = Field(lt=0)

    effective_radius: float = Field(gt=0)

    significance: float

    children: List["VoidCandidate"] = Field(default_factory=list)


VoidCandidate.model_rebuild()


# ==========================================================
# Catálogo y campo de densidad
# ==========================================================

class Catalog:
    """
    Posiciones (r, θ, φ) de galaxias de un relevamiento de radio R.

    Se aceptan puntos con r > R; ``voxelize`` los descarta y los cuenta.

    Attributes:
        points (np.ndarray): Forma (n, 3).
        weights (Optional[np.ndarray]): Pesos positivos por punto.
        R (float): Radio del relevamiento.
    """

    def __init__(self, points: ArrayLike, R: float, weights: Optional[ArrayLike] = None) -> None:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if not R > 0:
            raise ValueError("El radio del relevamiento debe ser positivo.")
        r, theta, phi = points.T
        if np.any(r < 0):
            raise ValueError("Los radios deben ser no negativos.")
        if np.any(theta < 0) or np.any(theta > np.pi):
            raise ValueError("Las colatitudes deben estar en [0, π].")
        if np.any(phi < 0) or np.any(phi >= 2.0 * np.pi):
            raise ValueError("Las longitudes deben estar en [0, 2π).")

        if weights is not None:
            weights = np.asarray(weights, dtype=float).ravel()
            if weights.shape != (points.shape[0],):
                raise ValueError("Debe haber un peso por punto.")
            if np.any(weights <= 0):
                raise ValueError("Los pesos deben ser positivos.")

        self.points = points
        self.weights = weights
        self.R = float(R)

    def __len__(self) -> int:
        return self.points.shape[0]

    def cartesian(self) -> NDArray[np.float64]:
        return _a_cartesianas(self.points)


class DensityField:
    """
    Sobredensidad δ = n / n̄ - 1 muestreada en la grilla.

    Attributes:
        samples (np.ndarray): δ por celda, forma de la grilla.
        grid (BallGrid): Grilla asociada.
        counts (np.ndarray): Conteo (ponderado) por celda.
        volumes (np.ndarray): Volumen geométrico de cada celda.
        mean_density (float): n̄.
        no_data (bool): True cuando n̄ = 0 (δ se define como 0).
        dropped (int): Puntos descartados por quedar fuera de [0, R].
    """

    def __init__(
        self,
        samples: NDArray[np.float64],
        grid: BallGrid,
        counts: NDArray[np.float64],
        volumes: NDArray[np.float64],
        mean_density: float,
        no_data: bool = False,
        dropped: int = 0,
    ) -> None:
        if samples.shape != grid.shape:
            raise ValueError("El campo no coincide con la grilla.")
        self.samples = samples
        self.grid = grid
        self.counts = counts
        self.volumes = volumes
        self.mean_density = mean_density
        self.no_data = no_data
        self.dropped = dropped

    def expected_counts(self) -> NDArray[np.float64]:
        return self.mean_density * self.volumes

    def mean(self) -> float:
        """Media de δ ponderada por volumen."""
        total = np.sum(self.volumes)
        return float(np.sum(self.volumes * self.samples) / total) if total > 0 else 0.0


def _a_cartesianas(puntos: NDArray[np.float64]) -> NDArray[np.float64]:
    r, theta, phi = np.asarray(puntos, dtype=float).reshape(-1, 3).T
    return np.column_stack(
        (r * np.sin(theta) * np.cos(phi), r * np.sin(theta) * np.sin(phi), r * np.cos(theta))
    )


# ==========================================================
# Catálogos simulados
# ==========================================================

def make_mock(
    n_galaxies: int,
    voids: Sequence[VoidSpec],
    R: float,
    seed: int,
) -> Catalog:
    """
    Catálogo uniforme en la bola con la intensidad reducida por (1 - depth)
    dentro de cada vacío.

    Args:
        n_galaxies (int): Puntos candidatos antes del raleo.
        voids (Sequence[VoidSpec]): Vacíos plantados (pueden superponerse).
        R (float): Radio de la bola.
        seed (int): Semilla del generador.

    Raises:
        ValueError: Si algún vacío no cabe en la bola.
    """
    if int(n_galaxies) != n_galaxies or n_galaxies < 1:
        raise ValueError("n_galaxies debe ser un entero positivo.")
    if not R > 0:
        raise ValueError("R debe ser positivo.")
    for vacio in voids:
        if vacio.center[0] + vacio.radius > R or vacio.center[0] < 0:
            raise ValueError(f"El vacío {vacio} no está contenido en la bola de radio {R}.")

    rng = np.random.default_rng(seed)
    n = int(n_galaxies)
    r = R * np.cbrt(rng.random(n))
    theta = np.arccos(rng.uniform(-1.0, 1.0, n))
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    sorteo = rng.random(n)

    puntos = np.column_stack((r, theta, phi))
    supervivencia = np.ones(n)
    cartesianas = _a_cartesianas(puntos)
    for vacio in voids:
        centro = _a_cartesianas(np.array(vacio.center))[0]
        dentro = np.linalg.norm(cartesianas - centro, axis=1) < vacio.radius
        supervivencia[dentro] *= 1.0 - vacio.depth

    conservar = sorteo < supervivencia
    logger.debug("Catálogo simulado: %d de %d puntos conservados", conservar.sum(), n)
    return Catalog(puntos[conservar], R)


# ==========================================================
# Voxelización
# ==========================================================

def _bordes(nodos: NDArray[np.float64], inferior: float, superior: float) -> NDArray[np.float64]:
    return np.concatenate(([inferior], 0.5 * (nodos[1:] + nodos[:-1]), [superior]))


def _celdas(grid: BallGrid, R: float) -> Tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Bordes radiales y polares de las celdas de nodo más cercano."""
    bordes_r = np.clip(_bordes(grid.radial.nodes, 0.0, np.inf), 0.0, R)
    bordes_t = _bordes(grid.sampling.thetas, 0.0, np.pi)
    n_phi = grid.sampling.n_phi
    paso = 2.0 * np.pi / n_phi

    volumen_r = (bordes_r[1:] ** 3 - bordes_r[:-1] ** 3) / 3.0
    area_t = np.cos(bordes_t[:-1]) - np.cos(bordes_t[1:])
    volumenes = volumen_r[:, None, None] * area_t[None, :, None] * np.full(n_phi, paso)[None, None, :]
    return bordes_r, bordes_t, volumenes


def voxelize(catalog: Catalog, grid: BallGrid) -> DensityField:
    """
    Cuenta puntos por celda de nodo más cercano y convierte a δ.

    Las celdas son productos de intervalos entre puntos medios de nodos
    consecutivos en r, θ y φ (este último periódico), recortadas a [0, R]
    con R el menor entre el nodo radial más externo y el radio del
    catálogo; su volumen es exacto. n̄ = N / V_total.
    Los puntos más allá de R se descartan y se informa cuántos.
    """
    R = min(float(grid.radial.nodes[-1]), catalog.R)
    puntos = catalog.points
    fuera = puntos[:, 0] > R * (1.0 + 1e-12)
    descartados = int(np.sum(fuera))
    if descartados:
        logger.warning("Se descartaron %d puntos fuera de [0, R].", descartados)
    pesos = np.ones(len(catalog)) if catalog.weights is None else catalog.weights
    puntos, pesos = puntos[~fuera], pesos[~fuera]

    bordes_r, bordes_t, volumenes = _celdas(grid, R)
    P, L, n_phi = grid.shape
    i_r = np.clip(np.searchsorted(bordes_r, puntos[:, 0], side="right") - 1, 0, P - 1)
    i_t = np.clip(np.searchsorted(bordes_t, puntos[:, 1], side="right") - 1, 0, L - 1)
    i_p = np.rint(puntos[:, 2] / (2.0 * np.pi / n_phi)).astype(int) % n_phi

    conteos = np.zeros(grid.shape)
    np.add.at(conteos, (i_r, i_t, i_p), pesos)

    volumen_total = float(np.sum(volumenes))
    media = float(np.sum(pesos)) / volumen_total
    if media == 0.0:
        logger.warning("Catálogo vacío: δ se define como 0 en toda la grilla.")
        return DensityField(np.zeros(grid.shape), grid, conteos, volumenes, 0.0, True, descartados)

    delta = np.zeros(grid.shape)
    con_volumen = volumenes > 0
    delta[con_volumen] = conteos[con_volumen] / (media * volumenes[con_volumen]) - 1.0
    return DensityField(delta, grid, conteos, volumenes, media, False, descartados)


# ==========================================================
# Búsqueda de vacíos
# ==========================================================

def _distancia(a: Tuple[float, float, float], b: Tuple[float, float, float]) -> float:
    ca, cb = _a_cartesianas(np.array([a, b]))
    return float(np.linalg.norm(ca - cb))


def _minimos_significativos(
    mapa: NDArray[np.float64],
    valido: NDArray[np.bool_],
    umbral: float,
) -> Tuple[NDArray[np.intp], NDArray[np.float64], float]:
    """
    Mínimos locales del mapa por debajo de -umbral × σ.

    σ es la dispersión robusta (MAD × 1.4826) del mapa completo de la escala,
    medida solo en los nodos válidos.
    """
    sigma = float(median_abs_deviation(mapa[valido], scale="normal")) if np.any(valido) else 0.0
    if not sigma > 0:
        return np.empty((0, mapa.ndim), dtype=np.intp), np.zeros_like(mapa), 0.0

    minimo_local = mapa == minimum_filter(mapa, size=3, mode=("nearest", "nearest", "wrap"))
    significancia = mapa / sigma
    seleccion = minimo_local & valido & (significancia < -umbral) & (mapa < 0)
    return np.argwhere(seleccion), significancia, sigma


def _fusionar(candidatos: List[VoidCandidate]) -> List[VoidCandidate]:
    """Enlace simple por contención de centros; gana la respuesta más negativa."""
    aceptados: List[VoidCandidate] = []
    for candidato in sorted(candidatos, key=lambda c: c.response):
        padre = next(
            (
                a for a in aceptados
                if _distancia(a.center, candidato.center) <= a.effective_radius
            ),
            None,
        )
        if padre is None:
            aceptados.append(candidato)
        else:
            padre.children.append(candidato)
    return aceptados


def find_voids(
    field: DensityField,
    family: WaveletFamily,
    threshold_sigma: float,
    windows: Optional[HarmonicWindows] = None,
    min_expected_count: float = 20.0,
    max_workers: int = 1,
) -> List[VoidCandidate]:
    """
    Candidatos a vacío a partir de respuestas negativas de los flaglets.

    Args:
        field (DensityField): Sobredensidad en la grilla.
        family (WaveletFamily): Parámetros del teselado.
        threshold_sigma (float): Umbral en unidades de la dispersión robusta
            (MAD × 1.4826) del mapa de cada escala (j, j').
        windows (Optional[HarmonicWindows]): Ventanas ya construidas.
        min_expected_count (float): Celdas con menos galaxias esperadas no
            se consideran como centros ni entran en la dispersión.
        max_workers (int): Hilos para los mapas por escala.

    Returns:
        List[VoidCandidate]: Ordenados por respuesta (más negativa primero).

    Raises:
        ValueError: Si el umbral no es positivo o la familia no coincide.
    """
    if not threshold_sigma > 0:
        raise ValueError("threshold_sigma debe ser positivo.")
    b, fb = field.grid.bandlimit, family.bandlimit
    if (b.L, b.P) != (fb.L, fb.P):
        raise ValueError("La familia no corresponde al límite de banda del campo.")
    if field.no_data or not np.any(field.samples):
        return []

    ventanas = windows if windows is not None else build_windows(family)
    coeficientes = flag_forward(field.samples, field.grid)
    mapas = wavelet_maps(flaglet_analysis(coeficientes, ventanas), field.grid, max_workers)
    valido = field.expected_counts() >= min_expected_count
    r, theta, phi = field.grid.nodes()

    radios: Dict[Escala, float] = {}
    candidatos: List[VoidCandidate] = []
    for escala, mapa in mapas.items():
        indices, significancia, sigma = _minimos_significativos(mapa, valido, threshold_sigma)
        logger.debug(
            "Escala %s: σ = %.3g, %d mínimos significativos", escala, sigma, len(indices)
        )
        if len(indices) == 0:
            continue
        if escala not in radios:
            radios[escala] = flaglet_peak_width(ventanas, *escala)[2]
        for i, j, k in indices:
            candidatos.append(
                VoidCandidate(
                    center=(float(r[i, j, k]), float(theta[i, j, k]), float(phi[i, j, k])),
                    scale_pair=escala,
                    response=float(mapa[i, j, k]),
                    effective_radius=radios[escala],
                    significance=float(significancia[i, j, k]),
                )
            )

    return _fusionar(candidatos)


# ==========================================================
# Cortes para inspección visual
# ==========================================================

def render_slice(
    samples: ArrayLike,
    grid: BallGrid,
    shell: Optional[int] = None,
    meridian: Optional[float] = None,
) -> NDArray[np.float64]:
    """
    Corte 2D de un campo real en la grilla.

    Args:
        shell (Optional[int]): Índice de capa radial (imagen θ × φ).
        meridian (Optional[float]): Longitud φ del plano meridiano; la imagen
            tiene filas θ y columnas r, con el semiplano opuesto a la izquierda.
    """
    samples = np.real(np.asarray(samples))
    if samples.shape != grid.shape:
        raise ValueError("El campo no coincide con la grilla.")
    if (shell is None) == (meridian is None):
        raise ValueError("Indicar exactamente uno de shell o meridian.")

    if shell is not None:
        if not 0 <= shell < grid.shape[0]:
            raise ValueError(f"Capa fuera de rango: {shell}.")
        return samples[shell]

    phis = grid.sampling.phis
    distancia = np.angle(np.exp(1j * (phis - meridian)))
    k = int(np.argmin(np.abs(distancia)))
    k_opuesto = int(np.argmin(np.abs(np.angle(np.exp(1j * (phis - meridian - np.pi))))))
    derecha = samples[:, :, k].T
    izquierda = samples[::-1, :, k_opuesto].T
    return np.concatenate((izquierda, derecha), axis=1)
