"""Tests del buscador de vacíos.

Los catálogos simulados usan semillas fijas, así que los resultados son
reproducibles.

    como ejecutar los tests

        pytest test/test_voidfinder.py -v
"""

import logging

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import median_abs_deviation

from core.flag_transform import BandLimit, build_grid, flag_forward
from core.flaglet_transform import flaglet_analysis, flaglet_peak_width, wavelet_maps
from core.tiling import WaveletFamily, build_windows
from core.voidfinder import (
    Catalog,
    DensityField,
    VoidCandidate,
    VoidSpec,
    _fusionar,
    _minimos_significativos,
    find_voids,
    make_mock,
    render_slice,
    voxelize,
)


@pytest.fixture(scope="module")
def grid16():
    return build_grid(BandLimit.from_radius(16, 16, 1.0))


@pytest.fixture(scope="module")
def familia16(grid16):
    return WaveletFamily(lam=2.0, nu=2.0, J0=1, J0p=2, bandlimit=grid16.bandlimit)


def _nodo_cercano(grid, r, theta, phi):
    """Índices y coordenadas del nodo de la grilla más cercano a (r, θ, φ)."""
    i = int(np.argmin(np.abs(grid.radial.nodes - r)))
    j = int(np.argmin(np.abs(grid.sampling.thetas - theta)))
    k = int(np.argmin(np.abs(grid.sampling.phis - phi)))
    centro = (
        float(grid.radial.nodes[i]),
        float(grid.sampling.thetas[j]),
        float(grid.sampling.phis[k]),
    )
    return (i, j, k), centro


def _distancia(a, b):
    def cartesianas(p):
        r, theta, phi = p
        return np.array(
            [r * np.sin(theta) * np.cos(phi), r * np.sin(theta) * np.sin(phi), r * np.cos(theta)]
        )

    return float(np.linalg.norm(cartesianas(a) - cartesianas(b)))

# ##################
# Catálogos
# ##################

def test_catalogo_simulado_reproducible():
    """La misma semilla produce exactamente el mismo catálogo."""

    a = make_mock(1000, [], 1.0, seed=5)

    b = make_mock(1000, [], 1.0, seed=5)

    np.testing.assert_array_equal(a.points, b.points)

    assert len(a) == 1000

    assert np.all(a.points[:, 0] < 1.0)

def test_vacio_de_profundidad_uno_queda_vacio():
    """Con depth = 1 no sobrevive ningún punto dentro de la esfera."""

    vacio = VoidSpec(center=(0.5, np.pi / 2, 1.0), radius=0.2, depth=1.0)

    catalogo = make_mock(20000, [vacio], 1.0, seed=1)

    distancias = [_distancia(p, vacio.center) for p in catalogo.points]

    assert min(distancias) >= 0.2

    assert len(catalogo) < 20000

def test_vacio_fuera_de_la_bola():
    """Un vacío que sobresale de la bola se rechaza."""

    with pytest.raises(ValueError):
        make_mock(100, [VoidSpec(center=(0.9, 1.0, 1.0), radius=0.2, depth=1.0)], 1.0, seed=0)

    with pytest.raises(ValidationError):
        VoidSpec(center=(0.5, 1.0, 1.0), radius=0.1, depth=0.0)

def test_catalogo_valida_coordenadas():
    """Colatitudes, longitudes y pesos fuera de rango se rechazan."""

    with pytest.raises(ValueError):
        Catalog([[0.5, 3.5, 1.0]], R=1.0)

    with pytest.raises(ValueError):
        Catalog([[0.5, 1.0, 2.0 * np.pi]], R=1.0)

    with pytest.raises(ValueError):
        Catalog([[0.5, 1.0, 1.0]], R=1.0, weights=[-1.0])

    with pytest.raises(ValueError):
        Catalog([[0.5, 1.0, 1.0]], R=1.0, weights=[1.0, 2.0])

    with pytest.raises(ValueError):
        Catalog([[0.5, 1.0, 1.0]], R=0.0)

# ##################
# Voxelización
# ##################

def test_conservacion_de_conteos(grid16):
    """La suma de los conteos es el total y δ tiene media cero."""

    catalogo = make_mock(50000, [], 1.0, seed=2)

    campo = voxelize(catalogo, grid16)

    assert campo.counts.sum() == pytest.approx(len(catalogo))

    assert campo.volumes.sum() == pytest.approx(4.0 * np.pi / 3.0, rel=1e-12)

    assert abs(campo.mean()) < 1e-10

    assert campo.dropped == 0

def test_conteos_siguen_poisson():
    """χ²/gl de los conteos por celda es cercano a 1 para un catálogo uniforme."""

    grid = build_grid(BandLimit.from_radius(8, 8, 1.0))

    campo = voxelize(make_mock(200000, [], 1.0, seed=3), grid)

    esperado = campo.expected_counts()

    seleccion = esperado >= 20

    chi2 = np.sum((campo.counts[seleccion] - esperado[seleccion]) ** 2 / esperado[seleccion])

    assert 0.8 < chi2 / np.count_nonzero(seleccion) < 1.2

def test_un_punto_ocupa_una_celda(grid16):
    """Un único punto suma 1 en una sola celda."""

    campo = voxelize(Catalog([[0.5, 1.0, 2.0]], R=1.0), grid16)

    assert np.count_nonzero(campo.counts) == 1

    assert campo.counts.sum() == 1.0

def test_pesos_en_los_conteos(grid16):
    """Los conteos acumulan los pesos de cada punto."""

    catalogo = Catalog([[0.5, 1.0, 2.0], [0.5, 1.0, 2.0], [0.2, 2.0, 4.0]], R=1.0, weights=[0.5, 1.5, 2.0])

    campo = voxelize(catalogo, grid16)

    assert campo.counts.max() == pytest.approx(2.0)

    assert campo.counts.sum() == pytest.approx(4.0)

def test_catalogo_vacio_sin_datos(grid16, familia16):
    """Sin puntos el campo es nulo, se marca sin datos y no hay candidatos."""

    campo = voxelize(Catalog(np.zeros((0, 3)), R=1.0), grid16)

    assert campo.no_data

    assert not np.any(campo.samples)

    assert find_voids(campo, familia16, threshold_sigma=5.0) == []

def test_descarta_puntos_fuera_del_radio(grid16, caplog):
    """Los puntos con r > R se descartan y se informa la cantidad."""

    catalogo = Catalog([[0.5, 1.0, 1.0], [1.5, 1.0, 1.0]], R=2.0)

    with caplog.at_level(logging.WARNING):
        campo = voxelize(catalogo, grid16)

    assert campo.dropped == 1

    assert campo.counts.sum() == 1.0

    assert "descartaron 1" in caplog.text

# ##################
# Búsqueda
# ##################

def test_campo_nulo_sin_candidatos(grid16, familia16):
    """Un campo idénticamente cero no produce candidatos."""

    campo = DensityField(
        np.zeros(grid16.shape),
        grid16,
        np.zeros(grid16.shape),
        np.ones(grid16.shape),
        1.0,
    )

    assert find_voids(campo, familia16, threshold_sigma=3.0) == []

    with pytest.raises(ValueError):
        find_voids(campo, familia16, threshold_sigma=0.0)

def test_familia_de_otro_limite_de_banda(grid16):
    """La familia debe tener el límite de banda del campo."""

    campo = voxelize(make_mock(1000, [], 1.0, seed=4), grid16)

    otra = WaveletFamily(lam=2.0, nu=2.0, J0=0, J0p=0, bandlimit=BandLimit(L=8, P=8, tau=0.1))

    with pytest.raises(ValueError):
        find_voids(campo, otra, threshold_sigma=5.0)

def test_recupera_vacio_plantado(grid16, familia16):
    """Un candidato significativo cae dentro del vacío plantado."""

    _, centro = _nodo_cercano(grid16, 0.5, np.pi / 2, np.pi)

    vacio = VoidSpec(center=centro, radius=0.3, depth=1.0)

    campo = voxelize(make_mock(200000, [vacio], 1.0, seed=11), grid16)

    candidatos = find_voids(campo, familia16, threshold_sigma=4.0)

    assert len(candidatos) >= 1

    dentro = [c for c in candidatos if _distancia(c.center, centro) < 0.3]

    assert dentro

    assert all(c.significance < -4.0 for c in dentro)

    respuestas = [c.response for c in candidatos]

    assert respuestas == sorted(respuestas)

def test_catalogo_uniforme_casi_sin_candidatos(grid16, familia16):
    """Sin vacíos plantados casi no hay detecciones a 5σ."""

    campo = voxelize(make_mock(200000, [], 1.0, seed=12), grid16)

    assert len(find_voids(campo, familia16, threshold_sigma=5.0)) <= 5

def test_respuesta_crece_con_la_profundidad(grid16, familia16):
    """Un vacío más profundo da una respuesta más negativa en su centro."""

    indice, centro = _nodo_cercano(grid16, 0.5, np.pi / 2, np.pi)

    ventanas = build_windows(familia16)

    mapas = {}
    for profundidad in (0.5, 1.0):
        vacio = VoidSpec(center=centro, radius=0.3, depth=profundidad)
        campo = voxelize(make_mock(100000, [vacio], 1.0, seed=21), grid16)
        coeficientes = flaglet_analysis(flag_forward(campo.samples, grid16), ventanas)
        mapas[profundidad] = wavelet_maps(coeficientes, grid16)

    escala = min(mapas[1.0], key=lambda e: mapas[1.0][e][indice])

    assert mapas[1.0][escala][indice] < 0.0

    assert mapas[1.0][escala][indice] < mapas[0.5][escala][indice]

def test_escala_de_la_respuesta_sigue_al_radio():
    """Un vacío más grande responde con más fuerza en escalas de radio efectivo mayor."""

    grid = build_grid(BandLimit.from_radius(32, 32, 1.0))

    ventanas = build_windows(
        WaveletFamily(lam=2.0, nu=2.0, J0=1, J0p=3, bandlimit=grid.bandlimit)
    )

    indice, centro = _nodo_cercano(grid, 0.5, np.pi / 2, np.pi)

    r, theta, phi = grid.nodes()

    distancias = np.linalg.norm(
        np.stack(
            (
                r * np.sin(theta) * np.cos(phi) - centro[0] * np.sin(centro[1]) * np.cos(centro[2]),
                r * np.sin(theta) * np.sin(phi) - centro[0] * np.sin(centro[1]) * np.sin(centro[2]),
                r * np.cos(theta) - centro[0] * np.cos(centro[1]),
            )
        ),
        axis=0,
    )

    radios_efectivos = []
    for radio in (0.08, 0.16, 0.32):
        muestras = np.where(distancias < radio, -1.0, 0.0)
        mapas = wavelet_maps(flaglet_analysis(flag_forward(muestras, grid), ventanas), grid)
        escala = min(mapas, key=lambda e: mapas[e][indice])

        assert mapas[escala][indice] < 0.0

        radios_efectivos.append(flaglet_peak_width(ventanas, *escala, s=centro[0])[2])

    assert radios_efectivos[0] <= radios_efectivos[1] <= radios_efectivos[2]

    assert radios_efectivos[0] < radios_efectivos[2]

def test_tuberia_completa_en_48():
    """Con L = P = 48 y 2×10⁵ puntos se recupera el centro del vacío plantado."""

    grid = build_grid(BandLimit.from_radius(48, 48, 1.0))

    familia = WaveletFamily(lam=2.0, nu=2.0, J0=2, J0p=3, bandlimit=grid.bandlimit)

    _, centro = _nodo_cercano(grid, 0.5, np.pi / 2, np.pi)

    vacio = VoidSpec(center=centro, radius=0.25, depth=1.0)

    campo = voxelize(make_mock(200000, [vacio], 1.0, seed=31), grid)

    candidatos = find_voids(
        campo, familia, threshold_sigma=4.0, min_expected_count=1.0, max_workers=2
    )

    assert candidatos

    todos = candidatos + [hijo for c in candidatos for hijo in c.children]

    assert min(_distancia(c.center, centro) for c in todos) < 0.5 * vacio.radius

def test_significancia_por_escala_en_nodos_validos():
    """σ sale del mapa completo de la escala, sin los nodos enmascarados."""

    rng = np.random.default_rng(40)

    mapa = rng.normal(size=(6, 5, 8))
    mapa[0] *= 1000.0
    mapa[5] *= 0.01
    mapa[5, 1, 1] = -0.5
    mapa[3, 2, 4] = -50.0

    valido = np.ones(mapa.shape, dtype=bool)
    valido[0] = False

    indices, significancia, sigma = _minimos_significativos(mapa, valido, 3.0)

    assert sigma == pytest.approx(median_abs_deviation(mapa[1:], axis=None, scale="normal"))

    np.testing.assert_allclose(significancia, mapa / sigma)

    elegidos = {tuple(int(v) for v in i) for i in indices}

    assert (3, 2, 4) in elegidos

    assert (5, 1, 1) not in elegidos

    assert all(i[0] != 0 for i in elegidos)

    vacios, _, sigma_nula = _minimos_significativos(mapa, np.zeros(mapa.shape, dtype=bool), 3.0)

    assert len(vacios) == 0

    assert sigma_nula == 0.0

def test_fusion_por_contencion():
    """El candidato de respuesta más negativa absorbe a los que caen en su radio."""

    def candidato(r, respuesta, significancia, radio):
        return VoidCandidate(
            center=(r, np.pi / 2, 0.0),
            scale_pair=(1, 1),
            response=respuesta,
            effective_radius=radio,
            significance=significancia,
        )

    profundo = candidato(0.6, -2.0, -6.0, 0.2)
    significativo = candidato(0.5, -0.5, -10.0, 0.2)
    lejano = candidato(0.9, -1.0, -7.0, 0.05)

    aceptados = _fusionar([significativo, lejano, profundo])

    assert aceptados == [profundo, lejano]

    assert aceptados[0].children == [significativo]

    assert aceptados[1].children == []

# ##################
# Cortes
# ##################

def test_corte_por_capa_y_meridiano(grid16):
    """Una capa devuelve θ × φ; el meridiano, θ × 2P."""

    campo = np.arange(np.prod(grid16.shape), dtype=float).reshape(grid16.shape)

    capa = render_slice(campo, grid16, shell=3)

    np.testing.assert_array_equal(capa, campo[3])

    meridiano = render_slice(campo, grid16, meridian=0.0)

    assert meridiano.shape == (16, 32)

    np.testing.assert_array_equal(meridiano[:, 16:], campo[:, :, 0].T)

    with pytest.raises(ValueError):
        render_slice(campo, grid16)

    with pytest.raises(ValueError):
        render_slice(campo, grid16, shell=1, meridian=0.0)

    with pytest.raises(ValueError):
        render_slice(campo, grid16, shell=16)
