"""Tests de la conversión de Fourier-Laguerre a Fourier-Bessel.

Los valores de referencia se obtienen integrando numéricamente la
definición con scipy.

    como ejecutar los tests

        pytest test/test_fourier_bessel.py -v
"""

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import eval_genlaguerre, spherical_jn

from core.flag_transform import BandLimit, FlagCoefficients
from core.fourier_bessel import (
    c_coeffs,
    flag_to_bessel,
    log_k_grid,
    moment_mu,
    projection_jlp,
    projection_table,
)
from core.radial_laguerre import RadialBasis, laguerre_basis_eval, radial_synthesis
from core.sphere_harmonics import lm_mask


def _momento_numerico(ell, j, k, tau):
    valor, _ = quad(
        lambda r: r**j * spherical_jn(ell, k * r) * np.exp(-r / (2 * tau)),
        0.0,
        200.0 * tau,
        epsabs=1e-14,
        epsrel=1e-12,
        limit=500,
    )
    return valor * tau ** -(j - 0.5)


def _proyeccion_numerica(ell, p, k, tau):
    valor, _ = quad(
        lambda r: laguerre_basis_eval(p, r, tau) * spherical_jn(ell, k * r) * r * r,
        0.0,
        200.0 * tau,
        epsabs=1e-14,
        epsrel=1e-12,
        limit=1000,
    )
    return valor

# ##################
# Polinomios y momentos
# ##################

@pytest.mark.parametrize("p", [0, 1, 3, 7, 12])
def test_coeficientes_de_laguerre(p):
    """Σ_j c^p_j x^j reproduce L^(2)_p(x)."""

    x = np.array([0.0, 0.7, 3.0, 6.0])

    valores = np.polynomial.polynomial.polyval(x, c_coeffs(p))

    np.testing.assert_allclose(valores, eval_genlaguerre(p, 2, x), rtol=1e-10, atol=1e-9)

def test_coeficientes_grado_invalido():
    """El grado debe ser un entero no negativo."""

    with pytest.raises(ValueError):
        c_coeffs(-1)

@pytest.mark.parametrize(
    "ell, j, k, tau",
    [
        (0, 2, 1.0, 1.0),
        (1, 3, 2.0, 0.5),
        (2, 6, 0.4, 1.5),
        (4, 2, 1.2, 1.0),
        (3, 3, 5.0, 0.2),
    ],
)
def test_momento_contra_integral(ell, j, k, tau):
    """La forma cerrada coincide con la integral, con y sin serie finita."""

    esperado = _momento_numerico(ell, j, k, tau)

    assert moment_mu(ell, j, k, tau) == pytest.approx(esperado, rel=1e-8, abs=1e-12)

def test_momento_parametros_invalidos():
    """j + ℓ >= 2, k > 0 y tau > 0."""

    with pytest.raises(ValueError):
        moment_mu(0, 1, 1.0, 1.0)

    with pytest.raises(ValueError):
        moment_mu(1, 2, 0.0, 1.0)

    with pytest.raises(ValueError):
        moment_mu(1, 2, 1.0, -1.0)

# ##################
# Proyecciones
# ##################

@pytest.mark.parametrize(
    "ell, p, k",
    [(0, 0, 0.5), (1, 4, 0.5), (3, 8, 3.0), (6, 2, 1.5), (8, 8, 0.8)],
)
def test_proyeccion_contra_integral(ell, p, k):
    """j_ℓp(k) = ∫ K_p(r) j_ℓ(kr) r² dr."""

    tau = 1.0

    esperado = _proyeccion_numerica(ell, p, k, tau)

    assert projection_jlp(ell, p, k, tau) == pytest.approx(esperado, rel=1e-7, abs=1e-11)

def test_tabla_coincide_con_proyecciones():
    """La tabla reutiliza momentos sin cambiar los valores."""

    k_grid = np.array([0.3, 2.0])

    tabla = projection_table(4, 5, k_grid, 0.5)

    assert tabla.values.shape == (4, 5, 2)

    for ell, p, ik in [(0, 0, 0), (3, 4, 1), (2, 1, 0)]:
        assert tabla.values[ell, p, ik] == pytest.approx(
            projection_jlp(ell, p, k_grid[ik], 0.5), rel=1e-12, abs=1e-15
        )

# ##################
# Conversión
# ##################

def test_conversion_contra_integral_directa():
    """f̃_ℓm(k) = sqrt(2/π) ∫ f_ℓm(r) j_ℓ(kr) r² dr."""

    bandlimit = BandLimit(L=4, P=4, tau=0.5)

    rng = np.random.default_rng(8)

    forma = bandlimit.coefficient_shape

    f = FlagCoefficients(
        (rng.normal(size=forma) + 1j * rng.normal(size=forma)) * lm_mask(4)[None],
        bandlimit,
    )

    k_grid = np.array([0.3, 2.0, 8.0])

    bessel = flag_to_bessel(f, k_grid)

    # Gauss-Legendre de 20 puntos sobre 60 paneles unitarios
    x, w = leggauss(20)
    radios = (np.arange(60)[:, None] + 0.5 * (x[None, :] + 1.0)).ravel()
    pesos = np.tile(0.5 * w, 60) * radios**2

    f_lm = radial_synthesis(f.values, radios, RadialBasis(4, 0.5))

    esperado = np.zeros_like(bessel.values)
    for ell in range(4):
        for ik, k in enumerate(k_grid):
            nucleo = pesos * spherical_jn(ell, k * radios)
            esperado[ell, :, ik] = np.sqrt(2.0 / np.pi) * np.tensordot(nucleo, f_lm[:, ell, :], axes=(0, 0))

    escala = np.max(np.abs(esperado))

    assert np.max(np.abs(bessel.values - esperado)) < 1e-8 * escala

def test_conversion_con_tabla_precalculada():
    """Una tabla ajena a la señal se rechaza."""

    bandlimit = BandLimit(L=3, P=3, tau=1.0)

    f = FlagCoefficients.zeros(bandlimit)

    tabla = projection_table(3, 3, [1.0, 2.0], 1.0)

    assert flag_to_bessel(f, [1.0, 2.0], tabla).values.shape == (3, 5, 2)

    with pytest.raises(ValueError):
        flag_to_bessel(f, [1.0, 3.0], tabla)

    with pytest.raises(ValueError):
        flag_to_bessel(f, [])

def test_grilla_logaritmica():
    """log_k_grid es geométrica y valida sus extremos."""

    grilla = log_k_grid(0.1, 10.0, 3)

    np.testing.assert_allclose(grilla, [0.1, 1.0, 10.0])

    with pytest.raises(ValueError):
        log_k_grid(1.0, 0.5, 4)

    with pytest.raises(ValueError):
        log_k_grid(0.0, 1.0, 4)

    with pytest.raises(ValueError):
        log_k_grid(0.1, 1.0, 0)

# ##################
# Formas cerradas
# ##################

@pytest.mark.parametrize("k, tau", [(0.5, 1.0), (3.0, 0.2), (20.0, 0.7)])
def test_momento_y_proyeccion_elementales(k, tau):
    """μ⁰₂ y j_00 tienen forma cerrada 16 τ^{3/2} (1 + 4k̃²)^{-2}."""

    base = 16.0 * tau**1.5 / (1.0 + 4.0 * (k * tau) ** 2) ** 2

    assert moment_mu(0, 2, k, tau) == pytest.approx(base, rel=1e-12)

    assert projection_jlp(0, 0, k, tau) == pytest.approx(base / np.sqrt(2.0), rel=1e-12)

def test_conversion_de_un_solo_coeficiente():
    """Con solo f_000 = 1, f̃_00(k) = sqrt(2/π) j_00(k) y el resto es nulo."""

    bandlimit = BandLimit(L=3, P=4, tau=0.4)

    f = FlagCoefficients.zeros(bandlimit)
    f.set(0, 0, 0, 1.0)

    k_grid = np.array([0.1, 1.0, 7.0])

    bessel = flag_to_bessel(f, k_grid)

    esperado = np.sqrt(2.0 / np.pi) * 16.0 * 0.4**1.5 / (1.0 + 4.0 * (k_grid * 0.4) ** 2) ** 2 / np.sqrt(2.0)

    np.testing.assert_allclose(bessel.values[0, 2].real, esperado, rtol=1e-12)

    bessel.values[0, 2] = 0.0

    assert np.max(np.abs(bessel.values)) < 1e-14
