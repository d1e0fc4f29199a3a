"""Tests de la base esférica de Laguerre y su cuadratura radial.

    como ejecutar los tests

        pytest test/test_radial_laguerre.py -v
"""

import numpy as np
import pytest
from scipy.special import eval_genlaguerre, roots_genlaguerre

from core.radial_laguerre import (
    RadialBasis,
    laguerre_basis_eval,
    laguerre_basis_table,
    radial_analysis,
    radial_convolve,
    radial_dirac,
    radial_quadrature,
    radial_synthesis,
    radial_translate,
    tau_for_radius,
)

# ##################
# Cuadratura
# ##################

@pytest.mark.parametrize("P, tolerancia", [(8, 1e-13), (64, 1e-10)])
def test_ortonormalidad_discreta(P, tolerancia):
    """sum_i w_i K_p(r_i) K_q(r_i) es la identidad."""

    base = RadialBasis(P=P, tau=0.3)

    tabla = base.node_table

    gram = (tabla * base.quadrature.weights[None, :]) @ tabla.T

    assert np.max(np.abs(gram - np.eye(P))) < tolerancia

def test_nodos_y_pesos_contra_scipy():
    """Los nodos son raíces de L^(2)_P y los pesos absorben e^x."""

    P = 16

    x, w = roots_genlaguerre(P, 2)

    cuadratura = radial_quadrature(P, 1.0)

    np.testing.assert_allclose(cuadratura.nodes, x, rtol=1e-12)

    np.testing.assert_allclose(cuadratura.weights, w * np.exp(x), rtol=1e-9)

def test_cuadratura_escala_con_tau():
    """Con tau los nodos escalan como tau y los pesos como tau³."""

    unitaria = radial_quadrature(10, 1.0)

    escalada = radial_quadrature(10, 0.25)

    np.testing.assert_allclose(escalada.nodes, 0.25 * unitaria.nodes)

    np.testing.assert_allclose(escalada.weights, 0.25**3 * unitaria.weights)

def test_integral_exacta_de_exponencial():
    """∫ e^{-r/tau} r² dr = 2 tau³ con la cuadratura."""

    tau = 0.7

    cuadratura = radial_quadrature(12, tau)

    integral = cuadratura.integrate(np.exp(-cuadratura.nodes / tau))

    assert abs(integral - 2.0 * tau**3) < 1e-12

def test_tau_para_radio():
    """tau_for_radius coloca el nodo externo en R."""

    tau = tau_for_radius(2.5, 20)

    assert abs(radial_quadrature(20, tau).nodes[-1] - 2.5) < 1e-12

# ##################
# Funciones base
# ##################

@pytest.mark.parametrize("p", [0, 1, 4, 11])
def test_evaluacion_contra_formula_cerrada(p):
    """K_p coincide con la definición a partir de L^(2)_p."""

    tau = 0.5

    for r in (0.0, 0.3, 2.0, 7.5):
        x = r / tau
        esperado = (
            np.exp(-0.5 * x)
            * tau**-1.5
            * eval_genlaguerre(p, 2, x)
            / np.sqrt((p + 1.0) * (p + 2.0))
        )

        assert laguerre_basis_eval(p, r, tau) == pytest.approx(esperado, rel=1e-10, abs=1e-12)

def test_tabla_de_funciones_base():
    """Cada fila de la tabla es K_p; con P grande no hay desbordes."""

    radios = np.array([0.0, 0.4, 3.0, 12.0])

    tabla = laguerre_basis_table(6, radios, 0.8)

    assert tabla.shape == (6, 4)

    for p in range(6):
        for i, r in enumerate(radios):
            assert tabla[p, i] == pytest.approx(laguerre_basis_eval(p, r, 0.8), rel=1e-13, abs=1e-15)

    assert np.all(np.isfinite(laguerre_basis_table(400, np.linspace(0.0, 1500.0, 31), 1.0)))

    with pytest.raises(ValueError):
        laguerre_basis_table(4, [-1.0], 1.0)

def test_ida_y_vuelta_radial():
    """Sintetizar en los nodos y analizar recupera los coeficientes."""

    rng = np.random.default_rng(3)

    base = RadialBasis(P=6, tau=0.2)

    coeficientes = rng.normal(size=6)

    valores = radial_synthesis(coeficientes, base.quadrature.nodes, base)

    recuperados = radial_analysis(valores, base)

    assert np.max(np.abs(recuperados - coeficientes)) < 1e-13

def test_analisis_por_bloques():
    """Los ejes adicionales se transforman de forma independiente."""

    rng = np.random.default_rng(5)

    base = RadialBasis(P=5, tau=1.0)

    bloque = rng.normal(size=(5, 3, 2))

    completo = radial_analysis(bloque, base)

    np.testing.assert_allclose(completo[:, 1, 0], radial_analysis(bloque[:, 1, 0], base))

# ##################
# Traslación y Dirac
# ##################

def test_traslacion_es_convolucion_con_dirac():
    """Trasladar por s equivale a convolucionar con la delta centrada en s."""

    rng = np.random.default_rng(11)

    base = RadialBasis(P=10, tau=0.1)

    f = rng.normal(size=10)

    np.testing.assert_allclose(
        radial_translate(f, 0.4, base),
        radial_convolve(f, radial_dirac(0.4, base)),
    )

def test_traslacion_de_funcion_base():
    """T_s K_q evaluada en r vale K_q(s) K_q(r)."""

    base = RadialBasis(P=8, tau=0.3)

    q, s = 3, 0.9

    e_q = np.zeros(8)
    e_q[q] = 1.0

    radios = np.array([0.1, 0.5, 1.7])

    trasladada = radial_synthesis(radial_translate(e_q, s, base), radios, base)

    esperado = laguerre_basis_eval(q, s, 0.3) * np.array(
        [laguerre_basis_eval(q, r, 0.3) for r in radios]
    )

    np.testing.assert_allclose(trasladada, esperado, rtol=1e-11, atol=1e-13)

# ##################
# Errores
# ##################

def test_parametros_invalidos():
    """P y tau inválidos se rechazan con ValueError."""

    with pytest.raises(ValueError):
        RadialBasis(P=0, tau=1.0)

    with pytest.raises(ValueError):
        RadialBasis(P=4, tau=0.0)

    with pytest.raises(ValueError):
        radial_quadrature(3, -1.0)

    with pytest.raises(ValueError):
        laguerre_basis_eval(-1, 0.5, 1.0)

    with pytest.raises(ValueError):
        tau_for_radius(0.0, 8)

def test_cantidad_de_muestras_incorrecta():
    """El análisis exige exactamente P muestras radiales."""

    base = RadialBasis(P=4, tau=1.0)

    with pytest.raises(ValueError):
        radial_analysis(np.zeros(5), base)

    with pytest.raises(ValueError):
        radial_dirac(-0.1, base)

def test_propiedad_de_filtrado_de_la_delta():
    """sum_j w_j δ_s(r_j) f(r_j) = f(s), con s en un nodo o fuera de la grilla."""

    rng = np.random.default_rng(13)

    base = RadialBasis(P=12, tau=0.1)

    f = rng.normal(size=12)

    nodos = base.quadrature.nodes

    valores = radial_synthesis(f, nodos, base)

    for s in (float(nodos[4]), 0.37):
        delta = radial_synthesis(radial_dirac(s, base), nodos, base)

        filtrado = np.sum(base.quadrature.weights * delta * valores)

        esperado = radial_synthesis(f, [s], base)[0]

        assert filtrado == pytest.approx(esperado, rel=1e-10, abs=1e-10)

def test_simetria_del_nucleo_de_traslacion():
    """Trasladar por s y evaluar en r es lo mismo que trasladar por r y evaluar en s."""

    rng = np.random.default_rng(17)

    base = RadialBasis(P=16, tau=0.05)

    f = rng.normal(size=16)

    for s, r in ((0.2, 0.55), (0.05, 0.9), (0.4, 0.4)):
        a = radial_synthesis(radial_translate(f, s, base), [r], base)[0]

        b = radial_synthesis(radial_translate(f, r, base), [s], base)[0]

        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)

def test_ida_y_vuelta_radial_banda_alta():
    """Con P = 128 el análisis sigue invirtiendo la síntesis en los nodos."""

    rng = np.random.default_rng(19)

    base = RadialBasis(P=128, tau=1.0)

    coeficientes = rng.normal(size=128)

    valores = radial_synthesis(coeficientes, base.quadrature.nodes, base)

    assert np.max(np.abs(radial_analysis(valores, base) - coeficientes)) < 1e-10

def test_k0_en_el_origen():
    """K_0(0) con tau = 1 es 1/sqrt(2)."""

    assert laguerre_basis_eval(0, 0.0, 1.0) == pytest.approx(0.7071067811865476, rel=1e-15)
