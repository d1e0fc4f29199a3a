from __future__ import annotations

import io
import json
import struct
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from matplotlib import image as mpimg
from numpy.typing import ArrayLike, NDArray

from .errores import ErrorFormato
from .flag_transform import BandLimit, FlagCoefficients, flatten_coefficients, unflatten_coefficients
from .fourier_bessel import BesselCoefficients
from .sphere_harmonics import flatten_lm, unflatten_lm
from .tiling import HarmonicWindows
from .voidfinder import Catalog

Ruta = Union[str, Path]

# ==========================================================
# JSON
# ==========================================================

def leer_json(path: Ruta, default: Optional[Any] = None) -> Any:
    """
    Lee datos desde un archivo JSON.

    Args:
        path (Ruta): Ruta del archivo.
        default (Optional[Any]): Valor por defecto si el archivo no existe.

    Returns:
        Any: Contenido del JSON o el valor por defecto.

    Raises:
        ErrorFormato: Si el contenido no es JSON válido.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        return default
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ErrorFormato(f"JSON inválido en {path}: {e}") from e
    except Exception as e:
        raise RuntimeError(f"Error al leer JSON desde {path}") from e


def escribir_json(path: Ruta, data: Any) -> None:
    """
    Escribe datos en un archivo JSON.

    Args:
        path (Ruta): Ruta del archivo.
        data (Any): Datos serializables a JSON.
    """
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, ensure_ascii=False, indent=2)
    except Exception as e:
        raise RuntimeError(f"Error al escribir JSON en {path}") from e


# ==========================================================
# Contenedor FLAG01
# ==========================================================

MAGIA = b"FLAG01"
_CABECERA = struct.Struct("<6sQQdB")

# bit 0: carga real (<f8) en lugar de compleja (<c16); el resto indica el tipo
REAL = 0x01
COEFICIENTES = 0x00
VENTANAS = 0x02
BESSEL = 0x04
MUESTRAS = 0x08


class CabeceraFlag01(NamedTuple):
    L: int
    P: int
    tau: float
    flags: int

    @property
    def es_real(self) -> bool:
        return bool(self.flags & REAL)

    @property
    def tipo(self) -> int:
        return self.flags & ~REAL


def guardar_flag01(path: Ruta, cabecera: CabeceraFlag01, carga: ArrayLike) -> None:
    """
    Escribe un contenedor FLAG01: cabecera little-endian y carga plana.

    Args:
        path (Ruta): Ruta del archivo.
        cabecera (CabeceraFlag01): L, P, τ y byte de flags.
        carga (ArrayLike): Valores; se aplanan en orden C.
    """
    dtype = "<f8" if cabecera.es_real else "<c16"
    datos = np.ascontiguousarray(np.asarray(carga).ravel(), dtype=dtype)
    try:
        with open(path, "wb") as f:
            f.write(_CABECERA.pack(MAGIA, cabecera.L, cabecera.P, cabecera.tau, cabecera.flags))
            f.write(datos.tobytes())
    except Exception as e:
        raise RuntimeError(f"Error al escribir FLAG01 en {path}") from e


def cargar_flag01(path: Ruta) -> Tuple[CabeceraFlag01, NDArray]:
    """
    Lee un contenedor FLAG01.

    Returns:
        Tuple[CabeceraFlag01, NDArray]: Cabecera y carga plana.

    Raises:
        ErrorFormato: Si la firma, la cabecera o el tamaño de la carga no son válidos.
    """
    try:
        contenido = Path(path).read_bytes()
    except Exception as e:
        raise RuntimeError(f"Error al leer FLAG01 desde {path}") from e

    if len(contenido) < _CABECERA.size:
        raise ErrorFormato(f"{path}: archivo demasiado corto para un FLAG01.")
    magia, L, P, tau, flags = _CABECERA.unpack_from(contenido)
    if magia != MAGIA:
        raise ErrorFormato(f"{path}: firma {magia!r} desconocida.")
    if L < 1 or P < 1 or not np.isfinite(tau) or tau <= 0:
        raise ErrorFormato(f"{path}: cabecera inválida (L={L}, P={P}, tau={tau}).")

    cabecera = CabeceraFlag01(int(L), int(P), float(tau), int(flags))
    dtype = np.dtype("<f8" if cabecera.es_real else "<c16")
    resto = contenido[_CABECERA.size:]
    if len(resto) % dtype.itemsize:
        raise ErrorFormato(f"{path}: carga truncada.")
    return cabecera, np.frombuffer(resto, dtype=dtype).copy()


def _exigir_tipo(path: Ruta, cabecera: CabeceraFlag01, tipo: int) -> None:
    if cabecera.tipo != tipo:
        raise ErrorFormato(f"{path}: tipo de contenido {cabecera.flags:#04x} inesperado.")


def _exigir_tamano(path: Ruta, carga: NDArray, esperado: int) -> None:
    if carga.size != esperado:
        raise ErrorFormato(f"{path}: se esperaban {esperado} valores y hay {carga.size}.")


def es_flag01(path: Ruta) -> bool:
    try:
        with open(path, "rb") as f:
            return f.read(len(MAGIA)) == MAGIA
    except Exception as e:
        raise RuntimeError(f"Error al abrir {path}") from e


# ==========================================================
# Coeficientes y muestras
# ==========================================================

def guardar_coeficientes(path: Ruta, coeffs: FlagCoefficients, formato: str = "binary") -> None:
    """
    Guarda coeficientes f_ℓmp en FLAG01 o en JSON.

    Args:
        formato (str): "binary" o "json". En JSON las partes real e
            imaginaria van en el orden empaquetado de FLAG01.
    """
    b = coeffs.bandlimit
    plano = flatten_coefficients(coeffs.values)
    if formato == "binary":
        guardar_flag01(path, CabeceraFlag01(b.L, b.P, b.tau, COEFICIENTES), plano)
    elif formato == "json":
        escribir_json(
            path,
            {
                "L": b.L,
                "P": b.P,
                "tau": b.tau,
                "real": plano.real.tolist(),
                "imag": plano.imag.tolist(),
            },
        )
    else:
        raise ValueError(f"Formato desconocido: {formato}")


def cargar_coeficientes(path: Ruta) -> FlagCoefficients:
    """Lee coeficientes desde FLAG01 o JSON (se detecta por la firma)."""
    if es_flag01(path):
        cabecera, carga = cargar_flag01(path)
        _exigir_tipo(path, cabecera, COEFICIENTES)
        _exigir_tamano(path, carga, cabecera.P * cabecera.L**2)
        b = BandLimit(L=cabecera.L, P=cabecera.P, tau=cabecera.tau)
        return FlagCoefficients(unflatten_coefficients(carga, b.L, b.P), b)

    datos = leer_json(path)
    try:
        b = BandLimit(L=datos["L"], P=datos["P"], tau=datos["tau"])
        plano = np.asarray(datos["real"], dtype=float) + 1j * np.asarray(datos["imag"], dtype=float)
        return FlagCoefficients(unflatten_coefficients(plano, b.L, b.P), b)
    except (KeyError, TypeError, ValueError) as e:
        raise ErrorFormato(f"{path}: coeficientes JSON inválidos ({e}).") from e


def guardar_muestras(path: Ruta, samples: ArrayLike, bandlimit: BandLimit) -> None:
    """Muestras en la grilla (P, L, 2L-1); reales si no tienen parte imaginaria."""
    samples = np.asarray(samples)
    if samples.shape != bandlimit.coefficient_shape:
        raise ValueError("Las muestras no coinciden con el límite de banda.")
    real = not np.iscomplexobj(samples) or not np.any(samples.imag)
    flags = MUESTRAS | (REAL if real else 0)
    guardar_flag01(
        path,
        CabeceraFlag01(bandlimit.L, bandlimit.P, bandlimit.tau, flags),
        samples.real if real else samples,
    )


def cargar_muestras(path: Ruta) -> Tuple[NDArray, BandLimit]:
    cabecera, carga = cargar_flag01(path)
    _exigir_tipo(path, cabecera, MUESTRAS)
    b = BandLimit(L=cabecera.L, P=cabecera.P, tau=cabecera.tau)
    _exigir_tamano(path, carga, int(np.prod(b.coefficient_shape)))
    return carga.reshape(b.coefficient_shape), b


# ==========================================================
# Ventanas, flaglets y Fourier-Bessel
# ==========================================================

def guardar_ventanas(path: Ruta, windows: HarmonicWindows) -> None:
    """Exporta Φ (L, P) seguida de todas las Ψ^{jj'} en orden lexicográfico."""
    b = windows.family.bandlimit
    carga = np.concatenate((windows.phi.ravel(), windows.psi.ravel()))
    guardar_flag01(path, CabeceraFlag01(b.L, b.P, b.tau, VENTANAS | REAL), carga)


def nombre_archivo_escala(escala: Optional[Tuple[int, int]]) -> str:
    return "scaling.flag01" if escala is None else f"psi_{escala[0]}_{escala[1]}.flag01"


def guardar_bessel(path: Ruta, bessel: BesselCoefficients) -> None:
    """Carga: valores empaquetados (L², n_k) por ℓ² + ℓ + m."""
    b = bessel.bandlimit
    carga = flatten_lm(np.moveaxis(bessel.values, 2, 0)).T
    guardar_flag01(path, CabeceraFlag01(b.L, b.P, b.tau, BESSEL), carga)


def cargar_bessel(path: Ruta, k_grid: ArrayLike) -> BesselCoefficients:
    k_grid = np.asarray(k_grid, dtype=float)
    cabecera, carga = cargar_flag01(path)
    _exigir_tipo(path, cabecera, BESSEL)
    _exigir_tamano(path, carga, cabecera.L**2 * k_grid.size)
    b = BandLimit(L=cabecera.L, P=cabecera.P, tau=cabecera.tau)
    empaquetado = carga.reshape(cabecera.L**2, k_grid.size).T
    valores = np.moveaxis(unflatten_lm(empaquetado, b.L), 0, 2)
    return BesselCoefficients(k_grid, valores, b)


# ==========================================================
# Catálogos CSV
# ==========================================================

_COLUMNAS = ["r", "theta", "phi"]


def leer_catalogo_csv(path: Ruta, R: float) -> Catalog:
    """
    Lee un catálogo con cabecera "r,theta,phi[,weight]" (ángulos en radianes).

    Raises:
        ErrorFormato: Si la cabecera o algún valor no es válido.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            cabecera = f.readline().strip()
            cuerpo = f.read()
    except Exception as e:
        raise RuntimeError(f"Error al leer el catálogo {path}") from e

    columnas = [c.strip() for c in cabecera.split(",")]
    if columnas not in (_COLUMNAS, _COLUMNAS + ["weight"]):
        raise ErrorFormato(f"{path}: cabecera {cabecera!r} no reconocida.")

    n_columnas = len(columnas)
    if not cuerpo.strip():
        datos = np.zeros((0, n_columnas))
    else:
        try:
            datos = np.loadtxt(io.StringIO(cuerpo), delimiter=",", ndmin=2)
        except ValueError as e:
            raise ErrorFormato(f"{path}: valores no numéricos ({e}).") from e
        if datos.shape[1] != n_columnas:
            raise ErrorFormato(f"{path}: se esperaban {n_columnas} columnas.")

    pesos = datos[:, 3] if n_columnas == 4 else None
    try:
        return Catalog(datos[:, :3], R, pesos)
    except ValueError as e:
        raise ErrorFormato(f"{path}: {e}") from e


def escribir_catalogo_csv(path: Ruta, catalog: Catalog) -> None:
    """Escribe el catálogo con 17 cifras significativas."""
    columnas = list(_COLUMNAS)
    datos = catalog.points
    if catalog.weights is not None:
        columnas.append("weight")
        datos = np.column_stack((datos, catalog.weights))
    try:
        np.savetxt(path, datos, fmt="%.17g", delimiter=",", header=",".join(columnas), comments="")
    except Exception as e:
        raise RuntimeError(f"Error al escribir el catálogo {path}") from e


# ==========================================================
# Imágenes
# ==========================================================

def guardar_png_corte(path: Ruta, imagen: ArrayLike) -> None:
    """Guarda un corte 2D como PNG en escala de grises."""
    imagen = np.asarray(imagen, dtype=float)
    if imagen.ndim != 2:
        raise ValueError("El corte debe ser un arreglo 2D.")
    try:
        mpimg.imsave(path, imagen, cmap="gray", format="png")
    except Exception as e:
        raise RuntimeError(f"Error al guardar la imagen {path}") from e


def resumen_archivos(rutas: List[Path]) -> Dict[str, int]:
    """Tamaño en bytes de cada archivo escrito."""
    return {str(p): p.stat().st_size for p in rutas if p.exists()}


# ==========================================================
# Tests manuales
# ==========================================================

if __name__ == "__main__":
    import tempfile

    print("=== TESTS DE utils.py ===\n")

    with tempfile.TemporaryDirectory() as tmp:
        b = BandLimit(L=3, P=2, tau=0.5)
        coeffs = FlagCoefficients.zeros(b)
        coeffs.set(1, -1, 1, 2.0 - 0.5j)

        ruta = Path(tmp) / "f.flag01"
        guardar_coeficientes(ruta, coeffs)
        leidos = cargar_coeficientes(ruta)
        assert np.array_equal(leidos.values, coeffs.values)
        print("✔ FLAG01 OK")

        ruta_json = Path(tmp) / "f.json"
        guardar_coeficientes(ruta_json, coeffs, formato="json")
        assert np.array_equal(cargar_coeficientes(ruta_json).values, coeffs.values)
        print("✔ JSON OK")

        catalogo = Catalog([[0.5, 1.0, 2.0], [0.1, 0.2, 0.3]], R=1.0, weights=[1.0, 2.5])
        ruta_csv = Path(tmp) / "cat.csv"
        escribir_catalogo_csv(ruta_csv, catalogo)
        releido = leer_catalogo_csv(ruta_csv, R=1.0)
        assert np.array_equal(releido.points, catalogo.points)
        print("✔ CSV OK")

    print("\n=== TODOS LOS TESTS PASARON ✅ ===")
