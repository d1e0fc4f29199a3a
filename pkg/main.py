import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError
from rich.logging import RichHandler

from api.schemas import FamilyParams, RunConfig, RunSummary
from core import utils
from core.errores import ErrorFormato, ErrorNumerico
from core.gestor import GestorFlag
from core.voidfinder import VoidSpec
from interfaz_consola import InterfazConsola

logger = logging.getLogger("flaglets")

SALIDA_OK = 0
SALIDA_ARGUMENTOS = 2
SALIDA_FORMATO = 3
SALIDA_NUMERICA = 4


# ==================================================
# Argumentos
# ==================================================

def _vacio(texto: str) -> Dict[str, object]:
    """Convierte "r,theta,phi,radio,profundidad" en los campos de VoidSpec."""
    partes = texto.split(",")
    if len(partes) != 5:
        raise argparse.ArgumentTypeError("Formato esperado: r,theta,phi,radio,profundidad")
    try:
        r, theta, phi, radio, profundidad = (float(p) for p in partes)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e
    return {"center": (r, theta, phi), "radius": radio, "depth": profundidad}


def _agregar_limite(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--L", type=int, help="Límite de banda angular")
    parser.add_argument("--P", type=int, help="Límite de banda radial")
    parser.add_argument("--tau", type=float, help="Factor de escala radial")
    parser.add_argument("--R", type=float, help="Radio; fija tau = R / x_{P-1}")


def _agregar_familia(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, help="Dilatación angular")
    parser.add_argument("--nu", type=float, help="Dilatación radial")
    parser.add_argument("--j0", type=int, default=0, help="Escala angular mínima")
    parser.add_argument("--j0p", type=int, default=0, help="Escala radial mínima")


def _agregar_corte(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--png", type=Path, help="Imagen PNG de un corte")
    parser.add_argument("--shell", type=int, help="Capa radial del corte")
    parser.add_argument("--meridian", type=float, help="Longitud del plano meridiano")


def construir_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flaglets",
        description="Transformada de Fourier-Laguerre, flaglets y búsqueda de vacíos.",
    )
    parser.add_argument("--verbose", action="store_true", help="Mensajes de depuración")
    parser.add_argument("--threads", type=int, default=1, help="Hilos para mapas por escala")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="Muestras FLAG01 → coeficientes")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--format", choices=["json", "binary"], default="binary")
    p.add_argument("--orden", choices=["angular", "radial"], default="angular")

    p = sub.add_parser("inverse", help="Coeficientes → muestras")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--compare", type=Path, help="Muestras de referencia")

    p = sub.add_parser("wavelets", help="Coeficientes → directorio de flaglets")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    _agregar_familia(p)

    p = sub.add_parser("synthesize", help="Directorio de flaglets → coeficientes")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--format", choices=["json", "binary"], default="binary")
    p.add_argument("--compare", type=Path, help="Coeficientes de referencia")

    p = sub.add_parser("admissibility", help="Residuo de la resolución de la identidad")
    _agregar_limite(p)
    _agregar_familia(p)
    p.add_argument("--windows-output", dest="windows_output", type=Path)

    p = sub.add_parser("bessel", help="Coeficientes → Fourier-Bessel")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--kmin", dest="k_min", type=float, default=0.1)
    p.add_argument("--kmax", dest="k_max", type=float, default=10.0)
    p.add_argument("--nk", dest="n_k", type=int, default=32)

    p = sub.add_parser("mock", help="Catálogo simulado con vacíos plantados")
    p.add_argument("--n", dest="n_galaxies", type=int, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--void", dest="voids", type=_vacio, action="append", default=[])
    p.add_argument("--output", type=Path, required=True)

    p = sub.add_parser("voids", help="Catálogo CSV → candidatos a vacío")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path)
    _agregar_limite(p)
    _agregar_familia(p)
    p.add_argument("--threshold", dest="threshold_sigma", type=float, default=5.0)
    p.add_argument("--min-count", dest="min_expected_count", type=float, default=20.0)
    p.add_argument("--seed", type=int, help="Semilla del catálogo (solo se registra)")
    _agregar_corte(p)

    p = sub.add_parser("render", help="Muestras de un flaglet trasladado")
    _agregar_limite(p)
    _agregar_familia(p)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--jp", type=int, required=True)
    p.add_argument("--s", type=float, help="Traslación radial (por defecto R/2)")
    p.add_argument("--output", type=Path, required=True)
    _agregar_corte(p)

    return parser


def config_desde_argumentos(args: argparse.Namespace) -> RunConfig:
    """
    Construye el RunConfig a partir de los argumentos ya parseados.

    Raises:
        ValidationError: Si la combinación de argumentos no es válida.
    """
    campos = {
        k: v
        for k, v in vars(args).items()
        if v is not None and k not in {"verbose", "lam", "nu", "j0", "j0p"}
    }
    if getattr(args, "lam", None) is not None or getattr(args, "nu", None) is not None:
        campos["family"] = FamilyParams(
            lam=args.lam, nu=args.nu, J0=args.j0, J0p=args.j0p
        )
    if "voids" in campos:
        campos["voids"] = [VoidSpec(**v) for v in campos["voids"]]
    return RunConfig(**campos)


def configurar_logging(verbose: bool, ui: InterfazConsola) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=ui.console, rich_tracebacks=True)],
        force=True,
    )


# ==================================================
# Flujos principales
# ==================================================

def run(config: RunConfig, ui: Optional[InterfazConsola] = None) -> int:
    """
    Ejecuta un comando e informa el resultado.

    Returns:
        int: 0 éxito, 2 argumentos inválidos o rutas que no se pueden leer
        o escribir, 3 error de formato de entrada, 4 falla de validación
        numérica.
    """
    ui = ui or InterfazConsola()
    ui.mostrar_titulo(f"flaglets {config.command}")
    gestor = GestorFlag(threads=config.threads)
    inicio = time.perf_counter()
    residuos: Dict[str, float] = {}
    escritos: List[Path] = []
    mensaje: Optional[str] = None

    try:
        residuos, escritos = gestor.ejecutar(config)
        codigo = SALIDA_OK
    except ErrorFormato as e:
        codigo, mensaje = SALIDA_FORMATO, str(e)
    except ErrorNumerico as e:
        codigo, mensaje = SALIDA_NUMERICA, str(e)
    except (ValidationError, ValueError) as e:
        codigo, mensaje = SALIDA_ARGUMENTOS, str(e)
    except RuntimeError as e:
        # lectura o escritura fallida: la ruta dada no sirve
        causa = f": {e.__cause__}" if e.__cause__ is not None else ""
        codigo, mensaje = SALIDA_ARGUMENTOS, f"{e}{causa}"

    if codigo == SALIDA_OK:
        ui.mostrar_exito(f"Comando {config.command} completado.")
        ui.mostrar_residuos(residuos)
        ui.mostrar_archivos(utils.resumen_archivos(escritos))
        if config.command == "voids":
            if gestor.vacios:
                ui.mostrar_vacios(gestor.vacios)
            else:
                ui.mostrar_advertencia("Ningún candidato supera el umbral.")
    else:
        ui.mostrar_error(mensaje)

    ui.emitir_resumen(
        RunSummary(
            command=config.command,
            status="ok" if codigo == SALIDA_OK else "error",
            exit_code=codigo,
            elapsed_s=time.perf_counter() - inicio,
            residuals=residuos,
            outputs=[str(p) for p in escritos],
            message=mensaje,
        )
    )
    return codigo


# ==================================================
# Main
# ==================================================

def main(argv: Optional[Sequence[str]] = None, ui: Optional[InterfazConsola] = None) -> int:
    args = construir_parser().parse_args(argv)
    ui = ui or InterfazConsola()
    configurar_logging(args.verbose, ui)

    try:
        config = config_desde_argumentos(args)
    except (ValidationError, ValueError) as e:
        ui.mostrar_error(str(e))
        ui.emitir_resumen(
            RunSummary(
                command=args.command,
                status="error",
                exit_code=SALIDA_ARGUMENTOS,
                elapsed_s=0.0,
                message=str(e),
            )
        )
        return SALIDA_ARGUMENTOS

    return run(config, ui)


if __name__ == "__main__":
    sys.exit(main())
