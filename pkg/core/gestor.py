from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np

from api.schemas import (
    BesselManifest,
    FamilyParams,
    FlagletManifest,
    RunConfig,
    RunMetadata,
    VoidReport,
)

from . import utils
from .errores import ErrorFormato
from .flag_transform import BallGrid, BandLimit, FlagCoefficients, build_grid, flag_forward, flag_inverse
from .flaglet_transform import (
    FlagletCoefficients,
    flaglet_analysis,
    flaglet_energy,
    flaglet_synthesis,
    render_flaglet,
)
from .fourier_bessel import flag_to_bessel, log_k_grid
from .tiling import WaveletFamily, build_windows
from .voidfinder import VoidCandidate, find_voids, make_mock, render_slice, voxelize

logger = logging.getLogger(__name__)

Resultado = Tuple[Dict[str, float], List[Path]]


class GestorFlag:
    """
    Coordinador de los comandos de la línea de comandos.

    Traduce un ``RunConfig`` en llamadas a la biblioteca numérica y a la
    capa de persistencia. Cada comando devuelve los residuos informados y
    los archivos escritos.
    """

    def __init__(self, threads: int = 1) -> None:
        self.threads = threads
        self.vacios: List[VoidCandidate] = []
        self._comandos: Dict[str, Callable[[RunConfig], Resultado]] = {
            "transform": self.transformar,
            "inverse": self.invertir,
            "wavelets": self.analizar_flaglets,
            "synthesize": self.sintetizar_flaglets,
            "admissibility": self.verificar_admisibilidad,
            "bessel": self.convertir_bessel,
            "mock": self.simular_catalogo,
            "voids": self.buscar_vacios,
            "render": self.renderizar_flaglet,
        }

    def ejecutar(self, config: RunConfig) -> Resultado:
        logger.debug("Ejecutando %s", config.command)
        return self._comandos[config.command](config)

    # ==================================================
    # Transformadas
    # ==================================================

    def transformar(self, config: RunConfig) -> Resultado:
        """Muestras FLAG01 → coeficientes; el residuo es el de la reconstrucción."""
        muestras, b = utils.cargar_muestras(config.input)
        grid = build_grid(b)
        coeffs = flag_forward(muestras, grid, orden=config.orden)
        utils.guardar_coeficientes(config.output, coeffs, formato=config.format)

        residuo = float(np.max(np.abs(flag_inverse(coeffs, grid) - muestras)))
        return {"reconstruction": residuo}, [config.output]

    def invertir(self, config: RunConfig) -> Resultado:
        """Coeficientes → muestras; con ``compare`` informa la diferencia máxima."""
        coeffs = utils.cargar_coeficientes(config.input)
        muestras = flag_inverse(coeffs, build_grid(coeffs.bandlimit))
        utils.guardar_muestras(config.output, muestras, coeffs.bandlimit)

        residuos: Dict[str, float] = {}
        if config.compare is not None:
            referencia, b = utils.cargar_muestras(config.compare)
            if b != coeffs.bandlimit:
                raise ErrorFormato("El archivo de comparación tiene otro límite de banda.")
            residuos["compare"] = float(np.max(np.abs(muestras - referencia)))
        return residuos, [config.output]

    # ==================================================
    # Flaglets
    # ==================================================

    def _familia(self, config: RunConfig, b: BandLimit) -> WaveletFamily:
        return config.family.to_family(b)

    def analizar_flaglets(self, config: RunConfig) -> Resultado:
        """Coeficientes → directorio con un FLAG01 por escala y manifest.json."""
        coeffs = utils.cargar_coeficientes(config.input)
        familia = self._familia(config, coeffs.bandlimit)
        flaglets = flaglet_analysis(coeffs, build_windows(familia))

        directorio = Path(config.output)
        directorio.mkdir(parents=True, exist_ok=True)
        escritos = [directorio / utils.nombre_archivo_escala(None)]
        utils.guardar_coeficientes(escritos[0], flaglets.scaling)

        archivos: Dict[str, str] = {}
        for escala, w in flaglets.wavelets.items():
            nombre = utils.nombre_archivo_escala(escala)
            utils.guardar_coeficientes(directorio / nombre, w)
            archivos[f"{escala[0]},{escala[1]}"] = nombre
            escritos.append(directorio / nombre)

        b = coeffs.bandlimit
        manifiesto = FlagletManifest(
            L=b.L,
            P=b.P,
            tau=b.tau,
            family=FamilyParams.from_family(familia),
            scales=list(flaglets.wavelets),
            scaling=escritos[0].name,
            files=archivos,
        )
        utils.escribir_json(directorio / "manifest.json", manifiesto.model_dump(by_alias=True))
        escritos.append(directorio / "manifest.json")
        return {"energy_ratio": flaglets_energia_relativa(flaglets, coeffs)}, escritos

    def cargar_flaglets(self, directorio: Path) -> FlagletCoefficients:
        """Reconstruye los coeficientes de flaglets a partir del manifiesto."""
        datos = utils.leer_json(Path(directorio) / "manifest.json")
        if datos is None:
            raise ErrorFormato(f"{directorio}: falta manifest.json.")
        try:
            manifiesto = FlagletManifest(**datos)
        except ValueError as e:
            raise ErrorFormato(f"{directorio}: manifiesto inválido ({e}).") from e

        b = manifiesto.bandlimit()
        familia = manifiesto.family.to_family(b)
        escalado = utils.cargar_coeficientes(Path(directorio) / manifiesto.scaling)
        wavelets = {
            (j, jp): utils.cargar_coeficientes(Path(directorio) / manifiesto.files[f"{j},{jp}"])
            for j, jp in manifiesto.scales
        }
        for c in [escalado, *wavelets.values()]:
            if c.bandlimit != b:
                raise ErrorFormato(f"{directorio}: límites de banda inconsistentes.")
        try:
            return FlagletCoefficients(escalado, wavelets, familia)
        except ValueError as e:
            raise ErrorFormato(f"{directorio}: {e}") from e

    def sintetizar_flaglets(self, config: RunConfig) -> Resultado:
        flaglets = self.cargar_flaglets(config.input)
        coeffs = flaglet_synthesis(flaglets, build_windows(flaglets.family))
        utils.guardar_coeficientes(config.output, coeffs, formato=config.format)

        residuos: Dict[str, float] = {}
        if config.compare is not None:
            referencia = utils.cargar_coeficientes(config.compare)
            if referencia.bandlimit != coeffs.bandlimit:
                raise ErrorFormato("El archivo de comparación tiene otro límite de banda.")
            residuos["compare"] = float(np.max(np.abs(coeffs.values - referencia.values)))
        return residuos, [config.output]

    def verificar_admisibilidad(self, config: RunConfig) -> Resultado:
        """
        Construye las ventanas; ``build_windows`` falla si el residuo supera la tolerancia.

        Las ventanas no dependen de tau; sin --tau ni --R la cabecera de la
        exportación registra tau = 1.
        """
        if config.tau is None and config.R is None:
            b = BandLimit(L=config.L, P=config.P, tau=1.0)
        else:
            b = config.bandlimit()
        ventanas = build_windows(self._familia(config, b))
        residuo = float(np.max(ventanas.admissibility_residual()))

        escritos: List[Path] = []
        if config.windows_output is not None:
            utils.guardar_ventanas(config.windows_output, ventanas)
            escritos.append(config.windows_output)
        return {"admissibility": residuo}, escritos

    def renderizar_flaglet(self, config: RunConfig) -> Resultado:
        b = config.bandlimit()
        grid = build_grid(b)
        ventanas = build_windows(self._familia(config, b))
        s = 0.5 * float(grid.radial.nodes[-1]) if config.s is None else config.s
        muestras = render_flaglet(ventanas, config.j, config.jp, s, grid)
        utils.guardar_muestras(config.output, muestras, b)

        escritos = [config.output]
        if config.png is not None:
            self._guardar_corte(config, muestras, grid)
            escritos.append(config.png)
        return {}, escritos

    # ==================================================
    # Fourier-Bessel
    # ==================================================

    def convertir_bessel(self, config: RunConfig) -> Resultado:
        coeffs = utils.cargar_coeficientes(config.input)
        k_grid = log_k_grid(config.k_min, config.k_max, config.n_k)
        bessel = flag_to_bessel(coeffs, k_grid)

        carga = Path(config.output)
        utils.guardar_bessel(carga, bessel)
        b = coeffs.bandlimit
        manifiesto = BesselManifest(
            L=b.L, P=b.P, tau=b.tau, k_grid=k_grid.tolist(), payload=carga.name
        )
        ruta_manifiesto = carga.with_suffix(".json")
        utils.escribir_json(ruta_manifiesto, manifiesto.model_dump())
        return {}, [carga, ruta_manifiesto]

    # ==================================================
    # Vacíos
    # ==================================================

    def simular_catalogo(self, config: RunConfig) -> Resultado:
        catalogo = make_mock(config.n_galaxies, config.voids, config.R, config.seed)
        utils.escribir_catalogo_csv(config.output, catalogo)
        return {}, [config.output]

    def buscar_vacios(self, config: RunConfig) -> Resultado:
        b = config.bandlimit()
        grid = build_grid(b)
        familia = self._familia(config, b)
        catalogo = utils.leer_catalogo_csv(config.input, config.R)

        campo = voxelize(catalogo, grid)
        vacios = find_voids(
            campo,
            familia,
            config.threshold_sigma,
            min_expected_count=config.min_expected_count,
            max_workers=self.threads,
        )
        logger.info("Se encontraron %d candidatos", len(vacios))
        self.vacios = vacios

        escritos: List[Path] = []
        if config.output is not None:
            reporte = VoidReport(
                metadata=RunMetadata(
                    L=b.L,
                    P=b.P,
                    tau=b.tau,
                    R=config.R,
                    family=config.family,
                    threshold_sigma=config.threshold_sigma,
                    min_expected_count=config.min_expected_count,
                    seed=config.seed,
                    n_points=len(catalogo),
                    dropped=campo.dropped,
                ),
                voids=vacios,
            )
            utils.escribir_json(config.output, reporte.model_dump(mode="json", by_alias=True))
            escritos.append(config.output)
        if config.png is not None:
            self._guardar_corte(config, campo.samples, grid)
            escritos.append(config.png)
        return {"mean_delta": campo.mean(), "candidates": float(len(vacios))}, escritos

    def _guardar_corte(self, config: RunConfig, muestras: np.ndarray, grid: BallGrid) -> None:
        if config.meridian is not None:
            imagen = render_slice(muestras, grid, meridian=config.meridian)
        else:
            capa = grid.shape[0] // 2 if config.shell is None else config.shell
            imagen = render_slice(muestras, grid, shell=capa)
        utils.guardar_png_corte(config.png, imagen)


def flaglets_energia_relativa(flaglets: FlagletCoefficients, coeffs: FlagCoefficients) -> float:
    """|E_flaglets / E_señal - 1|, o 0 para una señal nula."""
    energia = coeffs.energy()
    if energia == 0.0:
        return 0.0
    return abs(flaglet_energy(flaglets) / energia - 1.0)
