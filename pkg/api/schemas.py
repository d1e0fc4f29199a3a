"""Esquemas Pydantic de la superficie externa de flaglets.

Este módulo define la configuración de una corrida de la línea de comandos,
los manifiestos JSON que acompañan a los archivos binarios y los reportes
que se escriben al terminar.

Typical usage example:

    config = RunConfig(
        command="admissibility",
        L=64,
        P=64,
        R=1.0,
        family=FamilyParams(**{"lambda": 2.0, "nu": 2.0, "J0": 2, "J0p": 2}),
    )
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.flag_transform import BandLimit
from core.tiling import WaveletFamily
from core.voidfinder import VoidCandidate, VoidSpec

Comando = Literal[
    "transform",
    "inverse",
    "wavelets",
    "synthesize",
    "admissibility",
    "bessel",
    "mock",
    "voids",
    "render",
]

# comandos que leen un archivo de entrada
_CON_ENTRADA = {"transform", "inverse", "wavelets", "synthesize", "bessel", "voids"}

# comandos que construyen la grilla a partir de L, P y tau (o R)
_CON_LIMITE = {"voids", "render"}

# comandos que necesitan parámetros de teselado
_CON_FAMILIA = {"wavelets", "admissibility", "voids", "render"}


class FamilyParams(BaseModel):
    """Parámetros del teselado sin el límite de banda.

    Attributes:
        lam (float): Dilatación angular λ (alias "lambda").

        nu (float): Dilatación radial ν.

        J0 (int): Primera escala angular.

        J0p (int): Primera escala radial.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(gt=1, alias="lambda", description="Dilatación angular")

    nu: float = Field(gt=1, description="Dilatación radial")

    J0: int = Field(default=0, ge=0, description="Escala angular mínima")

    J0p: int = Field(default=0, ge=0, description="Escala radial mínima")

    def to_family(self, bandlimit: BandLimit) -> WaveletFamily:
        return WaveletFamily(
            lam=self.lam, nu=self.nu, J0=self.J0, J0p=self.J0p, bandlimit=bandlimit
        )

    @classmethod
    def from_family(cls, family: WaveletFamily) -> "FamilyParams":
        return cls(lam=family.lam, nu=family.nu, J0=family.J0, J0p=family.J0p)


class RunConfig(BaseModel):
    """Configuración validada de un comando.

    Attributes:
        command (str): Etapa a ejecutar.

        L (Optional[int]): Límite de banda angular.

        P (Optional[int]): Límite de banda radial.

        tau (Optional[float]): Factor de escala radial.

        R (Optional[float]): Radio; si no se da tau, tau = R / x_{P-1}.

        family (Optional[FamilyParams]): Parámetros del teselado.

        input (Optional[Path]): Archivo o directorio de entrada.

        output (Optional[Path]): Archivo o directorio de salida.

        seed (Optional[int]): Semilla para catálogos simulados.

        format (str): "binary" (FLAG01) o "json" para coeficientes.

        compare (Optional[Path]): Archivo contra el cual informar el residuo.

        threads (int): Hilos para los mapas por escala.

        orden (str): Orden de la transformada directa.

        k_min, k_max (float), n_k (int): Grilla logarítmica de números de onda.

        n_galaxies (Optional[int]): Puntos del catálogo simulado.

        voids (List[VoidSpec]): Vacíos plantados.

        threshold_sigma (float): Umbral de detección.

        min_expected_count (float): Conteo esperado mínimo por celda.

        j, jp (Optional[int]), s (Optional[float]): Flaglet a representar.

        shell (Optional[int]), meridian (Optional[float]): Corte para PNG.

        png (Optional[Path]): Imagen del corte.

        windows_output (Optional[Path]): Exportación FLAG01 de las ventanas.
    """

    model_config = ConfigDict(frozen=True)

    command: Comando

    L: Optional[int] = Field(default=None, ge=1)

    P: Optional[int] = Field(default=None, ge=1)

    tau: Optional[float] = Field(default=None, gt=0)

    R: Optional[float] = Field(default=None, gt=0)

    family: Optional[FamilyParams] = None

    input: Optional[Path] = None

    output: Optional[Path] = None

    seed: Optional[int] = None

    format: Literal["json", "binary"] = "binary"

    compare: Optional[Path] = None

    threads: int = Field(default=1, ge=1)

    orden: Literal["angular", "radial"] = "angular"

    k_min: float = Field(default=0.1, gt=0)

    k_max: float = Field(default=10.0, gt=0)

    n_k: int = Field(default=32, ge=1)

    n_galaxies: Optional[int] = Field(default=None, ge=1)

    voids: List[VoidSpec] = Field(default_factory=list)

    threshold_sigma: float = Field(default=5.0, gt=0)

    min_expected_count: float = Field(default=20.0, ge=0)

    j: Optional[int] = Field(default=None, ge=0)

    jp: Optional[int] = Field(default=None, ge=0)

    s: Optional[float] = Field(default=None, ge=0)

    shell: Optional[int] = Field(default=None, ge=0)

    meridian: Optional[float] = None

    png: Optional[Path] = None

    windows_output: Optional[Path] = None

    @model_validator(mode="after")
    def _validar_comando(self) -> "RunConfig":
        if self.command in _CON_ENTRADA:
            if self.input is None:
                raise ValueError(f"El comando {self.command} requiere --input.")
            if not self.input.exists():
                raise ValueError(f"No existe la entrada {self.input}.")
        if self.compare is not None and not self.compare.exists():
            raise ValueError(f"No existe el archivo de comparación {self.compare}.")

        if self.command == "admissibility" and (self.L is None or self.P is None):
            raise ValueError("El comando admissibility requiere --L y --P.")
        if self.command in _CON_LIMITE:
            if self.L is None or self.P is None:
                raise ValueError(f"El comando {self.command} requiere --L y --P.")
            if self.tau is None and self.R is None:
                raise ValueError("Indicar --tau o --R.")
        if self.command in _CON_FAMILIA and self.family is None:
            raise ValueError(f"El comando {self.command} requiere --lambda y --nu.")

        if self.command == "mock" and (self.n_galaxies is None or self.R is None or self.seed is None):
            raise ValueError("El comando mock requiere --n, --R y --seed.")
        if self.command == "voids" and self.R is None:
            raise ValueError("El comando voids requiere --R (radio del relevamiento).")
        if self.command == "render" and (self.j is None or self.jp is None):
            raise ValueError("El comando render requiere --j y --jp.")
        if self.command in {"transform", "inverse", "wavelets", "synthesize", "bessel", "mock", "render"} and self.output is None:
            raise ValueError(f"El comando {self.command} requiere --output.")
        if not self.k_min < self.k_max:
            raise ValueError("Se requiere k_min < k_max.")
        if self.shell is not None and self.meridian is not None:
            raise ValueError("Indicar solo uno de --shell o --meridian.")
        return self

    def bandlimit(self) -> BandLimit:
        """Límite de banda con tau explícito o derivado de R."""
        if self.L is None or self.P is None:
            raise ValueError("Faltan L y P.")
        if self.tau is not None:
            return BandLimit(L=self.L, P=self.P, tau=self.tau)
        if self.R is None:
            raise ValueError("Indicar tau o R.")
        return BandLimit.from_radius(self.L, self.P, self.R)


# ==========================================================
# Manifiestos
# ==========================================================

class FlagletManifest(BaseModel):
    """Manifiesto de un directorio de coeficientes de flaglets.

    Attributes:
        L (int), P (int), tau (float): Límite de banda.

        family (FamilyParams): Parámetros del teselado.

        scales (List[Tuple[int, int]]): Escalas presentes, en orden.

        scaling (str): Archivo FLAG01 de la función de escala.

        files (Dict[str, str]): Archivo de cada escala, con clave "j,jp".
    """

    L: int = Field(ge=2)

    P: int = Field(ge=2)

    tau: float = Field(gt=0)

    family: FamilyParams

    scales: List[Tuple[int, int]]

    scaling: str

    files: Dict[str, str]

    @model_validator(mode="after")
    def _validar_archivos(self) -> "FlagletManifest":
        claves = {f"{j},{jp}" for j, jp in self.scales}
        if claves != set(self.files):
            raise ValueError("Las escalas del manifiesto no coinciden con los archivos.")
        return self

    def bandlimit(self) -> BandLimit:
        return BandLimit(L=self.L, P=self.P, tau=self.tau)


class BesselManifest(BaseModel):
    """Manifiesto de un archivo de coeficientes de Fourier-Bessel.

    Attributes:
        L (int), P (int), tau (float): Límite de banda de la señal de origen.

        k_grid (List[float]): Números de onda, en el orden de la carga.

        payload (str): Archivo FLAG01 con la carga.
    """

    L: int = Field(ge=1)

    P: int = Field(ge=1)

    tau: float = Field(gt=0)

    k_grid: List[float] = Field(min_length=1)

    payload: str


# ==========================================================
# Reportes
# ==========================================================

class RunMetadata(BaseModel):
    """Parámetros con los que se produjo un catálogo de vacíos."""

    L: int

    P: int

    tau: float

    R: float

    family: FamilyParams

    threshold_sigma: float

    min_expected_count: float

    seed: Optional[int] = None

    n_points: int = Field(ge=0)

    dropped: int = Field(ge=0)


class VoidReport(BaseModel):
    """Catálogo de vacíos con los metadatos de la corrida."""

    metadata: RunMetadata

    voids: List[VoidCandidate]


class RunSummary(BaseModel):
    """Línea JSON que resume una corrida.

    Attributes:
        command (str): Comando ejecutado.

        status (str): "ok" o "error".

        exit_code (int): Código de salida.

        elapsed_s (float): Duración en segundos.

        residuals (Dict[str, float]): Residuos numéricos informados.

        outputs (List[str]): Archivos escritos.

        message (Optional[str]): Mensaje de error.
    """

    command: str

    status: Literal["ok", "error"]

    exit_code: int = Field(ge=0)

    elapsed_s: float = Field(ge=0)

    residuals: Dict[str, float] = Field(default_factory=dict)

    outputs: List[str] = Field(default_factory=list)

    message: Optional[str] = None
