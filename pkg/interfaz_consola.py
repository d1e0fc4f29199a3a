import sys
from typing import Dict, List, Optional

from rich.align import Align
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.theme import Theme

from api.schemas import RunSummary
from core.voidfinder import VoidCandidate

TEMA = Theme(
    {
        "title": "bold blue",
        "success": "green",
        "error": "bold red",
        "warning": "yellow",
        "info": "cyan",
    }
)


class InterfazConsola:
    """
    Capa de presentación de la línea de comandos usando Rich.
    No contiene lógica numérica.

    Los mensajes para personas van a stderr; stdout queda reservado para
    la línea JSON del resumen, que es lo que consumen los scripts.
    """

    def __init__(self, console: Optional[Console] = None, salida=None) -> None:
        self.console = console or Console(theme=TEMA, stderr=True)
        self._salida = salida if salida is not None else sys.stdout

    # ==================================================
    # Mensajes básicos
    # ==================================================

    def mostrar_titulo(self, texto: str) -> None:
        panel = Panel(
            Align.center(f"[title]{texto}[/title]"),
            expand=False,
            border_style="blue",
        )
        self.console.print(panel)

    def mostrar_exito(self, texto: str) -> None:
        self.console.print(f"✅ [success]{texto}[/success]")

    def mostrar_error(self, texto: str) -> None:
        self.console.print(f"❌ [error]{texto}[/error]")

    def mostrar_advertencia(self, texto: str) -> None:
        self.console.print(f"⚠️ [warning]{texto}[/warning]")

    # ==================================================
    # Resultados
    # ==================================================

    def mostrar_residuos(self, residuos: Dict[str, float]) -> None:
        if not residuos:
            return
        table = Table(title="Residuos", show_lines=True)
        table.add_column("Magnitud")
        table.add_column("Valor", justify="right")

        for nombre, valor in residuos.items():
            table.add_row(nombre, f"{valor:.3e}")

        self.console.print(table)

    def mostrar_archivos(self, archivos: Dict[str, int]) -> None:
        if not archivos:
            return
        table = Table(title="Archivos escritos")
        table.add_column("Ruta")
        table.add_column("Bytes", justify="right")
        for ruta, tamano in archivos.items():
            table.add_row(ruta, f"{tamano:,}")
        self.console.print(table)

    def mostrar_vacios(self, vacios: List[VoidCandidate], limite: int = 10) -> None:
        table = Table(title="Candidatos a vacío", show_lines=True)
        table.add_column("r", justify="right")
        table.add_column("θ", justify="right")
        table.add_column("φ", justify="right")
        table.add_column("(j, j')")
        table.add_column("σ", justify="right")
        table.add_column("Radio", justify="right")
        table.add_column("Subvacíos", justify="right")

        for v in vacios[:limite]:
            r, theta, phi = v.center
            table.add_row(
                f"{r:.4f}",
                f"{theta:.4f}",
                f"{phi:.4f}",
                f"{v.scale_pair}",
                f"{v.significance:.2f}",
                f"{v.effective_radius:.4f}",
                str(len(v.children)),
            )

        self.console.print(table)

    # ==================================================
    # Resumen para scripts
    # ==================================================

    def emitir_resumen(self, resumen: RunSummary) -> None:
        """
        Una línea JSON en stdout.

        pydantic escribe cada real con la representación más corta que
        vuelve al mismo double, de modo que ``json.loads`` lo recupera bit a bit.
        """
        print(resumen.model_dump_json(), file=self._salida, flush=True)
