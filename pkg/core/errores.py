"""Excepciones propias de la biblioteca.

Los errores de argumentos siguen siendo ``ValueError``; estas dos clases
distinguen los fallos de formato de archivo y los de validación numérica,
que la línea de comandos traduce a códigos de salida distintos.
"""


class ErrorFormato(ValueError):
    """Archivo de entrada mal formado (FLAG01, CSV o JSON)."""


class ErrorNumerico(RuntimeError):
    """Falla de validación numérica (convergencia, admisibilidad, etc.)."""
