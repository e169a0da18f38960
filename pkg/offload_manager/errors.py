"""Jerarquía de excepciones del paquete."""

from __future__ import annotations


class OffloadError(Exception):
    """Raíz de todas las excepciones propias del paquete."""


class DomainError(OffloadError, ValueError):
    """Argumentos fuera del dominio de una operación o de un tipo."""


class UnknownRsuError(OffloadError, KeyError):
    """Se ha solicitado una RSU que no existe en el conjunto de instancias."""

    def __init__(self, rsu_id: str) -> None:
        super().__init__(rsu_id)
        self.rsu_id = rsu_id

    def __str__(self) -> str:
        return f"RSU desconocida: {self.rsu_id!r}"


class LinearProgramError(OffloadError):
    """Fallo interno del resolutor de programación lineal."""


class UnboundedError(LinearProgramError):
    """El programa lineal no está acotado (nunca debería ocurrir con los programas de RSU)."""


class DimensionMismatchError(LinearProgramError, ValueError):
    """Las dimensiones de objetivo, restricciones y lados derechos no cuadran."""


class ConfigError(OffloadError):
    """Configuración de simulación inválida detectada antes de ejecutar."""


class ScenarioError(OffloadError):
    """Error al cargar un escenario; ``location`` indica dónde se produjo."""

    def __init__(self, message: str, location: str = "") -> None:
        super().__init__(message)
        self.message = message
        self.location = location

    def __str__(self) -> str:
        if self.location:
            return f"{self.location}: {self.message}"
        return self.message


class ParseError(ScenarioError):
    """Texto mal formado (JSON inválido, CSV sin cabecera, filas desordenadas)."""


class SchemaError(ScenarioError):
    """El documento no respeta el esquema o la versión de formato."""


class CrossRefError(ScenarioError):
    """Una referencia cruzada (vehículo, RSU, tipo de servicio) no se resuelve."""


class InvariantError(OffloadError):
    """Un invariante interno se ha roto durante la ejecución; indica un fallo del código."""
