"""
Exceções do pipeline de microestrutura de tecidos.
"""

IoError = OSError


class FabricError(Exception):
    """Erro base de todo o pacote."""


class InvalidSpec(FabricError, ValueError):
    """Parâmetros de padrão fora da faixa permitida."""


class ParseError(FabricError, ValueError):
    """Texto de draft malformado."""


class SizeError(FabricError, ValueError):
    """Draft maior que 16x16."""


class InvalidDraft(FabricError, ValueError):
    """Draft que não passa em validate_draft."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class DomainError(FabricError, ValueError):
    """Coordenada fora do domínio (0, 1) do deslizamento."""


class DegenerateOrientation(FabricError, ArithmeticError):
    """Orientação do ply com norma nula."""


class InvalidScene(FabricError, ValueError):
    """Cena inconsistente (draft e layout divergentes, parâmetros inválidos)."""


class ResolutionError(FabricError, ValueError):
    """Resolução de bake inválida."""


class FormatError(FabricError, ValueError):
    """Arquivo lido com formato ou versão inesperados."""


class ExtractionError(FabricError, ValueError):
    """Nenhuma matriz JSON encontrada na resposta do endpoint."""


class UnknownFamily(FabricError, ValueError):
    """Família de padrão desconhecida."""


class ParamsError(FabricError, ValueError):
    """Documento de parâmetros fora do esquema."""


class EndpointError(FabricError, RuntimeError):
    """Falha de rede ou timeout ao falar com o endpoint de chat."""


class DesignRejected(FabricError, RuntimeError):
    """Resposta do endpoint continuou inválida após os reparos."""
