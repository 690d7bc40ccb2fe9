"""
Configuração do endpoint de chat-completion usado pelo designer.
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

ENV_PREFIX = 'FABRIC_LLM_'
PROJECT_ENV_FILE = Path(__file__).resolve().parent.parent / '.env'

DEFAULT_BASE_URL = 'http://localhost:8000/v1'
DEFAULT_MODEL = 'weaving-designer'


def _env(name: str, default: str) -> str:
    return os.getenv(ENV_PREFIX + name, default)


class EndpointConfig:
    """Endpoint externo lido de variáveis FABRIC_LLM_* (com .env opcional)."""

    def __init__(self, env_file: Optional[str] = None, base_url: Optional[str] = None):
        """
        Args:
            env_file: Arquivo .env explícito; sem ele tenta o .env do projeto
                      e depois o do diretório de trabalho
            base_url: URL explícita; tem precedência sobre FABRIC_LLM_BASE_URL
        """
        self._base_url = base_url
        candidates = [Path(env_file)] if env_file else [PROJECT_ENV_FILE, Path.cwd() / '.env']
        # variáveis já definidas no ambiente não são sobrescritas
        for candidate in candidates:
            if candidate.is_file():
                load_dotenv(candidate)
                break

    @property
    def base_url(self) -> str:
        return self._base_url or _env('BASE_URL', DEFAULT_BASE_URL)

    @property
    def model(self) -> str:
        return _env('MODEL', DEFAULT_MODEL)

    @property
    def api_key(self) -> str:
        """
        Credencial do endpoint.

        Endpoints locais costumam aceitar qualquer chave; sem variável definida
        envia um marcador fixo.
        """
        return _env('API_KEY', '') or 'not-set'

    @property
    def timeout(self) -> float:
        """Timeout por requisição em segundos."""
        return float(_env('TIMEOUT', '30'))

    @property
    def temperature(self) -> float:
        return float(_env('TEMPERATURE', '0.0'))

    @property
    def max_retries(self) -> int:
        """Tentativas de reparo por estágio do designer."""
        return int(_env('MAX_RETRIES', '3'))

    def validate(self) -> bool:
        """URL http(s), timeout positivo e número de reparos não negativo."""
        try:
            timeout, retries = self.timeout, self.max_retries
        except ValueError:
            return False
        return self.base_url.startswith(('http://', 'https://')) and timeout > 0 and retries >= 0

    def to_dict(self) -> Dict[str, Any]:
        """Configuração efetiva sem a credencial (para o manifesto)."""
        return {
            'base_url': self.base_url,
            'model': self.model,
            'timeout': self.timeout,
            'temperature': self.temperature,
            'max_retries': self.max_retries,
        }
