"""
Carregador da configuração de execução (YAML ou JSON).
"""

import copy
import yaml
from pathlib import Path
from typing import Dict, Any, Optional

from .scene import DEFAULT_SEED

DEFAULTS: Dict[str, Any] = {
    'seed': DEFAULT_SEED,
    'output_directory': './out',
    'workers': None,
    'bake': {
        'resolution': 1024,
        'supersample': False,
    },
    'render': {
        'resolution': 1024,
        'light': [45.0, 60.0],
        'view': [0.0, 0.0, 1.0],
        'exposure': 1.0,
    },
    'design': {
        'fallback': True,
        'max_retries': 3,
    },
}


class ConfigLoader:
    """Carrega, valida e completa a configuração de execução."""

    def __init__(self, config_path: Optional[str] = None):
        """config_path: arquivo YAML/JSON; None usa apenas os valores padrão."""
        self.config_path = Path(config_path) if config_path else None

    def load(self) -> Dict[str, Any]:
        """
        Lê o arquivo (se houver), valida e completa com DEFAULTS.

        Raises:
            FileNotFoundError: arquivo ausente
            ValueError: YAML malformado, campo desconhecido ou tipo errado
        """
        config: Dict[str, Any] = {}
        if self.config_path is not None:
            if not self.config_path.exists():
                raise FileNotFoundError(f"Arquivo de configuração não encontrado: {self.config_path}")

            with open(self.config_path, 'r', encoding='utf-8') as file:
                try:
                    config = yaml.safe_load(file) or {}
                except yaml.YAMLError as e:
                    raise ValueError(f"Erro de sintaxe em {self.config_path}: {e}") from e

        self._validate_config(config)
        self._set_defaults(config)

        return config

    def _validate_config(self, config: Any) -> None:
        if not isinstance(config, dict):
            raise ValueError("Configuração deve ser um mapeamento")

        unknown = set(config) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"Campos desconhecidos na configuração: {', '.join(sorted(unknown))}")

        if 'seed' in config and (isinstance(config['seed'], bool) or not isinstance(config['seed'], int)):
            raise ValueError(f"Semente deve ser inteira: {config['seed']!r}")

        workers = config.get('workers')
        if workers is not None and (not isinstance(workers, int) or workers < 1):
            raise ValueError(f"Número de workers inválido: {workers!r}")

        for section in ('bake', 'render', 'design'):
            if section in config and not isinstance(config[section], dict):
                raise ValueError(f"Seção '{section}' deve ser um mapeamento")

        for section in ('bake', 'render'):
            resolution = config.get(section, {}).get('resolution')
            if resolution is not None and (not isinstance(resolution, int) or resolution < 1):
                raise ValueError(f"Resolução inválida em '{section}': {resolution!r}")

        light = config.get('render', {}).get('light')
        if light is not None and (not isinstance(light, list) or len(light) != 2):
            raise ValueError("render.light deve ser [azimute, elevação] em graus")

    def _set_defaults(self, config: Dict[str, Any]) -> None:
        """Completa, no lugar, chaves e subchaves ausentes (cópias dos padrões)."""
        for key, value in DEFAULTS.items():
            if key not in config:
                config[key] = copy.deepcopy(value)
            elif isinstance(value, dict) and isinstance(config[key], dict):
                for sub_key, sub_value in value.items():
                    if sub_key not in config[key]:
                        config[key][sub_key] = copy.deepcopy(sub_value)


def resolve(flag: Any, config: Dict[str, Any], *path: str) -> Any:
    """Precedência: flag explícita > arquivo de configuração > padrão."""
    if flag is not None:
        return flag
    node: Any = config
    for key in path:
        node = node[key]
    return node
