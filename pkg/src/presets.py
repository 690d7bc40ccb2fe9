"""
Tabela de presets por família e leitura/validação do documento de parâmetros.

Os valores numéricos são constantes do projeto; apenas as ordenações entre
famílias são fixas (cetim menos rugoso e mais especular que tafetá, basket
com fios mais largos, herringbone herda a sarja).
"""

import copy
import re
from typing import Any, Dict, List

from .errors import ParamsError, UnknownFamily
from .models import (
    FabricParams, YarnParams, SlidingSettings, FlyawaySettings, ShadingSettings,
    PatternSpec, FAMILIES, PARAMS_SCHEMA_VERSION
)

MAX_REPEAT = 64

_HEX_COLOR = re.compile(r'^#[0-9a-fA-F]{6}$')

# família -> (fio, sombreamento, cores)
PRESETS: Dict[str, Dict[str, Any]] = {
    'plain': {
        'yarn': dict(u_max=0.5, R=1.0, r=0.0, r_ply=0.3, alpha=0.0, psi=0.35, plies=1, width=0.85),
        'shading': dict(roughness=0.8, k_s=0.15, k_d=0.75),
        'tints': ('#c8c8c8', '#a0a0a0'),
    },
    'twill': {
        'yarn': dict(u_max=0.6, R=1.0, r=0.12, r_ply=0.2, alpha=2.0, psi=0.4, plies=2, width=0.9),
        'shading': dict(roughness=0.5, k_s=0.3, k_d=0.6),
        'tints': ('#3b4a6b', '#d9d4c7'),
    },
    'satin': {
        'yarn': dict(u_max=0.7, R=1.0, r=0.1, r_ply=0.22, alpha=1.5, psi=0.2, plies=2, width=0.9),
        'shading': dict(roughness=0.2, k_s=0.5, k_d=0.45),
        'tints': ('#e8dcc4', '#c9b89a'),
    },
    'basket': {
        'yarn': dict(u_max=0.55, R=1.0, r=0.15, r_ply=0.18, alpha=1.8, psi=0.3, plies=3, width=0.95),
        'shading': dict(roughness=0.6, k_s=0.25, k_d=0.65),
        'tints': ('#b89b72', '#8c7355'),
    },
}
PRESETS['herringbone'] = PRESETS['twill']

# padrão associado a cada preset; cetim 8/3 dá flutuações de 7 células
PRESET_PATTERNS: Dict[str, PatternSpec] = {
    'plain': PatternSpec('plain'),
    'twill': PatternSpec('twill', m=2, n=2),
    'satin': PatternSpec('satin', satin_n=8, satin_c=3),
    'basket': PatternSpec('basket', block=2),
    'herringbone': PatternSpec('herringbone', m=2, n=2, band=4),
}


def _check_family(family: str) -> None:
    if family not in FAMILIES:
        raise UnknownFamily(f"Família desconhecida: {family!r} (válidas: {', '.join(FAMILIES)})")


def default_pattern(family: str) -> PatternSpec:
    """PatternSpec usado pelo preset da família."""
    _check_family(family)
    return PRESET_PATTERNS[family]


def default_params(family: str) -> FabricParams:
    """
    Parâmetros padrão de uma família.

    Raises:
        UnknownFamily: Família fora de plain/twill/satin/basket/herringbone
    """
    _check_family(family)
    preset = PRESETS[family]
    warp_tint, weft_tint = preset['tints']
    return FabricParams(
        family=family,
        warp=YarnParams(**preset['yarn']),
        weft=YarnParams(**preset['yarn']),
        sliding=SlidingSettings(),
        flyaway=FlyawaySettings(),
        shading=ShadingSettings(**preset['shading']),
        warp_tint=warp_tint,
        weft_tint=weft_tint,
    )


def _section(cls, data: Any, name: str):
    if not isinstance(data, dict):
        raise ParamsError(f"Seção '{name}' deve ser um objeto JSON")
    unknown = sorted(set(data) - set(cls.__dataclass_fields__))
    if unknown:
        raise ParamsError(f"Campos desconhecidos em '{name}': {', '.join(unknown)}")
    for key in ('frequency', 'plies'):
        if key in data and (isinstance(data[key], bool) or not isinstance(data[key], int)):
            raise ParamsError(f"'{name}.{key}' deve ser inteiro")
    for key in ('enabled', 'warp_enabled', 'weft_enabled'):
        if key in data and not isinstance(data[key], bool):
            raise ParamsError(f"'{name}.{key}' deve ser booleano")
    try:
        if cls is YarnParams:
            return YarnParams.from_dict(data)
        return cls(**data)
    except ParamsError as e:
        raise ParamsError(f"{name}: {e}") from e
    except (TypeError, ValueError, OverflowError) as e:
        raise ParamsError(f"{name}: valor inválido ({e})") from e


def params_from_dict(data: Any) -> FabricParams:
    """
    Constrói FabricParams a partir do documento JSON versionado.

    Seções ausentes usam o preset da família.

    Raises:
        ParamsError: Documento fora do esquema
        UnknownFamily: Família desconhecida
    """
    if not isinstance(data, dict):
        raise ParamsError("Documento de parâmetros deve ser um objeto JSON")

    allowed = {'schema_version'} | set(FabricParams.__dataclass_fields__)
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ParamsError(f"Campos desconhecidos: {', '.join(unknown)}")

    version = data.get('schema_version', PARAMS_SCHEMA_VERSION)
    if version != PARAMS_SCHEMA_VERSION:
        raise ParamsError(f"schema_version {version!r} não suportada (esperado {PARAMS_SCHEMA_VERSION})")

    family = data.get('family', 'plain')
    if not isinstance(family, str):
        raise ParamsError("'family' deve ser texto")
    _check_family(family)
    base = default_params(family)

    sections = {
        'warp': (YarnParams, base.warp),
        'weft': (YarnParams, base.weft),
        'sliding': (SlidingSettings, base.sliding),
        'flyaway': (FlyawaySettings, base.flyaway),
        'shading': (ShadingSettings, base.shading),
    }
    built = {}
    for name, (cls, default) in sections.items():
        built[name] = _section(cls, data[name], name) if name in data else default

    tints = {}
    for name in ('warp_tint', 'weft_tint'):
        value = data.get(name, getattr(base, name))
        if not isinstance(value, str) or not _HEX_COLOR.match(value):
            raise ParamsError(f"'{name}' deve ser uma cor '#rrggbb': {value!r}")
        tints[name] = value.lower()

    repeat = data.get('repeat', base.repeat)
    if isinstance(repeat, bool) or not isinstance(repeat, int) or not 1 <= repeat <= MAX_REPEAT:
        raise ParamsError(f"'repeat' deve ser inteiro em [1, {MAX_REPEAT}]: {repeat!r}")

    return FabricParams(family=family, repeat=repeat, **built, **tints)


def validate_params_document(data: Any) -> List[str]:
    """Lista de violações do documento (vazia quando válido)."""
    try:
        params_from_dict(data)
    except (ParamsError, UnknownFamily) as e:
        return [str(e)]
    return []


def _merge(target: Dict[str, Any], updates: Dict[str, Any]) -> None:
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _merge(target[key], value)
        else:
            target[key] = value


def _expand_dotted(overrides: Dict[str, Any]) -> Dict[str, Any]:
    expanded: Dict[str, Any] = {}
    for key, value in overrides.items():
        parts = key.split('.')
        node = expanded
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        if isinstance(value, dict) and isinstance(node.get(parts[-1]), dict):
            _merge(node[parts[-1]], value)
        else:
            node[parts[-1]] = value
    return expanded


def apply_overrides(params: FabricParams, overrides: Dict[str, Any]) -> FabricParams:
    """
    Aplica sobrescritas (aninhadas ou com chaves pontuadas, ex. 'warp.plies').

    Mudar o número de plies sem informar fases recalcula as fases padrão.

    Raises:
        ParamsError: Resultado fora do esquema
    """
    if not overrides:
        return params
    updates = _expand_dotted(overrides)
    document = copy.deepcopy(params.to_dict())
    for yarn in ('warp', 'weft'):
        change = updates.get(yarn)
        if isinstance(change, dict) and 'plies' in change and 'phases' not in change:
            document[yarn].pop('phases', None)
    _merge(document, updates)
    return params_from_dict(document)
