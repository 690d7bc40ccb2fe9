"""
Modelos de dados para representar drafts, fios, amostras e mapas.
"""

import math
from dataclasses import dataclass, field, asdict
from typing import List, Dict, Tuple, Optional, Any

import numpy as np

from .errors import ParamsError


WARP = "warp"
WEFT = "weft"

FAMILIES = ("plain", "twill", "satin", "basket", "herringbone")
MAX_DRAFT_SIZE = 16
MAX_PLIES = 16
PARAMS_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class WeavingDraft:
    """Matriz binária de entrelaçamento; 1 = urdume (warp) sobre trama (weft)."""
    cells: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        cells = tuple(tuple(int(v) for v in row) for row in self.cells)
        if not cells or not cells[0]:
            raise ValueError("Draft vazio")
        width = len(cells[0])
        for row in cells:
            if len(row) != width:
                raise ValueError("Draft não retangular")
            if any(v not in (0, 1) for v in row):
                raise ValueError("Draft com valores não binários")
        object.__setattr__(self, 'cells', cells)

    @property
    def rows(self) -> int:
        return len(self.cells)

    @property
    def cols(self) -> int:
        return len(self.cells[0])

    def as_array(self) -> np.ndarray:
        """Retorna a matriz como array uint8 (linhas = tramas)."""
        return np.array(self.cells, dtype=np.uint8)

    def transpose(self) -> "WeavingDraft":
        return WeavingDraft(tuple(zip(*self.cells)))

    @classmethod
    def from_array(cls, array) -> "WeavingDraft":
        return cls(tuple(tuple(int(v) for v in row) for row in np.asarray(array)))


@dataclass(frozen=True)
class PatternSpec:
    """Descrição de uma família clássica de padrões e seus parâmetros."""
    family: str
    m: int = 2           # sarja: fios por cima
    n: int = 2           # sarja: fios por baixo
    satin_n: int = 5
    satin_c: int = 2
    block: int = 2       # basket: tamanho do bloco
    band: int = 4        # herringbone: largura da faixa antes de inverter
    rows: Optional[int] = None
    cols: Optional[int] = None


@dataclass(frozen=True)
class Violation:
    """Violação de uma regra de tecelagem."""
    kind: str            # oversize | floating_row | floating_column | non_binary | ragged
    index: Optional[int]
    message: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ValidationReport:
    """Relatório de validação; vazio significa draft válido."""
    violations: Tuple[Violation, ...] = ()

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def messages(self) -> List[str]:
        return [v.message for v in self.violations]

    def to_list(self) -> List[Dict[str, Any]]:
        return [v.to_dict() for v in self.violations]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class SegmentLayout:
    """
    Registros por célula das corridas (floats) visíveis.

    Todos os arrays têm forma (rows, cols). `kind` vale 1 quando o urdume
    está visível e 0 quando a trama está visível; `run_start` é o índice
    (linha para urdume, coluna para trama) da primeira célula da corrida,
    já reduzido ao período do draft.
    """
    kind: np.ndarray
    run_start: np.ndarray
    run_length: np.ndarray
    run_index: np.ndarray

    def __post_init__(self):
        for name in ('kind', 'run_start', 'run_length', 'run_index'):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=np.int64)))

    @property
    def shape(self) -> Tuple[int, int]:
        return tuple(self.kind.shape)


@dataclass(frozen=True)
class YarnParams:
    """Parâmetros analíticos do fio em hélice curva com K plies."""
    u_max: float = 0.6
    R: float = 1.0
    r: float = 0.0
    r_ply: float = 0.25
    alpha: float = 0.0
    psi: float = 0.0
    plies: int = 1
    phases: Optional[Tuple[float, ...]] = None
    width: float = 0.9

    def __post_init__(self):
        if not 1 <= self.plies <= MAX_PLIES:
            raise ParamsError(f"Número de plies fora de [1, {MAX_PLIES}]: {self.plies}")
        if self.plies == 1 and self.r != 0.0:
            raise ParamsError("Fio de um único ply deve ter r = 0")
        if self.r < 0 or self.r_ply <= 0 or self.R <= 0:
            raise ParamsError("R e r_ply devem ser positivos e r não negativo")
        if not 0.0 < self.u_max < math.pi / 2:
            raise ParamsError(f"u_max fora de (0, pi/2): {self.u_max}")
        if not 0.0 < self.width <= 1.0:
            raise ParamsError(f"Fração de largura fora de (0, 1]: {self.width}")
        for name in ('u_max', 'R', 'r', 'r_ply', 'alpha', 'psi', 'width'):
            if not math.isfinite(getattr(self, name)):
                raise ParamsError(f"{name} deve ser finito")
        if self.phases is None:
            phases = tuple(2.0 * math.pi * k / self.plies for k in range(self.plies))
        else:
            phases = tuple(float(p) for p in self.phases)
            if len(phases) != self.plies or not all(math.isfinite(p) for p in phases):
                raise ParamsError("Uma fase inicial finita por ply é obrigatória")
        object.__setattr__(self, 'phases', phases)

    @property
    def half_extent(self) -> float:
        """Meia largura lateral do fio, r + r_ply."""
        return self.r + self.r_ply

    @property
    def max_height(self) -> float:
        return self.r + self.R + self.r_ply

    @property
    def min_height(self) -> float:
        return -self.r + math.cos(self.u_max) * (self.R - self.r_ply)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['phases'] = list(self.phases)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "YarnParams":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        if known.get('phases') is not None:
            known['phases'] = tuple(known['phases'])
        try:
            return cls(**known)
        except TypeError as e:
            raise ParamsError(f"Parâmetros de fio inválidos: {e}") from e


@dataclass(frozen=True)
class PlyHit:
    """Ply que cobre um deslocamento lateral e o ângulo da seção transversal."""
    ply: int
    v: float
    phi: float
    height: float


@dataclass(frozen=True)
class SurfaceSample:
    """Resultado de uma consulta UV."""
    normal: Tuple[float, float, float]
    orientation: Tuple[float, float, float]
    height: float
    covered: bool
    kind: str
    ply: int
    cell: Tuple[int, int]


@dataclass
class SampleBatch:
    """Versão vetorizada de SurfaceSample (arrays com a mesma forma base)."""
    normal: np.ndarray        # (..., 3)
    orientation: np.ndarray   # (..., 3)
    height: np.ndarray
    covered: np.ndarray       # bool
    is_warp: np.ndarray       # bool
    ply: np.ndarray           # -1 em vãos
    cell_row: np.ndarray
    cell_col: np.ndarray

    def sample(self, index) -> SurfaceSample:
        """Extrai uma única amostra."""
        return SurfaceSample(
            normal=tuple(float(c) for c in self.normal[index]),
            orientation=tuple(float(c) for c in self.orientation[index]),
            height=float(self.height[index]),
            covered=bool(self.covered[index]),
            kind=WARP if self.is_warp[index] else WEFT,
            ply=int(self.ply[index]),
            cell=(int(self.cell_row[index]), int(self.cell_col[index])),
        )


@dataclass
class MapSet:
    """Mapas assados e metadados de codificação."""
    resolution: int
    normal: np.ndarray        # (res, res, 3) float32
    orientation: np.ndarray   # (res, res, 3) float32
    height: np.ndarray        # (res, res) float32
    coverage: np.ndarray      # (res, res) uint8
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ShadingParams:
    """Parâmetros do shader de pré-visualização."""
    roughness: float = 0.5
    k_s: float = 0.3
    k_d: float = 0.7
    flyaway_weight: float = 0.2
    light_dir: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    view_dir: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    exposure: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.roughness <= 1.0:
            raise ParamsError(f"roughness fora de (0, 1]: {self.roughness}")
        for name in ('k_s', 'k_d', 'flyaway_weight', 'exposure'):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParamsError(f"{name} deve ser finito e não negativo")
        for name in ('light_dir', 'view_dir'):
            vec = np.asarray(getattr(self, name), dtype=np.float64)
            norm = float(np.linalg.norm(vec))
            if vec.shape != (3,) or norm == 0.0 or not math.isfinite(norm):
                raise ParamsError(f"{name} deve ser um vetor 3D não nulo")
            object.__setattr__(self, name, tuple(float(c) for c in vec / norm))


@dataclass(frozen=True, eq=False)
class AlbedoImage:
    """Textura RGB em luz linear, amostrada com repetição."""
    pixels: np.ndarray        # (h, w, 3) float64 em [0, 1]

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise ValueError("Albedo deve ter forma (h, w, 3) não vazia")
        object.__setattr__(self, 'pixels', _frozen(np.clip(pixels, 0.0, 1.0)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def sample(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Amostragem nearest com wrap de repetição."""
        cols = np.floor(np.asarray(x) * self.width).astype(np.int64) % self.width
        rows = np.floor(np.asarray(y) * self.height).astype(np.int64) % self.height
        return self.pixels[rows, cols]


@dataclass(frozen=True)
class SlidingSettings:
    """Configuração serializável do deslizamento de fios."""
    k_sliding: float = 0.0
    frequency: int = 2
    warp_enabled: bool = True
    weft_enabled: bool = True
    coverage: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.k_sliding < 1.0:
            raise ParamsError(f"k_sliding fora de [0, 1): {self.k_sliding}")
        if not 0.0 < self.coverage <= 1.0:
            raise ParamsError(f"Cobertura do deslizamento fora de (0, 1]: {self.coverage}")
        if not 1 <= int(self.frequency) <= 256:
            raise ParamsError(f"Frequência de ruído fora de [1, 256]: {self.frequency}")


@dataclass(frozen=True)
class FlyawaySettings:
    """Configuração serializável das fibras soltas."""
    enabled: bool = False
    threshold: float = 0.6
    k_v: float = 0.5
    frequency: int = 8
    weight: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.threshold < 1.0:
            raise ParamsError(f"Limiar de flyaway fora de [0, 1): {self.threshold}")
        if not 0.0 <= self.k_v <= 1.0:
            raise ParamsError(f"k_v fora de [0, 1]: {self.k_v}")
        if not 1 <= int(self.frequency) <= 256:
            raise ParamsError(f"Frequência de flyaway fora de [1, 256]: {self.frequency}")
        if not math.isfinite(self.weight) or self.weight < 0:
            raise ParamsError("Peso de flyaway deve ser finito e não negativo")


@dataclass(frozen=True)
class ShadingSettings:
    """Subconjunto de sombreamento previsto junto com o draft."""
    roughness: float = 0.5
    k_s: float = 0.3
    k_d: float = 0.7

    def __post_init__(self):
        ShadingParams(roughness=self.roughness, k_s=self.k_s, k_d=self.k_d)


@dataclass(frozen=True)
class FabricParams:
    """Parâmetros completos do tecido, serializáveis em JSON."""
    family: str = "plain"
    warp: YarnParams = field(default_factory=YarnParams)
    weft: YarnParams = field(default_factory=YarnParams)
    sliding: SlidingSettings = field(default_factory=SlidingSettings)
    flyaway: FlyawaySettings = field(default_factory=FlyawaySettings)
    shading: ShadingSettings = field(default_factory=ShadingSettings)
    warp_tint: str = "#c8c8c8"
    weft_tint: str = "#a0a0a0"
    repeat: int = 4

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': PARAMS_SCHEMA_VERSION,
            'family': self.family,
            'warp': self.warp.to_dict(),
            'weft': self.weft.to_dict(),
            'sliding': asdict(self.sliding),
            'flyaway': asdict(self.flyaway),
            'shading': asdict(self.shading),
            'warp_tint': self.warp_tint,
            'weft_tint': self.weft_tint,
            'repeat': self.repeat,
        }


@dataclass(frozen=True)
class StructuredSpec:
    """Pedido estruturado: padrão + sobrescritas de parâmetros."""
    pattern: PatternSpec
    overrides: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class FreeText:
    """Pedido em linguagem natural para o endpoint externo."""
    prompt: str
    offline: bool = False


@dataclass(frozen=True)
class DesignRequest:
    """Exatamente uma das variantes deve estar preenchida."""
    structured: Optional[StructuredSpec] = None
    free_text: Optional[FreeText] = None

    def __post_init__(self):
        if (self.structured is None) == (self.free_text is None):
            raise ValueError("DesignRequest exige exatamente uma variante")


@dataclass(frozen=True)
class Provenance:
    """Origem de um design."""
    source: str                       # rule-based | external-endpoint
    response_digest: Optional[str] = None
    model: Optional[str] = None


@dataclass
class DesignResult:
    """Draft + parâmetros + proveniência + registro de reparos."""
    draft: WeavingDraft
    params: FabricParams
    provenance: Provenance
    repair_log: List[str] = field(default_factory=list)
