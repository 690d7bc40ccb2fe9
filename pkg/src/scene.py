"""
Montagem da cena consultável (draft + fios + irregularidades + sementes).
"""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, Any, Optional

import numpy as np

from .draft import extract_segments, hidden_runs
from .errors import InvalidScene, InvalidDraft
from .irregularity import NoiseField, SlidingParams, FlyawayParams
from .models import WeavingDraft, SegmentLayout, YarnParams, FabricParams

DEFAULT_SEED = 20250101
FLOOR_EPSILON = 1e-3


@dataclass(frozen=True, eq=False)
class FabricScene:
    """Material completo: imutável depois de construído."""
    draft: WeavingDraft
    layout: SegmentLayout
    warp: YarnParams
    weft: YarnParams
    sliding: Optional[SlidingParams] = None
    flyaway: Optional[FlyawayParams] = None
    repeat: int = 4
    seed: int = DEFAULT_SEED
    floor_height: Optional[float] = None
    warp_tint: str = "#c8c8c8"
    weft_tint: str = "#a0a0a0"
    hidden_length: np.ndarray = field(init=False, repr=False, compare=False)
    hidden_index: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.layout.shape != (self.draft.rows, self.draft.cols):
            raise InvalidScene(
                f"Layout {self.layout.shape} não corresponde ao draft {self.draft.rows}x{self.draft.cols}"
            )
        if not np.array_equal(self.layout.kind, self.draft.as_array()):
            raise InvalidScene("Layout não foi derivado deste draft")
        if int(self.repeat) < 1:
            raise InvalidScene(f"repeat deve ser >= 1: {self.repeat}")
        if self.floor_height is None:
            floor = min(self.warp.min_height, self.weft.min_height) - FLOOR_EPSILON
            object.__setattr__(self, 'floor_height', floor)
        length, index = hidden_runs(self.draft)
        length.flags.writeable = False
        index.flags.writeable = False
        object.__setattr__(self, 'hidden_length', length)
        object.__setattr__(self, 'hidden_index', index)

    @property
    def max_cells(self) -> int:
        """Maior dimensão da repetição em células no mapa inteiro."""
        return self.repeat * max(self.draft.rows, self.draft.cols)


def split_seed(seed: int, count: int = 3):
    """Sub-sementes fixas derivadas da semente mestre."""
    state = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def build_scene(draft: WeavingDraft, params: FabricParams, seed: int = DEFAULT_SEED) -> FabricScene:
    """
    Constrói a cena a partir do draft e dos parâmetros do tecido.

    Raises:
        InvalidScene: Se o draft for inválido
    """
    try:
        layout = extract_segments(draft)
    except InvalidDraft as e:
        raise InvalidScene(str(e)) from e

    sliding_seed, n1_seed, n2_seed = split_seed(seed)

    sliding = None
    if params.sliding.k_sliding > 0.0:
        frequency = int(params.sliding.frequency)
        sliding = SlidingParams(
            k_sliding=params.sliding.k_sliding,
            noise=NoiseField(sliding_seed, period=frequency, dimension=1),
            frequency=frequency,
            warp_enabled=params.sliding.warp_enabled,
            weft_enabled=params.sliding.weft_enabled,
            coverage=params.sliding.coverage,
        )

    flyaway = None
    if params.flyaway.enabled:
        frequency = int(params.flyaway.frequency)
        flyaway = FlyawayParams(
            threshold=params.flyaway.threshold,
            k_v=params.flyaway.k_v,
            n1=NoiseField(n1_seed, period=frequency, dimension=2),
            n2=NoiseField(n2_seed, period=frequency, dimension=2),
            frequency=frequency,
            weight=params.flyaway.weight,
        )

    return FabricScene(
        draft=draft,
        layout=layout,
        warp=params.warp,
        weft=params.weft,
        sliding=sliding,
        flyaway=flyaway,
        repeat=int(params.repeat),
        seed=int(seed),
        warp_tint=params.warp_tint,
        weft_tint=params.weft_tint,
    )


def scene_to_dict(scene: FabricScene) -> Dict[str, Any]:
    """Representação canônica de todos os parâmetros da cena."""
    data: Dict[str, Any] = {
        'draft': [list(row) for row in scene.draft.cells],
        'warp': scene.warp.to_dict(),
        'weft': scene.weft.to_dict(),
        'repeat': scene.repeat,
        'seed': scene.seed,
        'floor_height': scene.floor_height,
        'warp_tint': scene.warp_tint,
        'weft_tint': scene.weft_tint,
        'sliding': None,
        'flyaway': None,
    }
    if scene.sliding is not None:
        s = scene.sliding
        data['sliding'] = {
            'k_sliding': s.k_sliding,
            'frequency': s.frequency,
            'warp_enabled': s.warp_enabled,
            'weft_enabled': s.weft_enabled,
            'coverage': s.coverage,
            'noise_seed': s.noise.seed,
        }
    if scene.flyaway is not None:
        f = scene.flyaway
        data['flyaway'] = {
            'threshold': f.threshold,
            'k_v': f.k_v,
            'frequency': f.frequency,
            'weight': f.weight,
            'n1_seed': f.n1.seed,
            'n2_seed': f.n2.seed,
        }
    return data


def scene_hash(scene: FabricScene) -> str:
    """SHA-256 da representação canônica em JSON."""
    canonical = json.dumps(scene_to_dict(scene), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
