"""
Ruído de gradiente periódico e as irregularidades globais do tecido:
deslizamento de fios (warp bijetivo da coordenada transversal) e campo de
orientação das fibras soltas (flyaway).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

_TABLE_SIZE = 256


def _fade(t):
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


@dataclass(frozen=True)
class NoiseField:
    """
    Ruído de gradiente com semente e rede periódica.

    As tabelas (permutação e gradientes) saem de numpy.random.default_rng,
    portanto o campo é determinístico em (seed, entrada).
    """
    seed: int
    period: int = 256
    dimension: int = 1
    _perm: np.ndarray = field(init=False, repr=False, compare=False)
    _grad: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"Dimensão de ruído deve ser 1 ou 2: {self.dimension}")
        if self.period < 1:
            raise ValueError(f"Período deve ser >= 1: {self.period}")
        rng = np.random.default_rng(int(self.seed) & 0xFFFFFFFFFFFFFFFF)
        perm = rng.permutation(_TABLE_SIZE).astype(np.int64)
        if self.dimension == 1:
            grad = rng.uniform(-1.0, 1.0, _TABLE_SIZE)
        else:
            angles = rng.uniform(0.0, 2.0 * math.pi, _TABLE_SIZE)
            grad = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        perm.flags.writeable = False
        grad.flags.writeable = False
        object.__setattr__(self, '_perm', perm)
        object.__setattr__(self, '_grad', grad)

    def _hash(self, *indices) -> np.ndarray:
        h = np.zeros(np.broadcast(*indices).shape, dtype=np.int64)
        for index in indices:
            h = self._perm[(h + index) & (_TABLE_SIZE - 1)]
        return h


def noise1(x, f: NoiseField, channel=0):
    """
    Ruído de gradiente 1D periódico em [-1, 1].

    Args:
        x: Coordenada (escalar ou array) em unidades da rede
        f: Campo de ruído 1D
        channel: Inteiro misturado ao hash (descorrelaciona fios diferentes)
    """
    if f.dimension != 1:
        raise ValueError("noise1 exige um NoiseField 1D")
    x = np.asarray(x, dtype=np.float64)
    base = np.floor(x)
    t = x - base
    i0 = np.mod(base.astype(np.int64), f.period)
    i1 = np.mod(i0 + 1, f.period)
    channel = np.asarray(channel, dtype=np.int64)
    g0 = f._grad[f._hash(i0, channel)]
    g1 = f._grad[f._hash(i1, channel)]
    s = _fade(t)
    value = 2.0 * ((1.0 - s) * g0 * t + s * g1 * (t - 1.0))
    value = np.clip(value, -1.0, 1.0)
    return float(value) if value.ndim == 0 else value


def noise2(p, f: NoiseField):
    """
    Ruído de gradiente 2D periódico nos dois eixos, em [-1, 1].

    Args:
        p: Ponto(s) com forma (..., 2) em unidades da rede
        f: Campo de ruído 2D
    """
    if f.dimension != 2:
        raise ValueError("noise2 exige um NoiseField 2D")
    p = np.asarray(p, dtype=np.float64)
    x, y = p[..., 0], p[..., 1]
    bx, by = np.floor(x), np.floor(y)
    tx, ty = x - bx, y - by
    ix0 = np.mod(bx.astype(np.int64), f.period)
    iy0 = np.mod(by.astype(np.int64), f.period)
    ix1 = np.mod(ix0 + 1, f.period)
    iy1 = np.mod(iy0 + 1, f.period)

    def corner(ix, iy, dx, dy):
        g = f._grad[f._hash(ix, iy)]
        return g[..., 0] * dx + g[..., 1] * dy

    n00 = corner(ix0, iy0, tx, ty)
    n10 = corner(ix1, iy0, tx - 1.0, ty)
    n01 = corner(ix0, iy1, tx, ty - 1.0)
    n11 = corner(ix1, iy1, tx - 1.0, ty - 1.0)
    sx, sy = _fade(tx), _fade(ty)
    nx0 = n00 + sx * (n10 - n00)
    nx1 = n01 + sx * (n11 - n01)
    value = math.sqrt(2.0) * (nx0 + sy * (nx1 - nx0))
    value = np.clip(value, -1.0, 1.0)
    return float(value) if value.ndim == 0 else value


def sliding_window(s, coverage: float):
    """
    Janela C1 em fase: (1 - q^2)^2 numa faixa de largura `coverage` em torno
    do meio de cada ciclo de ruído, zero fora dela. coverage = 1 desliga a janela.
    """
    s = np.asarray(s, dtype=np.float64)
    if coverage >= 1.0:
        return np.ones_like(s)
    q = (np.mod(s, 1.0) - 0.5) / (0.5 * coverage)
    return np.where(np.abs(q) < 1.0, (1.0 - q * q) ** 2, 0.0)


@dataclass(frozen=True)
class SlidingParams:
    """
    Deslizamento de fios: força k_sliding e ruído 1D ao longo do fio.

    Só a fração `coverage` de cada ciclo do ruído desliza; no resto P = 0 e
    o mapa é a identidade exata.
    """
    k_sliding: float
    noise: NoiseField
    frequency: int = 2
    warp_enabled: bool = True
    weft_enabled: bool = True
    coverage: float = 0.2

    def __post_init__(self):
        # |P| <= 1, então k < 1 garante k*sup|P| < 1
        if not 0.0 <= self.k_sliding < 1.0:
            raise ValueError(f"k_sliding fora de [0, 1): {self.k_sliding}")
        if not 0.0 < self.coverage <= 1.0:
            raise ValueError(f"Cobertura do deslizamento fora de (0, 1]: {self.coverage}")
        if self.noise.dimension != 1:
            raise ValueError("Deslizamento exige ruído 1D")

    def profile(self, x, channel=0):
        """P(x) com x em unidades de repetição ao longo do fio."""
        s = np.asarray(x, dtype=np.float64) * self.frequency
        value = np.asarray(noise1(s, self.noise, channel)) * sliding_window(s, self.coverage)
        return float(value) if value.ndim == 0 else value


def warp_cross_coordinate(y, p, k):
    """Mapa direto para um valor de ruído P já avaliado."""
    y = np.asarray(y, dtype=np.float64)
    kp = k * np.asarray(p, dtype=np.float64)
    y_s = 0.5 + (y - 0.5) * (1.0 - np.abs(kp))
    # k*P = 0 é a identidade exata, sem o arredondamento de (y - 0.5) + 0.5
    return np.where(kp == 0.0, y, y_s ** np.exp(kp))


def unwarp_cross_coordinate(y_r, p, k):
    """Inverso algébrico de warp_cross_coordinate (sem clamp)."""
    y_r = np.asarray(y_r, dtype=np.float64)
    kp = k * np.asarray(p, dtype=np.float64)
    y_s = y_r ** np.exp(-kp)
    return np.where(kp == 0.0, y_r, 0.5 + (y_s - 0.5) / (1.0 - np.abs(kp)))


def _check_open_unit(value, name: str) -> None:
    value = np.asarray(value)
    if np.any(~((value > 0.0) & (value < 1.0))):
        raise DomainError(f"{name} fora de (0, 1)")


def slide_forward(y, x, sp: SlidingParams, channel=0):
    """
    Posição deslizada y_r da coordenada transversal y.

    Raises:
        DomainError: Se y não estiver em (0, 1)
    """
    _check_open_unit(y, 'y')
    result = warp_cross_coordinate(np.asarray(y, dtype=np.float64), sp.profile(x, channel), sp.k_sliding)
    return float(result) if np.ndim(result) == 0 else result


def slide_inverse(y_r, x, sp: SlidingParams, channel=0):
    """
    Recupera a coordenada regular a partir da deslizada.

    O resultado pode cair fora de (0, 1) onde o mapa direto comprimiu a
    faixa; o chamador interpreta isso como região do fio de baixo exposta.

    Raises:
        DomainError: Se y_r não estiver em (0, 1)
    """
    _check_open_unit(y_r, 'y_r')
    result = unwarp_cross_coordinate(np.asarray(y_r, dtype=np.float64), sp.profile(x, channel), sp.k_sliding)
    return float(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True)
class FlyawayParams:
    """Camada de fibras soltas construída de dois ruídos 2D."""
    threshold: float
    k_v: float
    n1: NoiseField
    n2: NoiseField
    frequency: int = 8
    weight: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.threshold < 1.0:
            raise ValueError(f"Limiar fora de [0, 1): {self.threshold}")
        if not 0.0 <= self.k_v <= 1.0:
            raise ValueError(f"k_v fora de [0, 1]: {self.k_v}")
        if self.n1.dimension != 2 or self.n2.dimension != 2:
            raise ValueError("Flyaway exige dois ruídos 2D")


@dataclass(frozen=True)
class FlyawaySample:
    """Presença e orientação das fibras soltas (escalares ou arrays)."""
    present: np.ndarray
    orientation: np.ndarray


def flyaway_orientation(p, fp: FlyawayParams) -> FlyawaySample:
    """
    Campo de orientação das fibras soltas.

    N1 decide presença (|N1| > limiar) e azimute (pi*N1); N2 decide a
    elevação ((pi/2)*k_v*N2). Pontos ausentes recebem present=False.

    Args:
        p: Ponto(s) (..., 2) em unidades de repetição
        fp: Parâmetros de flyaway
    """
    q = np.asarray(p, dtype=np.float64) * fp.frequency
    a = np.asarray(noise2(q, fp.n1))
    b = np.asarray(noise2(q, fp.n2))
    present = np.abs(a) > fp.threshold
    theta = math.pi * a
    elevation = 0.5 * math.pi * fp.k_v * b
    orientation = np.stack([
        np.cos(elevation) * np.cos(theta),
        np.cos(elevation) * np.sin(theta),
        np.sin(elevation),
    ], axis=-1)
    return FlyawaySample(present=present, orientation=orientation)
