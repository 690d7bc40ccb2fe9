"""
Pré-visualização sombreada: microestrutura procedural + albedo externo sob
luz direcional, com lóbulo especular anisotrópico de fibra (estilo
Kajiya-Kay) e camada opcional de fibras soltas.
"""

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, ResolutionError, InvalidScene
from .irregularity import flyaway_orientation, FlyawaySample
from .models import AlbedoImage, ShadingParams, SurfaceSample, SampleBatch
from .scene import FabricScene
from .yarn_model import query_points

BAND_ROWS = 16
GAP_INTENSITY = 0.3

Color = Tuple[float, float, float]


def srgb_to_linear(values):
    values = np.asarray(values, dtype=np.float64)
    return np.where(values <= 0.04045, values / 12.92, ((values + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(values):
    values = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.where(values <= 0.0031308, values * 12.92, 1.055 * values ** (1.0 / 2.4) - 0.055)


def parse_hex_color(text: str) -> Color:
    """'#rrggbb' (sRGB) -> cor linear."""
    value = text.strip().lstrip('#')
    if len(value) != 6:
        raise ValueError(f"Cor hexadecimal inválida: {text!r}")
    try:
        srgb = [int(value[i:i + 2], 16) / 255.0 for i in (0, 2, 4)]
    except ValueError as e:
        raise ValueError(f"Cor hexadecimal inválida: {text!r}") from e
    return tuple(float(c) for c in srgb_to_linear(srgb))


def direction_from_angles(azimuth_deg: float, elevation_deg: float) -> Color:
    """Direção unitária a partir de azimute (a partir de +x) e elevação em graus."""
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    return (math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el))


_PNG_SIGNATURE = b'\x89PNG\r\n\x1a\n'
# tipos de cor PNG cujas amostras de 16 bits o Pillow reduz a 8 bits
_PNG_COLOR_TYPES_TRUNCATED = {2: 'RGB', 4: 'cinza+alfa', 6: 'RGBA'}


def _png_header(path: Path) -> Optional[Tuple[int, int]]:
    """(profundidade de bits, tipo de cor) do IHDR, ou None se não for PNG."""
    with open(path, 'rb') as file:
        head = file.read(26)
    if len(head) < 26 or not head.startswith(_PNG_SIGNATURE) or head[12:16] != b'IHDR':
        return None
    return head[24], head[25]


def load_albedo(path) -> AlbedoImage:
    """
    Lê um albedo PNG (8 ou 16 bits).

    Entradas de 8 bits são sRGB e são linearizadas; cinza de 16 bits é lido
    como linear. PNG colorido de 16 bits é recusado.

    Raises:
        FileNotFoundError: Arquivo ausente
        FormatError: Arquivo que não é uma imagem suportada
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Albedo não encontrado: {path}")
    header = _png_header(path)
    if header is not None and header[0] == 16 and header[1] in _PNG_COLOR_TYPES_TRUNCATED:
        kind = _PNG_COLOR_TYPES_TRUNCATED[header[1]]
        raise FormatError(
            f"PNG {kind} de 16 bits não é suportado (seria lido com 8 bits): {path}; "
            "use PNG de 8 bits sRGB ou cinza de 16 bits"
        )
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode in ('I;16', 'I;16B', 'I;16L', 'I'):
                gray = np.array(img, dtype=np.float64) / 65535.0
                pixels = np.repeat(gray[..., None], 3, axis=-1)
            else:
                srgb = np.array(img.convert('RGB'), dtype=np.float64) / 255.0
                pixels = srgb_to_linear(srgb)
    except UnidentifiedImageError as e:
        raise FormatError(f"Albedo não é uma imagem suportada: {path}") from e
    return AlbedoImage(pixels)


def solid_albedo(color: Color) -> AlbedoImage:
    """Albedo de cor única (linear)."""
    return AlbedoImage(np.array(color, dtype=np.float64).reshape(1, 1, 3))


def stripes_albedo(first: Color, second: Color, period: int, size: int = 64) -> AlbedoImage:
    """Listras verticais: `first` na primeira metade de cada período de colunas."""
    if period < 2:
        raise ValueError(f"Período das listras deve ser >= 2: {period}")
    cols = np.arange(size)
    pick = (cols % period) < period // 2
    row = np.where(pick[:, None], np.array(first), np.array(second))
    return AlbedoImage(np.repeat(row[None, :, :], size, axis=0))


def checks_albedo(first: Color, second: Color, period: int, size: int = 64) -> AlbedoImage:
    """Xadrez com casas de period/2 pixels."""
    if period < 2:
        raise ValueError(f"Período do xadrez deve ser >= 2: {period}")
    half = period // 2
    i, j = np.meshgrid(np.arange(size), np.arange(size), indexing='ij')
    pick = ((i // half) + (j // half)) % 2 == 0
    return AlbedoImage(np.where(pick[..., None], np.array(first), np.array(second)))


def _sin_power(direction: np.ndarray, half_vector: np.ndarray, exponent: float) -> np.ndarray:
    cos_angle = np.clip(np.sum(direction * half_vector, axis=-1), -1.0, 1.0)
    sin_angle = np.sqrt(np.maximum(0.0, 1.0 - cos_angle * cos_angle))
    return sin_angle ** exponent


def shade_batch(
    normal: np.ndarray,
    orientation: np.ndarray,
    covered: np.ndarray,
    albedo: np.ndarray,
    sp: ShadingParams,
    flyaway: Optional[FlyawaySample] = None
) -> np.ndarray:
    """
    Sombreamento vetorizado; retorna RGB linear já com exposição e clamp.

    Vãos recebem só o difuso do piso a 30% de intensidade.
    """
    light = np.asarray(sp.light_dir)
    view = np.asarray(sp.view_dir)
    half_vector = light + view
    half_vector = half_vector / max(np.linalg.norm(half_vector), 1e-12)
    exponent = 2.0 / sp.roughness

    n_dot_l = np.sum(normal * light, axis=-1)
    lit = np.maximum(0.0, n_dot_l)
    spec = np.where(n_dot_l > 0.0, _sin_power(orientation, half_vector, exponent), 0.0)

    surface = sp.k_d * albedo * lit[..., None] + sp.k_s * spec[..., None]
    floor = GAP_INTENSITY * sp.k_d * albedo * max(0.0, float(light[2]))
    color = np.where(covered[..., None], surface, floor)

    if flyaway is not None and sp.flyaway_weight > 0.0 and light[2] > 0.0:
        fly = sp.flyaway_weight * _sin_power(flyaway.orientation, half_vector, exponent)
        color = color + np.where(flyaway.present, fly, 0.0)[..., None]

    return np.clip(color * sp.exposure, 0.0, 1.0)


def shade(
    s: Union[SurfaceSample, SampleBatch],
    albedo,
    sp: ShadingParams,
    flyaway: Optional[FlyawaySample] = None
) -> np.ndarray:
    """
    Cor linear de uma amostra (ou lote): k_d*albedo*max(0, n.l) + k_s*spec,
    spec = sin(angulo(t, h))^(2/roughness).
    """
    if isinstance(s, SurfaceSample):
        return shade_batch(
            np.asarray(s.normal, dtype=np.float64),
            np.asarray(s.orientation, dtype=np.float64),
            np.asarray(s.covered),
            np.asarray(albedo, dtype=np.float64),
            sp,
            flyaway,
        )
    return shade_batch(s.normal, s.orientation, s.covered, np.asarray(albedo, dtype=np.float64), sp, flyaway)


def _tint_albedo(scene: FabricScene, is_warp: np.ndarray) -> np.ndarray:
    warp = np.array(parse_hex_color(scene.warp_tint))
    weft = np.array(parse_hex_color(scene.weft_tint))
    return np.where(is_warp[..., None], warp, weft)


def render_plane(
    scene: FabricScene,
    albedo: Optional[AlbedoImage],
    sp: ShadingParams,
    resolution: int,
    workers: Optional[int] = None
) -> np.ndarray:
    """
    Renderiza um plano ortográfico visto de cima.

    Args:
        scene: Cena do tecido
        albedo: Textura macro (None = cores de urdume/trama dos parâmetros)
        sp: Parâmetros de sombreamento
        resolution: Lado da imagem em pixels
        workers: Número de threads

    Returns:
        Imagem (res, res, 3) em RGB linear dentro de [0, 1]
    """
    if not isinstance(scene, FabricScene):
        raise InvalidScene("render_plane exige uma FabricScene")
    if resolution < 1:
        raise ResolutionError(f"Resolução inválida: {resolution}")

    image = np.zeros((resolution, resolution, 3), dtype=np.float64)
    axis = (np.arange(resolution, dtype=np.float64) + 0.5) / resolution

    def work(start: int):
        stop = min(start + BAND_ROWS, resolution)
        xs, ys = np.meshgrid(axis, axis[start:stop])
        batch = query_points(xs, ys, scene)
        if albedo is None:
            color = _tint_albedo(scene, batch.is_warp)
        else:
            color = albedo.sample(xs, ys)
        fly = None
        if scene.flyaway is not None:
            local = np.stack([np.mod(xs * scene.repeat, 1.0), np.mod(ys * scene.repeat, 1.0)], axis=-1)
            fly = flyaway_orientation(local, scene.flyaway)
        image[start:stop] = shade(batch, color, sp, fly)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        list(executor.map(work, range(0, resolution, BAND_ROWS)))
    return image


def encode_srgb8(image: np.ndarray) -> np.ndarray:
    return np.round(linear_to_srgb(image) * 255.0).astype(np.uint8)


def write_image(path, image: np.ndarray) -> Path:
    """
    Grava a imagem linear como PNG sRGB de 8 bits.

    Raises:
        OSError: Falha de escrita
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(encode_srgb8(image)).save(path)
    print(f"🖼️  Imagem gravada em {path}", file=sys.stderr)
    return path


def shading_from_settings(settings, light: Sequence[float], view: Sequence[float] = (0.0, 0.0, 1.0),
                          flyaway_weight: float = 0.2, exposure: float = 1.0) -> ShadingParams:
    """Combina o subconjunto previsto pelo designer com luz, câmera e exposição."""
    return ShadingParams(
        roughness=settings.roughness,
        k_s=settings.k_s,
        k_d=settings.k_d,
        flyaway_weight=flyaway_weight,
        light_dir=tuple(light),
        view_dir=tuple(view),
        exposure=exposure,
    )
