"""
Bake dos mapas ladrilháveis (normal, orientação, altura, cobertura/ID) e
leitura/escrita com codificações documentadas.
"""

import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, Any, Optional

import numpy as np
from PIL import Image

from .errors import ResolutionError, FormatError, InvalidScene
from .models import MapSet, MAX_PLIES
from .scene import FabricScene, scene_hash
from .yarn_model import query_points

ENCODING_VERSION = 1
WARP_ID_BASE = 1
WEFT_ID_BASE = 129

# linhas por tarefa; fixo para que o resultado não dependa do número de workers
BAND_ROWS = 16

MAP_FILES = {
    'normal': 'normal.png',
    'orientation': 'orientation.png',
    'height_png': 'height.png',
    'height_pfm': 'height.pfm',
    'coverage': 'coverage.png',
    'sidecar': 'maps.json',
}
MANIFEST_FILE = 'manifest.json'


def encode_unit_vectors(vectors: np.ndarray) -> np.ndarray:
    """v -> round(255 * (v * 0.5 + 0.5)) em uint8."""
    return np.clip(np.round(255.0 * (np.asarray(vectors) * 0.5 + 0.5)), 0, 255).astype(np.uint8)


def decode_unit_vectors(pixels: np.ndarray) -> np.ndarray:
    return (np.asarray(pixels, dtype=np.float32) / 255.0) * 2.0 - 1.0


def encode_height16(height: np.ndarray, h_min: float, h_max: float) -> np.ndarray:
    """Altura normalizada por (min, max) em 16 bits."""
    span = h_max - h_min
    if span <= 0.0:
        return np.zeros(height.shape, dtype=np.uint16)
    scaled = (np.asarray(height, dtype=np.float64) - h_min) / span
    return np.clip(np.round(scaled * 65535.0), 0, 65535).astype(np.uint16)


def coverage_ids(covered: np.ndarray, is_warp: np.ndarray, ply: np.ndarray) -> np.ndarray:
    """0 = vão, 1 + k = ply k do urdume, 129 + k = ply k da trama."""
    ids = np.where(is_warp, WARP_ID_BASE + ply, WEFT_ID_BASE + ply)
    return np.where(covered, ids, 0).astype(np.uint8)


def coverage_palette() -> list:
    """Paleta do PNG indexado: vão preto, urdume em vermelhos, trama em azuis."""
    palette = [0, 0, 0] * 256
    for k in range(MAX_PLIES):
        shade = 255 - k * 10
        palette[3 * (WARP_ID_BASE + k):3 * (WARP_ID_BASE + k) + 3] = [shade, 40, 40]
        palette[3 * (WEFT_ID_BASE + k):3 * (WEFT_ID_BASE + k) + 3] = [40, 40, shade]
    return palette


def _pixel_centers(resolution: int, start: int, stop: int, offset: float = 0.5):
    cols = (np.arange(resolution, dtype=np.float64) + offset) / resolution
    rows = (np.arange(start, stop, dtype=np.float64) + offset) / resolution
    return np.meshgrid(cols, rows)


def _bake_band(scene: FabricScene, resolution: int, start: int, stop: int, supersample: bool):
    xs, ys = _pixel_centers(resolution, start, stop)
    center = query_points(xs, ys, scene)
    if not supersample:
        return center.normal, center.orientation, center.height, center

    normal = np.zeros_like(center.normal)
    orientation = np.zeros_like(center.orientation)
    height = np.zeros_like(center.height)
    for dx in (-0.25, 0.25):
        for dy in (-0.25, 0.25):
            sub = query_points(xs + dx / resolution, ys + dy / resolution, scene)
            normal += sub.normal
            orientation += sub.orientation
            height += sub.height
    normal /= np.maximum(np.linalg.norm(normal, axis=-1, keepdims=True), 1e-12)
    norm = np.linalg.norm(orientation, axis=-1, keepdims=True)
    # orientações opostas podem se anular; mantém a do centro
    orientation = np.where(norm > 1e-6, orientation / np.maximum(norm, 1e-12), center.orientation)
    return normal, orientation, height / 4.0, center


def bake_maps(
    scene: FabricScene,
    resolution: int,
    supersample: bool = False,
    workers: Optional[int] = None
) -> MapSet:
    """
    Avalia a cena numa grade de pixels e gera os mapas.

    O pixel (linha i, coluna j) é amostrado no centro UV
    ((j + 0.5)/res, (i + 0.5)/res). As faixas de linhas são independentes do
    número de workers, portanto o resultado é bit a bit determinístico.

    Args:
        scene: Cena válida
        resolution: Lado do mapa em pixels (potência de dois)
        supersample: Média de 4 sub-amostras por pixel
        workers: Número de threads (None = padrão do executor)

    Raises:
        ResolutionError: Resolução não potência de dois ou menor que a repetição
        InvalidScene: Cena inconsistente
    """
    if not isinstance(scene, FabricScene):
        raise InvalidScene("bake_maps exige uma FabricScene")
    if resolution < 1 or resolution & (resolution - 1):
        raise ResolutionError(f"Resolução deve ser potência de dois: {resolution}")
    if resolution < scene.max_cells:
        raise ResolutionError(
            f"Resolução {resolution} menor que a repetição ({scene.max_cells} células)"
        )

    normal = np.zeros((resolution, resolution, 3), dtype=np.float32)
    orientation = np.zeros((resolution, resolution, 3), dtype=np.float32)
    height = np.zeros((resolution, resolution), dtype=np.float32)
    coverage = np.zeros((resolution, resolution), dtype=np.uint8)

    def work(start: int):
        stop = min(start + BAND_ROWS, resolution)
        n, t, h, center = _bake_band(scene, resolution, start, stop, supersample)
        normal[start:stop] = n
        orientation[start:stop] = t
        height[start:stop] = h
        coverage[start:stop] = coverage_ids(center.covered, center.is_warp, center.ply)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        list(executor.map(work, range(0, resolution, BAND_ROWS)))

    metadata = {
        'height_min': float(height.min()),
        'height_max': float(height.max()),
        'seed': scene.seed,
        'scene_hash': scene_hash(scene),
        'encoding_version': ENCODING_VERSION,
        'resolution': resolution,
        'supersample': supersample,
        'encodings': {
            'normal': 'rgb8: round(255*(v*0.5+0.5)), surface frame z-up',
            'orientation': 'rgb8: round(255*(v*0.5+0.5)), surface frame z-up',
            'height_png': 'gray16: round(65535*(h-height_min)/(height_max-height_min))',
            'height_pfm': 'float32 little-endian, scale -1.0, rows bottom-to-top',
            'coverage': f'indexed8: 0 gap, {WARP_ID_BASE}+k warp ply k, {WEFT_ID_BASE}+k weft ply k',
        },
    }
    return MapSet(
        resolution=resolution,
        normal=normal,
        orientation=orientation,
        height=height,
        coverage=coverage,
        metadata=metadata,
    )


def write_pfm(path: Path, data: np.ndarray) -> None:
    """PFM de um canal, little-endian (escala -1.0), linhas de baixo para cima."""
    data = np.asarray(data, dtype='<f4')
    h, w = data.shape
    with open(path, 'wb') as f:
        f.write(f"Pf\n{w} {h}\n-1.0\n".encode('ascii'))
        f.write(np.ascontiguousarray(np.flipud(data)).tobytes())


def read_pfm(path: Path) -> np.ndarray:
    """Lê um PFM de um canal escrito por write_pfm (ou qualquer PFM 'Pf')."""
    with open(path, 'rb') as f:
        content = f.read()
    try:
        parts = content.split(b'\n', 3)
        magic, dims, scale, payload = parts[0], parts[1], parts[2], parts[3]
        if magic.strip() != b'Pf':
            raise FormatError(f"PFM de um canal esperado em {path}")
        w, h = (int(v) for v in dims.split())
        scale_value = float(scale)
    except (ValueError, IndexError) as e:
        raise FormatError(f"Cabeçalho PFM inválido em {path}: {e}") from e
    dtype = '<f4' if scale_value < 0 else '>f4'
    if len(payload) != w * h * 4:
        raise FormatError(f"Tamanho de dados PFM inesperado em {path}")
    data = np.frombuffer(payload, dtype=dtype).reshape(h, w)
    return np.flipud(data).astype(np.float32)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_maps(maps: MapSet, directory, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Grava os mapas, o sidecar JSON e o manifesto com checksums.

    Args:
        maps: Mapas assados
        directory: Diretório de saída (criado se necessário)
        extra: Campos adicionais do manifesto (ex.: configuração efetiva)

    Returns:
        Manifesto (caminhos relativos e sha256)

    Raises:
        OSError: Falha de escrita
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    meta = maps.metadata

    Image.fromarray(encode_unit_vectors(maps.normal)).save(out / MAP_FILES['normal'])
    Image.fromarray(encode_unit_vectors(maps.orientation)).save(out / MAP_FILES['orientation'])
    Image.fromarray(encode_height16(maps.height, meta['height_min'], meta['height_max'])).save(
        out / MAP_FILES['height_png']
    )
    write_pfm(out / MAP_FILES['height_pfm'], maps.height)

    indexed = Image.fromarray(maps.coverage)
    indexed.putpalette(coverage_palette())
    indexed.save(out / MAP_FILES['coverage'])

    with open(out / MAP_FILES['sidecar'], 'w', encoding='utf-8') as f:
        json.dump(meta, f, indent=2, sort_keys=True)

    manifest: Dict[str, Any] = {
        'encoding_version': ENCODING_VERSION,
        'files': [
            {'path': name, 'sha256': _sha256(out / name)}
            for name in sorted(MAP_FILES.values())
        ],
    }
    if extra:
        manifest.update(extra)
    with open(out / MANIFEST_FILE, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)

    print(f"📁 {len(manifest['files'])} arquivos de mapa gravados em {out}", file=sys.stderr)
    return manifest


def read_maps(directory) -> MapSet:
    """
    Lê mapas gravados por write_maps (inverso até a quantização 8/16 bits).

    Raises:
        FormatError: Sidecar ausente, corrompido ou de outra versão
        OSError: Falha de leitura
    """
    src = Path(directory)
    sidecar = src / MAP_FILES['sidecar']
    if not sidecar.exists():
        raise FormatError(f"Sidecar não encontrado: {sidecar}")
    try:
        with open(sidecar, 'r', encoding='utf-8') as f:
            meta = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"Sidecar corrompido: {e}") from e
    if not isinstance(meta, dict):
        raise FormatError("Sidecar deve ser um objeto JSON")
    if meta.get('encoding_version') != ENCODING_VERSION:
        raise FormatError(
            f"encoding_version {meta.get('encoding_version')!r} diferente de {ENCODING_VERSION}"
        )
    for key in ('height_min', 'height_max', 'seed', 'scene_hash'):
        if key not in meta:
            raise FormatError(f"Sidecar sem o campo '{key}'")

    with Image.open(src / MAP_FILES['normal']) as img:
        normal = decode_unit_vectors(np.array(img.convert('RGB')))
    with Image.open(src / MAP_FILES['orientation']) as img:
        orientation = decode_unit_vectors(np.array(img.convert('RGB')))
    with Image.open(src / MAP_FILES['coverage']) as img:
        if img.mode != 'P':
            raise FormatError("Mapa de cobertura deve ser PNG indexado")
        coverage = np.array(img, dtype=np.uint8)
    height = read_pfm(src / MAP_FILES['height_pfm'])

    resolution = normal.shape[0]
    if not (normal.shape[:2] == orientation.shape[:2] == height.shape == coverage.shape == (resolution, resolution)):
        raise FormatError("Mapas com resoluções diferentes")

    return MapSet(
        resolution=resolution,
        normal=normal,
        orientation=orientation,
        height=height,
        coverage=coverage,
        metadata=meta,
    )


def read_height16(directory) -> np.ndarray:
    """Altura reconstruída do PNG de 16 bits (quantizada)."""
    src = Path(directory)
    with open(src / MAP_FILES['sidecar'], 'r', encoding='utf-8') as f:
        meta = json.load(f)
    with Image.open(src / MAP_FILES['height_png']) as img:
        raw = np.array(img, dtype=np.float64)
    span = meta['height_max'] - meta['height_min']
    return meta['height_min'] + raw / 65535.0 * span
