"""
Testes do bake de mapas e das codificações em disco.
"""

import hashlib
import json

import numpy as np
import pytest

from src.baker import (
    MAP_FILES, MANIFEST_FILE, WARP_ID_BASE, WEFT_ID_BASE, bake_maps, encode_height16,
    encode_unit_vectors, read_height16, read_maps, read_pfm, write_maps, write_pfm
)
from src.draft import generate_pattern
from src.errors import FormatError, InvalidScene, ResolutionError
from src.models import FabricParams, FlyawaySettings, SlidingSettings, YarnParams
from src.presets import default_params, default_pattern
from src.scene import build_scene


@pytest.fixture
def twill_scene(twill_draft):
    params = FabricParams(
        family='twill',
        warp=YarnParams(r=0.12, r_ply=0.2, alpha=2.0, psi=0.4, plies=2),
        weft=YarnParams(r=0.12, r_ply=0.2, alpha=2.0, psi=0.4, plies=2),
        sliding=SlidingSettings(k_sliding=0.3, frequency=4),
        flyaway=FlyawaySettings(enabled=True),
        repeat=4,
    )
    return build_scene(twill_draft, params, seed=21)


def test_plain_cell_centers_map_to_flat_normal(plain_scene):
    maps = bake_maps(plain_scene, 8)
    pixels = encode_unit_vectors(maps.normal).astype(int)
    assert np.all(np.abs(pixels - [128, 128, 255]) <= 1)


def test_plain_coverage_is_checkerboard(plain_scene):
    maps = bake_maps(plain_scene, 8)
    i, j = np.meshgrid(np.arange(8), np.arange(8), indexing='ij')
    expected = np.where((i + j) % 2 == 0, WARP_ID_BASE, WEFT_ID_BASE)
    assert np.array_equal(maps.coverage, expected)


@pytest.mark.parametrize("resolution", [12, 4, 0])
def test_resolution_errors(plain_scene, resolution):
    with pytest.raises(ResolutionError):
        bake_maps(plain_scene, resolution)


def test_bake_requires_scene():
    with pytest.raises(InvalidScene):
        bake_maps("cena", 8)


def test_worker_count_does_not_change_maps(twill_scene):
    one = bake_maps(twill_scene, 64, workers=1)
    many = bake_maps(twill_scene, 64, workers=8)
    for name in ('normal', 'orientation', 'height', 'coverage'):
        assert np.array_equal(getattr(one, name), getattr(many, name))


def test_maps_tile_with_draft_period(twill_scene):
    maps = bake_maps(twill_scene, 64)
    # 64 px / repeat 4 = 16 px por repetição do draft
    for name in ('normal', 'orientation', 'height', 'coverage'):
        data = getattr(maps, name)
        assert np.array_equal(data, np.roll(data, 16, axis=1))
        assert np.array_equal(data, np.roll(data, 16, axis=0))


def test_covered_pixels_have_unit_vectors(twill_scene):
    maps = bake_maps(twill_scene, 64)
    covered = maps.coverage > 0
    assert covered.any() and (~covered).any()
    assert np.allclose(np.linalg.norm(maps.normal, axis=-1), 1.0, atol=1e-5)
    assert np.allclose(np.linalg.norm(maps.orientation[covered], axis=-1), 1.0, atol=1e-5)
    ids = set(np.unique(maps.coverage).tolist())
    assert ids <= {0, WARP_ID_BASE, WARP_ID_BASE + 1, WEFT_ID_BASE, WEFT_ID_BASE + 1}


def test_supersample_keeps_unit_normals(twill_scene):
    maps = bake_maps(twill_scene, 32, supersample=True)
    assert np.allclose(np.linalg.norm(maps.normal, axis=-1), 1.0, atol=1e-5)
    assert maps.metadata['supersample'] is True


def test_metadata(twill_scene):
    maps = bake_maps(twill_scene, 32)
    meta = maps.metadata
    assert meta['seed'] == 21
    assert meta['encoding_version'] == 1
    assert meta['height_min'] == pytest.approx(float(maps.height.min()))
    assert meta['height_max'] <= max(twill_scene.warp.max_height, twill_scene.weft.max_height) + 1e-6


def test_write_and_read_maps(tmp_path, twill_scene):
    maps = bake_maps(twill_scene, 32)
    manifest = write_maps(maps, tmp_path / 'maps', extra={'effective_config': {'resolution': 32}})
    out = tmp_path / 'maps'

    names = [entry['path'] for entry in manifest['files']]
    assert sorted(names) == sorted(MAP_FILES.values())
    for entry in manifest['files']:
        assert entry['sha256'] == hashlib.sha256((out / entry['path']).read_bytes()).hexdigest()
    on_disk = json.loads((out / MANIFEST_FILE).read_text(encoding='utf-8'))
    assert on_disk['effective_config'] == {'resolution': 32}

    loaded = read_maps(out)
    assert loaded.resolution == 32
    assert np.array_equal(loaded.coverage, maps.coverage)
    assert np.array_equal(loaded.height, maps.height)
    assert np.max(np.abs(loaded.normal - maps.normal)) <= 1.0 / 255.0 + 1e-6
    assert loaded.metadata['scene_hash'] == maps.metadata['scene_hash']

    span = maps.metadata['height_max'] - maps.metadata['height_min']
    assert np.max(np.abs(read_height16(out) - maps.height)) <= span / 65535.0 + 1e-6


def test_read_maps_format_errors(tmp_path, plain_scene):
    with pytest.raises(FormatError):
        read_maps(tmp_path)

    write_maps(bake_maps(plain_scene, 8), tmp_path)
    sidecar = tmp_path / MAP_FILES['sidecar']
    meta = json.loads(sidecar.read_text(encoding='utf-8'))

    meta['encoding_version'] = 99
    sidecar.write_text(json.dumps(meta), encoding='utf-8')
    with pytest.raises(FormatError):
        read_maps(tmp_path)

    sidecar.write_text('{ corrompido', encoding='utf-8')
    with pytest.raises(FormatError):
        read_maps(tmp_path)


def test_pfm_rows_bottom_to_top(tmp_path):
    data = np.arange(12, dtype=np.float32).reshape(3, 4)
    path = tmp_path / 'h.pfm'
    write_pfm(path, data)
    raw = path.read_bytes()
    assert raw.startswith(b"Pf\n4 3\n-1.0\n")
    payload = np.frombuffer(raw[len(b"Pf\n4 3\n-1.0\n"):], dtype='<f4').reshape(3, 4)
    assert np.array_equal(payload[0], data[-1])
    assert np.array_equal(read_pfm(path), data)


def test_read_pfm_rejects_color(tmp_path):
    path = tmp_path / 'rgb.pfm'
    path.write_bytes(b"PF\n1 1\n-1.0\n" + b"\0" * 12)
    with pytest.raises(FormatError):
        read_pfm(path)


def test_encode_height16_flat_map():
    assert np.all(encode_height16(np.full((2, 2), 0.5), 0.5, 0.5) == 0)
    assert encode_height16(np.array([0.0, 1.0]), 0.0, 1.0).tolist() == [0, 65535]


@pytest.mark.parametrize("family", ['plain', 'twill', 'satin', 'basket', 'herringbone'])
def test_presets_bake(family):
    draft = generate_pattern(default_pattern(family))
    params = default_params(family)
    maps = bake_maps(build_scene(draft, params, seed=1), 64)
    ids = np.unique(maps.coverage)
    plies = params.warp.plies
    assert np.any((ids >= WARP_ID_BASE) & (ids < WARP_ID_BASE + plies))
    assert np.any((ids >= WEFT_ID_BASE) & (ids < WEFT_ID_BASE + plies))
    assert np.all((ids == 0) | (ids < WARP_ID_BASE + plies) | ((ids >= WEFT_ID_BASE) & (ids < WEFT_ID_BASE + plies)))
