"""
Modelo analítico de fio em hélice curva com múltiplos plies.

Coordenadas do fio: u é o ângulo ao longo do arco da linha central
(u em [-u_max, u_max] sobre uma corrida visível) e v é o ângulo da seção
transversal do ply. No referencial local do fio, x segue o eixo do fio,
y é lateral e z aponta para fora do tecido.
"""

from typing import Optional

import numpy as np

from .errors import DegenerateOrientation, InvalidScene
from .irregularity import unwarp_cross_coordinate
from .models import YarnParams, PlyHit, SurfaceSample, SampleBatch
from .scene import FabricScene

# margem para manter a coordenada transversal dentro de (0, 1) antes do inverso
_CROSS_EPSILON = 1e-12


def eval_normal(u, v) -> np.ndarray:
    """Normal analítica [sin u cos v, sin v, cos u cos v]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    cos_v = np.cos(v)
    return np.stack(np.broadcast_arrays(np.sin(u) * cos_v, np.sin(v), np.cos(u) * cos_v), axis=-1)


def ply_phase(u, k: int, p: YarnParams):
    """Fase rotacional do ply k ao longo do eixo: phi0[k] + u*R*alpha."""
    return p.phases[k] + np.asarray(u, dtype=np.float64) * p.R * p.alpha


def eval_ply_orientation(u, phi, p: YarnParams) -> np.ndarray:
    """Direção do ply [cos u, -r*alpha*cos phi, -sin u - r*alpha*sin phi] (sem normalizar)."""
    u = np.asarray(u, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    twist = p.r * p.alpha
    return np.stack(np.broadcast_arrays(
        np.cos(u), -twist * np.cos(phi), -np.sin(u) - twist * np.sin(phi)
    ), axis=-1)


def rotate_about_axis(vector, axis, angle) -> np.ndarray:
    """Rotação de Rodrigues, anti-horária em torno de `axis` (unitário)."""
    vector = np.asarray(vector, dtype=np.float64)
    axis = np.asarray(axis, dtype=np.float64)
    cos_a = np.cos(angle)
    sin_a = np.sin(angle)
    dot = np.sum(axis * vector, axis=-1, keepdims=True)
    return vector * cos_a + np.cross(axis, vector) * sin_a + axis * dot * (1.0 - cos_a)


def _normalize(vectors: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vectors, axis=-1, keepdims=True)
    return vectors / norm


def eval_fiber_orientation(u, v, phi, p: YarnParams) -> np.ndarray:
    """
    Orientação da fibra: o_ply girado de psi em torno da normal, normalizado.

    Raises:
        DegenerateOrientation: Se |o_ply| < 1e-12
    """
    o_ply = eval_ply_orientation(u, phi, p)
    if np.any(np.linalg.norm(o_ply, axis=-1) < 1e-12):
        raise DegenerateOrientation("Orientação do ply com norma nula")
    normal = eval_normal(u, v)
    o_ply, normal = np.broadcast_arrays(o_ply, normal)
    return _normalize(rotate_about_axis(o_ply, normal, p.psi))


def eval_height(u, v, phi, p: YarnParams):
    """Altura r*cos(phi) + cos(u)*(R + r_ply*cos(v))."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    return p.r * np.cos(phi) + np.cos(u) * (p.R + p.r_ply * np.cos(v))


def select_plies(u, w, p: YarnParams):
    """
    Versão vetorizada de select_ply.

    Returns:
        (ply, v, phi, height); ply = -1 onde nenhum ply cobre w
    """
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    u, w = np.broadcast_arrays(u, w)
    phases = np.asarray(p.phases, dtype=np.float64)

    phi = phases[None, :] + u[..., None] * p.R * p.alpha
    offset = w[..., None] - p.r * np.sin(phi)
    covers = np.abs(offset) <= p.r_ply
    v = np.arcsin(np.clip(offset / p.r_ply, -1.0, 1.0))
    height = eval_height(u[..., None], v, phi, p)

    ranked = np.where(covers, height, -np.inf)
    best = np.argmax(ranked, axis=-1)
    any_cover = covers.any(axis=-1)

    pick = best[..., None]
    best_v = np.take_along_axis(v, pick, axis=-1)[..., 0]
    best_phi = np.take_along_axis(phi, pick, axis=-1)[..., 0]
    best_height = np.take_along_axis(height, pick, axis=-1)[..., 0]
    ply = np.where(any_cover, best, -1)
    return ply, best_v, best_phi, best_height


def select_ply(u: float, w: float, p: YarnParams) -> Optional[PlyHit]:
    """
    Escolhe o ply visível no deslocamento lateral w.

    O centro do ply k fica em r*sin(phi_k(u)) lateralmente; entre os plies que
    cobrem w vence o de maior altura.

    Returns:
        PlyHit, ou None quando w cai num vão entre plies
    """
    ply, v, phi, height = select_plies(u, w, p)
    if ply[0] < 0:
        return None
    return PlyHit(ply=int(ply[0]), v=float(v[0]), phi=float(phi[0]), height=float(height[0]))


def _to_surface(local: np.ndarray, is_warp: np.ndarray) -> np.ndarray:
    """Referencial do fio -> superfície: trama é identidade, urdume gira 90 graus em z."""
    rotated = np.stack([-local[..., 1], local[..., 0], local[..., 2]], axis=-1)
    return np.where(is_warp[..., None], rotated, local)


def _unslide(cross, along, channel, enabled, scene: FabricScene):
    if scene.sliding is None:
        return cross
    sp = scene.sliding
    clipped = np.clip(cross, _CROSS_EPSILON, 1.0 - _CROSS_EPSILON)
    profile = sp.profile(along, channel)
    regular = unwarp_cross_coordinate(clipped, profile, sp.k_sliding)
    return np.where(enabled, regular, cross)


def query_points(xs, ys, scene: FabricScene) -> SampleBatch:
    """
    Consulta vetorizada da superfície em pontos UV.

    Pipeline: inverso do deslizamento na coordenada transversal, célula e
    corrida visível pelo layout, mapeamento linear para (u, w), escolha do
    ply, avaliação de n, t, h e rotação para o referencial da superfície.
    Quando o inverso sai de (0, 1) o fio de baixo da mesma célula aparece.

    Raises:
        InvalidScene: Se draft e layout divergirem
    """
    draft = scene.draft
    rows, cols = draft.rows, draft.cols
    if scene.layout.shape != (rows, cols):
        raise InvalidScene("Layout não corresponde ao draft")

    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    xs, ys = np.broadcast_arrays(xs, ys)
    shape = xs.shape
    xs = xs.ravel()
    ys = ys.ravel()

    # coordenadas em células dentro de uma repetição
    gx = np.mod(xs * scene.repeat, 1.0) * cols
    gy = np.mod(ys * scene.repeat, 1.0) * rows
    col = np.minimum(np.floor(gx).astype(np.int64), cols - 1)
    row = np.minimum(np.floor(gy).astype(np.int64), rows - 1)
    fx = gx - col
    fy = gy - row
    along_x = gx / cols
    along_y = gy / rows

    top_warp = scene.layout.kind[row, col] == 1
    sliding = scene.sliding
    warp_slides = sliding is not None and sliding.warp_enabled
    weft_slides = sliding is not None and sliding.weft_enabled

    def unslide(is_warp):
        cross = np.where(is_warp, fx, fy)
        along = np.where(is_warp, along_y, along_x)
        channel = np.where(is_warp, 2 * col + 1, 2 * row)
        enabled = np.where(is_warp, warp_slides, weft_slides)
        return _unslide(cross, along, channel, enabled, scene)

    cross_top = unslide(top_warp)
    top_in = (cross_top > 0.0) & (cross_top < 1.0)
    low_warp = ~top_warp
    cross_low = unslide(low_warp)
    low_in = (cross_low > 0.0) & (cross_low < 1.0)

    lower = ~top_in
    eval_warp = np.where(lower, low_warp, top_warp)
    cross = np.where(lower, cross_low, cross_top)
    reachable = top_in | low_in

    along_frac = np.where(eval_warp, fy, fx)
    run_len = np.where(lower, scene.hidden_length[row, col], scene.layout.run_length[row, col])
    run_idx = np.where(lower, scene.hidden_index[row, col], scene.layout.run_index[row, col])
    position = (run_idx + along_frac) / np.maximum(run_len, 1)

    n = xs.size
    normal = np.zeros((n, 3))
    orientation = np.zeros((n, 3))
    height = np.full(n, scene.floor_height, dtype=np.float64)
    covered = np.zeros(n, dtype=bool)
    ply = np.full(n, -1, dtype=np.int64)

    for is_warp_family, params in ((True, scene.warp), (False, scene.weft)):
        mask = reachable & (eval_warp == is_warp_family)
        if not mask.any():
            continue
        pos = position[mask]
        u = np.where(
            lower[mask],
            np.where(pos < 0.5, params.u_max, -params.u_max),
            params.u_max * (2.0 * pos - 1.0),
        )
        offset = cross[mask] - 0.5
        half = 0.5 * params.width
        inside = np.abs(offset) <= half
        lateral = np.clip(offset / half, -1.0, 1.0) * params.half_extent
        # urdume: y local aponta para -x da superfície
        w = -lateral if is_warp_family else lateral

        k, v, phi, h = select_plies(u, w, params)
        hit = inside & (k >= 0)
        if not hit.any():
            continue
        idx = np.flatnonzero(mask)[hit]
        u_hit, v_hit, phi_hit = u[hit], v[hit], phi[hit]
        family = np.full(idx.size, is_warp_family)
        normal[idx] = _to_surface(eval_normal(u_hit, v_hit), family)
        orientation[idx] = _to_surface(eval_fiber_orientation(u_hit, v_hit, phi_hit, params), family)
        height[idx] = h[hit]
        covered[idx] = True
        ply[idx] = k[hit]

    gap = ~covered
    normal[gap] = (0.0, 0.0, 1.0)
    orientation[gap] = np.where(top_warp[gap, None], (0.0, 1.0, 0.0), (1.0, 0.0, 0.0))
    # amostras cobertas reportam o fio avaliado; vãos reportam o fio de cima
    is_warp = np.where(covered, eval_warp, top_warp)

    return SampleBatch(
        normal=normal.reshape(shape + (3,)),
        orientation=orientation.reshape(shape + (3,)),
        height=height.reshape(shape),
        covered=covered.reshape(shape),
        is_warp=is_warp.reshape(shape),
        ply=ply.reshape(shape),
        cell_row=row.reshape(shape),
        cell_col=col.reshape(shape),
    )


def query_point(pt, scene: FabricScene) -> SurfaceSample:
    """
    Consulta sob demanda de um ponto UV (periódico fora de [0, 1)).

    Raises:
        InvalidScene: Se draft e layout divergirem
    """
    x, y = pt
    batch = query_points(np.array([x], dtype=np.float64), np.array([y], dtype=np.float64), scene)
    return batch.sample(0)
