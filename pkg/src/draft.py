"""
Geração, leitura, validação e layout de drafts de tecelagem.

Convenção: célula 1 = urdume (warp) por cima da trama (weft). A linha i é a
trama de índice i e a coluna j é o urdume de índice j.
"""

import math
from typing import List, Tuple

import numpy as np

from .errors import InvalidSpec, ParseError, SizeError, InvalidDraft
from .models import (
    WeavingDraft, PatternSpec, ValidationReport, Violation, SegmentLayout,
    FAMILIES, MAX_DRAFT_SIZE
)


def _natural_repeat(spec: PatternSpec) -> Tuple[int, int]:
    """Tamanho mínimo da repetição de cada família."""
    family = spec.family
    if family == 'plain':
        return 2, 2
    if family == 'twill':
        return spec.m + spec.n, spec.m + spec.n
    if family == 'satin':
        return spec.satin_n, spec.satin_n
    if family == 'basket':
        return 2 * spec.block, 2 * spec.block
    if family == 'herringbone':
        return spec.m + spec.n, 2 * spec.band
    raise InvalidSpec(f"Família desconhecida: {family}")


def _check_spec(spec: PatternSpec) -> None:
    if spec.family not in FAMILIES:
        raise InvalidSpec(f"Família desconhecida: {spec.family}")

    if spec.family in ('twill', 'herringbone'):
        if spec.m < 1 or spec.n < 1:
            raise InvalidSpec(f"Sarja exige m, n >= 1 (m={spec.m}, n={spec.n})")
    if spec.family == 'satin':
        n, c = spec.satin_n, spec.satin_c
        if n < 4:
            raise InvalidSpec(f"Cetim exige n >= 4 (n={n})")
        if not 1 < c < n - 1:
            raise InvalidSpec(f"Contador do cetim fora de (1, n-1): c={c}")
        if math.gcd(c, n) != 1:
            raise InvalidSpec(f"Contador do cetim não é coprimo com n: c={c}, n={n}")
    if spec.family == 'basket' and spec.block < 1:
        raise InvalidSpec(f"Bloco do basket deve ser >= 1: {spec.block}")
    if spec.family == 'herringbone':
        if spec.band < 2:
            raise InvalidSpec(f"Faixa do herringbone deve ser >= 2: {spec.band}")
        # cada linha precisa ver ao menos um 0 e um 1 dentro da faixa
        if spec.band < max(spec.m, spec.n) + 1:
            raise InvalidSpec(
                f"Faixa {spec.band} curta demais para sarja {spec.m}/{spec.n}"
            )


def generate_pattern(spec: PatternSpec) -> WeavingDraft:
    """
    Gera o draft de uma família clássica.

    Args:
        spec: Família e parâmetros do padrão

    Returns:
        Draft válido

    Raises:
        InvalidSpec: Parâmetro fora da faixa, cetim não coprimo ou repetição > 16
    """
    _check_spec(spec)
    base_rows, base_cols = _natural_repeat(spec)
    rows = spec.rows or base_rows
    cols = spec.cols or base_cols

    if rows > MAX_DRAFT_SIZE or cols > MAX_DRAFT_SIZE:
        raise InvalidSpec(f"Repetição {rows}x{cols} excede {MAX_DRAFT_SIZE}x{MAX_DRAFT_SIZE}")
    if rows % base_rows or cols % base_cols:
        raise InvalidSpec(
            f"Repetição {rows}x{cols} não é múltipla da repetição natural {base_rows}x{base_cols}"
        )

    i, j = np.meshgrid(np.arange(rows), np.arange(cols), indexing='ij')

    if spec.family == 'plain':
        cells = (i + j) % 2 == 0
    elif spec.family == 'twill':
        cells = np.mod(j - i, spec.m + spec.n) < spec.m
    elif spec.family == 'satin':
        cells = j % spec.satin_n == np.mod(i * spec.satin_c, spec.satin_n)
    elif spec.family == 'basket':
        cells = (i // spec.block + j // spec.block) % 2 == 0
    else:
        # herringbone: faixas ímpares espelham a faixa anterior
        band = j // spec.band
        start = band * spec.band
        mirrored = start - 1 - (j - start)
        key = np.where(band % 2 == 0, j, mirrored)
        cells = np.mod(key - i, spec.m + spec.n) < spec.m

    draft = WeavingDraft.from_array(cells.astype(np.uint8))
    report = validate_draft(draft)
    if not report.is_valid:
        raise InvalidSpec("Padrão gerado inválido: " + "; ".join(report.messages()))
    return draft


def parse_draft(text: str) -> WeavingDraft:
    """
    Lê um draft em texto: linhas de tokens 0/1 separados por espaço ou
    compactados ("0101"), com comentários iniciados por '#'.

    Raises:
        ParseError: Token não binário, linhas de tamanhos diferentes ou texto vazio
        SizeError: Dimensão maior que 16
    """
    rows: List[List[int]] = []
    for line_number, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith('#'):
            continue
        row: List[int] = []
        for token in line.split():
            if not token or any(ch not in '01' for ch in token):
                raise ParseError(f"Token não binário na linha {line_number}: {token!r}")
            row.extend(int(ch) for ch in token)
        if rows and len(row) != len(rows[0]):
            raise ParseError(
                f"Linha {line_number} com {len(row)} colunas; esperado {len(rows[0])}"
            )
        rows.append(row)

    if not rows:
        raise ParseError("Draft vazio")
    if len(rows) > MAX_DRAFT_SIZE or len(rows[0]) > MAX_DRAFT_SIZE:
        raise SizeError(
            f"Draft {len(rows)}x{len(rows[0])} excede {MAX_DRAFT_SIZE}x{MAX_DRAFT_SIZE}"
        )
    return WeavingDraft(tuple(tuple(r) for r in rows))


def serialize_draft(draft: WeavingDraft, header: bool = True) -> str:
    """Inverso de parse_draft: uma linha por trama, tokens separados por espaço."""
    lines = []
    if header:
        lines.append(f"# draft {draft.rows}x{draft.cols}")
    lines.extend(' '.join(str(v) for v in row) for row in draft.cells)
    return '\n'.join(lines) + '\n'


def render_ascii(draft: WeavingDraft) -> str:
    """Desenho em texto: '█' para urdume por cima, '·' para trama."""
    return '\n'.join(''.join('█' if v else '·' for v in row) for row in draft.cells)


def validate_draft(draft: WeavingDraft) -> ValidationReport:
    """
    Verifica tamanho máximo e fios flutuando por toda a repetição.

    Returns:
        Relatório com as violações; vazio quando válido
    """
    violations: List[Violation] = []
    if draft.rows > MAX_DRAFT_SIZE or draft.cols > MAX_DRAFT_SIZE:
        violations.append(Violation(
            'oversize', None,
            f"Draft {draft.rows}x{draft.cols} excede {MAX_DRAFT_SIZE}x{MAX_DRAFT_SIZE}"
        ))

    cells = draft.as_array()
    for i in range(draft.rows):
        if cells[i].min() == cells[i].max():
            violations.append(Violation(
                'floating_row', i, f"Trama {i} flutua por toda a repetição"
            ))
    for j in range(draft.cols):
        if cells[:, j].min() == cells[:, j].max():
            violations.append(Violation(
                'floating_column', j, f"Urdume {j} flutua por toda a repetição"
            ))
    return ValidationReport(tuple(violations))


def _runs_along(line: np.ndarray, visible_value: int):
    """
    Corridas periódicas de `visible_value` num vetor circular.

    Returns:
        (start, length, index) por posição; posições com outro valor ficam em 0
    """
    size = len(line)
    start = np.zeros(size, dtype=np.int64)
    length = np.zeros(size, dtype=np.int64)
    index = np.zeros(size, dtype=np.int64)

    for p in range(size):
        if line[p] != visible_value:
            continue
        back = 0
        while line[(p - back - 1) % size] == visible_value:
            back += 1
        forward = 0
        while line[(p + forward + 1) % size] == visible_value:
            forward += 1
        start[p] = (p - back) % size
        length[p] = back + forward + 1
        index[p] = back
    return start, length, index


def extract_segments(draft: WeavingDraft) -> SegmentLayout:
    """
    Extrai as corridas visíveis de cada célula, com wrap periódico.

    Urdume visível (1) corre ao longo da coluna; trama visível (0) corre ao
    longo da linha.

    Raises:
        InvalidDraft: Se o draft não passar em validate_draft
    """
    report = validate_draft(draft)
    if not report.is_valid:
        raise InvalidDraft("Draft inválido: " + "; ".join(report.messages()), report)

    cells = draft.as_array()
    rows, cols = cells.shape
    run_start = np.zeros((rows, cols), dtype=np.int64)
    run_length = np.zeros((rows, cols), dtype=np.int64)
    run_index = np.zeros((rows, cols), dtype=np.int64)

    for j in range(cols):
        start, length, index = _runs_along(cells[:, j], 1)
        mask = cells[:, j] == 1
        run_start[mask, j] = start[mask]
        run_length[mask, j] = length[mask]
        run_index[mask, j] = index[mask]

    for i in range(rows):
        start, length, index = _runs_along(cells[i], 0)
        mask = cells[i] == 0
        run_start[i, mask] = start[mask]
        run_length[i, mask] = length[mask]
        run_index[i, mask] = index[mask]

    return SegmentLayout(
        kind=cells.astype(np.int64),
        run_start=run_start,
        run_length=run_length,
        run_index=run_index,
    )


def hidden_runs(draft: WeavingDraft) -> Tuple[np.ndarray, np.ndarray]:
    """
    Comprimento e índice das corridas em que o fio de baixo fica escondido.

    Para a célula (i, j) com urdume por cima, descreve a corrida da trama i
    escondida ao longo da linha; com trama por cima, a corrida do urdume j
    escondida ao longo da coluna.
    """
    cells = draft.as_array()
    rows, cols = cells.shape
    length = np.zeros((rows, cols), dtype=np.int64)
    index = np.zeros((rows, cols), dtype=np.int64)
    for i in range(rows):
        _, run_len, run_idx = _runs_along(cells[i], 1)
        mask = cells[i] == 1
        length[i, mask] = run_len[mask]
        index[i, mask] = run_idx[mask]
    for j in range(cols):
        _, run_len, run_idx = _runs_along(cells[:, j], 0)
        mask = cells[:, j] == 0
        length[mask, j] = run_len[mask]
        index[mask, j] = run_idx[mask]
    return length, index


def shift_draft(draft: WeavingDraft, di: int, dj: int) -> WeavingDraft:
    """Deslocamento cíclico do draft por (di, dj)."""
    return WeavingDraft.from_array(np.roll(draft.as_array(), (di, dj), axis=(0, 1)))


def draft_spectrum_similarity(a: WeavingDraft, b: WeavingDraft) -> float:
    """
    Similaridade de cosseno entre os espectros de Fourier de dois drafts.

    Cada draft é ladrilhado numa tela 16x16 (valores -1/+1) antes da FFT, o
    que torna a medida invariante a deslocamentos cíclicos.
    """
    def spectrum(draft: WeavingDraft) -> np.ndarray:
        signed = draft.as_array().astype(np.float64) * 2.0 - 1.0
        reps = (-(-MAX_DRAFT_SIZE // draft.rows), -(-MAX_DRAFT_SIZE // draft.cols))
        canvas = np.tile(signed, reps)[:MAX_DRAFT_SIZE, :MAX_DRAFT_SIZE]
        return np.abs(np.fft.fft2(canvas)).ravel()

    sa, sb = spectrum(a), spectrum(b)
    denom = float(np.linalg.norm(sa) * np.linalg.norm(sb))
    if denom == 0.0:
        return 0.0
    return float(np.dot(sa, sb) / denom)
