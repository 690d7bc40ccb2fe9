"""
Testes de geração, leitura, validação e layout de drafts.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.draft import (
    draft_spectrum_similarity, extract_segments, generate_pattern, hidden_runs,
    parse_draft, render_ascii, serialize_draft, shift_draft, validate_draft
)
from src.errors import InvalidDraft, InvalidSpec, ParseError, SizeError
from src.models import PatternSpec, WeavingDraft


def test_plain_matches_checkerboard(plain_draft):
    assert plain_draft.cells == ((1, 0), (0, 1))


def test_twill_2_2_reference(twill_draft):
    assert twill_draft.cells == (
        (1, 1, 0, 0),
        (0, 1, 1, 0),
        (0, 0, 1, 1),
        (1, 0, 0, 1),
    )


def test_satin_5_2_one_float_per_row(satin_draft):
    cells = satin_draft.as_array()
    assert cells.sum(axis=1).tolist() == [1] * 5
    assert [int(np.argmax(row)) for row in cells] == [0, 2, 4, 1, 3]


def test_basket_blocks():
    draft = generate_pattern(PatternSpec('basket', block=2))
    assert draft.cells == (
        (1, 1, 0, 0),
        (1, 1, 0, 0),
        (0, 0, 1, 1),
        (0, 0, 1, 1),
    )


def test_herringbone_mirrors_alternate_bands():
    draft = generate_pattern(PatternSpec('herringbone', m=2, n=2, band=4))
    cells = draft.as_array()
    assert cells.shape == (4, 8)
    # a segunda faixa é o espelho da primeira
    assert np.array_equal(cells[:, 4:], cells[:, 3::-1])


def test_repeat_override_must_be_multiple():
    draft = generate_pattern(PatternSpec('plain', rows=4, cols=6))
    assert (draft.rows, draft.cols) == (4, 6)
    with pytest.raises(InvalidSpec):
        generate_pattern(PatternSpec('twill', m=2, n=2, rows=6))


@pytest.mark.parametrize("spec", [
    PatternSpec('satin', satin_n=6, satin_c=2),
    PatternSpec('satin', satin_n=5, satin_c=1),
    PatternSpec('satin', satin_n=3, satin_c=1),
    PatternSpec('twill', m=0, n=2),
    PatternSpec('basket', block=0),
    PatternSpec('herringbone', m=3, n=1, band=2),
    PatternSpec('herringbone', m=2, n=2, band=2),
    PatternSpec('herringbone', m=2, n=2, band=1),
    PatternSpec('twill', m=9, n=9),
    PatternSpec('unknown'),
])
def test_invalid_specs_rejected(spec):
    with pytest.raises(InvalidSpec):
        generate_pattern(spec)


SATIN_SIZES = [n for n in range(5, 17) if any(math.gcd(c, n) == 1 for c in range(2, n - 1))]


@st.composite
def legal_specs(draw):
    family = draw(st.sampled_from(['plain', 'twill', 'satin', 'basket', 'herringbone']))
    if family == 'twill':
        m = draw(st.integers(1, 8))
        n = draw(st.integers(1, 16 - m))
        return PatternSpec('twill', m=m, n=n)
    if family == 'satin':
        n = draw(st.sampled_from(SATIN_SIZES))
        counters = [c for c in range(2, n - 1) if math.gcd(c, n) == 1]
        return PatternSpec('satin', satin_n=n, satin_c=draw(st.sampled_from(counters)))
    if family == 'basket':
        return PatternSpec('basket', block=draw(st.integers(1, 8)))
    if family == 'herringbone':
        m = draw(st.integers(1, 4))
        n = draw(st.integers(1, 4))
        band = draw(st.integers(max(m, n) + 1, 8))
        return PatternSpec('herringbone', m=m, n=n, band=band)
    return PatternSpec('plain')


@given(legal_specs())
@settings(max_examples=200)
def test_generated_patterns_always_validate(spec):
    draft = generate_pattern(spec)
    assert validate_draft(draft).is_valid
    assert draft.rows <= 16 and draft.cols <= 16


def test_parse_spaced_and_packed():
    assert parse_draft("1 0\n0 1").cells == ((1, 0), (0, 1))
    assert parse_draft("10\n01").cells == ((1, 0), (0, 1))


def test_parse_skips_comments_and_blank_lines():
    text = "# draft 2x2\n\n1 0\n  # outro comentário\n0 1\n"
    assert parse_draft(text).cells == ((1, 0), (0, 1))


@pytest.mark.parametrize("text", ["1 2\n0 1", "", "# só comentário\n", "1 0\n1", "1 x\n0 1"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_draft(text)


def test_parse_oversize():
    text = "\n".join(["10" * 2] * 17)
    with pytest.raises(SizeError):
        parse_draft(text)


@given(legal_specs())
@settings(max_examples=50)
def test_serialize_parse_identity(spec):
    draft = generate_pattern(spec)
    assert parse_draft(serialize_draft(draft)) == draft
    assert parse_draft(serialize_draft(draft, header=False)) == draft


def test_render_ascii_twill(twill_draft):
    lines = render_ascii(twill_draft).splitlines()
    assert lines == ['██··', '·██·', '··██', '█··█']


def test_validate_all_ones_reports_every_yarn():
    report = validate_draft(WeavingDraft(((1, 1), (1, 1))))
    kinds = [(v.kind, v.index) for v in report.violations]
    assert ('floating_row', 0) in kinds and ('floating_row', 1) in kinds
    assert ('floating_column', 0) in kinds and ('floating_column', 1) in kinds
    assert not report.is_valid


def test_validate_oversize():
    cells = [[(i + j) % 2 for j in range(4)] for i in range(17)]
    report = validate_draft(WeavingDraft.from_array(cells))
    assert [v.kind for v in report.violations] == ['oversize']


def test_plain_is_transpose_invariant(plain_draft):
    assert plain_draft.transpose() == plain_draft


def test_plain_runs_have_length_one(plain_draft):
    layout = extract_segments(plain_draft)
    assert np.all(layout.run_length == 1)
    assert np.all(layout.run_index == 0)


def test_twill_runs_have_length_two(twill_draft):
    layout = extract_segments(twill_draft)
    assert np.all(layout.run_length == 2)
    assert set(np.unique(layout.run_index)) == {0, 1}


def test_satin_weft_runs_wrap(satin_draft):
    layout = extract_segments(satin_draft)
    weft = layout.kind == 0
    assert np.all(layout.run_length[weft] == 4)
    assert np.all(layout.run_length[~weft] == 1)
    # a corrida da trama 0 começa logo depois do urdume na coluna 0
    assert layout.run_start[0, 1] == 1
    assert layout.run_index[0, 4] == 3


def test_layout_arrays_are_read_only(twill_draft):
    layout = extract_segments(twill_draft)
    with pytest.raises(ValueError):
        layout.run_length[0, 0] = 9


def test_extract_segments_rejects_invalid():
    with pytest.raises(InvalidDraft) as info:
        extract_segments(WeavingDraft(((1, 1), (0, 0))))
    assert not info.value.report.is_valid


@given(legal_specs(), st.integers(0, 15), st.integers(0, 15))
@settings(max_examples=50)
def test_extract_segments_translation_equivariant(spec, di, dj):
    draft = generate_pattern(spec)
    base = extract_segments(draft)
    shifted = extract_segments(shift_draft(draft, di, dj))
    for name in ('kind', 'run_length', 'run_index'):
        expected = np.roll(getattr(base, name), (di, dj), axis=(0, 1))
        assert np.array_equal(getattr(shifted, name), expected)


def test_hidden_runs_twill(twill_draft):
    length, index = hidden_runs(twill_draft)
    # na sarja 2/2 o fio de baixo fica escondido por duas células
    assert np.all(length == 2)
    assert np.all(index < 2)


def test_spectrum_similarity_shift_invariant(twill_draft, satin_draft):
    assert draft_spectrum_similarity(twill_draft, shift_draft(twill_draft, 1, 3)) == pytest.approx(1.0)
    assert draft_spectrum_similarity(twill_draft, satin_draft) < 0.99
