"""
Fixtures compartilhadas dos testes.
"""

import sys
from pathlib import Path
from types import SimpleNamespace

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.draft import generate_pattern  # noqa: E402
from src.models import FabricParams, PatternSpec, YarnParams  # noqa: E402
from src.scene import build_scene  # noqa: E402


class ScriptedClient:
    """Cliente de chat com transcrição roteirizada (sem rede)."""

    def __init__(self, responses, cycle=False):
        self.responses = list(responses)
        self.cycle = cycle
        self.calls = []

    def invoke(self, messages):
        self.calls.append(list(messages))
        index = len(self.calls) - 1
        if self.cycle:
            response = self.responses[index % len(self.responses)]
        else:
            response = self.responses[index]
        if isinstance(response, Exception):
            raise response
        return SimpleNamespace(content=response)


@pytest.fixture
def plain_draft():
    return generate_pattern(PatternSpec('plain'))


@pytest.fixture
def twill_draft():
    return generate_pattern(PatternSpec('twill', m=2, n=2))


@pytest.fixture
def satin_draft():
    return generate_pattern(PatternSpec('satin', satin_n=5, satin_c=2))


@pytest.fixture
def simple_params():
    """Fio de um ply sem torção: normais e orientações fáceis de prever."""
    return FabricParams(family='plain', warp=YarnParams(), weft=YarnParams(), repeat=4)


@pytest.fixture
def plain_scene(plain_draft, simple_params):
    return build_scene(plain_draft, simple_params, seed=11)


@pytest.fixture
def scripted_client():
    return ScriptedClient
