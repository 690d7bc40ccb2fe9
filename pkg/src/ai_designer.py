"""
Designer de tecidos: geradores por regra e cliente opcional para um endpoint
de chat-completion, com validação e reparo das respostas.
"""

import hashlib
import json
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from jinja2 import Environment, FileSystemLoader
from langchain_openai import ChatOpenAI
from langchain_core.messages import AIMessage, HumanMessage, SystemMessage

from .ai_config import EndpointConfig
from .draft import generate_pattern, serialize_draft, validate_draft
from .errors import (
    DesignRejected, EndpointError, ExtractionError, ParamsError, UnknownFamily
)
from .models import (
    DesignRequest, DesignResult, FabricParams, Provenance, Violation, WeavingDraft,
    FAMILIES, MAX_DRAFT_SIZE, PARAMS_SCHEMA_VERSION
)
from .presets import (
    apply_overrides, default_params, default_pattern, params_from_dict, MAX_REPEAT
)

PROMPTS_DIR = Path(__file__).parent / 'prompts'

RULE_BASED = 'rule-based'
EXTERNAL_ENDPOINT = 'external-endpoint'

# ordem importa: "herringbone twill" deve cair em herringbone
FAMILY_KEYWORDS = (
    ('herringbone', ('herringbone', 'espinha', 'chevron', 'spina')),
    ('satin', ('satin', 'sateen', 'cetim', 'charmeuse')),
    ('basket', ('basket', 'cesto', 'panamá', 'panama', 'oxford', 'hopsack')),
    ('twill', ('twill', 'sarja', 'denim', 'jeans', 'gabardine', 'gabardina')),
)

_MATRIX_START = re.compile(r'\[\s*\[')
_OBJECT_START = re.compile(r'\{')


def classify_prompt(prompt: str) -> str:
    """Mapeia palavras-chave (inglês ou português) para uma família; padrão plain."""
    text = prompt.lower()
    for family, keywords in FAMILY_KEYWORDS:
        if any(keyword in text for keyword in keywords):
            return family
    return 'plain'


def _coerce_bit(value: Any) -> Optional[int]:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, float)) and value in (0, 1):
        return int(value)
    if isinstance(value, str) and value.strip() in ('0', '1'):
        return int(value.strip())
    return None


def extract_matrix(raw: str) -> List[List[Any]]:
    """
    Primeira lista de listas JSON encontrada no texto.

    Raises:
        ExtractionError: Se não houver matriz decodificável
    """
    decoder = json.JSONDecoder()
    for match in _MATRIX_START.finditer(raw):
        try:
            value, _ = decoder.raw_decode(raw, match.start())
        except json.JSONDecodeError:
            continue
        if isinstance(value, list) and value and all(isinstance(row, list) for row in value):
            return value
    raise ExtractionError("Nenhuma matriz JSON encontrada na resposta")


def extract_object(raw: str) -> Dict[str, Any]:
    """
    Primeiro objeto JSON encontrado no texto.

    Raises:
        ExtractionError: Se não houver objeto decodificável
    """
    decoder = json.JSONDecoder()
    for match in _OBJECT_START.finditer(raw):
        try:
            value, _ = decoder.raw_decode(raw, match.start())
        except json.JSONDecodeError:
            continue
        if isinstance(value, dict):
            return value
    raise ExtractionError("Nenhum objeto JSON encontrado na resposta")


def validate_repair(raw: str) -> Union[WeavingDraft, List[Violation]]:
    """
    Extrai, coage e valida a matriz de uma resposta do endpoint.

    Args:
        raw: Conteúdo da mensagem do endpoint

    Returns:
        Draft válido, ou a lista de violações usada na mensagem de reparo

    Raises:
        ExtractionError: Se o texto não contém matriz
    """
    matrix = extract_matrix(raw)

    violations: List[Violation] = []
    rows: List[List[int]] = []
    for i, row in enumerate(matrix):
        if not row:
            violations.append(Violation('empty_row', i, f"Linha {i} vazia"))
            continue
        bits = [_coerce_bit(value) for value in row]
        if any(bit is None for bit in bits):
            violations.append(Violation('non_binary', i, f"Linha {i} contém valores diferentes de 0/1"))
            continue
        rows.append(bits)
    if violations:
        return violations

    widths = {len(row) for row in rows}
    if len(widths) != 1:
        return [Violation('ragged', None, f"Linhas com tamanhos diferentes: {sorted(widths)}")]

    draft = WeavingDraft(tuple(tuple(row) for row in rows))
    report = validate_draft(draft)
    if not report.is_valid:
        return list(report.violations)
    return draft


def _digest(responses: List[str]) -> str:
    sha = hashlib.sha256()
    for response in responses:
        sha.update(response.encode('utf-8'))
        sha.update(b'\x1e')
    return sha.hexdigest()


class FabricDesigner:
    """Produz pares (draft, parâmetros) a partir de pedidos estruturados ou texto livre."""

    def __init__(
        self,
        config: Optional[EndpointConfig] = None,
        client: Any = None,
        fallback: bool = True,
        max_retries: Optional[int] = None
    ):
        """
        Inicializa o designer.

        Args:
            config: Configuração do endpoint (lida do ambiente se omitida)
            client: Cliente de chat com .invoke(messages) -> mensagem com .content
                    (ChatOpenAI é criado sob demanda quando omitido)
            fallback: Cai no mapeamento por palavras-chave quando o endpoint falha
            max_retries: Tentativas de reparo por estágio
        """
        self.config = config or EndpointConfig()
        self.fallback = fallback
        self.max_retries = self.config.max_retries if max_retries is None else max_retries
        self._client = client
        self.templates = Environment(
            loader=FileSystemLoader(str(PROMPTS_DIR)),
            trim_blocks=True,
            lstrip_blocks=True,
        )

    @property
    def llm(self):
        if self._client is None:
            self._client = self._setup_llm()
        return self._client

    def _setup_llm(self) -> ChatOpenAI:
        """Configura o cliente de chat-completion."""
        return ChatOpenAI(
            openai_api_key=self.config.api_key,
            openai_api_base=self.config.base_url,
            model_name=self.config.model,
            temperature=self.config.temperature,
            request_timeout=self.config.timeout,
            max_retries=0
        )

    def design(self, req: DesignRequest) -> DesignResult:
        """
        Gera o design pedido.

        Raises:
            InvalidSpec / ParamsError: Pedido estruturado inválido
            EndpointError: Falha de rede com fallback desligado
            DesignRejected: Respostas inválidas após os reparos com fallback desligado
        """
        if req.structured is not None:
            spec = req.structured.pattern
            draft = generate_pattern(spec)
            try:
                params = apply_overrides(default_params(spec.family), req.structured.overrides)
            except UnknownFamily as e:
                raise ParamsError(str(e)) from e
            return DesignResult(draft, params, Provenance(RULE_BASED))

        prompt = req.free_text.prompt
        if req.free_text.offline:
            return self._fallback(prompt, [])

        repair_log: List[str] = []
        try:
            return self._design_with_endpoint(prompt, repair_log)
        except (EndpointError, DesignRejected) as e:
            if not self.fallback:
                raise
            print(f"⚠️  Endpoint falhou ({e}); usando mapeamento por palavras-chave", file=sys.stderr)
            repair_log.append(f"fallback: {e}")
            return self._fallback(prompt, repair_log)

    def _fallback(self, prompt: str, repair_log: List[str]) -> DesignResult:
        family = classify_prompt(prompt)
        draft = generate_pattern(default_pattern(family))
        return DesignResult(draft, default_params(family), Provenance(RULE_BASED), repair_log)

    def _invoke(self, messages: list) -> str:
        try:
            response = self.llm.invoke(messages)
        except Exception as e:
            raise EndpointError(f"Falha ao consultar o endpoint {self.config.base_url}: {e}") from e
        content = getattr(response, 'content', response)
        return content if isinstance(content, str) else str(content)

    def _repair_message(self, violations: List[Violation]) -> HumanMessage:
        template = self.templates.get_template('repair.j2')
        lines = [json.dumps(v.to_dict(), ensure_ascii=False) for v in violations]
        return HumanMessage(content=template.render(violations=lines))

    def _converse(self, messages: list, check, stage: str, responses: List[str], repair_log: List[str]):
        """Pergunta, valida e repara até max_retries vezes."""
        for attempt in range(self.max_retries + 1):
            content = self._invoke(messages)
            responses.append(content)
            result = check(content)
            if not isinstance(result, list):
                return result
            summary = '; '.join(v.message for v in result)
            if attempt == self.max_retries:
                raise DesignRejected(f"{stage}: resposta inválida após {self.max_retries} reparos: {summary}")
            repair_log.append(f"{stage} tentativa {attempt + 1}: {summary}")
            print(f"🤖 Reparo {attempt + 1}/{self.max_retries} ({stage}): {summary}", file=sys.stderr)
            messages.extend([AIMessage(content=content), self._repair_message(result)])
        raise DesignRejected(f"{stage}: sem resposta")

    def _check_draft(self, content: str):
        try:
            return validate_repair(content)
        except ExtractionError as e:
            return [Violation('extraction', None, str(e))]

    def _check_params(self, content: str):
        try:
            return params_from_dict(extract_object(content))
        except (ExtractionError, ParamsError, UnknownFamily) as e:
            kind = 'extraction' if isinstance(e, ExtractionError) else 'schema'
            return [Violation(kind, None, str(e))]

    def _design_with_endpoint(self, prompt: str, repair_log: List[str]) -> DesignResult:
        print(f"🤖 Consultando {self.config.model} em {self.config.base_url}...", file=sys.stderr)
        responses: List[str] = []

        draft_system = self.templates.get_template('draft_system.j2').render(
            max_size=MAX_DRAFT_SIZE, families=FAMILIES
        )
        draft = self._converse(
            [SystemMessage(content=draft_system), HumanMessage(content=prompt)],
            self._check_draft, 'draft', responses, repair_log
        )

        family = classify_prompt(prompt)
        params_system = self.templates.get_template('params_system.j2').render(
            schema_version=PARAMS_SCHEMA_VERSION,
            family=family,
            example=json.dumps(default_params(family).to_dict(), indent=2),
            families=FAMILIES,
            max_repeat=MAX_REPEAT,
        )
        params_user = self.templates.get_template('params_user.j2').render(
            prompt=prompt,
            rows=draft.rows,
            cols=draft.cols,
            draft=serialize_draft(draft, header=False),
        )
        params = self._converse(
            [SystemMessage(content=params_system), HumanMessage(content=params_user)],
            self._check_params, 'params', responses, repair_log
        )

        provenance = Provenance(EXTERNAL_ENDPOINT, _digest(responses), self.config.model)
        print(f"✅ Design recebido do endpoint ({draft.rows}x{draft.cols})", file=sys.stderr)
        return DesignResult(draft, params, provenance, repair_log)
