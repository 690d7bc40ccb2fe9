#!/usr/bin/env python3
"""
Gerador de microestrutura de tecidos
Drafts de tecelagem, bake de mapas ladrilháveis, pré-visualização sombreada e
designer com endpoint de chat-completion.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from src.ai_config import EndpointConfig
from src.ai_designer import FabricDesigner
from src.baker import bake_maps, write_maps
from src.config_loader import ConfigLoader, resolve
from src.draft import (
    draft_spectrum_similarity, generate_pattern, parse_draft, render_ascii,
    serialize_draft, validate_draft
)
from src.errors import (
    DesignRejected, EndpointError, FabricError, FormatError, InvalidDraft, ResolutionError
)
from src.models import (
    DesignRequest, FreeText, PatternSpec, StructuredSpec, FAMILIES
)
from src.presets import apply_overrides, default_params, default_pattern, params_from_dict
from src.renderer import (
    direction_from_angles, load_albedo, parse_hex_color, render_plane,
    shading_from_settings, solid_albedo, write_image
)
from src.scene import build_scene

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_ENDPOINT = 3

DRAFT_FILE = 'draft.txt'
PARAMS_FILE = 'params.json'
PROVENANCE_FILE = 'provenance.json'


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _read_draft(path: str):
    return parse_draft(Path(path).read_text(encoding='utf-8'))


def _read_params(path: Path):
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise FormatError(f"JSON inválido em {path}: {e}") from e
    return params_from_dict(data)


def _write_json(path: Path, data: Dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write('\n')


def _pattern_from_args(args) -> PatternSpec:
    return PatternSpec(
        family=args.family,
        m=args.m,
        n=args.n,
        satin_n=args.satin_n,
        satin_c=args.satin_c,
        block=args.block,
        band=args.band,
        rows=args.rows,
        cols=args.cols,
    )


def _parse_set(items) -> Dict[str, Any]:
    """KEY=VALUE -> {'KEY': valor YAML}."""
    overrides: Dict[str, Any] = {}
    for item in items or []:
        key, sep, value = item.partition('=')
        if not sep or not key:
            raise ValueError(f"Sobrescrita inválida (use CHAVE=VALOR): {item!r}")
        overrides[key.strip()] = yaml.safe_load(value)
    return overrides


def _scene_inputs(args):
    """Draft + parâmetros a partir de --scene, --draft, --family, --params e flags."""
    draft = None
    params = None
    if args.scene:
        scene_dir = Path(args.scene)
        draft = _read_draft(str(scene_dir / DRAFT_FILE))
        params = _read_params(scene_dir / PARAMS_FILE)
    if args.draft:
        draft = _read_draft(args.draft)
    if args.params:
        params = _read_params(Path(args.params))

    family = args.family or (params.family if params else 'plain')
    if params is None:
        params = default_params(family)
    if draft is None:
        draft = generate_pattern(default_pattern(family))

    overrides: Dict[str, Any] = {}
    if args.k_sliding is not None:
        overrides['sliding.k_sliding'] = args.k_sliding
    if args.flyaway:
        overrides['flyaway.enabled'] = True
    if args.repeat is not None:
        overrides['repeat'] = args.repeat
    overrides.update(_parse_set(args.set))
    params = apply_overrides(params, overrides)

    report = validate_draft(draft)
    if not report.is_valid:
        raise InvalidDraft("Draft inválido: " + "; ".join(report.messages()), report)
    return draft, params


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_draft(args, config: Dict[str, Any]) -> int:
    """Subcomandos de draft: gen, parse, validate, show, serialize, compare."""
    action = args.draft_command

    if action == 'gen':
        draft = generate_pattern(_pattern_from_args(args))
        text = serialize_draft(draft, header=args.header)
        if args.out:
            Path(args.out).write_text(text, encoding='utf-8')
            _err(f"🧵 Draft {draft.rows}x{draft.cols} gravado em {args.out}")
        else:
            sys.stdout.write(text.rstrip('\n'))
            sys.stdout.write('\n')
        return EXIT_OK

    if action == 'compare':
        a = _read_draft(args.first)
        b = _read_draft(args.second)
        print(f"{draft_spectrum_similarity(a, b):.6f}")
        return EXIT_OK

    draft = _read_draft(args.file)

    if action == 'parse':
        print(json.dumps({'rows': draft.rows, 'cols': draft.cols, 'cells': [list(r) for r in draft.cells]}))
        return EXIT_OK

    if action == 'serialize':
        sys.stdout.write(serialize_draft(draft, header=not args.no_header))
        return EXIT_OK

    if action == 'show':
        print(render_ascii(draft))
        return EXIT_OK

    report = validate_draft(draft)
    if report.is_valid:
        _err(f"✅ Draft {draft.rows}x{draft.cols} válido")
        return EXIT_OK
    for message in report.messages():
        _err(f"❌ {message}")
    return EXIT_INVALID


def cmd_bake(args, config: Dict[str, Any]) -> int:
    """Bake dos mapas + sidecar + manifesto."""
    seed = resolve(args.seed, config, 'seed')
    resolution = resolve(args.res, config, 'bake', 'resolution')
    supersample = resolve(args.supersample, config, 'bake', 'supersample')
    workers = resolve(args.workers, config, 'workers')
    out = Path(resolve(args.out, config, 'output_directory'))

    draft, params = _scene_inputs(args)
    scene = build_scene(draft, params, seed)

    _err(f"🧪 Assando mapas {resolution}x{resolution} ({params.family}, semente {seed})...")
    maps = bake_maps(scene, resolution, supersample=supersample, workers=workers)

    effective = {
        'command': 'bake',
        'seed': seed,
        'resolution': resolution,
        'supersample': supersample,
        'draft': [list(r) for r in draft.cells],
        'params': params.to_dict(),
    }
    write_maps(maps, out, extra={'effective_config': effective})
    _err(f"✅ Mapas gravados em {out.resolve()}")
    return EXIT_OK


def cmd_render(args, config: Dict[str, Any]) -> int:
    """Pré-visualização sombreada em PNG sRGB."""
    seed = resolve(args.seed, config, 'seed')
    resolution = resolve(args.res, config, 'render', 'resolution')
    workers = resolve(args.workers, config, 'workers')
    exposure = resolve(args.exposure, config, 'render', 'exposure')
    view = resolve(None, config, 'render', 'view')
    if args.light:
        try:
            azimuth, elevation = (float(v) for v in args.light.split(','))
        except ValueError as e:
            raise ValueError(f"--light espera 'azimute,elevação': {args.light!r}") from e
    else:
        azimuth, elevation = resolve(None, config, 'render', 'light')
    out = Path(args.out)

    draft, params = _scene_inputs(args)
    scene = build_scene(draft, params, seed)

    albedo = None
    albedo_source: Optional[str] = None
    if args.albedo:
        albedo = load_albedo(args.albedo)
        albedo_source = _file_digest(Path(args.albedo))
    elif args.albedo_solid:
        albedo = solid_albedo(parse_hex_color(args.albedo_solid))
        albedo_source = args.albedo_solid.lower()

    sp = shading_from_settings(
        params.shading,
        light=direction_from_angles(azimuth, elevation),
        view=view,
        flyaway_weight=params.flyaway.weight,
        exposure=exposure,
    )

    _err(f"🎨 Renderizando {resolution}x{resolution} ({params.family}, luz {azimuth:g},{elevation:g})...")
    image = render_plane(scene, albedo, sp, resolution, workers=workers)
    write_image(out, image)

    manifest = {
        'files': [{'path': out.name, 'sha256': _file_digest(out)}],
        'effective_config': {
            'command': 'render',
            'seed': seed,
            'resolution': resolution,
            'light': [azimuth, elevation],
            'view': list(view),
            'exposure': exposure,
            'albedo': albedo_source,
            'draft': [list(r) for r in draft.cells],
            'params': params.to_dict(),
        },
    }
    _write_json(out.with_suffix('.manifest.json'), manifest)
    _err(f"✅ Imagem gravada em {out.resolve()}")
    return EXIT_OK


def cmd_design(args, config: Dict[str, Any]) -> int:
    """Design a partir de pedido estruturado ou texto livre."""
    fallback = resolve(False if args.no_fallback else None, config, 'design', 'fallback')
    max_retries = resolve(args.max_retries, config, 'design', 'max_retries')
    out = Path(resolve(args.out, config, 'output_directory'))

    if args.structured:
        if not args.family:
            raise ValueError("--structured exige --family")
        request = DesignRequest(structured=StructuredSpec(_pattern_from_args(args), _parse_set(args.set)))
    else:
        if not args.prompt:
            raise ValueError("design exige --prompt ou --structured")
        request = DesignRequest(free_text=FreeText(args.prompt, offline=args.offline))

    endpoint = EndpointConfig(base_url=args.endpoint)
    if request.free_text is not None and not request.free_text.offline and not endpoint.validate():
        raise ValueError(f"Configuração do endpoint inválida: {endpoint.base_url}")
    designer = FabricDesigner(endpoint, fallback=fallback, max_retries=max_retries)
    _err("🔍 Gerando design...")
    result = designer.design(request)

    out.mkdir(parents=True, exist_ok=True)
    (out / DRAFT_FILE).write_text(serialize_draft(result.draft), encoding='utf-8')
    _write_json(out / PARAMS_FILE, result.params.to_dict())
    _write_json(out / PROVENANCE_FILE, {
        'source': result.provenance.source,
        'response_digest': result.provenance.response_digest,
        'model': result.provenance.model,
        'repair_log': result.repair_log,
    })

    effective: Dict[str, Any] = {
        'command': 'design',
        'fallback': fallback,
        'max_retries': max_retries,
        'structured': bool(args.structured),
    }
    if args.structured:
        effective['pattern'] = vars(_pattern_from_args(args))
        effective['overrides'] = _parse_set(args.set)
    else:
        effective['prompt'] = args.prompt
        effective['offline'] = args.offline
        if not args.offline:
            effective['endpoint'] = endpoint.to_dict()
    _write_json(out / 'manifest.json', {
        'files': [
            {'path': name, 'sha256': _file_digest(out / name)}
            for name in (DRAFT_FILE, PARAMS_FILE, PROVENANCE_FILE)
        ],
        'effective_config': effective,
    })
    _err(f"✅ Design ({result.provenance.source}, {result.params.family}) gravado em {out.resolve()}")
    return EXIT_OK


def _add_pattern_args(parser: argparse.ArgumentParser, family_required: bool = False) -> None:
    parser.add_argument("--family", choices=FAMILIES, required=family_required, help="Família do padrão")
    parser.add_argument("--m", type=int, default=2, help="Sarja: passes por cima (padrão: 2)")
    parser.add_argument("--n", type=int, default=2, help="Sarja: passes por baixo (padrão: 2)")
    parser.add_argument("--satin-n", type=int, default=5, help="Cetim: tamanho (padrão: 5)")
    parser.add_argument("--satin-c", type=int, default=2, help="Cetim: contador (padrão: 2)")
    parser.add_argument("--block", type=int, default=2, help="Basket: tamanho do bloco (padrão: 2)")
    parser.add_argument("--band", type=int, default=4, help="Herringbone: largura da faixa (padrão: 4)")
    parser.add_argument("--rows", type=int, default=None, help="Linhas da repetição")
    parser.add_argument("--cols", type=int, default=None, help="Colunas da repetição")


def _add_scene_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scene", type=str, help="Diretório gerado por 'design' (draft.txt + params.json)")
    parser.add_argument("--draft", type=str, help="Arquivo de draft")
    parser.add_argument("--family", choices=FAMILIES, help="Família (usa o preset quando não há draft)")
    parser.add_argument("--params", type=str, help="Documento JSON de parâmetros")
    parser.add_argument("--k-sliding", type=float, default=None, help="Intensidade do deslizamento [0, 1)")
    parser.add_argument("--flyaway", action="store_true", help="Habilita fibras soltas")
    parser.add_argument("--repeat", type=int, default=None, help="Repetições do draft no mapa")
    parser.add_argument("--set", action="append", metavar="CHAVE=VALOR", help="Sobrescrita de parâmetro")
    parser.add_argument("--seed", type=int, default=None, help="Semente mestre")
    parser.add_argument("--workers", type=int, default=None, help="Número de threads")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        type=str,
        default=None,
        help="Arquivo de configuração YAML/JSON (padrão: valores embutidos)"
    )

    parser = argparse.ArgumentParser(
        description="Gera microestrutura procedural de tecidos a partir de drafts de tecelagem"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    draft = commands.add_parser("draft", help="Operações com drafts")
    draft_commands = draft.add_subparsers(dest="draft_command", required=True)
    gen = draft_commands.add_parser("gen", help="Gera o draft de uma família", parents=[common])
    _add_pattern_args(gen, family_required=True)
    gen.add_argument("--header", action="store_true", help="Inclui a linha de cabeçalho")
    gen.add_argument("--out", type=str, help="Arquivo de saída (padrão: stdout)")
    for name, help_text in (
        ("parse", "Lê um draft e imprime a matriz em JSON"),
        ("validate", "Valida um draft"),
        ("show", "Desenha o draft em ASCII"),
        ("serialize", "Reescreve o draft no formato canônico"),
    ):
        sub = draft_commands.add_parser(name, help=help_text, parents=[common])
        sub.add_argument("file", help="Arquivo de draft")
        if name == "serialize":
            sub.add_argument("--no-header", action="store_true", help="Omite a linha de cabeçalho")
    compare = draft_commands.add_parser("compare", help="Similaridade espectral entre dois drafts", parents=[common])
    compare.add_argument("first")
    compare.add_argument("second")
    draft.set_defaults(func=cmd_draft)

    bake = commands.add_parser("bake", help="Assa os mapas ladrilháveis", parents=[common])
    _add_scene_args(bake)
    bake.add_argument("--res", type=int, default=None, help="Resolução (potência de dois)")
    bake.add_argument("--supersample", action="store_true", default=None, help="4 sub-amostras por pixel")
    bake.add_argument("--out", type=str, default=None, help="Diretório de saída")
    bake.set_defaults(func=cmd_bake)

    render = commands.add_parser("render", help="Pré-visualização sombreada", parents=[common])
    _add_scene_args(render)
    render.add_argument("--albedo", type=str, help="Albedo PNG (8 bits sRGB ou 16 bits linear)")
    render.add_argument("--albedo-solid", type=str, help="Albedo de cor única '#rrggbb'")
    render.add_argument("--light", type=str, help="Luz como 'azimute,elevação' em graus")
    render.add_argument("--exposure", type=float, default=None, help="Exposição")
    render.add_argument("--res", type=int, default=None, help="Resolução da imagem")
    render.add_argument("--out", type=str, required=True, help="Imagem PNG de saída")
    render.set_defaults(func=cmd_render)

    design = commands.add_parser("design", help="Gera draft + parâmetros", parents=[common])
    design.add_argument("--prompt", type=str, help="Descrição do tecido")
    design.add_argument("--endpoint", type=str, help="URL do endpoint de chat-completion")
    design.add_argument("--offline", action="store_true", help="Força o mapeamento por palavras-chave")
    design.add_argument("--no-fallback", action="store_true", help="Falha (código 3) se o endpoint falhar")
    design.add_argument("--max-retries", type=int, default=None, help="Reparos por estágio")
    design.add_argument("--structured", action="store_true", help="Pedido estruturado sem endpoint")
    _add_pattern_args(design)
    design.add_argument("--set", action="append", metavar="CHAVE=VALOR", help="Sobrescrita de parâmetro")
    design.add_argument("--out", type=str, default=None, help="Diretório de saída")
    design.set_defaults(func=cmd_design)

    return parser


def main(argv=None) -> int:
    """Função principal da aplicação."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = ConfigLoader(args.config).load()
        return args.func(args, config)
    except (EndpointError, DesignRejected) as e:
        _err(f"❌ Endpoint: {e}")
        return EXIT_ENDPOINT
    except (ResolutionError, FormatError) as e:
        _err(f"❌ Erro: {e}")
        return EXIT_USAGE
    except FabricError as e:
        _err(f"❌ Inválido: {e}")
        return EXIT_INVALID
    except (OSError, ValueError) as e:
        _err(f"❌ Erro: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
