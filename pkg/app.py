import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from building_blocks import BUILTIN_PREFIX, builtin_lattice, load_block, parse_lattice, period_lattice, serialize_block
from lattice_analysis import lattice_report, parse_root_lattice
from net_builder import EXPORT_FORMATS, SCHEMA_VERSION, build_net, export_net
from net_symmetry import symmetry_report
from quotient_graph import homology_basis, parse_quotient_graph
from rings import rings_report
from standard_realization import (
    DEFAULT_MAX_ITER,
    DEFAULT_SEED,
    DEFAULT_TOL,
    realization_metadata,
    standard_realization,
)
from acceptance import export_results, print_summary, run_checks

logger = logging.getLogger('topocryst')

LOG_LEVEL = os.environ.get('TOPOCRYST_LOG_LEVEL', 'WARNING').upper()

DEFAULT_GRAPH = BUILTIN_PREFIX + 'laves'


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    graph: str = DEFAULT_GRAPH
    out: str = None
    window: int = 1
    length: int = None
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED
    fmt: str = 'json'
    vertex: str = None
    max_iter: int = DEFAULT_MAX_ITER
    lattice: str = None


def _is_input_path(source):
    return not source.startswith(BUILTIN_PREFIX)


def _is_root_name(source):
    return source[:1] in 'AD' and source[1:].isdigit()


def validate(config):
    """Problems with the config found before any work starts (usage errors)."""
    problems = []
    if _is_input_path(config.graph) and not Path(config.graph).is_file():
        problems.append(f'input file not found: {config.graph}')
    lattice = config.lattice
    if lattice and _is_input_path(lattice) and not _is_root_name(lattice) and not Path(lattice).is_file():
        problems.append(f'input file not found: {lattice}')
    if config.out is not None and not Path(config.out).resolve().parent.is_dir():
        problems.append(f'output directory does not exist: {Path(config.out).parent}')
    if config.window < 0:
        problems.append('--window must be >= 0')
    if config.length is not None and config.length < 1:
        problems.append('--length must be >= 1')
    if config.tol <= 0:
        problems.append('--tol must be positive')
    if config.max_iter < 1:
        problems.append('--max-iter must be >= 1')
    return problems


def emit(text, config):
    if config.out is None:
        sys.stdout.write(text)
    else:
        Path(config.out).write_text(text, encoding='utf-8')
        logger.info('wrote %s output to %s', config.subcommand, config.out)


def report_text(config, report, source=None):
    payload = {'schema_version': SCHEMA_VERSION, 'subcommand': config.subcommand,
               'input': config.graph if source is None else source}
    payload.update(report)
    return json.dumps(payload, indent=2, sort_keys=True) + '\n'


def run_build(config):
    net = build_net(load_block(config.graph), window=config.window)
    emit(export_net(net, config.fmt), config)
    return 0


def load_lattice(config):
    source = config.lattice
    if source is None:
        block = load_block(config.graph)
        return period_lattice(block, homology_basis(block.graph))
    if source.startswith(BUILTIN_PREFIX):
        return builtin_lattice(source[len(BUILTIN_PREFIX):])
    if not Path(source).is_file():
        return parse_root_lattice(source)
    return parse_lattice(Path(source).read_text(encoding='utf-8'))


def run_lattice(config):
    report = lattice_report(load_lattice(config))
    emit(report_text(config, report, config.lattice), config)
    return 0


def run_rings(config):
    report = rings_report(load_block(config.graph), config.vertex, config.length)
    emit(report_text(config, report), config)
    return 0


def run_symmetry(config):
    net = build_net(load_block(config.graph), window=0)
    emit(report_text(config, symmetry_report(net)), config)
    return 0


def load_graph(source):
    """Quotient graph of a builtin block or of a QG file; v= annotations are ignored."""
    if source.startswith(BUILTIN_PREFIX):
        return load_block(source).graph
    return parse_quotient_graph(Path(source).read_text(encoding='utf-8'))


def run_standardize(config):
    graph = load_graph(config.graph)
    state = standard_realization(graph, tol=config.tol, max_iter=config.max_iter, seed=config.seed)
    comments = [f'source {config.graph}', f'seed {config.seed}'] + realization_metadata(state)
    emit(serialize_block(state.block, comments), config)
    return 0


def run_acceptance(config):
    results = run_checks()
    print_summary(results)
    if config.out is not None:
        export_results(results, config.out)
    return 0 if all(r['passed'] for r in results) else 1


SUBCOMMANDS = {
    'build': (run_build, 'Export a window of the crystal net'),
    'lattice': (run_lattice, 'Analyse a lattice: shortest vectors, point group, orthogonal symmetry'),
    'rings': (run_rings, 'Girth and minimal rings through each vertex class'),
    'symmetry': (run_symmetry, 'Net point group, strong isotropy and chirality'),
    'standardize': (run_standardize, 'Standard realization of the quotient graph'),
    'verify-paper': (run_acceptance, 'Run every acceptance check and print a pass/fail table'),
}


def make_parser():
    parser = argparse.ArgumentParser(prog='app.py', description='Topological crystallography toolkit.')
    subparsers = parser.add_subparsers(dest='subcommand', required=True, metavar='SUBCOMMAND')
    for name, (_, help_text) in SUBCOMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument('--out', help='Write the result here instead of stdout')
        if name == 'verify-paper':
            continue
        sub.add_argument('--graph', default=DEFAULT_GRAPH,
                         help=f'QG file or {BUILTIN_PREFIX}NAME (default: {DEFAULT_GRAPH})')
        if name == 'build':
            sub.add_argument('--window', type=int, default=1, help='Cells in [-n, n]^d (default: 1)')
            sub.add_argument('--format', dest='fmt', choices=EXPORT_FORMATS, default='json')
        elif name == 'lattice':
            sub.add_argument('--lattice', help=f'Basis file, {BUILTIN_PREFIX}NAME or a root system such as A3')
        elif name == 'rings':
            sub.add_argument('--length', type=int, help='Ring length (default: the girth)')
            sub.add_argument('--vertex', help='Vertex class (default: every class)')
        elif name == 'standardize':
            sub.add_argument('--tol', type=float, default=DEFAULT_TOL)
            sub.add_argument('--seed', type=int, default=DEFAULT_SEED)
            sub.add_argument('--max-iter', dest='max_iter', type=int, default=DEFAULT_MAX_ITER)
    return parser


def config_from_args(args):
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    return RunConfig(**fields)


def main(argv=None):
    logging.basicConfig(format='%(levelname)s: %(message)s', stream=sys.stderr, level=LOG_LEVEL)
    parser = make_parser()
    args = parser.parse_args(argv)
    config = config_from_args(args)
    problems = validate(config)
    if problems:
        parser.print_usage(sys.stderr)
        for problem in problems:
            print(f'ERROR: {problem}', file=sys.stderr)
        return 2

    handler, _ = SUBCOMMANDS[config.subcommand]
    try:
        return handler(config)
    except ValueError as e:
        print(f'ERROR: {e}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
