"""
Unfold a building block into a finite window of its crystal net.

Net vertices are identified by (class, cell): the quotient vertex they lie
over and an integer coordinate vector with respect to the period-lattice
basis. Positions are derived as offset(class) + lattice . cell, so no
floating comparison is ever used to decide vertex identity.
"""

import itertools
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from building_blocks import (
    BuildingBlockError,
    builtin_lattice,
    is_builtin,
    parse_building_block,
    period_lattice,
    serialize_block,
    vadd,
    vneg,
    vsub,
)
from quotient_graph import homology_basis, spanning_tree, positive_id

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

EXPORT_FORMATS = ('xyz', 'obj', 'json')

# diamond twin coset representatives of the four vertex classes
TWIN_OFFSETS = {
    'A': (0, 0, 0),
    'B': (0, 1, 1),
    'C': (1, 0, -1),
    'D': (-1, -1, 0),
}

# (class, class, beta - alpha) for every pair of adjacent vertex classes
TWIN_INCIDENCE = (
    ('A', 'B', (0, 0, 0)),
    ('A', 'C', (0, 0, 0)),
    ('A', 'D', (0, 0, 0)),
    ('B', 'C', (-2, 2, 2)),
    ('C', 'D', (2, 2, -2)),
    ('D', 'B', (-2, -2, -2)),
)


class WrongBlockError(ValueError):
    """A diamond-twin check was asked of a net built from another block."""


@dataclass(frozen=True)
class NetVertex:
    cls: str
    cell: tuple
    position: tuple


@dataclass(frozen=True)
class Bond:
    source: int
    target: int
    edge: str


@dataclass(frozen=True)
class CrystalNet:
    block: object
    lattice: object
    offsets: dict
    shifts: dict
    window: tuple
    vertices: tuple
    bonds: tuple
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, '_index', {(v.cls, v.cell): i for i, v in enumerate(self.vertices)})

    @property
    def dim(self):
        return self.lattice.dim

    def find(self, cls, cell):
        """Index of the vertex (cls, cell), or None when it is outside the window."""
        return self._index.get((cls, tuple(cell)))

    def degrees(self):
        counts = [0] * len(self.vertices)
        for b in self.bonds:
            counts[b.source] += 1
            counts[b.target] += 1
        return counts

    def is_interior(self, i):
        """True when every quotient neighbour of vertex i lies in the window."""
        v = self.vertices[i]
        return all(self.find(e.terminus, tuple(a + b for a, b in zip(v.cell, edge_shift(self, e.id))))
                   is not None for e in self.block.graph.star(v.cls))


def cube_window(n, d):
    return tuple((-n, n) for _ in range(d))


def normalize_window(window, d):
    if isinstance(window, int):
        return cube_window(window, d)
    window = tuple((int(lo), int(hi)) for lo, hi in window)
    if len(window) != d:
        raise BuildingBlockError(f'window has {len(window)} axes, expected {d}')
    return window


def _in_window(cell, window):
    return all(lo <= c <= hi for c, (lo, hi) in zip(cell, window))


def class_offsets(block, basis):
    """Position of (x, cell 0) for every class: sums of v along the spanning tree."""
    parents = spanning_tree(block.graph, basis.root)
    zero = tuple(Fraction(0) if block.exact else 0.0 for _ in range(block.dim))
    offsets = {basis.root: zero}

    def resolve(x):
        if x not in offsets:
            e = parents[x]
            offsets[x] = vadd(resolve(e.origin), block.v(e))
        return offsets[x]

    for x in block.graph.vertices:
        resolve(x)
    return offsets


def edge_shifts(block, lattice, offsets):
    """Integer cell shift s(e) with p_o(e) + v(e) = p_t(e) + lattice . s(e), per declared edge."""
    shifts = {}
    for e in block.graph.edges:
        delta = vsub(vadd(offsets[e.origin], block.v(e)), offsets[e.terminus])
        k = lattice.integer_coordinates(delta)
        if k is None:
            raise BuildingBlockError(f'edge {e.id!r} does not close up modulo the period lattice')
        shifts[e.id] = k
    return shifts


def edge_shift(net, edge_id):
    s = net.shifts[positive_id(edge_id)]
    return s if positive_id(edge_id) == edge_id else tuple(-c for c in s)


def build_net(block, basis=None, window=1):
    """
    Breadth-first unfolding from the reference vertex (root class, cell 0)
    restricted to `window`, completed by a sweep over all (class, cell)
    pairs of the window; bonds join every pair of window vertices related
    by a declared edge.
    """
    basis = homology_basis(block.graph) if basis is None else basis
    lattice = period_lattice(block, basis)
    window = normalize_window(window, lattice.dim)
    offsets = class_offsets(block, basis)
    shifts = edge_shifts(block, lattice, offsets)
    graph = block.graph

    def shift(e):
        s = shifts[positive_id(e.id)]
        return s if e.positive else tuple(-c for c in s)

    seen = set()
    start = (basis.root, tuple(0 for _ in range(lattice.dim)))
    if _in_window(start[1], window):
        seen.add(start)
        queue = deque([start])
        while queue:
            x, cell = queue.popleft()
            for e in graph.star(x):
                nxt = (e.terminus, tuple(a + b for a, b in zip(cell, shift(e))))
                if nxt not in seen and _in_window(nxt[1], window):
                    seen.add(nxt)
                    queue.append(nxt)

    swept = 0
    for cell in itertools.product(*(range(lo, hi + 1) for lo, hi in window)):
        for x in graph.vertices:
            if (x, cell) not in seen:
                seen.add((x, cell))
                swept += 1
    if swept:
        logger.debug('%d window vertices reached only through paths leaving the window', swept)

    keys = sorted(seen)
    vertices = tuple(NetVertex(x, cell, vadd(offsets[x], lattice.point(cell))) for x, cell in keys)
    index = {key: i for i, key in enumerate(keys)}
    bonds = []
    for i, (x, cell) in enumerate(keys):
        for e in graph.star(x):
            if not e.positive:
                continue
            j = index.get((e.terminus, tuple(a + b for a, b in zip(cell, shifts[e.id]))))
            if j is not None:
                bonds.append(Bond(i, j, e.id))

    net = CrystalNet(block, lattice, offsets, shifts, window, vertices, tuple(bonds))
    logger.info('built net with %d vertices and %d bonds', len(vertices), len(bonds))
    return net


def position_of(net, cls, cell):
    """Position of any net vertex, inside the window or not."""
    return vadd(net.offsets[cls], net.lattice.point(cell))


def translate_net(net, t):
    """The same net moved rigidly by the vector t."""
    offsets = {x: vadd(p, t) for x, p in net.offsets.items()}
    vertices = tuple(NetVertex(v.cls, v.cell, vadd(v.position, t)) for v in net.vertices)
    return CrystalNet(net.block, net.lattice, offsets, net.shifts, net.window, vertices, net.bonds)


def with_bonds(net, bonds):
    """Copy of the net with a replaced bond list (for probing the incidence checks)."""
    return CrystalNet(net.block, net.lattice, net.offsets, net.shifts, net.window,
                      net.vertices, tuple(bonds))


def has_integral_coordinates(net):
    return all(isinstance(x, (int, Fraction)) and Fraction(x).denominator == 1
               for v in net.vertices for x in v.position)


def bond_vector(net, bond):
    return vsub(net.vertices[bond.target].position, net.vertices[bond.source].position)


# ---- diamond twin description ----

@dataclass(frozen=True)
class DecompositionReport:
    passed: bool
    counts: dict
    mismatches: tuple


def _require_twin(net):
    if not is_builtin(net.block, 'laves'):
        raise WrongBlockError('vertex decomposition applies to the builtin laves block only')


def decompose_vertices(net):
    """
    Check that class A sits on 2L_DT and classes B, C, D on its cosets
    (0,1,1), (1,0,-1), (-1,-1,0) + 2L_DT.
    """
    _require_twin(net)
    twice = builtin_lattice('2L_DT')
    counts = {x: 0 for x in TWIN_OFFSETS}
    mismatches = []
    for i, v in enumerate(net.vertices):
        counts[v.cls] += 1
        if not twice.contains(vsub(v.position, TWIN_OFFSETS[v.cls])):
            mismatches.append(i)
    cells = 1
    for lo, hi in net.window:
        cells *= max(0, hi - lo + 1)
    complete = all(n == cells for n in counts.values())
    passed = not mismatches and complete
    if mismatches:
        logger.info('%d vertices off their coset, first %s', len(mismatches), net.vertices[mismatches[0]])
    return DecompositionReport(passed, counts, tuple(mismatches))


def check_incidence_rules(net):
    """Bond list equals, in both directions, the pairs the twin incidence rules predict."""
    _require_twin(net)
    by_position = {v.position: i for i, v in enumerate(net.vertices)}
    expected = set()
    for i, v in enumerate(net.vertices):
        alpha = vsub(v.position, TWIN_OFFSETS[v.cls])
        for first, second, step in TWIN_INCIDENCE:
            if v.cls != first:
                continue
            j = by_position.get(tuple(Fraction(x) for x in vadd(TWIN_OFFSETS[second], vadd(alpha, step))))
            if j is not None:
                expected.add(frozenset((i, j)))
    actual = {frozenset((b.source, b.target)) for b in net.bonds}
    missing, spurious = expected - actual, actual - expected
    if missing or spurious:
        logger.info('incidence mismatch: %d missing, %d spurious bonds', len(missing), len(spurious))
    return not missing and not spurious


# ---- export ----

def _fmt(x):
    return f'{float(x):.12g}'


def _xyz(net):
    lines = [f'# crystal net dim {net.dim}: {len(net.vertices)} vertices, {len(net.bonds)} bonds']
    for v in net.vertices:
        cell = ','.join(str(c) for c in v.cell)
        lines.append(f'{v.cls} {cell} ' + ' '.join(_fmt(x) for x in v.position))
    lines.extend(f'bond {b.source} {b.target}' for b in net.bonds)
    return '\n'.join(lines) + '\n'


def _obj(net):
    lines = [f'# crystal net: {len(net.vertices)} vertices, {len(net.bonds)} bonds', 'o net']
    for v in net.vertices:
        coords = list(v.position) + [0] * (3 - len(v.position))
        lines.append('v ' + ' '.join(_fmt(x) for x in coords[:3]))
    lines.extend(f'l {b.source + 1} {b.target + 1}' for b in net.bonds)
    return '\n'.join(lines) + '\n'


def net_to_dict(net):
    return {
        'schema_version': SCHEMA_VERSION,
        'dim': net.dim,
        'block': serialize_block(net.block),
        'window': [list(w) for w in net.window],
        'lattice': [[_fmt(x) for x in a] for a in net.lattice.vectors],
        'vertices': [{'class': v.cls, 'cell': list(v.cell), 'position': [float(_fmt(x)) for x in v.position]}
                     for v in net.vertices],
        'bonds': [{'source': b.source, 'target': b.target, 'edge': b.edge} for b in net.bonds],
    }


def _json(net):
    return json.dumps(net_to_dict(net), indent=2, sort_keys=True) + '\n'


def export_net(net, fmt, path=None):
    """Render the net as xyz, obj or json text; also write it when a path is given."""
    writers = {'xyz': _xyz, 'obj': _obj, 'json': _json}
    if fmt not in writers:
        raise BuildingBlockError(f'unknown export format {fmt!r}; choose from {EXPORT_FORMATS}')
    text = writers[fmt](net)
    if path is not None:
        Path(path).write_text(text, encoding='utf-8')
        logger.info('wrote %s export to %s', fmt, path)
    return text


def load_net_json(text):
    """Rebuild a net from its json export and check it against the stored records."""
    data = json.loads(text)
    block = parse_building_block(data['block'])
    net = build_net(block, window=tuple(tuple(w) for w in data['window']))
    stored = [(v['class'], tuple(v['cell'])) for v in data['vertices']]
    if stored != [(v.cls, v.cell) for v in net.vertices]:
        raise BuildingBlockError('json vertex records do not match the rebuilt net')
    if [(b['source'], b['target'], b['edge']) for b in data['bonds']] != \
            [(b.source, b.target, b.edge) for b in net.bonds]:
        raise BuildingBlockError('json bond records do not match the rebuilt net')
    return net


def neighbour_offsets(net):
    """Distinct bond vectors of the net, each with its negative (the stars of the block)."""
    vectors = set()
    for b in net.bonds:
        w = bond_vector(net, b)
        vectors.add(w)
        vectors.add(vneg(w))
    return sorted(vectors)
