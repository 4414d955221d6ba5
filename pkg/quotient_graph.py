"""
Quotient graphs of crystal nets.

A crystal net is an abelian covering graph of a finite multigraph X0 = (V0, E0).
Graphs here follow the half-edge model: every declared edge e becomes two
directed edges, e and its inverse ~e, with o(~e) = t(e) and t(~e) = o(e).
Loops and parallel edges therefore need no special handling.

QG text format (UTF-8, one statement per line, '#' starts a comment):

    dim 3
    vertex A
    vertex B
    edge e1 A B v= -1 1 1

`v=` is optional; components are integers, p/q rationals or decimals
(decimals switch the description to float mode).
"""

import logging
from collections import deque, namedtuple
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)

INVERSE_PREFIX = '~'

GraphDescription = namedtuple('GraphDescription', ['graph', 'vectors', 'dim', 'exact'])


class QuotientGraphError(ValueError):
    """Malformed graph description, unknown edge or broken path."""


def inverse_id(edge_id):
    if edge_id.startswith(INVERSE_PREFIX):
        return edge_id[len(INVERSE_PREFIX):]
    return INVERSE_PREFIX + edge_id


def positive_id(edge_id):
    return edge_id[len(INVERSE_PREFIX):] if edge_id.startswith(INVERSE_PREFIX) else edge_id


@dataclass(frozen=True)
class DirectedEdge:
    id: str
    origin: str
    terminus: str

    @property
    def inverse(self):
        return inverse_id(self.id)

    @property
    def positive(self):
        return not self.id.startswith(INVERSE_PREFIX)

    @property
    def is_loop(self):
        return self.origin == self.terminus


@dataclass(frozen=True)
class QuotientGraph:
    """Connected finite multigraph; `edges` holds the declared (positive) edges."""
    vertices: tuple
    edges: tuple
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for e in self.edges:
            index[e.id] = e
            index[e.inverse] = DirectedEdge(e.inverse, e.terminus, e.origin)
        object.__setattr__(self, '_index', index)

    @property
    def dedges(self):
        """All directed edges, each declared edge followed by its inverse."""
        return tuple(self._index[i] for e in self.edges for i in (e.id, e.inverse))

    def edge(self, edge_id):
        try:
            return self._index[edge_id]
        except KeyError:
            raise QuotientGraphError(f'unknown edge {edge_id!r}') from None

    def inv(self, edge):
        return self._index[inverse_id(edge.id)]

    def star(self, x):
        """E_x: the directed edges with origin x, sorted by id."""
        return tuple(sorted((e for e in self._index.values() if e.origin == x),
                            key=lambda e: e.id))

    def degree(self, x):
        return len(self.star(x))


@dataclass(frozen=True)
class CyclePath:
    """Path (e_1, ..., e_n) in a quotient graph with t(e_i) = o(e_{i+1})."""
    edges: tuple

    def __post_init__(self):
        if not self.edges:
            raise QuotientGraphError('a path needs at least one edge')
        for a, b in zip(self.edges, self.edges[1:]):
            if a.terminus != b.origin:
                raise QuotientGraphError(
                    f'edges {a.id} and {b.id} are not consecutive ({a.terminus} != {b.origin})')

    @property
    def is_closed(self):
        return self.edges[-1].terminus == self.edges[0].origin

    @property
    def origin(self):
        return self.edges[0].origin

    @property
    def ids(self):
        return tuple(e.id for e in self.edges)

    def reversed(self):
        return CyclePath(tuple(DirectedEdge(e.inverse, e.terminus, e.origin)
                               for e in reversed(self.edges)))

    def __add__(self, other):
        return CyclePath(self.edges + other.edges)

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True)
class HomologyBasis:
    cycles: tuple
    root: str
    tree_edges: frozenset
    cotree_edges: tuple

    @property
    def d(self):
        return len(self.cycles)


def build_graph(vertices, edges):
    """
    Validate and assemble a QuotientGraph.

    vertices: iterable of ids; edges: iterable of (id, origin, terminus).
    """
    vertices = list(vertices)
    if not vertices:
        raise QuotientGraphError('graph has no vertices')
    if len(set(vertices)) != len(vertices):
        raise QuotientGraphError('duplicate vertex id')
    known = set(vertices)

    dedges = []
    seen = set()
    for edge_id, origin, terminus in edges:
        if edge_id.startswith(INVERSE_PREFIX):
            raise QuotientGraphError(f'edge id {edge_id!r} may not start with {INVERSE_PREFIX!r}')
        if edge_id in seen:
            raise QuotientGraphError(f'duplicate edge id {edge_id!r}')
        for endpoint in (origin, terminus):
            if endpoint not in known:
                raise QuotientGraphError(f'edge {edge_id!r} refers to unknown vertex {endpoint!r}')
        seen.add(edge_id)
        dedges.append(DirectedEdge(edge_id, origin, terminus))

    g = QuotientGraph(tuple(sorted(vertices)), tuple(sorted(dedges, key=lambda e: e.id)))
    unreached = _unreached_vertices(g)
    if unreached:
        raise QuotientGraphError(f'graph is disconnected; unreachable vertex {unreached[0]!r}')
    return g


def _unreached_vertices(g):
    multigraph = nx.MultiGraph()
    multigraph.add_nodes_from(g.vertices)
    multigraph.add_edges_from((e.origin, e.terminus) for e in g.edges)
    reached = nx.node_connected_component(multigraph, g.vertices[0])
    return [x for x in g.vertices if x not in reached]


def _parse_component(token, lineno):
    try:
        value = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise QuotientGraphError(f'line {lineno}: bad vector component {token!r}') from None
    is_float = any(c in token for c in '.eE')
    return (float(value) if is_float else value), is_float


def read_graph_description(text):
    """
    Parse QG text into a GraphDescription (graph, vectors, dim, exact).

    vectors maps each declared edge id to a tuple of Fractions (exact) or
    floats; it is empty for a bare graph.
    """
    vertex_lines = {}
    edge_rows = []
    vectors = {}
    dim = None
    any_float = False

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]

        if keyword == 'dim':
            if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) < 1:
                raise QuotientGraphError(f'line {lineno}: expected "dim <d>": {raw.strip()!r}')
            dim = int(tokens[1])
        elif keyword == 'vertex':
            if len(tokens) != 2:
                raise QuotientGraphError(f'line {lineno}: expected "vertex <id>": {raw.strip()!r}')
            if tokens[1] in vertex_lines:
                raise QuotientGraphError(
                    f'line {lineno}: duplicate vertex id {tokens[1]!r} '
                    f'(first declared on line {vertex_lines[tokens[1]]})')
            vertex_lines[tokens[1]] = lineno
        elif keyword == 'edge':
            if len(tokens) < 4:
                raise QuotientGraphError(f'line {lineno}: expected "edge <id> <from> <to>": {raw.strip()!r}')
            edge_id, origin, terminus = tokens[1:4]
            if edge_id.startswith(INVERSE_PREFIX):
                raise QuotientGraphError(f'line {lineno}: edge id may not start with {INVERSE_PREFIX!r}')
            if any(edge_id == row[1] for row in edge_rows):
                raise QuotientGraphError(f'line {lineno}: duplicate edge id {edge_id!r}')
            rest = tokens[4:]
            if rest:
                if rest[0] != 'v=':
                    raise QuotientGraphError(f'line {lineno}: expected "v=" after endpoints: {raw.strip()!r}')
                parsed = [_parse_component(tok, lineno) for tok in rest[1:]]
                if not parsed:
                    raise QuotientGraphError(f'line {lineno}: empty vector')
                any_float = any_float or any(flag for _, flag in parsed)
                vectors[edge_id] = tuple(value for value, _ in parsed)
            edge_rows.append((lineno, edge_id, origin, terminus))
        else:
            raise QuotientGraphError(f'line {lineno}: unknown statement {keyword!r}')

    if not vertex_lines:
        raise QuotientGraphError('graph has no vertices')
    for lineno, edge_id, origin, terminus in edge_rows:
        for endpoint in (origin, terminus):
            if endpoint not in vertex_lines:
                raise QuotientGraphError(f'line {lineno}: edge {edge_id!r} has dangling endpoint {endpoint!r}')

    if vectors:
        missing = [(lineno, eid) for lineno, eid, _, _ in edge_rows if eid not in vectors]
        if missing:
            raise QuotientGraphError(f'line {missing[0][0]}: edge {missing[0][1]!r} lacks a v= vector')
        first_line, first_id = edge_rows[0][:2]
        declared = dim is not None
        if not declared:
            dim = len(vectors[first_id])
        for lineno, eid, _, _ in edge_rows:
            size = len(vectors[eid])
            if size == dim:
                continue
            if declared:
                raise QuotientGraphError(f'line {lineno}: vector of {eid!r} has {size} components, expected {dim}')
            raise QuotientGraphError(
                f'line {lineno}: vector of {eid!r} has {size} components but {first_id!r} '
                f'on line {first_line} has {dim}')
        if any_float:
            vectors = {k: tuple(float(c) for c in v) for k, v in vectors.items()}

    g = QuotientGraph(tuple(sorted(vertex_lines)),
                      tuple(sorted((DirectedEdge(eid, o, t) for _, eid, o, t in edge_rows),
                                   key=lambda e: e.id)))
    unreached = _unreached_vertices(g)
    if unreached:
        raise QuotientGraphError(
            f'line {vertex_lines[unreached[0]]}: graph is disconnected; '
            f'vertex {unreached[0]!r} cannot be reached')
    return GraphDescription(g, vectors, dim, not any_float)


def parse_quotient_graph(text):
    """Parse QG text; inverse edges are synthesized for every declared edge."""
    return read_graph_description(text).graph


def format_component(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    text = f'{float(x):.12g}'
    if not any(c in text for c in '.eEn'):
        text += '.0'
    return text


def serialize_quotient_graph(g, vectors=None, dim=None, comments=()):
    lines = [f'# {c}' for c in comments]
    if dim is not None:
        lines.append(f'dim {dim}')
    lines.extend(f'vertex {x}' for x in g.vertices)
    for e in g.edges:
        line = f'edge {e.id} {e.origin} {e.terminus}'
        if vectors:
            line += ' v= ' + ' '.join(format_component(c) for c in vectors[e.id])
        lines.append(line)
    return '\n'.join(lines) + '\n'


def parse_word(g, text):
    """Path from whitespace separated edge ids; '~x' is the inverse of x."""
    return CyclePath(tuple(g.edge(token) for token in text.split()))


def betti_number(g):
    """First Betti number |E|/2 - |V| + 1 of a connected graph."""
    return len(g.edges) - len(g.vertices) + 1


def spanning_tree(g, root=None):
    """
    BFS spanning tree.

    Returns a dict mapping every non-root vertex to the directed tree edge
    that enters it. Stars are scanned in id order so the tree is reproducible.
    """
    root = g.vertices[0] if root is None else root
    if root not in g.vertices:
        raise QuotientGraphError(f'unknown vertex {root!r}')
    parents = {}
    visited = {root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for e in g.star(x):
            if e.terminus not in visited:
                visited.add(e.terminus)
                parents[e.terminus] = e
                queue.append(e.terminus)
    return parents


def _tree_path(parents, root, x):
    path = []
    while x != root:
        e = parents[x]
        path.append(e)
        x = e.origin
    return path[::-1]


def homology_basis(g, root=None):
    """
    Z-basis of H1(X0, Z): one closed path per co-tree edge e, going
    root -> o(e) along the tree, across e, and back t(e) -> root.
    """
    root = g.vertices[0] if root is None else root
    parents = spanning_tree(g, root)
    tree_ids = frozenset(positive_id(e.id) for e in parents.values())

    cycles = []
    cotree = []
    for e in g.edges:
        if e.id in tree_ids:
            continue
        out = _tree_path(parents, root, e.origin)
        back = [g.inv(p) for p in reversed(_tree_path(parents, root, e.terminus))]
        cycles.append(CyclePath(tuple(out + [e] + back)))
        cotree.append(e.id)

    basis = HomologyBasis(tuple(cycles), root, tree_ids, tuple(cotree))
    logger.debug('homology basis with %d cycles rooted at %s', basis.d, root)
    return basis


def cycle_incidence_matrix(g, h):
    """d x |E|/2 matrix: signed number of traversals of each declared edge."""
    column = {e.id: i for i, e in enumerate(g.edges)}
    m = np.zeros((len(h.cycles), len(g.edges)), dtype=int)
    for row, cycle in enumerate(h.cycles):
        for e in cycle.edges:
            m[row, column[positive_id(e.id)]] += 1 if e.positive else -1
    return m


def dipole_graph(n):
    """Two vertices A, B joined by n parallel edges e1..en (A -> B)."""
    return build_graph(['A', 'B'], [(f'e{i}', 'A', 'B') for i in range(1, n + 1)])


def theta_graph():
    return dipole_graph(3)


def bouquet_graph(n):
    """One vertex A with n loops."""
    return build_graph(['A'], [(f'e{i}', 'A', 'A') for i in range(1, n + 1)])


def complete_graph(n):
    names = [chr(ord('A') + i) for i in range(n)]
    return build_graph(names, [(f'{u}{w}', u, w)
                               for i, u in enumerate(names) for w in names[i + 1:]])
