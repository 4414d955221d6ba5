"""
Girth and minimal rings of crystal nets.

Rings are searched as non-backtracking walks in the covering graph, lifted
from the quotient graph: a lifted vertex is (class, cell) and a directed
edge e moves it to (t(e), cell + s(e)). A ring of length n through a vertex
is a simple closed lifted walk of n edges; rings are counted unoriented and
without a distinguished start.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import networkx as nx

from building_blocks import BuildingBlockError, hat_v, is_builtin, is_zero, period_lattice, vadd
from net_builder import WrongBlockError, build_net, class_offsets, edge_shifts
from quotient_graph import homology_basis, parse_word, positive_id

logger = logging.getLogger(__name__)

THREADS = max(1, int(os.environ.get('TOPOCRYST_THREADS', '1')))
GIRTH_CAP = int(os.environ.get('TOPOCRYST_GIRTH_CAP', '20'))

# decagons through a vertex of class A of the diamond twin; '~x' is the inverse of x
LAVES_RING_WORDS = (
    'e1 f3 ~e2 e3 f2 ~e1 e2 ~f3 ~f2 ~e3',
    'e1 ~f2 ~e3 e2 ~f3 ~e1 e3 f2 f3 ~e2',
    'e2 ~f3 ~e1 e3 f2 f3 ~e2 e1 ~f2 ~e3',
    'e1 f3 ~e2 e3 ~f1 ~f3 ~e1 e2 f1 ~e3',
    'e1 f3 f1 ~e3 e2 ~f3 ~e1 e3 ~f1 ~e2',
    'e2 ~f3 ~e1 e3 ~f1 ~e2 e1 f3 f1 ~e3',
    'e1 ~f2 ~e3 e2 f1 f2 ~e1 e3 ~f1 ~e2',
    'e1 ~f2 ~f1 ~e2 e3 f2 ~e1 e2 f1 ~e3',
    'e2 f1 f2 ~e1 e3 ~f1 ~e2 e1 ~f2 ~e3',
    'e1 f3 f1 f2 ~e1 e3 ~f1 ~f3 ~f2 ~e3',
    'e1 ~f2 ~f1 ~f3 ~e1 e3 f2 f3 f1 ~e3',
    'e1 f3 f1 f2 ~e1 e2 ~f3 ~f2 ~f1 ~e2',
    'e1 ~f2 ~f1 ~f3 ~e1 e2 f1 f2 f3 ~e2',
    'e2 f1 f2 f3 ~e2 e3 ~f1 ~f3 ~f2 ~e3',
    'e2 ~f3 ~f2 ~f1 ~e2 e3 f2 f3 f1 ~e3',
)


class RingSearchError(ValueError):
    """No closed circuit up to the girth cap."""


@dataclass(frozen=True)
class Cover:
    """Lifting data of a block: period lattice, class offsets and per-edge cell shifts."""
    block: object
    lattice: object
    offsets: dict
    shifts: dict

    def step(self, state, e):
        x, cell = state
        s = self.shifts[positive_id(e.id)]
        if not e.positive:
            s = tuple(-c for c in s)
        return e.terminus, tuple(a + b for a, b in zip(cell, s))

    def position(self, state):
        x, cell = state
        return vadd(self.offsets[x], self.lattice.point(cell))

    def origin(self, x):
        return x, tuple(0 for _ in range(self.lattice.dim))


def cover_of(block):
    basis = homology_basis(block.graph)
    lattice = period_lattice(block, basis)
    offsets = class_offsets(block, basis)
    return Cover(block, lattice, offsets, edge_shifts(block, lattice, offsets))


@dataclass(frozen=True)
class Ring:
    """Closed lifted walk; states[i] is the origin of word[i]."""
    word: tuple
    states: tuple
    canonical_key: tuple

    @property
    def length(self):
        return len(self.word)


def canonical_key(graph, word, states):
    """Lexicographic minimum over rotations and the reversed orientation."""
    n = len(word)
    forward = [(word[i], states[i]) for i in range(n)]
    # reversed walk: inverse edges in reverse order, each starting where the original ended
    backward = [(graph.edge(word[i]).inverse, states[(i + 1) % n]) for i in reversed(range(n))]
    candidates = []
    for seq in (forward, backward):
        for r in range(n):
            candidates.append(tuple((eid, cls, cell) for eid, (cls, cell) in seq[r:] + seq[:r]))
    return min(candidates)


def _walks(cover, start, length, first_edges, stop_at_first=False):
    """Simple closed non-backtracking walks of exactly `length` edges from start."""
    graph = cover.block.graph
    found = []
    word, states = [], [start]
    visited = {start}

    def extend(state, last):
        depth = len(word)
        for e in graph.star(state[0]) if depth else first_edges:
            if last is not None and e.id == last.inverse:
                continue
            nxt = cover.step(state, e)
            if depth + 1 == length:
                if nxt == start:
                    found.append((tuple(w.id for w in word + [e]), tuple(states)))
                    if stop_at_first:
                        return True
                continue
            if nxt in visited:
                continue
            word.append(e)
            states.append(nxt)
            visited.add(nxt)
            done = extend(nxt, e)
            visited.discard(nxt)
            states.pop()
            word.pop()
            if done:
                return True
        return False

    extend(start, None)
    return found


def rings_through_vertex(block, x, length, cover=None):
    """All distinct unoriented rings of the given length through (x, cell 0), sorted by key."""
    cover = cover_of(block) if cover is None else cover
    graph = block.graph
    if x not in graph.vertices:
        raise BuildingBlockError(f'unknown vertex {x!r}')
    start = cover.origin(x)
    star = graph.star(x)

    def search(e):
        return _walks(cover, start, length, (e,))

    with ThreadPoolExecutor(max_workers=min(THREADS, len(star))) as pool:
        batches = list(pool.map(search, star))

    rings = {}
    for batch in batches:
        for word, states in batch:
            key = canonical_key(graph, word, states)
            rings.setdefault(key, Ring(word, states, key))
    logger.info('%d rings of length %d through %s', len(rings), length, x)
    return [rings[k] for k in sorted(rings)]


def girth(block, cap=GIRTH_CAP):
    """Shortest simple closed lifted walk, by iterative deepening over every class."""
    cover = cover_of(block)
    graph = block.graph
    for n in range(1, cap + 1):
        for x in graph.vertices:
            if _walks(cover, cover.origin(x), n, graph.star(x), stop_at_first=True):
                logger.debug('girth %d found at class %s', n, x)
                return n
    raise RingSearchError(f'no circuit of length <= {cap}')


def lift_word(cover, x, word):
    """Lift a quotient path from (x, cell 0); returns the states visited, end included."""
    graph = cover.block.graph
    state = cover.origin(x)
    states = [state]
    for eid in word:
        e = graph.edge(eid)
        if e.origin != state[0]:
            raise BuildingBlockError(f'edge {eid} does not start at {state[0]}')
        state = cover.step(state, e)
        states.append(state)
    return states


def is_simple_circuit(states):
    return states[0] == states[-1] and len(set(states[:-1])) == len(states) - 1


def verify_listed_rings(block):
    """
    The fifteen decagon words of the diamond twin are null-homologous, lift
    to simple decagons through (A, 0) and are exactly the enumerated rings.
    """
    if not is_builtin(block, 'laves'):
        raise WrongBlockError('the listed decagons belong to the builtin laves block')
    cover = cover_of(block)
    graph = block.graph
    keys = []
    for text in LAVES_RING_WORDS:
        path = parse_word(graph, text)
        if not path.is_closed or not is_zero(hat_v(block, path)):
            logger.warning('word %r is not homologous to zero', text)
            return False
        states = lift_word(cover, path.origin, path.ids)
        if len(path) != 10 or not is_simple_circuit(states):
            logger.warning('word %r does not lift to a simple decagon', text)
            return False
        keys.append(canonical_key(graph, path.ids, tuple(states[:-1])))
    if len(set(keys)) != len(keys):
        logger.warning('listed words are not pairwise distinct rings')
        return False
    enumerated = {r.canonical_key for r in rings_through_vertex(block, 'A', 10, cover)}
    return set(keys) == enumerated


@dataclass(frozen=True)
class RingGeometry:
    positions: tuple
    edge_lengths: tuple
    angles: tuple


def ring_geometry(ring, block, cover=None):
    """Vertex positions, edge lengths and the sorted angles (radians) at the ring's vertices."""
    cover = cover_of(block) if cover is None else cover
    positions = tuple(tuple(float(c) for c in cover.position(s)) for s in ring.states)
    vectors = [tuple(float(c) for c in block.v(eid)) for eid in ring.word]
    lengths = tuple(math.sqrt(sum(c * c for c in w)) for w in vectors)
    angles = []
    n = len(vectors)
    for i in range(n):
        incoming, outgoing = vectors[i - 1], vectors[i]
        cosine = -sum(a * b for a, b in zip(incoming, outgoing)) / (lengths[i - 1] * lengths[i])
        angles.append(math.acos(max(-1.0, min(1.0, cosine))))
    return RingGeometry(positions, lengths, tuple(sorted(angles)))


def rings_report(block, x=None, length=None):
    """Girth, ring count and canonical words for the `rings` subcommand."""
    graph = block.graph
    girth_value = girth(block)
    length = girth_value if length is None else length
    vertices = graph.vertices if x is None else (x,)
    cover = cover_of(block)
    per_class = {}
    for v in vertices:
        found = rings_through_vertex(block, v, length, cover)
        per_class[v] = {
            'count': len(found),
            'words': [' '.join(r.word) for r in found],
            'cells': [[list(cell) for _, cell in r.states] for r in found],
        }
    return {'girth': girth_value, 'length': length, 'vertices': per_class}


def rings_by_window_search(block, x, length, radius=3):
    """
    Vertex sets of the simple cycles of the given length through (x, cell 0),
    found by exhaustive search in a built window; an independent check on
    rings_through_vertex.
    """
    net = build_net(block, window=radius)
    graph = nx.Graph()
    graph.add_nodes_from(range(len(net.vertices)))
    graph.add_edges_from((b.source, b.target) for b in net.bonds)
    center = net.find(x, tuple(0 for _ in range(net.dim)))
    ball = nx.ego_graph(graph, center, radius=length // 2)
    found = set()
    for cycle in nx.simple_cycles(ball, length_bound=length):
        if len(cycle) == length and center in cycle:
            found.add(frozenset((net.vertices[i].cls, net.vertices[i].cell) for i in cycle))
    return found


def ring_vertex_sets(rings):
    return {frozenset(r.states) for r in rings}
