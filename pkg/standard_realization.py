"""
Standard realization of the maximal abelian cover of a quotient graph.

The block is held as a matrix V (one row v(e) per declared edge). With the
cycle incidence matrix C of a homology basis, A = C V holds the period
vectors. The optimizer minimizes the scale-free energy

    f(V) = |V|^2 / |det A|^(2/d)

over harmonic V by projected gradient descent, renormalizing to unit
covolume after every step. At the minimum the stars sum to zero and the
edge vectors form a tight frame, which characterizes the standard
realization up to similarity.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from building_blocks import BuildingBlock, dot
from quotient_graph import betti_number, cycle_incidence_matrix, homology_basis, positive_id

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100000
DEFAULT_SEED = 0
INITIAL_STEP = 0.1
MAX_STEP = 0.25
MIN_STEP = 1e-16
PROGRESS_EVERY = 5000


@dataclass(frozen=True)
class RealizationState:
    block: BuildingBlock
    objective: float
    harmonic_residual: float
    frame_residual: float
    iterations: int = 0
    converged: bool = False


class ConvergenceError(ValueError):
    """The optimizer stopped before both residuals fell below tolerance."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


def energy(block):
    """Sum of |v(e)|^2 over declared edges (each undirected edge once)."""
    return sum((dot(v, v) for v in block.vectors.values()), Fraction(0) if block.exact else 0.0)


def incidence_matrix(graph):
    """|V| x |E| signed incidence: +1 at the origin, -1 at the terminus (loops vanish)."""
    row = {x: i for i, x in enumerate(graph.vertices)}
    b = np.zeros((len(graph.vertices), len(graph.edges)))
    for j, e in enumerate(graph.edges):
        b[row[e.origin], j] += 1
        b[row[e.terminus], j] -= 1
    return b


def block_matrix(block):
    return np.array([[float(x) for x in block.vectors[e.id]] for e in block.graph.edges])


def block_from_matrix(graph, v, name=None):
    vectors = {e.id: tuple(float(x) for x in v[j]) for j, e in enumerate(graph.edges)}
    return BuildingBlock(graph, vectors, v.shape[1], exact=False, name=name)


def project_harmonic(graph, v, incidence=None):
    """Remove the coboundary part of V: solve the graph Laplacian system B B^T phi = B V."""
    b = incidence_matrix(graph) if incidence is None else incidence
    laplacian = b @ b.T
    phi = np.linalg.lstsq(laplacian, b @ v, rcond=None)[0]
    return v - b.T @ phi


def normalize_covolume(v, c):
    """Scale V so the period lattice C V has covolume 1."""
    d = v.shape[1]
    return v / abs(np.linalg.det(c @ v)) ** (1.0 / d)


def covolume_energy(v, c):
    d = v.shape[1]
    return float(np.sum(v * v)) / abs(np.linalg.det(c @ v)) ** (2.0 / d)


def covolume_energy_gradient(v, c):
    """D^(-2/d) [2 V - (2/d) |V|^2 C^T A^-T] with A = C V and D = |det A|."""
    d = v.shape[1]
    a = c @ v
    total = float(np.sum(v * v))
    scale = abs(np.linalg.det(a)) ** (-2.0 / d)
    return scale * (2 * v - (2.0 / d) * total * c.T @ np.linalg.inv(a).T)


def harmonic_residual(graph, v, incidence=None):
    b = incidence_matrix(graph) if incidence is None else incidence
    return float(np.max(np.linalg.norm(b @ v, axis=1))) if len(graph.vertices) else 0.0


def frame_residual(v):
    """max |V^T V - cI| with c = tr(V^T V) / d."""
    s = v.T @ v
    c = np.trace(s) / s.shape[0]
    return float(np.max(np.abs(s - c * np.eye(s.shape[0]))))


def _state(graph, v, c, incidence, iterations, converged, name):
    return RealizationState(block_from_matrix(graph, v, name), covolume_energy(v, c),
                            harmonic_residual(graph, v, incidence), frame_residual(v),
                            iterations, converged)


def standard_realization(graph, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=DEFAULT_SEED):
    """Minimize the covolume-normalized energy over harmonic blocks on `graph`."""
    d = betti_number(graph)
    if d < 1:
        raise ConvergenceError('a tree has no periodic realization', None)
    c = cycle_incidence_matrix(graph, homology_basis(graph)).astype(float)
    b = incidence_matrix(graph)
    rng = np.random.default_rng(seed)
    v = normalize_covolume(project_harmonic(graph, rng.standard_normal((len(graph.edges), d)), b), c)

    step = INITIAL_STEP
    value = covolume_energy(v, c)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if harmonic_residual(graph, v, b) <= tol and frame_residual(v) <= tol:
            logger.info('converged after %d iterations, energy %.12g', iterations - 1, value)
            return _state(graph, v, c, b, iterations - 1, True, 'standard')
        gradient = project_harmonic(graph, covolume_energy_gradient(v, c), b)
        while step >= MIN_STEP:
            trial = normalize_covolume(project_harmonic(graph, v - step * gradient, b), c)
            trial_value = covolume_energy(trial, c)
            if trial_value <= value * (1 + 1e-15):
                v, value = trial, trial_value
                step = min(2 * step, MAX_STEP)
                break
            step /= 2
        else:
            break
        if iterations % PROGRESS_EVERY == 0:
            logger.debug('iteration %d: energy %.15g, frame residual %.3g, step %.3g',
                         iterations, value, frame_residual(v), step)

    state = _state(graph, v, c, b, iterations, False, 'standard')
    if state.harmonic_residual <= tol and state.frame_residual <= tol:
        return RealizationState(state.block, state.objective, state.harmonic_residual,
                                state.frame_residual, iterations, True)
    raise ConvergenceError(
        f'no convergence after {iterations} iterations: harmonic residual '
        f'{state.harmonic_residual:.3g}, frame residual {state.frame_residual:.3g}', state)


# ---- similarity of blocks ----

def _unit_energy_vectors(block):
    scale = 1 / math.sqrt(float(energy(block)))
    return {e.id: np.array([float(x) for x in block.v(e)]) * scale for e in block.graph.dedges}


def _sorted_gram(vectors):
    m = np.array(list(vectors.values()))
    return np.sort((m @ m.T).ravel())


def _edge_order(graph):
    """Declared edges ordered so each one touches a vertex already reached."""
    reached = {graph.vertices[0]}
    pending = list(graph.edges)
    order = []
    while pending:
        for e in pending:
            if e.origin in reached or e.terminus in reached:
                order.append(e)
                reached.update((e.origin, e.terminus))
                pending.remove(e)
                break
        else:
            order.extend(pending)
            break
    return order


def similar_blocks(first, second, tol=1e-6):
    """
    True iff, at unit total energy, an orthogonal map together with a
    quotient-graph isomorphism carries the first block onto the second.
    """
    g1, g2 = first.graph, second.graph
    if (first.dim != second.dim or len(g1.edges) != len(g2.edges)
            or len(g1.vertices) != len(g2.vertices)
            or sorted(g1.degree(x) for x in g1.vertices) != sorted(g2.degree(x) for x in g2.vertices)):
        return False
    u1, u2 = _unit_energy_vectors(first), _unit_energy_vectors(second)
    if not np.allclose(_sorted_gram(u1), _sorted_gram(u2), atol=tol):
        return False

    order = _edge_order(g1)
    images = []
    vertex_map = {}
    used = set()

    def consistent(e, f):
        for a, b in ((e.origin, f.origin), (e.terminus, f.terminus)):
            if vertex_map.get(a, b) != b:
                return False
            if a not in vertex_map and b in vertex_map.values():
                return False
        if e.is_loop != f.is_loop:
            return False
        return all(abs(u1[e.id] @ u1[p.id] - u2[f.id] @ u2[q.id]) <= tol
                   for p, q in zip(order, images + [f]))

    def confirm():
        source = np.array([u1[e.id] for e in order])
        target = np.array([u2[f.id] for f in images])
        linear = np.linalg.lstsq(source, target, rcond=None)[0].T
        orthogonal = np.allclose(linear.T @ linear, np.eye(first.dim), atol=10 * tol)
        return orthogonal and np.allclose(source @ linear.T, target, atol=10 * tol)

    def extend(i):
        if i == len(order):
            return confirm()
        e = order[i]
        for f in g2.dedges:
            if positive_id(f.id) in used or not consistent(e, f):
                continue
            added = [a for a in (e.origin, e.terminus) if a not in vertex_map]
            vertex_map[e.origin], vertex_map[e.terminus] = f.origin, f.terminus
            images.append(f)
            used.add(positive_id(f.id))
            if extend(i + 1):
                return True
            used.discard(positive_id(f.id))
            images.pop()
            for a in added:
                del vertex_map[a]
        return False

    return extend(0)


def realization_metadata(state):
    return [
        'standard realization',
        'covolume 1',
        f'energy {state.objective:.12g}',
        f'harmonic residual {state.harmonic_residual:.3g}',
        f'frame residual {state.frame_residual:.3g}',
        f'iterations {state.iterations}',
    ]