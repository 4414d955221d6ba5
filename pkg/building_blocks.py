"""
Building blocks and period lattices.

A building block is an R^d-valued 1-cochain v on a quotient graph,
v(~e) = -v(e). The stars E_x = v(E_x) determine the crystal net, and the
period lattice is the image of H1(X0, Z) under the homology map hat_v.

Builtin blocks and lattices are exact (Fraction components); float
blocks only come from the optimizer and from blocks that need irrational
coordinates (the honeycomb).
"""

import logging
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy
from sympy.matrices.normalforms import hermite_normal_form

from quotient_graph import (
    format_component,
    read_graph_description,
    serialize_quotient_graph,
    theta_graph,
)

logger = logging.getLogger(__name__)

FLOAT_TOL = float(os.environ.get('TOPOCRYST_FLOAT_TOL', '1e-9'))

BUILTIN_PREFIX = 'builtin:'


class BuildingBlockError(ValueError):
    """Inconsistent cochain, unknown builtin or invalid path."""


class DegenerateLatticeError(ValueError):
    """Period vectors of rank < d: the realization is not periodic."""


# ---- vector helpers (tuples of Fraction or float) ----

def exact_vector(values):
    return tuple(Fraction(x) for x in values)


def float_vector(values):
    return tuple(float(x) for x in values)


def vadd(u, w):
    return tuple(a + b for a, b in zip(u, w))


def vsub(u, w):
    return tuple(a - b for a, b in zip(u, w))


def vneg(u):
    return tuple(-a for a in u)


def vscale(u, t):
    return tuple(t * a for a in u)


def dot(u, w):
    return sum((a * b for a, b in zip(u, w)), 0)


def matvec(m, u):
    """m given as a tuple of rows."""
    return tuple(dot(row, u) for row in m)


def is_zero(u, exact=True, tol=FLOAT_TOL):
    if exact:
        return all(a == 0 for a in u)
    return all(abs(a) <= tol for a in u)


def vectors_close(u, w, exact=True, tol=FLOAT_TOL):
    return is_zero(vsub(u, w), exact, tol)


def _sym(x):
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    return sympy.Integer(x) if isinstance(x, int) else x


def _fraction(x):
    return Fraction(int(x.p), int(x.q))


def sympy_columns(vectors):
    """sympy Matrix whose columns are the given exact vectors."""
    return sympy.Matrix([[_sym(v[i]) for v in vectors] for i in range(len(vectors[0]))])


def common_denominator(vectors):
    return math.lcm(*(x.denominator for v in vectors for x in v)) if vectors else 1


# ---- lattices ----

@dataclass(frozen=True)
class Lattice:
    """Lattice with Z-basis `vectors` (the columns a_1..a_d of the basis matrix)."""
    vectors: tuple
    exact: bool = True
    _inverse: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = len(self.vectors)
        if d == 0 or any(len(a) != d for a in self.vectors):
            raise DegenerateLatticeError('a lattice basis needs d vectors of dimension d')
        if self.exact:
            vectors = tuple(exact_vector(a) for a in self.vectors)
            basis = sympy_columns(vectors)
            if basis.det() == 0:
                raise DegenerateLatticeError('singular lattice basis')
            inverse = basis.inv()
            rows = tuple(tuple(_fraction(inverse[i, j]) for j in range(d)) for i in range(d))
        else:
            vectors = tuple(float_vector(a) for a in self.vectors)
            basis = np.array(vectors, dtype=float).T
            scale = np.prod([np.linalg.norm(a) for a in basis.T])
            if scale == 0 or abs(np.linalg.det(basis)) <= FLOAT_TOL * scale:
                raise DegenerateLatticeError('singular lattice basis')
            rows = tuple(map(tuple, np.linalg.inv(basis)))
        object.__setattr__(self, 'vectors', vectors)
        object.__setattr__(self, '_inverse', rows)

    @property
    def dim(self):
        return len(self.vectors)

    @property
    def inverse_rows(self):
        """Rows of the inverse basis matrix (a basis of the dual lattice)."""
        return self._inverse

    def gram(self):
        return tuple(tuple(dot(a, b) for b in self.vectors) for a in self.vectors)

    def float_matrix(self):
        return np.array([[float(x) for x in a] for a in self.vectors]).T

    def covolume(self):
        if self.exact:
            return abs(_fraction(sympy_columns(self.vectors).det()))
        return abs(float(np.linalg.det(self.float_matrix())))

    def coordinates(self, x):
        """Coefficients k with sum k_i a_i = x."""
        if self.exact:
            return matvec(self._inverse, exact_vector(x))
        return matvec(self._inverse, float_vector(x))

    def contains(self, x, tol=FLOAT_TOL):
        k = self.coordinates(x)
        if self.exact:
            return all(c.denominator == 1 for c in k)
        return all(abs(c - round(c)) <= tol * (1 + abs(c)) for c in k)

    def integer_coordinates(self, x, tol=FLOAT_TOL):
        """Coordinates of a lattice vector as ints; None when x is not in the lattice."""
        if not self.contains(x, tol):
            return None
        return tuple(int(round(c)) for c in self.coordinates(x))

    def point(self, k):
        zero = Fraction(0) if self.exact else 0.0
        p = tuple(zero for _ in range(self.dim))
        for coeff, a in zip(k, self.vectors):
            p = vadd(p, vscale(a, coeff))
        return p

    def scaled(self, t):
        exact = self.exact and isinstance(t, (int, Fraction))
        return Lattice(tuple(vscale(a, t) for a in self.vectors), exact)

    def transformed(self, m):
        """Image under the linear map with rows m."""
        exact = self.exact and all(isinstance(x, (int, Fraction)) for row in m for x in row)
        if not exact:
            m = tuple(float_vector(row) for row in m)
            return Lattice(tuple(matvec(m, float_vector(a)) for a in self.vectors), False)
        return Lattice(tuple(matvec(m, a) for a in self.vectors), True)

    def as_float(self):
        return Lattice(tuple(float_vector(a) for a in self.vectors), False)


def same_lattice(first, second, tol=FLOAT_TOL):
    """Equality as subgroups: mutual membership of basis vectors."""
    if first.dim != second.dim:
        return False
    return (all(first.contains(a, tol) for a in second.vectors)
            and all(second.contains(a, tol) for a in first.vectors))


def lattice_generated_by(vectors):
    """Lattice spanned over Z by exact vectors (Hermite normal form)."""
    vectors = [exact_vector(v) for v in vectors]
    d = len(vectors[0])
    scale = common_denominator(vectors)
    integral = sympy.Matrix([[int(v[i] * scale) for v in vectors] for i in range(d)])
    if integral.rank() < d:
        raise DegenerateLatticeError(f'vectors span rank {integral.rank()} < {d}')
    hnf = hermite_normal_form(integral)
    if hnf.shape != (d, d):
        raise DegenerateLatticeError(f'unexpected normal form shape {hnf.shape}')
    basis = tuple(tuple(Fraction(int(hnf[i, j]), scale) for i in range(d)) for j in range(d))
    lattice = Lattice(basis, True)
    if not all(lattice.contains(v) for v in vectors):
        raise DegenerateLatticeError('normal form does not reproduce the generators')
    return lattice


def parse_lattice(text):
    """d non-comment lines; line i holds the coordinates of basis vector a_i."""
    rows = []
    exact = True
    for raw in text.splitlines():
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        exact = exact and not any(c in tok for tok in tokens for c in '.eE')
        try:
            rows.append(tuple(Fraction(tok) for tok in tokens))
        except (ValueError, ZeroDivisionError):
            raise DegenerateLatticeError(f'bad lattice row {line!r}') from None
    if not rows:
        raise DegenerateLatticeError('empty lattice description')
    if not exact:
        rows = [float_vector(r) for r in rows]
    return Lattice(tuple(rows), exact)


def serialize_lattice(lattice):
    return ''.join(' '.join(format_component(x) for x in a) + '\n' for a in lattice.vectors)


# ---- building blocks ----

@dataclass(frozen=True)
class BuildingBlock:
    """1-cochain on `graph`; `vectors` maps each declared edge id to v(e)."""
    graph: object
    vectors: dict
    dim: int
    exact: bool = True
    name: str = field(default=None, compare=False)

    def __post_init__(self):
        convert = exact_vector if self.exact else float_vector
        vectors = {}
        for e in self.graph.edges:
            if e.id not in self.vectors:
                raise BuildingBlockError(f'edge {e.id!r} has no vector')
            if len(self.vectors[e.id]) != self.dim:
                raise BuildingBlockError(
                    f'edge {e.id!r} has a {len(self.vectors[e.id])}-vector, expected {self.dim}')
            vectors[e.id] = convert(self.vectors[e.id])
        object.__setattr__(self, 'vectors', vectors)

    def v(self, edge):
        """v(e) for a DirectedEdge or an edge id; inverse edges are negated."""
        edge_id = edge if isinstance(edge, str) else edge.id
        e = self.graph.edge(edge_id)
        return self.vectors[e.id] if e.positive else vneg(self.vectors[e.inverse])

    def star_vectors(self, x):
        """E_x as a tuple, in the order of graph.star(x)."""
        return tuple(self.v(e) for e in self.graph.star(x))


def block_from_directed(graph, dvectors, dim, exact=True, name=None):
    """Build a block from vectors on all directed edges, checking v(~e) = -v(e)."""
    tol = 0 if exact else FLOAT_TOL
    for e in graph.edges:
        if e.id not in dvectors or e.inverse not in dvectors:
            raise BuildingBlockError(f'edge {e.id!r} or its inverse has no vector')
        if not is_zero(vadd(dvectors[e.id], dvectors[e.inverse]), exact, tol):
            raise BuildingBlockError(f'v(~{e.id}) != -v({e.id})')
    return BuildingBlock(graph, {e.id: dvectors[e.id] for e in graph.edges}, dim, exact, name)


LAVES_QG = """\
# diamond twin: K4 with vertices A, B, C, D
dim 3
vertex A
vertex B
vertex C
vertex D
edge e1 A D v= -1 -1 0
edge e2 A B v= 0 1 1
edge e3 A C v= 1 0 -1
edge f1 B C v= -1 1 0
edge f2 C D v= 0 1 -1
edge f3 D B v= -1 0 -1
"""

DIAMOND_QG = """\
# diamond: two vertices joined by four parallel edges
dim 3
vertex A
vertex B
edge e1 A B v= -1 1 1
edge e2 A B v= 1 -1 1
edge e3 A B v= -1 -1 -1
edge e4 A B v= 1 1 -1
"""

CUBIC_QG = """\
# primitive cubic net: bouquet of three loops
dim 3
vertex A
edge e1 A A v= 1 0 0
edge e2 A A v= 0 1 0
edge e3 A A v= 0 0 1
"""

builtin_blocks = {
    'laves': 'Diamond twin (Laves graph of girth ten) on K4',
    'diamond': 'Diamond on the dipole graph with 4 edges',
    'honeycomb': 'Honeycomb on the theta graph',
    'cubic': 'Primitive cubic net on the bouquet of 3 loops',
}


def _honeycomb():
    h = math.sqrt(3) / 2
    vectors = {'e1': (1.0, 0.0), 'e2': (-0.5, h), 'e3': (-0.5, -h)}
    return BuildingBlock(theta_graph(), vectors, 2, exact=False, name='honeycomb')


def builtin_block(name):
    if name not in builtin_blocks:
        raise BuildingBlockError(f'unknown builtin block {name!r}; choose from {sorted(builtin_blocks)}')
    if name == 'honeycomb':
        return _honeycomb()
    text = {'laves': LAVES_QG, 'diamond': DIAMOND_QG, 'cubic': CUBIC_QG}[name]
    return parse_building_block(text, name=name)


def parse_building_block(text, name=None):
    description = read_graph_description(text)
    if not description.vectors:
        raise BuildingBlockError('graph description carries no v= vectors')
    return BuildingBlock(description.graph, description.vectors, description.dim,
                         description.exact, name)


def serialize_block(block, comments=()):
    return serialize_quotient_graph(block.graph, block.vectors, block.dim, comments)


def load_block(source):
    """`builtin:<name>` or a path to a QG file with v= annotations."""
    if source.startswith(BUILTIN_PREFIX):
        return builtin_block(source[len(BUILTIN_PREFIX):])
    return parse_building_block(Path(source).read_text(encoding='utf-8'), name=Path(source).stem)


def same_block(first, second):
    """Identical graphs and vectors (exact comparison)."""
    return (first.graph == second.graph and first.dim == second.dim
            and all(vectors_close(first.vectors[k], second.vectors[k], first.exact and second.exact)
                    for k in first.vectors))


def is_builtin(block, name):
    return same_block(block, builtin_block(name))


# ---- homology map and period lattice ----

def hat_v(block, path):
    """v-hat of a closed path: the sum of v(e_i) along it."""
    if not path.is_closed:
        raise BuildingBlockError(f'path {" ".join(path.ids)} is not closed')
    total = tuple(0 for _ in range(block.dim))
    for e in path.edges:
        total = vadd(total, block.v(e))
    return total


def period_lattice(block, basis):
    """
    Period lattice v-hat(H1(X0, Z)) from a homology basis.

    With d cycles the images are the lattice basis. With more cycles than
    dimensions (a non-maximal abelian cover) the Z-span is reduced to a basis.
    """
    images = [hat_v(block, c) for c in basis.cycles]
    if len(images) < block.dim:
        raise DegenerateLatticeError(
            f'non-periodic realization: {len(images)} cycles cannot span dimension {block.dim}')
    try:
        if len(images) == block.dim:
            return Lattice(tuple(images), block.exact)
        if not block.exact:
            raise DegenerateLatticeError('float blocks need exactly d homology cycles')
        return lattice_generated_by(images)
    except DegenerateLatticeError as exc:
        raise DegenerateLatticeError(f'non-periodic realization: {exc}') from None


def is_harmonic(block, tol=FLOAT_TOL):
    """True iff every star sums to zero."""
    for x in block.graph.vertices:
        total = tuple(0 for _ in range(block.dim))
        for w in block.star_vectors(x):
            total = vadd(total, w)
        if not is_zero(total, block.exact, tol):
            return False
    return True


# ---- builtin lattices ----

builtin_lattices = {
    'Z3': 'Primitive cubic lattice',
    'L_DT': 'Body-centered cubic lattice',
    'L_D': 'Face-centered cubic lattice',
    '2L_DT': 'Period lattice of the diamond twin',
    '2L_D': 'Period lattice of the diamond',
    'square': 'Square lattice',
    'triangular': 'Regular triangular lattice',
}

_LATTICE_BASES = {
    'Z3': ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    'L_DT': ((-1, 1, 1), (1, 1, -1), (-1, -1, -1)),
    'L_D': ((-1, 1, 0), (1, 0, 1), (-1, -1, 0)),
    'square': ((1, 0), (0, 1)),
}


def builtin_lattice(name):
    if name not in builtin_lattices:
        raise DegenerateLatticeError(f'unknown builtin lattice {name!r}')
    if name == 'triangular':
        return Lattice(((1.0, 0.0), (0.5, math.sqrt(3) / 2)), exact=False)
    if name.startswith('2'):
        return builtin_lattice(name[1:]).scaled(2)
    return Lattice(_LATTICE_BASES[name], True)


PARITY_RULES = {
    'L_DT': lambda x: (x[0] + x[1]) % 2 == 0 and (x[1] + x[2]) % 2 == 0 and (x[2] + x[0]) % 2 == 0,
    'L_D': lambda x: (x[0] + x[1] + x[2]) % 2 == 0,
}


def membership_identity_check(name, samples):
    """Basis membership agrees with the parity description on every sample."""
    if name not in PARITY_RULES:
        raise BuildingBlockError(f'no parity rule for {name!r}')
    lattice = builtin_lattice(name)
    rule = PARITY_RULES[name]
    for x in samples:
        if lattice.contains(x) != rule(x):
            logger.warning('membership of %s in %s disagrees with parity rule', x, name)
            return False
    return True


def star_union(block):
    """The union of all stars, sorted (E_DT for laves, E_D for diamond)."""
    return tuple(sorted({w for x in block.graph.vertices for w in block.star_vectors(x)}))


# ---- geometry of stars ----

def cross(u, w):
    return (u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0])


def star_plane_normals(block):
    """Normal of the plane holding each star of a 3D block (None if not planar)."""
    normals = {}
    for x in block.graph.vertices:
        star = block.star_vectors(x)
        normal = None
        for u in star:
            for w in star:
                candidate = cross(u, w)
                if not is_zero(candidate, block.exact):
                    normal = candidate
                    break
            if normal is not None:
                break
        if normal is not None and not all(is_zero((dot(normal, w),), block.exact) for w in star):
            normal = None
        normals[x] = normal
    return normals


def dihedral_angles(block):
    """Angle in radians between every pair of star planes, keyed by vertex pair."""
    normals = star_plane_normals(block)
    angles = {}
    names = sorted(normals)
    for i, x in enumerate(names):
        for y in names[i + 1:]:
            n1, n2 = normals[x], normals[y]
            if n1 is None or n2 is None:
                continue
            cosine = abs(float(dot(n1, n2))) / math.sqrt(float(dot(n1, n1)) * float(dot(n2, n2)))
            angles[(x, y)] = math.acos(min(1.0, cosine))
    return angles


def transform_block(block, matrix, scale=1):
    """Apply the linear map with rows `matrix`, then scale."""
    exact = block.exact and isinstance(scale, (int, Fraction)) and all(
        isinstance(x, (int, Fraction)) for row in matrix for x in row)
    if not exact:
        matrix = tuple(float_vector(row) for row in matrix)
        scale = float(scale)
    vectors = {k: vscale(matvec(matrix, v if exact else float_vector(v)), scale)
               for k, v in block.vectors.items()}
    return BuildingBlock(block.graph, vectors, block.dim, exact, block.name)


def mirror_block(block):
    """Reflect in the plane x_1 = 0."""
    d = block.dim
    matrix = tuple(tuple((-1 if i == j == 0 else int(i == j)) for j in range(d)) for i in range(d))
    return transform_block(block, matrix)
