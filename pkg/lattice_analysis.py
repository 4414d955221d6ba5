"""
Lattice analysis: shortest vectors, point groups, duals, tight frames and
the orthogonal-symmetry decision with its 2D / 3D classification.

Exact lattices are enumerated with a float Fincke-Pohst search padded by a
small slack, then filtered with exact Fraction norms, so K(L) is exact.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg
import sympy

from building_blocks import (
    FLOAT_TOL,
    DegenerateLatticeError,
    Lattice,
    _fraction,
    _sym,
    builtin_lattice,
    dot,
    matvec,
    vneg,
)

logger = logging.getLogger(__name__)

SLACK = 1e-7

OS_CLASSES_3D = {6: 'cubic', 8: 'bcc', 12: 'fcc'}
OS_CLASSES_2D = {4: 'square', 6: 'triangular'}
REFERENCE_LATTICES = {'cubic': 'Z3', 'bcc': 'L_DT', 'fcc': 'L_D', 'square': 'square',
                      'triangular': 'triangular'}

CRYSTALLOGRAPHIC_ORDERS = (1, 2, 3, 4, 6)


class LatticeAnalysisError(ValueError):
    """Request outside the supported dimensions (e.g. D_d with d < 3)."""


@dataclass(frozen=True)
class ShortestVectorSet:
    """alpha2 = alpha(L)^2; vectors = K(L), sorted."""
    alpha2: object
    vectors: tuple
    exact: bool = True

    @property
    def alpha(self):
        return math.sqrt(self.alpha2)

    def __len__(self):
        return len(self.vectors)


@dataclass(frozen=True)
class OSVerdict:
    is_os: bool
    failed_condition: str = None
    witness: object = None


# ---- small matrix helpers (tuples of rows) ----

def identity(d, exact=True):
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    return tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d))


def transpose(m):
    return tuple(zip(*m))


def mat_mul(a, b):
    columns = transpose(b)
    return tuple(tuple(dot(row, col) for col in columns) for row in a)


def mat_det(m, exact=True):
    if exact:
        return _fraction(sympy.Matrix([[_sym(x) for x in row] for row in m]).det())
    return float(np.linalg.det(np.array(m, dtype=float)))


def mat_close(a, b, exact=True, tol=FLOAT_TOL):
    if exact:
        return a == b
    return all(abs(x - y) <= tol for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def is_orthogonal(g, exact=True, tol=FLOAT_TOL):
    return mat_close(mat_mul(transpose(g), g), identity(len(g), exact), exact, tol)


def vector_key(v, exact=True):
    """Hashable key; float components are rounded so tolerance-equal vectors collide."""
    if exact:
        return tuple(v)
    return tuple(round(float(x), 7) + 0.0 for x in v)


def matrix_key(m, exact=True):
    return tuple(vector_key(row, exact) for row in m)


def _close(a, b, exact, tol=FLOAT_TOL):
    return a == b if exact else abs(a - b) <= tol * (1 + abs(a) + abs(b))


# ---- enumeration ----

def _coefficient_vectors(gram, r2):
    """All integer k with k^T G k <= r2 (+ slack), Fincke-Pohst on the Cholesky factor."""
    d = len(gram)
    upper = scipy.linalg.cholesky(np.array(gram, dtype=float), lower=False)
    bound = float(r2) * (1 + SLACK) + SLACK
    found = []
    k = [0] * d

    def descend(i, remaining):
        center = -sum(upper[i, j] * k[j] for j in range(i + 1, d)) / upper[i, i]
        half = math.sqrt(max(remaining, 0.0)) / upper[i, i]
        for value in range(math.ceil(center - half - SLACK), math.floor(center + half + SLACK) + 1):
            k[i] = value
            rest = remaining - (upper[i, i] * (value - center)) ** 2
            if rest < -SLACK * (1 + bound):
                continue
            if i == 0:
                found.append(tuple(k))
            else:
                descend(i - 1, rest)
        k[i] = 0

    descend(d - 1, bound)
    return found


def lattice_vectors_within(lattice, radius2, include_zero=False):
    """
    Lattice vectors of squared norm <= radius2, as (norm2, coefficients, vector)
    triples sorted by norm, then vector.
    """
    gram = lattice.gram()
    out = []
    for k in _coefficient_vectors([[float(x) for x in row] for row in gram], radius2):
        if not include_zero and not any(k):
            continue
        norm2 = sum(k[i] * gram[i][j] * k[j] for i in range(len(k)) for j in range(len(k)))
        within = norm2 <= radius2 if lattice.exact else norm2 <= radius2 * (1 + FLOAT_TOL) + FLOAT_TOL
        if within:
            out.append((norm2, k, lattice.point(k)))
    out.sort(key=lambda item: (float(item[0]), item[2]))
    return out


def shortest_vectors(lattice):
    """alpha(L) and the complete set K(L)."""
    r2 = min(lattice.gram()[i][i] for i in range(lattice.dim))
    candidates = lattice_vectors_within(lattice, r2)
    alpha2 = candidates[0][0]
    vectors = tuple(sorted(v for n, _, v in candidates if _close(n, alpha2, lattice.exact)))
    if lattice.dim == 3 and len(vectors) > 12:
        logger.warning('%d shortest vectors in dimension 3 exceeds the kissing number', len(vectors))
    return ShortestVectorSet(alpha2, vectors, lattice.exact)


def _independent_prefix(vectors, d):
    """Greedy choice of d linearly independent vectors, in the given order."""
    chosen = []
    for v in vectors:
        trial = np.array([[float(x) for x in w] for w in chosen + [v]])
        if np.linalg.matrix_rank(trial, tol=1e-8) == len(chosen) + 1:
            chosen.append(v)
            if len(chosen) == d:
                break
    return chosen


def reduced_basis(lattice):
    """Basis of successive-minimum vectors when they form a Z-basis, else the input basis."""
    r2 = max(lattice.gram()[i][i] for i in range(lattice.dim))
    candidates = [v for _, _, v in lattice_vectors_within(lattice, r2)]
    chosen = _independent_prefix(candidates, lattice.dim)
    try:
        trial = Lattice(tuple(chosen), lattice.exact)
    except DegenerateLatticeError:
        return lattice
    if _close(trial.covolume(), lattice.covolume(), lattice.exact):
        return trial
    return lattice


# ---- point groups ----

@dataclass(frozen=True)
class PointGroup:
    """Finite group of orthogonal d x d matrices (tuples of rows)."""
    elements: tuple
    exact: bool = True

    @property
    def order(self):
        return len(self.elements)

    @property
    def dim(self):
        return len(self.elements[0])

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def keys(self):
        return frozenset(matrix_key(g, self.exact) for g in self.elements)

    def is_closed(self):
        keys = self.keys()
        return all(matrix_key(mat_mul(a, b), self.exact) in keys
                   for a in self.elements for b in self.elements) and all(
            matrix_key(transpose(a), self.exact) in keys for a in self.elements)

    def determinant_census(self):
        census = {1: 0, -1: 0}
        for g in self.elements:
            census[1 if mat_det(g, self.exact) > 0 else -1] += 1
        return census

    def same_elements(self, other):
        return self.keys() == other.keys()


def _sort_matrices(matrices):
    return tuple(sorted(matrices, key=lambda m: tuple(float(x) for row in m for x in row)))


def _gram_preserving_maps(basis, target, first_only=False):
    """
    Orthogonal g with g(basis) a tuple of target vectors with the same Gram
    matrix; basis is a Lattice whose vectors are the source frame.
    """
    exact = basis.exact and target.exact
    if not exact:
        basis, target = basis.as_float(), target.as_float()
    gram = basis.gram()
    d = basis.dim
    radius2 = max(gram[i][i] for i in range(d))
    shells = [[v for n, _, v in lattice_vectors_within(target, radius2) if _close(n, gram[i][i], exact)]
              for i in range(d)]
    inverse = basis.inverse_rows
    maps = []
    images = []

    def extend(i):
        if i == d:
            # g = U B^-1 with U holding the images as columns
            g = mat_mul(transpose(tuple(images)), inverse)
            if is_orthogonal(g, exact):
                maps.append(g)
            return first_only and maps
        for u in shells[i]:
            if all(_close(dot(u, images[j]), gram[i][j], exact) for j in range(i)):
                images.append(u)
                stop = extend(i + 1)
                images.pop()
                if stop:
                    return True
        return False

    extend(0)
    return maps, exact


def point_group(lattice):
    """G(L): orthogonal maps preserving L."""
    basis = reduced_basis(lattice)
    maps, exact = _gram_preserving_maps(basis, lattice)
    group = PointGroup(_sort_matrices(maps), exact)
    logger.debug('point group of order %d', group.order)
    return group


def find_isometry(first, second):
    """An orthogonal g with g(first) = second, or None."""
    if first.dim != second.dim:
        return None
    if not _close(first.covolume(), second.covolume(), first.exact and second.exact):
        return None
    maps, _ = _gram_preserving_maps(reduced_basis(first), second, first_only=True)
    return maps[0] if maps else None


def similar_lattices(first, second):
    """Equal up to an orthogonal map and a positive scaling."""
    ratio = float(shortest_vectors(second).alpha2) / float(shortest_vectors(first).alpha2)
    return find_isometry(first.as_float().scaled(math.sqrt(ratio)), second.as_float()) is not None


def element_order(g, exact=True, limit=24):
    power = g
    one = identity(len(g), exact)
    for n in range(1, limit + 1):
        if mat_close(power, one, exact):
            return n
        power = mat_mul(power, g)
    return None


def satisfies_crystallographic_restriction(group):
    return all(element_order(g, group.exact) in CRYSTALLOGRAPHIC_ORDERS for g in group)


# ---- duality ----

def dual_lattice(lattice):
    """L* = {x : <x, y> in Z for all y in L}; basis = inverse transpose."""
    return Lattice(lattice.inverse_rows, lattice.exact)


# ---- orthogonal symmetry ----

def _integer_span_index(rows, d):
    """gcd of the d x d minors of an integer matrix; 0 when the rank is below d."""
    index = 0
    for subset in itertools.combinations(rows, d):
        minor = int(round(np.linalg.det(np.array(subset, dtype=float))))
        index = math.gcd(index, abs(minor))
        if index == 1:
            return 1
    return index


def _commutant(group):
    """Basis of the symmetric matrices commuting with every element of the group."""
    d = group.dim
    slots = [(i, j) for i in range(d) for j in range(i, d)]
    rows = []
    for g in group:
        for r in range(d):
            for c in range(d):
                # (M g - g M)[r, c] as a linear form in the symmetric unknowns
                coeffs = [0] * len(slots)
                for s, (i, j) in enumerate(slots):
                    for a, b in {(i, j), (j, i)}:
                        if a == r:
                            coeffs[s] += g[b][c]
                        if b == c:
                            coeffs[s] -= g[r][a]
                rows.append(tuple(coeffs))
    rows = list(dict.fromkeys(rows))
    if group.exact:
        # at most len(slots) independent forms; keep those before the exact solve
        kept = []
        for row in rows:
            if np.linalg.matrix_rank(np.array(kept + [row], dtype=float)) > len(kept):
                kept.append(row)
                if len(kept) == len(slots):
                    break
        if kept:
            system = sympy.Matrix([[_sym(x) for x in row] for row in kept])
            null = [[_fraction(x) for x in vec] for vec in system.nullspace()]
        else:
            null = [[Fraction(int(i == j)) for j in range(len(slots))] for i in range(len(slots))]
    else:
        null = scipy.linalg.null_space(np.array(rows, dtype=float), rcond=1e-9).T.tolist()
    basis = []
    for vec in null:
        m = [[0] * d for _ in range(d)]
        for value, (i, j) in zip(vec, slots):
            m[i][j] = m[j][i] = value
        basis.append(tuple(map(tuple, m)))
    return basis


def _is_scalar(m, tol=FLOAT_TOL):
    d = len(m)
    return all(abs(float(m[i][j]) - (float(m[0][0]) if i == j else 0.0)) <= tol
               for i in range(d) for j in range(d))


def irreducibility_witness(group):
    """
    None when the group acts irreducibly. Otherwise a non-scalar symmetric
    matrix commuting with the group, and an eigenspace of it, which the group
    leaves invariant.
    """
    commutant = _commutant(group)
    if len(commutant) == 1:
        return None
    element = next(m for m in commutant if not _is_scalar(m))
    values, vectors = np.linalg.eigh(np.array(element, dtype=float))
    lowest = np.abs(values - values[0]) <= 1e-9 * max(1.0, float(np.abs(values).max()))
    subspace = tuple(tuple(float(x) for x in col) for col in vectors[:, lowest].T)
    return {'commutant_dimension': len(commutant), 'commutant_element': element,
            'invariant_subspace': subspace}


def is_orthogonally_symmetric(lattice):
    """
    Decide: (i) K(L) generates L, (ii) G(L) is transitive on K(L),
    (iii) G(L) acts irreducibly (symmetric commutant is one-dimensional).
    """
    d = lattice.dim
    shortest = shortest_vectors(lattice)
    coords = [lattice.integer_coordinates(v) for v in shortest.vectors]
    index = _integer_span_index(coords, d)
    if index != 1:
        rank = np.linalg.matrix_rank(np.array(coords, dtype=float))
        return OSVerdict(False, 'generates', {'rank': int(rank), 'index': index})

    group = point_group(lattice)
    keys = {vector_key(v, lattice.exact) for v in shortest.vectors}
    start = shortest.vectors[0]
    orbit = {vector_key(matvec(g, start), lattice.exact) for g in group}
    if orbit != keys:
        unreached = sorted(keys - orbit)
        return OSVerdict(False, 'transitive', {'unreached': unreached[0]})

    witness = irreducibility_witness(group)
    if witness is not None:
        return OSVerdict(False, 'irreducible', witness)
    return OSVerdict(True)


def _normalized(vectors, alpha2):
    scale = 1 / math.sqrt(float(alpha2))
    return np.array([[float(x) * scale for x in v] for v in vectors])


def similar_vector_sets(first, second, tol=1e-7):
    """
    True iff an orthogonal map carries first/alpha1 onto second/alpha2 as sets.
    Sorted Gram entries filter, then a frame of first is anchored on second.
    """
    if len(first) != len(second) or len(first.vectors[0]) != len(second.vectors[0]):
        return False
    a = _normalized(first.vectors, first.alpha2)
    b = _normalized(second.vectors, second.alpha2)
    if not np.allclose(np.sort((a @ a.T).ravel()), np.sort((b @ b.T).ravel()), atol=tol):
        return False
    d = a.shape[1]
    frame = np.array(_independent_prefix([tuple(r) for r in a], d))
    frame_gram = frame @ frame.T
    frame_inverse = np.linalg.inv(frame.T)
    target_keys = {tuple(np.round(r, 6) + 0.0) for r in b}

    def anchor(chosen):
        i = len(chosen)
        if i == d:
            g = np.array(chosen).T @ frame_inverse
            if not np.allclose(g.T @ g, np.eye(d), atol=tol):
                return False
            return {tuple(np.round(g @ r, 6) + 0.0) for r in a} == target_keys
        for u in b:
            if all(abs(u @ chosen[j] - frame_gram[i, j]) <= tol for j in range(i)) \
                    and abs(u @ u - frame_gram[i, i]) <= tol:
                if anchor(chosen + [u]):
                    return True
        return False

    return anchor([])


def _classify(lattice, classes):
    verdict = is_orthogonally_symmetric(lattice)
    if not verdict.is_os:
        logger.info('not orthogonally symmetric: condition %s fails', verdict.failed_condition)
        return 'not_os'
    shortest = shortest_vectors(lattice)
    name = classes.get(len(shortest))
    if name is None:
        logger.warning('orthogonally symmetric lattice with |K| = %d has no class', len(shortest))
        return 'not_os'
    reference = shortest_vectors(builtin_lattice(REFERENCE_LATTICES[name]))
    if not similar_vector_sets(shortest, reference):
        logger.warning('|K| = %d but K(L) is not similar to the %s reference', len(shortest), name)
        return 'not_os'
    return name


def classify_3d(lattice):
    """cubic, bcc, fcc (up to similarity) or not_os."""
    if lattice.dim != 3:
        raise LatticeAnalysisError(f'classify_3d needs a 3-dimensional lattice, got {lattice.dim}')
    return _classify(lattice, OS_CLASSES_3D)


def classify_2d(lattice):
    """square, triangular or not_os."""
    if lattice.dim != 2:
        raise LatticeAnalysisError(f'classify_2d needs a 2-dimensional lattice, got {lattice.dim}')
    return _classify(lattice, OS_CLASSES_2D)


def classify(lattice):
    """Class name for d = 2, 3; for other d only the verdict is decided and None is returned."""
    if lattice.dim == 2:
        return classify_2d(lattice)
    if lattice.dim == 3:
        return classify_3d(lattice)
    return None


# ---- frames and angles ----

def tight_frame_check(shortest, d):
    """(c, residual) with c = alpha^2 |K| / d and residual = max |S - cI|."""
    exact = shortest.exact
    c = shortest.alpha2 * len(shortest) / d if exact else float(shortest.alpha2) * len(shortest) / d
    zero = Fraction(0) if exact else 0.0
    frame = [[zero] * d for _ in range(d)]
    for a in shortest.vectors:
        for i in range(d):
            for j in range(d):
                frame[i][j] += a[i] * a[j]
    residual = max(abs(frame[i][j] - (c if i == j else 0)) for i in range(d) for j in range(d))
    return c, residual


def angle_bound_check(shortest, tol=FLOAT_TOL):
    """Every non-antipodal pair a != b satisfies 2|a.b| <= alpha^2 (angle in [60, 120] degrees)."""
    exact = shortest.exact
    for a, b in itertools.combinations(shortest.vectors, 2):
        if vector_key(b, exact) == vector_key(vneg(a), exact):
            continue
        excess = 2 * abs(dot(a, b)) - shortest.alpha2
        if (excess > 0) if exact else (excess > tol * (1 + float(shortest.alpha2))):
            return False
    return True


# ---- root lattices ----

def root_lattice(name, d):
    """A_d (Cholesky of the Cartan Gram matrix, float) or D_d (exact)."""
    if name == 'A':
        if d < 1:
            raise LatticeAnalysisError(f'A_d needs d >= 1, got {d}')
        cartan = 2 * np.eye(d) - np.eye(d, k=1) - np.eye(d, k=-1)
        upper = scipy.linalg.cholesky(cartan, lower=False)
        return Lattice(tuple(tuple(float(x) for x in upper[:, j]) for j in range(d)), exact=False)
    if name == 'D':
        if d < 3:
            raise LatticeAnalysisError(f'D_d needs d >= 3, got {d}')
        unit = [tuple(int(i == j) for j in range(d)) for i in range(d)]
        vectors = [tuple(a - b for a, b in zip(unit[i], unit[i + 1])) for i in range(d - 1)]
        vectors.append(tuple(a + b for a, b in zip(unit[d - 2], unit[d - 1])))
        return Lattice(tuple(vectors), exact=True)
    raise LatticeAnalysisError(f'unknown root system {name!r}')


def parse_root_lattice(text):
    """'A3' -> root_lattice('A', 3)."""
    if len(text) < 2 or text[0] not in 'AD' or not text[1:].isdigit():
        raise LatticeAnalysisError(f'bad root lattice name {text!r}')
    return root_lattice(text[0], int(text[1:]))


def is_root_lattice(lattice):
    """Even lattice generated by its roots (vectors of squared norm 2)."""
    exact = lattice.exact
    for row in lattice.gram():
        for x in row:
            if not _close(x, round(x), exact):
                return False
    if any(int(round(lattice.gram()[i][i])) % 2 for i in range(lattice.dim)):
        return False
    roots = [v for n, _, v in lattice_vectors_within(lattice, 2) if _close(n, 2, exact)]
    if not roots:
        return False
    coords = [lattice.integer_coordinates(v) for v in roots]
    return _integer_span_index(coords, lattice.dim) == 1


def lattice_report(lattice):
    """Everything the `lattice` subcommand prints, as plain JSON-ready data."""
    shortest = shortest_vectors(lattice)
    group = point_group(lattice)
    verdict = is_orthogonally_symmetric(lattice)
    c, residual = tight_frame_check(shortest, lattice.dim)
    census = group.determinant_census()

    def number(x):
        return str(x) if isinstance(x, Fraction) else float(x)

    return {
        'dim': lattice.dim,
        'exact': lattice.exact,
        'basis': [[number(x) for x in a] for a in lattice.vectors],
        'alpha2': number(shortest.alpha2),
        'alpha': shortest.alpha,
        'K': [[number(x) for x in v] for v in shortest.vectors],
        'K_size': len(shortest),
        'group_order': group.order,
        'determinants': {'+1': census[1], '-1': census[-1]},
        'os': verdict.is_os,
        'failed_condition': verdict.failed_condition,
        'class': classify(lattice),
        'dual_basis': [[number(x) for x in a] for a in dual_lattice(lattice).vectors],
        'tight_frame': {'c': number(c), 'residual': number(residual)},
        'angle_bound': angle_bound_check(shortest),
    }
