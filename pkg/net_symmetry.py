"""
Point symmetries of crystal nets: isometries modulo the period lattice,
the net point group, strong isotropy (flag transitivity) and chirality.

A candidate (g, t) with g in the point group of the period lattice is a net
isometry iff it permutes the vertex classes modulo the lattice and carries
every star E_x onto E_sigma(x). That finite test is complete by periodicity.
"""

import logging
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from building_blocks import matvec, vadd, vsub
from lattice_analysis import PointGroup, mat_det, mat_mul, matrix_key, point_group, vector_key

logger = logging.getLogger(__name__)

THREADS = max(1, int(os.environ.get('TOPOCRYST_THREADS', '1')))


@dataclass(frozen=True)
class NetIsometry:
    """x -> linear . x + translation; class_permutation maps quotient vertex classes."""
    linear: tuple
    translation: tuple
    class_permutation: dict

    def apply(self, x):
        return vadd(matvec(self.linear, x), self.translation)


def _star_multiset(net, x):
    return Counter(vector_key(w, net.block.exact) for w in net.block.star_vectors(x))


def _class_of(net, point):
    """The class whose cell-0 position is congruent to point modulo the lattice, or None."""
    for y in net.block.graph.vertices:
        if net.lattice.contains(vsub(point, net.offsets[y])):
            return y
    return None


def _extensions(net, g):
    """All net isometries with linear part g, one per translation class."""
    graph = net.block.graph
    base = graph.vertices[0]
    found = []
    image_of_base = matvec(g, net.offsets[base])
    for y in graph.vertices:
        t = vsub(net.offsets[y], image_of_base)
        sigma = {}
        for x in graph.vertices:
            target = _class_of(net, vadd(matvec(g, net.offsets[x]), t))
            if target is None:
                break
            sigma[x] = target
        else:
            if len(set(sigma.values())) != len(sigma):
                continue
            if all(Counter(vector_key(matvec(g, w), net.block.exact) for w in net.block.star_vectors(x))
                   == _star_multiset(net, sigma[x]) for x in graph.vertices):
                found.append(NetIsometry(g, t, sigma))
    return found


def net_isometries(net, lattice_group=None):
    """Net isometries modulo the period lattice (finite space-group data)."""
    lattice_group = point_group(net.lattice) if lattice_group is None else lattice_group
    with ThreadPoolExecutor(max_workers=THREADS) as pool:
        batches = list(pool.map(lambda g: _extensions(net, g), lattice_group.elements))
    isometries = [iso for batch in batches for iso in batch]
    logger.info('%d net isometries modulo the period lattice (lattice group order %d)',
                len(isometries), lattice_group.order)
    return isometries


def net_point_group(net, isometries=None):
    """Linear parts of all net isometries."""
    isometries = net_isometries(net) if isometries is None else isometries
    exact = net.block.exact
    unique = {}
    for iso in isometries:
        unique.setdefault(matrix_key(iso.linear, exact), iso.linear)
    elements = sorted(unique.values(), key=lambda m: tuple(float(x) for row in m for x in row))
    return PointGroup(tuple(elements), exact)


def compose_isometries(first, second):
    """first after second."""
    linear = mat_mul(first.linear, second.linear)
    translation = vadd(matvec(first.linear, second.translation), first.translation)
    sigma = {x: first.class_permutation[y] for x, y in second.class_permutation.items()}
    return NetIsometry(linear, translation, sigma)


def same_isometry_mod_lattice(net, first, second):
    return (matrix_key(first.linear, net.block.exact) == matrix_key(second.linear, net.block.exact)
            and net.lattice.contains(vsub(first.translation, second.translation))
            and first.class_permutation == second.class_permutation)


def is_closed_under_composition(net, isometries):
    return all(any(same_isometry_mod_lattice(net, compose_isometries(a, b), c) for c in isometries)
               for a in isometries for b in isometries)


def flag_count(net):
    """Number of flags (class, ordering of its star) modulo translations."""
    return sum(math.factorial(net.block.graph.degree(x)) for x in net.block.graph.vertices)


def _flag_image(net, iso, x, ordering):
    exact = net.block.exact
    return iso.class_permutation[x], tuple(vector_key(matvec(iso.linear, w), exact) for w in ordering)


def is_strongly_isotropic(net, isometries=None):
    """Every flag is the image of the base flag under some net isometry."""
    isometries = net_isometries(net) if isometries is None else isometries
    base = net.block.graph.vertices[0]
    ordering = net.block.star_vectors(base)
    orbit = {_flag_image(net, iso, base, ordering) for iso in isometries}
    total = flag_count(net)
    logger.debug('base flag orbit %d of %d flags', len(orbit), total)
    return len(orbit) == total


def is_chiral(net, isometries=None):
    """No orientation-reversing isometry preserves the net."""
    isometries = net_isometries(net) if isometries is None else isometries
    return all(mat_det(iso.linear, net.block.exact) > 0 for iso in isometries)


def symmetry_report(net):
    isometries = net_isometries(net)
    group = net_point_group(net, isometries)
    census = group.determinant_census()
    return {
        'point_group_order': group.order,
        'determinants': {'+1': census[1], '-1': census[-1]},
        'isometries_mod_lattice': len(isometries),
        'flags': flag_count(net),
        'strongly_isotropic': is_strongly_isotropic(net, isometries),
        'chiral': is_chiral(net, isometries),
    }
