import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from building_blocks import Lattice, builtin_lattice, same_lattice, star_union
from lattice_analysis import (
    LatticeAnalysisError,
    angle_bound_check,
    classify,
    classify_2d,
    classify_3d,
    dual_lattice,
    element_order,
    find_isometry,
    identity,
    irreducibility_witness,
    is_orthogonal,
    is_orthogonally_symmetric,
    is_root_lattice,
    lattice_report,
    lattice_vectors_within,
    mat_mul,
    parse_root_lattice,
    point_group,
    root_lattice,
    satisfies_crystallographic_restriction,
    shortest_vectors,
    similar_lattices,
    tight_frame_check,
)


@pytest.mark.parametrize('name, alpha2, size', [('Z3', 1, 6), ('L_DT', 3, 8), ('L_D', 2, 12)])
def test_shortest_vectors(name, alpha2, size):
    k = shortest_vectors(builtin_lattice(name))
    assert k.alpha2 == alpha2
    assert len(k) == size
    assert k.alpha == pytest.approx(math.sqrt(alpha2))


def test_shortest_vectors_are_the_edge_vectors(l_dt, laves, diamond):
    assert set(shortest_vectors(l_dt).vectors) == set(star_union(diamond))
    assert set(shortest_vectors(builtin_lattice('L_D')).vectors) == set(star_union(laves))


def test_skewed_basis_finds_short_vectors():
    # basis far from reduced; the shortest vectors are still +-(1, 0), +-(0, 1)
    k = shortest_vectors(Lattice(((1, 0), (7, 1))))
    assert k.alpha2 == 1
    assert set(k.vectors) == {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_vectors_within_radius_are_sorted(l_d):
    found = lattice_vectors_within(l_d, 4)
    norms = [n for n, _, _ in found]
    assert norms == sorted(norms)
    assert norms.count(2) == 12 and norms.count(4) == 6


@pytest.mark.parametrize('name', ['Z3', 'L_DT', 'L_D'])
def test_cubic_lattices_have_the_full_octahedral_group(name):
    group = point_group(builtin_lattice(name))
    assert group.order == 48
    assert group.is_closed()
    assert all(is_orthogonal(g) for g in group)
    assert group.determinant_census() == {1: 24, -1: 24}
    assert satisfies_crystallographic_restriction(group)
    minus_identity = tuple(tuple(-x for x in row) for row in identity(3))
    assert minus_identity in group.elements


def test_point_groups_coincide():
    z3 = point_group(builtin_lattice('Z3'))
    assert z3.same_elements(point_group(builtin_lattice('L_DT')))
    assert z3.same_elements(point_group(builtin_lattice('L_D')))


def test_two_dimensional_point_groups():
    assert point_group(builtin_lattice('square')).order == 8
    assert point_group(builtin_lattice('triangular')).order == 12
    assert point_group(Lattice(((1, 0), (0, 2)))).order == 4


def test_element_orders():
    group = point_group(builtin_lattice('triangular'))
    orders = {element_order(g, group.exact) for g in group}
    assert orders == {1, 2, 3, 6}


def test_duality(l_dt, l_d):
    half = Fraction(1, 2)
    assert same_lattice(dual_lattice(l_dt), l_d.scaled(half))
    assert same_lattice(dual_lattice(l_d), l_dt.scaled(half))
    assert same_lattice(dual_lattice(dual_lattice(l_d)), l_d)


def test_dual_pairing_is_integral(l_dt):
    dual = dual_lattice(l_dt)
    for a in l_dt.vectors:
        for b in dual.vectors:
            assert sum(x * y for x, y in zip(a, b)).denominator == 1


@pytest.mark.parametrize('name, expected', [('Z3', 'cubic'), ('L_DT', 'bcc'), ('L_D', 'fcc')])
def test_classify_3d(name, expected):
    assert is_orthogonally_symmetric(builtin_lattice(name)).is_os
    assert classify_3d(builtin_lattice(name)) == expected


def test_classification_is_invariant_under_similarity(rng):
    for name, expected in (('Z3', 'cubic'), ('L_DT', 'bcc'), ('L_D', 'fcc')):
        for _ in range(20):
            similarity = Rotation.random(None, rng).as_matrix() * rng.uniform(0.5, 3.0)
            moved = builtin_lattice(name).transformed(tuple(map(tuple, similarity)))
            assert classify_3d(moved) == expected


def test_tetragonal_lattice_is_not_orthogonally_symmetric():
    lattice = Lattice(((1, 0, 0), (0, 1, 0), (0, 0, Fraction(101, 100))))
    verdict = is_orthogonally_symmetric(lattice)
    assert not verdict.is_os
    assert verdict.failed_condition == 'generates'
    assert classify_3d(lattice) == 'not_os'


def test_tetragonal_group_leaves_the_axis_invariant():
    group = point_group(Lattice(((1, 0, 0), (0, 1, 0), (0, 0, Fraction(101, 100)))))
    assert group.order == 16
    witness = irreducibility_witness(group)
    assert witness['commutant_dimension'] == 2
    m = witness['commutant_element']
    assert m != tuple(tuple(m[0][0] * x for x in row) for row in identity(3))
    assert all(mat_mul(m, g) == mat_mul(g, m) for g in group)
    basis = np.array(witness['invariant_subspace'])
    assert len(basis) in (1, 2)
    projector = basis.T @ basis
    for g in group:
        image = np.array(g, dtype=float) @ basis.T
        assert np.allclose(projector @ image, image)


@pytest.mark.parametrize('name', ['Z3', 'L_DT', 'L_D'])
def test_cubic_groups_act_irreducibly(name):
    assert irreducibility_witness(point_group(builtin_lattice(name))) is None


def test_perturbed_fcc_is_not_orthogonally_symmetric(rng):
    base = np.array(builtin_lattice('L_D').vectors, dtype=float)
    for _ in range(50):
        noisy = base + rng.uniform(-0.05, 0.05, base.shape)
        assert classify_3d(Lattice(tuple(map(tuple, noisy)), exact=False)) == 'not_os'


def test_classify_2d():
    assert classify_2d(builtin_lattice('square')) == 'square'
    assert classify_2d(builtin_lattice('triangular')) == 'triangular'
    assert classify_2d(Lattice(((1, 0), (0, Fraction(13, 10))))) == 'not_os'


def test_classify_dimension_checks():
    with pytest.raises(LatticeAnalysisError):
        classify_3d(builtin_lattice('square'))
    with pytest.raises(LatticeAnalysisError):
        classify_2d(builtin_lattice('Z3'))
    assert classify(root_lattice('D', 4)) is None


@pytest.mark.parametrize('name, c', [('Z3', 2), ('L_DT', 8), ('L_D', 8)])
def test_tight_frames(name, c):
    found, residual = tight_frame_check(shortest_vectors(builtin_lattice(name)), 3)
    assert found == c
    assert residual == 0


def test_rectangular_set_is_not_a_tight_frame():
    _, residual = tight_frame_check(shortest_vectors(Lattice(((1, 0), (0, 2)))), 2)
    assert residual > 0


@pytest.mark.parametrize('name', ['Z3', 'L_DT', 'L_D', 'triangular'])
def test_angle_bound(name):
    assert angle_bound_check(shortest_vectors(builtin_lattice(name)))


def test_root_lattices(l_d):
    a3, d3 = root_lattice('A', 3), root_lattice('D', 3)
    assert same_lattice(d3, l_d)
    assert find_isometry(a3, l_d) is not None
    assert similar_lattices(a3, l_d)
    assert is_root_lattice(a3) and is_root_lattice(d3)
    assert not is_root_lattice(builtin_lattice('Z3'))
    d4 = shortest_vectors(root_lattice('D', 4))
    assert d4.alpha2 == 2 and len(d4) == 24


def test_root_lattice_names():
    assert parse_root_lattice('A2').dim == 2
    with pytest.raises(LatticeAnalysisError):
        parse_root_lattice('E8')
    with pytest.raises(LatticeAnalysisError):
        root_lattice('D', 2)


def test_find_isometry_rejects_different_covolume(l_d, l_dt):
    assert find_isometry(l_d, l_dt) is None
    assert similar_lattices(l_dt, l_dt.scaled(3))


def test_lattice_report(l_d):
    report = lattice_report(l_d)
    assert report['K_size'] == 12
    assert report['group_order'] == 48
    assert report['os'] is True
    assert report['class'] == 'fcc'
    assert report['tight_frame'] == {'c': '8', 'residual': '0'}
