import itertools
import math
from fractions import Fraction

import pytest

from building_blocks import (
    BuildingBlock,
    BuildingBlockError,
    DegenerateLatticeError,
    Lattice,
    block_from_directed,
    builtin_block,
    builtin_lattice,
    dihedral_angles,
    hat_v,
    is_builtin,
    is_harmonic,
    lattice_generated_by,
    load_block,
    membership_identity_check,
    mirror_block,
    parse_building_block,
    parse_lattice,
    period_lattice,
    same_lattice,
    serialize_block,
    serialize_lattice,
    star_union,
    transform_block,
)
from quotient_graph import bouquet_graph, dipole_graph, homology_basis, parse_word


def test_inverse_edge_vector_is_negated(laves):
    assert laves.v('~e1') == (1, 1, 0)
    assert laves.v(laves.graph.edge('f3')) == (-1, 0, -1)


def test_block_from_directed_checks_antisymmetry():
    g = bouquet_graph(1)
    block = block_from_directed(g, {'e1': (1,), '~e1': (-1,)}, 1)
    assert block.v('~e1') == (-1,)
    with pytest.raises(BuildingBlockError, match='v\\(~e1\\)'):
        block_from_directed(g, {'e1': (1,), '~e1': (1,)}, 1)


def test_missing_or_wrong_length_vector():
    g = dipole_graph(2)
    with pytest.raises(BuildingBlockError, match='no vector'):
        BuildingBlock(g, {'e1': (1, 0)}, 2)
    with pytest.raises(BuildingBlockError, match='expected 2'):
        BuildingBlock(g, {'e1': (1, 0), 'e2': (1,)}, 2)


def test_homology_map_on_twin(laves):
    assert hat_v(laves, parse_word(laves.graph, 'e2 f1 ~e3')) == (-2, 2, 2)
    assert hat_v(laves, parse_word(laves.graph, 'e1 ~e1')) == (0, 0, 0)


def test_hat_v_rejects_open_path(laves):
    with pytest.raises(BuildingBlockError, match='not closed'):
        hat_v(laves, parse_word(laves.graph, 'e1 f3'))


def test_homology_map_is_additive(diamond):
    c1 = parse_word(diamond.graph, 'e1 ~e2')
    c2 = parse_word(diamond.graph, 'e2 ~e3')
    total = hat_v(diamond, c1 + c2)
    assert total == tuple(a + b for a, b in zip(hat_v(diamond, c1), hat_v(diamond, c2)))


def test_period_lattices(laves, diamond):
    twin = period_lattice(laves, homology_basis(laves.graph))
    assert same_lattice(twin, Lattice(((-2, 2, 2), (2, 2, -2), (-2, -2, -2))))
    assert same_lattice(twin, builtin_lattice('2L_DT'))
    dia = period_lattice(diamond, homology_basis(diamond.graph))
    assert same_lattice(dia, Lattice(((-2, 2, 0), (2, 0, 2), (-2, -2, 0))))


def test_period_lattice_independent_of_tree_root(laves):
    first = period_lattice(laves, homology_basis(laves.graph, 'A'))
    second = period_lattice(laves, homology_basis(laves.graph, 'C'))
    assert same_lattice(first, second)


def test_non_periodic_realization():
    flat = BuildingBlock(bouquet_graph(2), {'e1': (1, 0), 'e2': (2, 0)}, 2)
    with pytest.raises(DegenerateLatticeError, match='non-periodic'):
        period_lattice(flat, homology_basis(flat.graph))


def test_non_maximal_cover_reduces_to_basis():
    block = BuildingBlock(bouquet_graph(3), {'e1': (1, 0), 'e2': (0, 1), 'e3': (1, 1)}, 2)
    lattice = period_lattice(block, homology_basis(block.graph))
    assert same_lattice(lattice, builtin_lattice('square'))


def test_membership_identities():
    samples = list(itertools.product(range(-4, 5), repeat=3))
    assert membership_identity_check('L_DT', samples)
    assert membership_identity_check('L_D', samples)
    assert builtin_lattice('L_DT').contains((1, 1, 1))
    assert not builtin_lattice('L_D').contains((1, 0, 0))


def test_role_exchange(laves, diamond):
    e_dt, e_d = star_union(laves), star_union(diamond)
    assert len(e_dt) == 12 and len(e_d) == 8
    assert same_lattice(lattice_generated_by(e_dt), builtin_lattice('L_D'))
    assert same_lattice(lattice_generated_by(e_d), builtin_lattice('L_DT'))


def test_builtin_blocks_are_harmonic():
    for name in ('laves', 'diamond', 'honeycomb', 'cubic'):
        assert is_harmonic(builtin_block(name))
    skewed = BuildingBlock(dipole_graph(2), {'e1': (1,), 'e2': (3,)}, 1)
    assert not is_harmonic(skewed)


def test_star_planes_meet_at_arccos_third(laves):
    angles = dihedral_angles(laves)
    assert len(angles) == 6
    assert all(a == pytest.approx(math.acos(1 / 3)) for a in angles.values())


def test_block_text_round_trip(laves):
    again = parse_building_block(serialize_block(laves))
    assert again == laves


def test_load_block(tmp_path, diamond):
    path = tmp_path / 'diamond.qg'
    path.write_text(serialize_block(diamond))
    assert load_block(str(path)) == diamond
    assert load_block('builtin:diamond') == diamond
    with pytest.raises(BuildingBlockError, match='unknown builtin'):
        load_block('builtin:quartz')


def test_transform_and_mirror(laves):
    doubled = transform_block(laves, ((1, 0, 0), (0, 1, 0), (0, 0, 1)), 2)
    assert doubled.v('e1') == (-2, -2, 0)
    mirrored = mirror_block(laves)
    assert mirrored.v('e1') == (1, -1, 0)
    assert is_harmonic(mirrored)
    assert not is_builtin(mirrored, 'laves')


def test_lattice_parsing(tmp_path):
    lattice = parse_lattice('# fcc\n-1 1 0\n1 0 1\n-1 -1 0\n')
    assert same_lattice(lattice, builtin_lattice('L_D'))
    assert parse_lattice(serialize_lattice(lattice)) == lattice
    assert not parse_lattice('1.0 0\n0 1\n').exact
    with pytest.raises(DegenerateLatticeError, match='singular'):
        parse_lattice('1 0\n2 0\n')


def test_lattice_coordinates(l_d):
    assert l_d.integer_coordinates((0, 2, 0)) is not None
    assert l_d.point(l_d.integer_coordinates((1, 1, 0))) == (1, 1, 0)
    assert l_d.covolume() == 2
    assert l_d.scaled(Fraction(1, 2)).covolume() == Fraction(1, 4)
