import pytest

from building_blocks import builtin_block, mirror_block
from net_builder import build_net
from net_symmetry import (
    compose_isometries,
    flag_count,
    is_chiral,
    is_closed_under_composition,
    is_strongly_isotropic,
    net_isometries,
    net_point_group,
    symmetry_report,
)


@pytest.fixture(scope='module')
def twin_isometries():
    net = build_net(builtin_block('laves'), window=0)
    return net, net_isometries(net)


def test_twin_point_group_is_rotational(twin_isometries):
    net, isometries = twin_isometries
    group = net_point_group(net, isometries)
    assert group.order == 24
    assert group.determinant_census() == {1: 24, -1: 0}
    assert group.is_closed()


def test_diamond_point_group():
    group = net_point_group(build_net(builtin_block('diamond'), window=0))
    assert group.order == 48
    assert group.determinant_census() == {1: 24, -1: 24}


def test_isometries_map_vertices_to_vertices(twin_isometries):
    net, isometries = twin_isometries
    for iso in isometries:
        for x, p in net.offsets.items():
            image = iso.apply(p)
            y = iso.class_permutation[x]
            assert net.lattice.contains(tuple(a - b for a, b in zip(image, net.offsets[y])))


def test_isometries_form_a_group(twin_isometries):
    net, isometries = twin_isometries
    assert is_closed_under_composition(net, isometries)
    square = compose_isometries(isometries[1], isometries[1])
    assert set(square.class_permutation) == set(net.block.graph.vertices)


@pytest.mark.parametrize('name, flags, isotropic, chiral', [
    ('laves', 24, True, True),
    ('diamond', 48, True, False),
    ('cubic', 720, False, False),
])
def test_symmetry_predicates(name, flags, isotropic, chiral):
    net = build_net(builtin_block(name), window=0)
    isometries = net_isometries(net)
    assert flag_count(net) == flags
    assert is_strongly_isotropic(net, isometries) is isotropic
    assert is_chiral(net, isometries) is chiral


def test_mirror_twin_is_still_chiral():
    net = build_net(mirror_block(builtin_block('laves')), window=0)
    isometries = net_isometries(net)
    assert is_chiral(net, isometries)
    assert is_strongly_isotropic(net, isometries)


def test_symmetry_report():
    report = symmetry_report(build_net(builtin_block('diamond'), window=0))
    assert report == {
        'point_group_order': 48,
        'determinants': {'+1': 24, '-1': 24},
        'isometries_mod_lattice': 48,
        'flags': 48,
        'strongly_isotropic': True,
        'chiral': False,
    }
