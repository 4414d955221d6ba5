import math

import pytest

from building_blocks import BuildingBlockError, builtin_block
from net_builder import WrongBlockError
from quotient_graph import parse_word
from rings import (
    LAVES_RING_WORDS,
    RingSearchError,
    canonical_key,
    cover_of,
    girth,
    is_simple_circuit,
    lift_word,
    ring_geometry,
    ring_vertex_sets,
    rings_by_window_search,
    rings_report,
    rings_through_vertex,
    verify_listed_rings,
)


@pytest.mark.parametrize('name, expected', [('laves', 10), ('diamond', 6), ('cubic', 4), ('honeycomb', 6)])
def test_girth(name, expected):
    assert girth(builtin_block(name)) == expected


def test_girth_cap(laves):
    with pytest.raises(RingSearchError):
        girth(laves, cap=8)


@pytest.mark.parametrize('name, length, count', [('laves', 10, 15), ('diamond', 6, 12), ('cubic', 4, 12)])
def test_ring_counts_at_every_class(name, length, count):
    block = builtin_block(name)
    for x in block.graph.vertices:
        assert len(rings_through_vertex(block, x, length)) == count


def test_no_rings_below_girth(laves):
    assert rings_through_vertex(laves, 'A', 3) == []
    assert rings_through_vertex(laves, 'A', 8) == []


def test_rings_are_simple_and_null_homologous(laves):
    cover = cover_of(laves)
    for ring in rings_through_vertex(laves, 'A', 10, cover):
        states = lift_word(cover, 'A', ring.word)
        assert is_simple_circuit(states)
        assert states[0] == ('A', (0, 0, 0))


def test_canonical_key_ignores_orientation_and_start(laves):
    cover = cover_of(laves)
    ring = rings_through_vertex(laves, 'B', 10, cover)[0]
    shift = 3
    rotated_word = ring.word[shift:] + ring.word[:shift]
    rotated_states = ring.states[shift:] + ring.states[:shift]
    assert canonical_key(laves.graph, rotated_word, rotated_states) == ring.canonical_key
    reverse = parse_word(laves.graph, ' '.join(ring.word)).reversed()
    states = lift_word(cover, ring.states[0][0], reverse.ids)
    assert canonical_key(laves.graph, reverse.ids, tuple(states[:-1])) == ring.canonical_key


def test_listed_decagons(laves):
    assert len(LAVES_RING_WORDS) == 15
    assert verify_listed_rings(laves)


def test_listed_decagons_need_the_twin(diamond):
    with pytest.raises(WrongBlockError):
        verify_listed_rings(diamond)


def test_decagons_are_congruent(laves):
    geometries = [ring_geometry(r, laves) for r in rings_through_vertex(laves, 'A', 10)]
    for geometry in geometries:
        assert all(x == pytest.approx(math.sqrt(2)) for x in geometry.edge_lengths)
        assert geometry.angles == pytest.approx(geometries[0].angles)
    # all angles of a planar-star trivalent net are 120 degrees
    assert all(a == pytest.approx(2 * math.pi / 3) for a in geometries[0].angles)


def test_diamond_hexagons_have_tetrahedral_angles(diamond):
    tetrahedral = math.acos(-1 / 3)
    for ring in rings_through_vertex(diamond, 'A', 6):
        assert all(a == pytest.approx(tetrahedral) for a in ring_geometry(ring, diamond).angles)


@pytest.mark.parametrize('name, length', [('laves', 10), ('diamond', 6), ('cubic', 4)])
def test_rings_match_window_search(name, length):
    block = builtin_block(name)
    x = block.graph.vertices[0]
    assert ring_vertex_sets(rings_through_vertex(block, x, length)) == rings_by_window_search(block, x, length)


def test_unknown_vertex(laves):
    with pytest.raises(BuildingBlockError, match='unknown vertex'):
        rings_through_vertex(laves, 'Z', 10)


def test_rings_report(laves):
    report = rings_report(laves, 'A')
    assert report['girth'] == 10
    assert report['vertices']['A']['count'] == 15
    assert len(report['vertices']['A']['words']) == 15
    below = rings_report(laves, 'A', 3)
    assert below['vertices']['A']['count'] == 0
