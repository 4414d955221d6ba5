import math

import numpy as np
import pytest

from building_blocks import builtin_block, is_harmonic, mirror_block, period_lattice, transform_block
from lattice_analysis import classify_3d, root_lattice, similar_lattices
from quotient_graph import bouquet_graph, build_graph, complete_graph, cycle_incidence_matrix, dipole_graph, \
    homology_basis, theta_graph
from standard_realization import (
    ConvergenceError,
    block_matrix,
    covolume_energy,
    covolume_energy_gradient,
    energy,
    frame_residual,
    harmonic_residual,
    normalize_covolume,
    project_harmonic,
    realization_metadata,
    similar_blocks,
    standard_realization,
)


@pytest.fixture(scope='module')
def k4_state():
    return standard_realization(complete_graph(4))


def test_energy_is_exact_for_exact_blocks(laves, diamond):
    assert energy(laves) == 12
    assert energy(diamond) == 12


def test_projection_makes_blocks_harmonic(rng):
    g = complete_graph(4)
    v = project_harmonic(g, rng.standard_normal((6, 3)))
    assert harmonic_residual(g, v) < 1e-12
    # projecting twice changes nothing
    assert np.allclose(project_harmonic(g, v), v)


def test_covolume_normalization(rng):
    g = dipole_graph(4)
    c = cycle_incidence_matrix(g, homology_basis(g)).astype(float)
    v = normalize_covolume(rng.standard_normal((4, 3)), c)
    assert abs(np.linalg.det(c @ v)) == pytest.approx(1.0)
    assert covolume_energy(3 * v, c) == pytest.approx(covolume_energy(v, c))


def test_gradient_matches_finite_differences(rng):
    g = complete_graph(4)
    c = cycle_incidence_matrix(g, homology_basis(g)).astype(float)
    v = rng.standard_normal((6, 3))
    analytic = covolume_energy_gradient(v, c)
    h = 1e-6
    numeric = np.zeros_like(v)
    for idx in np.ndindex(*v.shape):
        step = np.zeros_like(v)
        step[idx] = h
        numeric[idx] = (covolume_energy(v + step, c) - covolume_energy(v - step, c)) / (2 * h)
    assert np.allclose(analytic, numeric, rtol=1e-5, atol=1e-7)


def test_k4_converges_to_the_twin(k4_state, laves):
    assert k4_state.converged
    assert k4_state.harmonic_residual <= 1e-10
    assert k4_state.frame_residual <= 1e-10
    assert similar_blocks(k4_state.block, laves)
    assert not similar_blocks(k4_state.block, builtin_block('diamond'))


def test_standard_edges_have_equal_length(k4_state):
    lengths = np.linalg.norm(block_matrix(k4_state.block), axis=1)
    assert np.ptp(lengths) < 1e-6


def test_k4_period_lattice_is_bcc(k4_state):
    block = k4_state.block
    assert classify_3d(period_lattice(block, homology_basis(block.graph))) == 'bcc'


@pytest.mark.parametrize('graph, reference', [(dipole_graph(4), 'diamond'), (theta_graph(), 'honeycomb'),
                                              (bouquet_graph(3), 'cubic')])
def test_standard_realizations(graph, reference):
    state = standard_realization(graph, seed=1)
    assert similar_blocks(state.block, builtin_block(reference))


def test_seed_does_not_change_the_shape():
    first = standard_realization(complete_graph(4), seed=2)
    second = standard_realization(complete_graph(4), seed=3)
    assert similar_blocks(first.block, second.block)


def test_same_seed_gives_identical_blocks():
    first = standard_realization(dipole_graph(4), seed=7)
    second = standard_realization(dipole_graph(4), seed=7)
    assert np.array_equal(block_matrix(first.block), block_matrix(second.block))
    assert first.iterations == second.iterations
    assert first.objective == second.objective


def test_higher_dimensional_diamonds():
    for d in (2, 3):
        block = standard_realization(dipole_graph(d + 1)).block
        assert similar_lattices(period_lattice(block, homology_basis(block.graph)), root_lattice('A', d))


def test_local_minimum(k4_state, rng):
    g = k4_state.block.graph
    c = cycle_incidence_matrix(g, homology_basis(g)).astype(float)
    v = block_matrix(k4_state.block)
    best = covolume_energy(v, c)
    for _ in range(20):
        trial = normalize_covolume(project_harmonic(g, v + 0.05 * rng.standard_normal(v.shape)), c)
        assert covolume_energy(trial, c) >= best - 1e-9


def test_frame_residual_of_builtins(laves, diamond):
    assert frame_residual(block_matrix(laves)) == pytest.approx(0)
    assert frame_residual(block_matrix(diamond)) == pytest.approx(0)


def test_tree_has_no_realization():
    with pytest.raises(ConvergenceError):
        standard_realization(build_graph(['A', 'B'], [('e1', 'A', 'B')]))


def test_iteration_budget_exhausted():
    with pytest.raises(ConvergenceError, match='no convergence') as info:
        standard_realization(complete_graph(4), max_iter=2)
    assert info.value.state is not None
    assert info.value.state.iterations == 2


def test_similarity_is_scale_and_rotation_free(laves):
    c, s = math.cos(0.3), math.sin(0.3)
    rotated = transform_block(laves, ((c, -s, 0), (s, c, 0), (0, 0, 1)), 4)
    assert similar_blocks(rotated, laves)
    assert similar_blocks(mirror_block(laves), laves)
    assert is_harmonic(rotated)


def test_metadata_records_covolume(k4_state):
    lines = realization_metadata(k4_state)
    assert 'covolume 1' in lines
    assert any(line.startswith('iterations ') for line in lines)
