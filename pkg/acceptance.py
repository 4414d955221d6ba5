"""
Acceptance suite - runs every quantitative check on the diamond, its twin
and the orthogonally symmetric lattices, and prints a pass/fail table.
"""

import itertools
import logging
import math
from fractions import Fraction

import numpy as np
import pandas
from scipy.spatial.transform import Rotation

from building_blocks import (
    Lattice,
    builtin_block,
    builtin_lattice,
    cross,
    dihedral_angles,
    hat_v,
    is_harmonic,
    is_zero,
    lattice_generated_by,
    membership_identity_check,
    period_lattice,
    same_lattice,
    star_plane_normals,
    star_union,
    vneg,
)
from lattice_analysis import (
    angle_bound_check,
    classify_2d,
    classify_3d,
    dual_lattice,
    find_isometry,
    is_orthogonally_symmetric,
    is_root_lattice,
    point_group,
    root_lattice,
    satisfies_crystallographic_restriction,
    shortest_vectors,
    similar_lattices,
    tight_frame_check,
    vector_key,
)
from net_builder import build_net, check_incidence_rules, decompose_vertices, has_integral_coordinates
from net_symmetry import is_chiral, is_strongly_isotropic, net_isometries, net_point_group
from quotient_graph import (
    complete_graph,
    cycle_incidence_matrix,
    dipole_graph,
    homology_basis,
    parse_word,
    theta_graph,
)
from rings import (
    girth,
    ring_geometry,
    ring_vertex_sets,
    rings_by_window_search,
    rings_through_vertex,
    verify_listed_rings,
)
from standard_realization import (
    block_matrix,
    covolume_energy,
    covolume_energy_gradient,
    normalize_covolume,
    project_harmonic,
    similar_blocks,
    standard_realization,
)

logger = logging.getLogger(__name__)

SEED = 0

RING_COUNTS = {'laves': (10, 15), 'diamond': (6, 12), 'cubic': (4, 12)}

OS_LATTICES = (('Z3', 'cubic', 2), ('L_DT', 'bcc', 8), ('L_D', 'fcc', 8))

STANDARD_GRAPHS = (('K4', complete_graph, 4, 'laves'),
                   ('dipole-4', dipole_graph, 4, 'diamond'),
                   ('theta', lambda _: theta_graph(), 3, 'honeycomb'))


def _lattice_of(block):
    return period_lattice(block, homology_basis(block.graph))


def check_period_lattices():
    laves = _lattice_of(builtin_block('laves'))
    diamond = _lattice_of(builtin_block('diamond'))
    twin_ok = same_lattice(laves, Lattice(((-2, 2, 2), (2, 2, -2), (-2, -2, -2)))) \
        and same_lattice(laves, builtin_lattice('2L_DT'))
    diamond_ok = same_lattice(diamond, Lattice(((-2, 2, 0), (2, 0, 2), (-2, -2, 0)))) \
        and same_lattice(diamond, builtin_lattice('2L_D'))
    return twin_ok and diamond_ok, f'laves = 2L_DT: {twin_ok}, diamond = 2L_D: {diamond_ok}'


def check_homology_map():
    laves, diamond = builtin_block('laves'), builtin_block('diamond')
    c1 = hat_v(laves, parse_word(laves.graph, 'e2 f1 ~e3'))
    c2 = hat_v(diamond, parse_word(diamond.graph, 'e2 ~e3'))
    null = hat_v(laves, parse_word(laves.graph, 'e1 ~e1'))
    ok = c1 == (-2, 2, 2) and c2 == (2, 0, 2) and is_zero(null)
    return ok, f'laves c1 -> {c1}, diamond c2 -> {c2}'


def check_membership_identities():
    samples = list(itertools.product(range(-3, 4), repeat=3))
    ok = membership_identity_check('L_DT', samples) and membership_identity_check('L_D', samples)
    return ok, f'{len(samples)} samples per lattice'


def check_role_exchange():
    e_dt = star_union(builtin_block('laves'))
    e_d = star_union(builtin_block('diamond'))
    ok = (len(e_dt) == 12 and len(e_d) == 8
          and same_lattice(lattice_generated_by(e_dt), builtin_lattice('L_D'))
          and same_lattice(lattice_generated_by(e_d), builtin_lattice('L_DT')))
    return ok, 'E_DT generates L_D, E_D generates L_DT'


def check_block_geometry():
    laves, diamond = builtin_block('laves'), builtin_block('diamond')
    harmonic = all(is_harmonic(builtin_block(n)) for n in ('laves', 'diamond', 'honeycomb', 'cubic'))
    norms = all(sum(x * x for x in w) == 2 for w in star_union(laves))
    opposite = sorted(diamond.star_vectors('B')) == sorted(vneg(w) for w in diamond.star_vectors('A'))
    ok = harmonic and norms and opposite
    return ok, f'harmonic: {harmonic}, |v|^2 = 2: {norms}, E_B = -E_A: {opposite}'


def check_lattice_table():
    e_dt = {vector_key(w) for w in star_union(builtin_block('laves'))}
    e_d = {vector_key(w) for w in star_union(builtin_block('diamond'))}
    rows = []
    ok = True
    for name, alpha2, size, reference in (('Z3', 1, 6, None), ('L_DT', 3, 8, e_d), ('L_D', 2, 12, e_dt)):
        k = shortest_vectors(builtin_lattice(name))
        matches = reference is None or {vector_key(w) for w in k.vectors} == reference
        ok = ok and k.alpha2 == alpha2 and len(k) == size and matches
        rows.append(f'{name}: alpha^2={k.alpha2} |K|={len(k)}')
    return ok, ', '.join(rows)


def check_point_groups():
    groups = [point_group(builtin_lattice(n)) for n in ('Z3', 'L_DT', 'L_D')]
    lattice_ok = all(g.order == 48 for g in groups) and groups[0].same_elements(groups[1]) \
        and groups[0].same_elements(groups[2])
    closed = all(g.is_closed() for g in groups)
    twin = net_point_group(build_net(builtin_block('laves'), window=0))
    diamond = net_point_group(build_net(builtin_block('diamond'), window=0))
    ok = lattice_ok and closed and twin.order == 24 and diamond.order == 48
    return ok, f'lattice groups {[g.order for g in groups]}, twin {twin.order}, diamond {diamond.order}'


def check_crystallographic_restriction():
    ok = all(satisfies_crystallographic_restriction(point_group(builtin_lattice(n)))
             for n in ('Z3', 'L_DT', 'L_D'))
    return ok, 'element orders in {1, 2, 3, 4, 6}'


def check_duality():
    half = Fraction(1, 2)
    l_dt, l_d = builtin_lattice('L_DT'), builtin_lattice('L_D')
    ok = (same_lattice(dual_lattice(l_dt), l_d.scaled(half))
          and same_lattice(dual_lattice(l_d), l_dt.scaled(half))
          and same_lattice(dual_lattice(builtin_lattice('Z3')), builtin_lattice('Z3'))
          and same_lattice(dual_lattice(dual_lattice(l_dt)), l_dt))
    return ok, 'L_DT* = L_D/2, L_D* = L_DT/2'


def check_rings():
    details = []
    ok = True
    for name, (expected_girth, expected_count) in RING_COUNTS.items():
        block = builtin_block(name)
        g = girth(block)
        counts = [len(rings_through_vertex(block, x, g)) for x in block.graph.vertices]
        ok = ok and g == expected_girth and all(c == expected_count for c in counts)
        details.append(f'{name}: girth {g}, rings {counts}')
    return ok, '; '.join(details)


def check_listed_decagons():
    ok = verify_listed_rings(builtin_block('laves'))
    return ok, 'fifteen listed words equal the enumerated decagons'


def check_ring_congruence():
    laves = builtin_block('laves')
    geometries = [ring_geometry(r, laves) for r in rings_through_vertex(laves, 'A', 10)]
    lengths = all(abs(x - math.sqrt(2)) <= 1e-12 for geo in geometries for x in geo.edge_lengths)
    first = geometries[0].angles
    congruent = all(max(abs(a - b) for a, b in zip(first, geo.angles)) <= 1e-12 for geo in geometries)
    hexagons = [ring_geometry(r, builtin_block('diamond')) for r in
                rings_through_vertex(builtin_block('diamond'), 'A', 6)]
    chair = all(abs(x - math.sqrt(3)) <= 1e-12 for geo in hexagons for x in geo.edge_lengths) and all(
        max(geo.angles) - min(geo.angles) <= 1e-12 for geo in hexagons)
    return lengths and congruent and chair, f'{len(geometries)} decagons congruent: {congruent}'


def check_orthogonal_symmetry():
    rng = np.random.default_rng(SEED)
    ok = True
    for name, expected, _ in OS_LATTICES:
        lattice = builtin_lattice(name)
        ok = ok and is_orthogonally_symmetric(lattice).is_os and classify_3d(lattice) == expected
        for _ in range(20):
            rotation = Rotation.random(None, rng).as_matrix() * rng.uniform(0.5, 3.0)
            moved = lattice.transformed(tuple(map(tuple, rotation)))
            ok = ok and classify_3d(moved) == expected
    ok = ok and classify_3d(Lattice(((1, 0, 0), (0, 1, 0), (0, 0, Fraction(101, 100))))) == 'not_os'
    base = np.array(builtin_lattice('L_D').vectors, dtype=float)
    for _ in range(50):
        noisy = base + rng.uniform(-0.05, 0.05, base.shape)
        ok = ok and classify_3d(Lattice(tuple(map(tuple, noisy)), exact=False)) == 'not_os'
    two = (classify_2d(builtin_lattice('square')) == 'square'
           and classify_2d(builtin_lattice('triangular')) == 'triangular'
           and classify_2d(Lattice(((1, 0), (0, Fraction(13, 10))))) == 'not_os')
    return ok and two, f'3D similarity trials and perturbations consistent: {ok}, 2D: {two}'


def check_tight_frames():
    details = []
    ok = True
    for name, _, expected_c in OS_LATTICES:
        k = shortest_vectors(builtin_lattice(name))
        c, residual = tight_frame_check(k, 3)
        ok = ok and c == expected_c and residual == 0 and c == k.alpha2 * len(k) / 3
        details.append(f'{name}: c={c} residual={residual}')
    return ok, ', '.join(details)


def check_angle_bound():
    ok = all(angle_bound_check(shortest_vectors(builtin_lattice(n))) for n, _, _ in OS_LATTICES)
    return ok, 'pairwise angles within [60, 120] degrees'


def check_symmetry_predicates():
    expected = {'laves': (True, True), 'diamond': (True, False), 'cubic': (False, False)}
    found = {}
    for name in expected:
        net = build_net(builtin_block(name), window=0)
        isometries = net_isometries(net)
        found[name] = (is_strongly_isotropic(net, isometries), is_chiral(net, isometries))
    return found == expected, ', '.join(f'{n}: isotropic={i} chiral={c}' for n, (i, c) in found.items())


def check_dihedral_angles():
    laves = builtin_block('laves')
    angles = dihedral_angles(laves)
    target = math.acos(1 / 3)
    planes = {'A': (1, -1, 1), 'B': (1, 1, -1), 'C': (-1, -1, -1), 'D': (-1, 1, 1)}
    normals = star_plane_normals(laves)
    parallel = all(is_zero(cross(normals[x], planes[x])) for x in planes)
    ok = len(angles) == 6 and parallel and all(abs(a - target) <= 1e-12 for a in angles.values())
    return ok, f'{len(angles)} plane pairs at arccos(1/3)'


def check_twin_description():
    net = build_net(builtin_block('laves'), window=2)
    report = decompose_vertices(net)
    incidence = check_incidence_rules(net)
    return report.passed and incidence, f'classes {report.counts}, incidence rules: {incidence}'


def check_integral_coordinates():
    ok = all(has_integral_coordinates(build_net(builtin_block(n), window=1)) for n in ('laves', 'diamond'))
    return ok, 'all vertices on Z^3'


def check_root_lattices():
    a3, d3, d4 = root_lattice('A', 3), root_lattice('D', 3), root_lattice('D', 4)
    k4 = shortest_vectors(d4)
    ok = (find_isometry(a3, builtin_lattice('L_D')) is not None
          and same_lattice(d3, builtin_lattice('L_D'))
          and find_isometry(d3, a3) is not None
          and k4.alpha2 == 2 and len(k4) == 24
          and is_root_lattice(a3) and is_root_lattice(d4))
    return ok, f'A3 ~ L_D = D3, |K(D4)| = {len(k4)}'


def check_optimizer():
    details = []
    ok = True
    for label, make, n, reference in STANDARD_GRAPHS:
        state = standard_realization(make(n), tol=1e-10, seed=SEED)
        converged = state.harmonic_residual <= 1e-9 and state.frame_residual <= 1e-9
        similar = similar_blocks(state.block, builtin_block(reference), 1e-6)
        lengths = [math.sqrt(sum(x * x for x in w)) for w in state.block.vectors.values()]
        equal = max(lengths) - min(lengths) <= 1e-6
        ok = ok and converged and similar and equal
        details.append(f'{label}: {state.iterations} iterations, similar to {reference}: {similar}')
    return ok, '; '.join(details)


def check_energy_gradient():
    rng = np.random.default_rng(SEED)
    graph = complete_graph(4)
    c = cycle_incidence_matrix(graph, homology_basis(graph)).astype(float)
    worst = 0.0
    h = 1e-6
    for _ in range(5):
        v = rng.standard_normal((len(graph.edges), 3))
        analytic = covolume_energy_gradient(v, c)
        numeric = np.zeros_like(v)
        for idx in np.ndindex(*v.shape):
            step = np.zeros_like(v)
            step[idx] = h
            numeric[idx] = (covolume_energy(v + step, c) - covolume_energy(v - step, c)) / (2 * h)
        worst = max(worst, np.linalg.norm(analytic - numeric) / np.linalg.norm(analytic))
    return worst <= 1e-6, f'max relative error {worst:.2e}'


def check_local_minimum():
    rng = np.random.default_rng(SEED)
    graph = complete_graph(4)
    c = cycle_incidence_matrix(graph, homology_basis(graph)).astype(float)
    state = standard_realization(graph, seed=SEED)
    v = block_matrix(state.block)
    best = covolume_energy(v, c)
    worst_gain = 0.0
    for _ in range(100):
        trial = normalize_covolume(project_harmonic(graph, v + 0.05 * rng.standard_normal(v.shape)), c)
        worst_gain = max(worst_gain, best - float(np.sum(trial * trial)))
    return worst_gain <= 1e-9, f'best competitor gain {worst_gain:.2e}'


def check_higher_diamonds():
    two = standard_realization(dipole_graph(3), seed=SEED)
    three = standard_realization(dipole_graph(4), seed=SEED)
    ok = similar_lattices(_lattice_of(two.block), root_lattice('A', 2)) and \
        similar_lattices(_lattice_of(three.block), root_lattice('A', 3))
    return ok, 'dipole(d+1) period lattice similar to A_d for d = 2, 3'


def check_shortest_vector_oracle():
    rng = np.random.default_rng(SEED)
    tested = 0
    while tested < 200:
        d = 2 if tested % 2 else 3
        basis = rng.integers(-3, 4, size=(d, d))
        if round(np.linalg.det(basis)) == 0:
            continue
        tested += 1
        lattice = Lattice(tuple(map(tuple, basis.tolist())))
        ours = shortest_vectors(lattice)
        box = np.array(list(itertools.product(range(-6, 7), repeat=d)))
        box = box[np.any(box != 0, axis=1)]
        points = box @ basis
        norms = np.sum(points * points, axis=1)
        if ours.alpha2 > norms.min():
            return False, f'missed a shorter vector for basis {basis.tolist()}'
        brute = {tuple(int(x) for x in p) for p in points[norms == int(ours.alpha2)]}
        # vectors with a coefficient beyond the box are invisible to brute force
        found = {tuple(int(x) for x in w) for w in ours.vectors
                 if max(abs(k) for k in lattice.integer_coordinates(w)) <= 6}
        if brute != found:
            return False, f'shortest set mismatch for basis {basis.tolist()}'
    return True, f'{tested} random integer bases'


def check_ring_oracle():
    details = []
    ok = True
    for name, (length, _) in RING_COUNTS.items():
        block = builtin_block(name)
        x = block.graph.vertices[0]
        mine = ring_vertex_sets(rings_through_vertex(block, x, length))
        brute = rings_by_window_search(block, x, length)
        ok = ok and mine == brute
        details.append(f'{name}: {len(mine)} vs {len(brute)}')
    return ok, ', '.join(details)


CHECKS = {
    'period_lattices': check_period_lattices,
    'homology_map': check_homology_map,
    'membership_identities': check_membership_identities,
    'role_exchange': check_role_exchange,
    'block_geometry': check_block_geometry,
    'lattice_table': check_lattice_table,
    'point_groups': check_point_groups,
    'crystallographic_restriction': check_crystallographic_restriction,
    'duality': check_duality,
    'rings': check_rings,
    'listed_decagons': check_listed_decagons,
    'ring_congruence': check_ring_congruence,
    'orthogonal_symmetry': check_orthogonal_symmetry,
    'tight_frames': check_tight_frames,
    'angle_bound': check_angle_bound,
    'symmetry_predicates': check_symmetry_predicates,
    'dihedral_angles': check_dihedral_angles,
    'twin_description': check_twin_description,
    'integral_coordinates': check_integral_coordinates,
    'root_lattices': check_root_lattices,
    'optimizer': check_optimizer,
    'energy_gradient': check_energy_gradient,
    'local_minimum': check_local_minimum,
    'higher_diamonds': check_higher_diamonds,
    'shortest_vector_oracle': check_shortest_vector_oracle,
    'ring_oracle': check_ring_oracle,
}


def run_checks(names=None):
    """Run the selected checks (all by default); a failing check never stops the suite."""
    names = list(CHECKS) if names is None else names
    results = []
    for idx, name in enumerate(names, 1):
        try:
            passed, detail = CHECKS[name]()
        except Exception as e:
            logger.error('check %s raised %s: %s', name, type(e).__name__, e)
            passed, detail = False, f'{type(e).__name__}: {e}'
        results.append({'check': name, 'passed': bool(passed), 'detail': detail})
        logger.info('Processed %d/%d checks (%s)', idx, len(names), name)
    return results


def results_table(results):
    table = pandas.DataFrame(results, columns=['check', 'passed', 'detail'])
    table.insert(1, 'status', table['passed'].map({True: '✅', False: '❌'}))
    return table


def print_summary(results):
    table = results_table(results)
    passed = int(table['passed'].sum())
    print(f'\n{"=" * 60}')
    print('ACCEPTANCE SUMMARY')
    print(f'{"=" * 60}')
    print(table[['status', 'check', 'detail']].to_string(index=False))
    print(f'{"-" * 60}')
    print(f'Passed: {passed}/{len(table)}')
    if passed == len(table):
        print('\n✅ All checks passed')
    else:
        failed = ', '.join(table.loc[~table['passed'], 'check'])
        print(f'\n❌ Failed: {failed}')


def export_results(results, output_file):
    results_table(results).to_csv(output_file, index=False)
    logger.info('wrote verification table to %s', output_file)


if __name__ == '__main__':
    logging.basicConfig(format='%(levelname)s: %(message)s')
    results = run_checks()
    print_summary(results)
