"""Acceptance criteria, one test per criterion.

Each test records a ``CRITERION n: PASS|FAIL`` line; the lines are printed
in the terminal summary (and immediately, when run with ``-s``).
"""

import itertools
import time
import warnings

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from peps_parent.classical import (BETA_CRIT_HEX, RankDeficiencyWarning, build_classical_peps,
                                   cross_regions, geometric_injectivity, ising_model, peps_correlations,
                                   square_dimension_arguments)
from peps_parent.gap import gap_threshold_scan, generator_properties, metropolis_generator, operator_ordering_check
from peps_parent.hamiltonian import (assemble, assemble_terms, frustration, intersection_identity_check,
                                     triple_intersection_check, verify_uniqueness)
from peps_parent.injectivity import check_injective, tiling_from_regions, union_preserves_injectivity_test
from peps_parent.lattice import Region, are_adjacent, connected_regions, generate_lattice
from peps_parent.peps import random_peps, ring, site_independent_form, state_vector


def record(n, ok, detail):
    line = f"CRITERION {n:>2}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)


def quiet_ising(kind, dims, beta):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        return build_classical_peps(ising_model(generate_lattice(kind, dims), beta))


def columns(N, M):
    return [[a * M + b for a in range(N)] for b in range(M)]


def instances():
    """Seeded random injective PEPS with total dimension at most 2^12."""
    out = []
    for n in (3, 4, 5):
        for seed in range(4):
            out.append((f"ring n={n} d=4 seed={seed}", random_peps(ring(n), 4, seed), [[v] for v in range(n)]))
    for seed in range(2):
        out.append((f"ring n=6 d=4 seed={seed}", random_peps(ring(6), 4, seed), [[v] for v in range(6)]))
    for seed in range(3):
        g = generate_lattice("square-torus", (2, 2))
        out.append((f"2x2 torus d=4 columns seed={seed}", random_peps(g, 4, seed), columns(2, 2)))
    for seed in range(2):
        g = generate_lattice("square-torus", (2, 3))
        out.append((f"2x3 torus d=4 columns seed={seed}", random_peps(g, 4, seed), columns(2, 3)))
    for seed in range(2):
        g = generate_lattice("hexagonal-torus", (2, 2))
        out.append((f"hexagonal torus 2x2 d=8 seed={seed}", random_peps(g, 8, seed), [[v] for v in range(4)]))
    return out


@pytest.fixture(scope="module")
def injective_instances():
    return [(name, p, tiling_from_regions(p, regs)) for name, p, regs in instances()]


def test_criterion_01_frustration_free():
    t0 = time.perf_counter()
    worst = {}
    # literal instance: d=2, D=2 on a 4x4 torus grouped into 2x2 blocks
    g = generate_lattice("square-torus", (4, 4))
    p = random_peps(g, 2, seed=0)
    blocks = [[4 * a + b, 4 * a + b + 1, 4 * (a + 1) + b, 4 * (a + 1) + b + 1] for a in (0, 2) for b in (0, 2)]
    til = tiling_from_regions(p, blocks)
    worst["random 4x4 2x2-blocks"] = max(frustration(p, assemble(p, til)))
    blocks_injective = til.all_injective
    # injective random instances small enough to hold the state
    q = random_peps(generate_lattice("square-torus", (2, 3)), 4, seed=1)
    worst["random 2x3 d=4 columns"] = max(frustration(q, assemble(q, tiling_from_regions(q, columns(2, 3)))))
    # the Ising bridge: cross terms on the 4x4 torus, hexagon-cell pairs on a small honeycomb torus
    pi = quiet_ising("square-torus", (4, 4), 0.3)
    worst["Ising 4x4 crosses"] = max(frustration(pi, assemble_terms(pi, cross_regions(pi.graph))))
    ph = quiet_ising("hexagonal-torus", (2, 4), BETA_CRIT_HEX)
    worst["Ising hexagonal 2x4 single sites"] = max(frustration(ph, assemble(ph, [[v] for v in range(8)])))
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-10 for v in worst.values()) and elapsed < 10
    record(1, ok, f"max <h_t> {max(worst.values()):.1e} over {len(worst)} families in {elapsed:.1f}s "
                  f"(2x2 blocks at d=2 injective: {blocks_injective})")
    assert ok, worst


def test_criterion_02_unique_ground_state(injective_instances):
    t0 = time.perf_counter()
    bad = []
    for name, p, til in injective_instances:
        assert til.all_injective, name
        assert p.d ** p.n <= 2 ** 12
        rep = verify_uniqueness(p, til)
        low = sum(1 for x in rep["eigenvalues"] if x < 1e-10)
        if low != 1 or rep["overlap"] < 1 - 1e-8:
            bad.append((name, rep["eigenvalues"], rep["overlap"]))
    elapsed = time.perf_counter() - t0
    ok = not bad and len(injective_instances) >= 20 and elapsed < 120
    record(2, ok, f"{len(injective_instances) - len(bad)}/{len(injective_instances)} instances unique in {elapsed:.1f}s")
    assert ok, bad


def test_criterion_03_ground_space_identity(injective_instances):
    worst = 0.0
    for name, p, til in injective_instances:
        rep = intersection_identity_check(p, til)
        worst = max(worst, rep["distance"])
    ok = worst <= 1e-8
    record(3, ok, f"max projector distance {worst:.1e} on {len(injective_instances)} instances")
    assert ok


def union_samples():
    rng = np.random.default_rng(2024)
    families = [
        ("ring", lambda s: random_peps(ring(6), 4, s), 2),
        ("hexagonal-open 2x4 d=8", lambda s: random_peps(generate_lattice("hexagonal-open", (2, 4)), 8, s), 2),
        ("square torus 2x3 d=4", lambda s: random_peps(generate_lattice("square-torus", (2, 3)), 4, s), 4),
    ]
    samples = []
    for k in range(120):
        name, make, max_size = families[k % len(families)]
        p = make(int(rng.integers(10 ** 6)))
        regions = [r for r in connected_regions(p.graph, max_size) if check_injective(p, r).injective]
        while True:
            a, b = (regions[i] for i in rng.choice(len(regions), 2, replace=False))
            if not set(a.members) & set(b.members):
                break
        samples.append((name, p, a, b))
    return samples


def test_criterion_04_union_of_injective_regions():
    samples = union_samples()
    fails = [(n, a.members, b.members) for n, p, a, b in samples if not union_preserves_injectivity_test(p, a, b)]
    ok = not fails and len(samples) >= 100
    record(4, ok, f"{len(samples) - len(fails)}/{len(samples)} unions injective")
    assert ok, fails


def segment_triples(n):
    """Disjoint ordered triples of segments (length 1 or 2) on an n-ring."""
    segs = [tuple((s + k) % n for k in range(L)) for s in range(n) for L in (1, 2)]
    for a, b, c in itertools.permutations(segs, 3):
        if len(set(a) | set(b) | set(c)) == len(a) + len(b) + len(c):
            yield list(a), list(b), list(c)


def test_criterion_05_triple_intersections():
    rng = np.random.default_rng(5)
    cases = []
    for n, d in ((5, 4), (6, 4), (6, 2)):
        p = random_peps(ring(n), d, seed=n + d)
        triples = list(segment_triples(n))
        for k in rng.choice(len(triples), 30, replace=False):
            cases.append((p, *triples[k]))
    incl_fail, part2, part3 = 0, [], []
    for p, r1, r2, r3 in cases:
        rep = triple_intersection_check(p, r1, r2, r3)
        incl_fail += not rep["inclusion"]
        inj = [check_injective(p, r).injective for r in (r1, r2, r3)]
        g = p.graph
        if not are_adjacent(Region.of(g, r1), Region.of(g, r3)) and inj[1] and inj[2]:
            part2.append(rep["two_way_distance"])
        if all(inj):
            part3.append(rep["three_way_distance"])
    worst2 = max(part2, default=0.0)
    worst3 = max(part3, default=0.0)
    ok = incl_fail == 0 and worst2 <= 1e-8 and worst3 <= 1e-8 and part2 and part3
    record(5, ok, f"{len(cases)} triples, inclusion failures {incl_fail}; part 2 on {len(part2)} "
                  f"(max dist {worst2:.1e}); part 3 on {len(part3)} (max dist {worst3:.1e})")
    assert ok


def test_criterion_06_correlations():
    worst = 0.0
    lattices = [("square-torus", (2, 2)), ("square-torus", (2, 3)), ("hexagonal-open", (2, 3))]
    for kind, dims in lattices:
        g = generate_lattice(kind, dims).without_open_legs()
        edges = [(u, v) for u, v, _ in g.edges]
        for beta in (0.1, 0.3, BETA_CRIT_HEX):
            m = ising_model(g, beta)
            _, _, ref = oracles.brute_gibbs(g.n, edges, beta)
            worst = max(worst, float(np.abs(peps_correlations(build_classical_peps(m), m.spins) - ref).max()))
    ok = worst <= 1e-10
    record(6, ok, f"max |<x_i x_j>_PEPS - <x_i x_j>_Gibbs| = {worst:.1e}")
    assert ok


def test_criterion_07_geometric_rule():
    checked, mismatches = 0, []
    for kind, dims in (("hexagonal-open", (2, 5)), ("square-open", (3, 3))):
        g = generate_lattice(kind, dims)
        regions = connected_regions(g, 6)
        for beta in (0.2, 0.5, BETA_CRIT_HEX):
            p = quiet_ising(kind, dims, beta)
            for r in regions:
                checked += 1
                if check_injective(p, r).injective != geometric_injectivity(g, r):
                    mismatches.append((kind, beta, r.members))
    ok = not mismatches
    record(7, ok, f"{checked} (region, beta) cases, {len(mismatches)} mismatches")
    assert ok, mismatches[:5]


def test_criterion_08_square_dimensions():
    t0 = time.perf_counter()
    rep = square_dimension_arguments(0.4)
    elapsed = time.perf_counter() - t0
    ok = (rep["dim_G_3x4"] == 1024 and rep["dim_projected_centre"] == 256
          and rep["dim_projected_middle_right"] == 128 and rep["cross_lift_distance"] <= 1e-10
          and rep["intersection_distance"] <= 1e-8 and elapsed < 60)
    record(8, ok, f"dims {rep['dim_G_3x4']}/{rep['dim_projected_centre']}/{rep['dim_projected_middle_right']}, "
                  f"||P_block - P_cross x 1|| = {rep['cross_lift_distance']:.1e}, {elapsed:.1f}s")
    assert ok, rep


def test_criterion_09_gap_threshold():
    grid = [round(0.1 + 0.02 * k, 10) for k in range(21)]
    scan = gap_threshold_scan(grid)
    margins = [m for _, m, _ in scan["rows"]]
    flips = sum(1 for a, b in zip(scan["rows"], scan["rows"][1:]) if a[2] != b[2])
    monotone = all(b <= a + 1e-12 for a, b in zip(margins, margins[1:]))
    crossing = scan["crossings"][0] if scan["crossings"] else float("nan")
    in_bracket = 0.24 <= crossing <= 0.30
    ok = flips == 1 and monotone
    detail = f"single crossing at beta = {crossing:.4f} (bracket [0.24, 0.30]: {'inside' if in_bracket else 'outside'})"
    if not in_bracket:
        detail += "; margins " + ", ".join(f"{b:.2f}:{m:.3e}" for b, m, _ in scan["rows"])
    record(9, ok, detail)
    assert ok, scan["rows"]


def test_criterion_10_q_matrix():
    worst, c_max, fails = 0.0, 0.0, []
    for dims in ((2, 2), (2, 3)):
        g = generate_lattice("square-torus", dims)
        for beta in (0.2, 0.4):
            m = ising_model(g, beta)
            gen = metropolis_generator(m)
            props = generator_properties(gen)
            p = build_classical_peps(m)
            psi = state_vector(p).real
            psi /= np.linalg.norm(psi)
            hq_res = float(np.abs(gen.H_Q() @ psi).max())
            worst = max(worst, hq_res)
            order = operator_ordering_check(gen.H_Q(), assemble_terms(p, cross_regions(g)))
            good = (props["column_sum_max"] <= 1e-12 and props["diagonal_nonpositive"]
                    and props["off_diagonal_nonnegative"] and props["pieces_are_q_matrices"] and props["local"]
                    and hq_res <= 1e-12 and order["ordered"] and np.isfinite(order["c_min"]))
            if not good:
                fails.append((dims, beta, props, order))
            else:
                c_max = max(c_max, order["c_min"])
    ok = not fails
    record(10, ok, f"4 instances, max |H_Q psi| = {worst:.1e}, largest c_min = {c_max:.3f}")
    assert ok, fails


def test_criterion_11_site_independent_form():
    worst = 0.0
    for dims in ((2, 2), (2, 3)):
        p = quiet_ising("square-torus", dims, 0.4)
        a, b = state_vector(p), state_vector(site_independent_form(p))
        worst = max(worst, float(np.linalg.norm(a / np.linalg.norm(a) - b / np.linalg.norm(b))))
    ok = worst <= 1e-10
    record(11, ok, f"max normalized state difference {worst:.1e}")
    assert ok
