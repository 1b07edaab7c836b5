"""PEPS built from classical nearest-neighbour models and their injectivity structure."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .lattice import LatticeGraph, Region, as_region, generate_lattice
from .peps import Peps, range_space, state_vector
from .subspace import embed_subspace, intersect, projector_distance, apply_on_sites
from .tensors import DEFAULT_RTOL, factor_symmetric, rank

BETA_CRIT_HEX = 0.5 * np.log(2.0 + np.sqrt(3.0))
# square lattice: Onsager's value, and the variant without the logarithm kept for comparison
BETA_CRIT_SQUARE = 0.5 * np.log(1.0 + np.sqrt(2.0))
BETA_CRIT_SQUARE_VARIANT = 0.5 * (1.0 + np.sqrt(2.0))

ISING_POTENTIAL = np.array([[-1.0, 1.0], [1.0, -1.0]])
ISING_SPINS = (1.0, -1.0)


class RankDeficiencyWarning(UserWarning):
    """An edge factor is not invertible, so injectivity cannot hold."""


def hexagonal_critical_constants() -> dict:
    return {"beta_crit_hex": float(BETA_CRIT_HEX)}


@dataclass(frozen=True)
class ClassicalModel:
    """``H(x) = Σ_edges h(x_u, x_v)`` on ``graph`` at inverse temperature ``beta``.

    ``potential`` is the default ``d x d`` table; ``edge_potentials`` maps
    edge keys ``(u, v, slot)`` to a table oriented as ``(x_u, x_v)``.
    """

    graph: LatticeGraph
    d: int
    beta: float
    potential: np.ndarray
    edge_potentials: dict = field(default_factory=dict)
    spins: tuple | None = None

    def __post_init__(self):
        if self.beta < 0 or not np.isfinite(self.beta):
            raise ValueError("beta must be a finite non-negative number")
        pot = np.asarray(self.potential, dtype=float)
        if pot.shape != (self.d, self.d) or not np.all(np.isfinite(pot)):
            raise ValueError("potential must be a finite d x d table")
        object.__setattr__(self, "potential", pot)
        for key, t in self.edge_potentials.items():
            t = np.asarray(t, dtype=float)
            if t.shape != (self.d, self.d) or not np.all(np.isfinite(t)):
                raise ValueError(f"edge potential on {key} must be a finite d x d table")
        if self.graph.D != self.d:
            object.__setattr__(self, "graph", self.graph.with_bond_dimension(self.d))
        if self.spins is None:
            spins = ISING_SPINS if self.d == 2 else tuple(float(k) for k in range(self.d))
            object.__setattr__(self, "spins", spins)

    def table(self, edge) -> np.ndarray:
        return np.asarray(self.edge_potentials.get(tuple(edge), self.potential), dtype=float)

    def with_beta(self, beta: float) -> "ClassicalModel":
        return ClassicalModel(self.graph, self.d, beta, self.potential, self.edge_potentials, self.spins)

    def energy(self, config) -> float:
        return float(sum(self.table(e)[config[e[0]], config[e[1]]] for e in self.graph.edges))

    def energies(self, backend=None) -> np.ndarray:
        """``H(x)`` for every configuration, lexicographic order."""
        edges = self.graph.edges
        eu = np.array([e[0] for e in edges], dtype=np.int64)
        ev = np.array([e[1] for e in edges], dtype=np.int64)
        tables = np.array([self.table(e) for e in edges]).reshape(len(edges), self.d, self.d)
        return kernels.config_energies(self.graph.n, self.d, eu, ev, tables, backend=backend)

    def gibbs_weights(self) -> np.ndarray:
        e = self.energies()
        w = np.exp(-self.beta * (e - e.min()))
        return w / w.sum()


def ising_model(graph: LatticeGraph, beta: float) -> ClassicalModel:
    """Ferromagnetic Ising model ``h = -x_u x_v`` with spins ``(+1, -1)``."""
    return ClassicalModel(graph, 2, float(beta), ISING_POTENTIAL)


def ising_phi(beta: float) -> np.ndarray:
    """Rows ``(√sinh(β/2), √cosh(β/2))`` and ``(-√sinh(β/2), √cosh(β/2))``.

    ``phi @ phi.T`` equals the edge Gibbs factor ``exp(β/2 x x')``.
    """
    s, c = np.sqrt(np.sinh(beta / 2)), np.sqrt(np.cosh(beta / 2))
    return np.array([[s, c], [-s, c]])


@dataclass(frozen=True)
class PhiFactors:
    """Per-edge factors with ``left[x_u, α] @ right[α, x_v]`` = Gibbs factor."""

    left: dict
    right: dict
    open_factor: np.ndarray
    ranks: dict
    d: int

    @property
    def rank_deficient(self) -> bool:
        return any(r < self.d for r in self.ranks.values())

    def end_factor(self, graph: LatticeGraph, v: int, leg) -> np.ndarray:
        """Matrix ``[x_v, α]`` attached to ``leg`` at vertex ``v``."""
        if graph.is_open(leg):
            return self.open_factor
        leg = tuple(leg)
        return self.left[leg] if leg[0] == v else self.right[leg].T


def _is_ising(m: ClassicalModel, table: np.ndarray) -> bool:
    return m.d == 2 and np.array_equal(table, ISING_POTENTIAL)


def phi_factors(m: ClassicalModel, rtol: float = DEFAULT_RTOL) -> PhiFactors:
    left, right, ranks = {}, {}, {}
    cache: dict = {}
    for e in m.graph.edges:
        t = m.table(e)
        key = t.tobytes()
        if key not in cache:
            if _is_ising(m, t):
                phi = ising_phi(m.beta)
                cache[key] = (phi, phi.T.copy())
            else:
                gibbs = np.exp(-0.5 * m.beta * t)
                cache[key] = factor_symmetric(gibbs, target_rank=m.d, rtol=rtol)
        left[e], right[e] = cache[key]
        ranks[e] = rank(left[e], rtol)
    if _is_ising(m, m.potential):
        open_factor = ising_phi(m.beta)
    else:
        open_factor = factor_symmetric(np.exp(-0.5 * m.beta * m.potential), target_rank=m.d, rtol=rtol)[0]
    ranks["open"] = rank(open_factor, rtol)
    return PhiFactors(left, right, open_factor, ranks, m.d)


def build_classical_peps(m: ClassicalModel, rtol: float = DEFAULT_RTOL) -> Peps:
    """``A^x_{α_1...} = Π_e φ^e[x, α_e]``; amplitudes are ``exp(-β/2 H(x))``.

    A non-invertible edge factor triggers :class:`RankDeficiencyWarning`.
    """
    g = m.graph
    phis = phi_factors(m, rtol)
    used = set(g.edges) | ({"open"} if any(g.open_legs) else set())
    if any(phis.ranks[k] < m.d for k in used):
        warnings.warn("edge factor is rank deficient; the PEPS cannot be injective",
                      RankDeficiencyWarning, stacklevel=2)
    tensors = []
    for v in g.vertices:
        legs = g.legs(v)
        t = np.zeros((m.d,) + (m.d,) * len(legs), dtype=complex)
        for x in range(m.d):
            block = np.ones(())
            for leg in legs:
                block = np.multiply.outer(block, phis.end_factor(g, v, leg)[x])
            t[x] = block
        tensors.append(t)
    return Peps(g, tuple(tensors), m.d)


# -- correlations -------------------------------------------------------------


def _spin_table(m: ClassicalModel) -> np.ndarray:
    """``spins[x, v]`` for every configuration ``x`` and vertex ``v``."""
    n, d = m.graph.n, m.d
    x = np.arange(d ** n, dtype=np.int64)
    digits = (x[:, None] // d ** np.arange(n - 1, -1, -1, dtype=np.int64)[None, :]) % d
    return np.asarray(m.spins)[digits]


def thermal_correlations(m: ClassicalModel) -> np.ndarray:
    """``<x_i x_j>`` under the Gibbs distribution (all pairs)."""
    w = m.gibbs_weights()
    s = _spin_table(m)
    return (s * w[:, None]).T @ s


def peps_correlations(p: Peps, spins) -> np.ndarray:
    """Diagonal two-point functions ``<ψ|x̂_i x̂_j|ψ>/<ψ|ψ>``."""
    psi = state_vector(p)
    prob = np.abs(psi) ** 2
    prob /= prob.sum()
    n, d = p.n, p.d
    x = np.arange(d ** n, dtype=np.int64)
    digits = (x[:, None] // d ** np.arange(n - 1, -1, -1, dtype=np.int64)[None, :]) % d
    s = np.asarray(spins, dtype=float)[digits]
    return (s * prob[:, None]).T @ s


# -- injectivity structure ------------------------------------------------------


def geometric_injectivity(graph: LatticeGraph, region) -> bool:
    """True iff no member of the region carries two or more boundary legs."""
    r = as_region(graph, region)
    counts: dict = {}
    inside = set(r.members)
    for leg in r.boundary_legs:
        if graph.is_open(leg):
            w = leg[0]
        else:
            w = leg[0] if leg[0] in inside else leg[1]
        counts[w] = counts.get(w, 0) + 1
    return all(c <= 1 for c in counts.values())


def factorized_boundary_check(m: ClassicalModel, region, rtol: float = DEFAULT_RTOL,
                              tol: float = 1e-10) -> dict:
    """Check ``<x|Γ_R|ᾱ> = C(x) <x̄|F|ᾱ>`` entrywise.

    ``C(x)`` is the product of Gibbs factors on internal edges and ``F`` the
    tensor product of edge factors on the boundary legs, grouped by boundary
    vertex.
    """
    from .peps import boundary_map

    g = m.graph
    r = as_region(g, region)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        p = build_classical_peps(m, rtol)
    phis = phi_factors(m, rtol)
    gamma = boundary_map(p, r)
    members = list(r.members)
    legs = r.boundary_legs
    rbar = r.boundary_vertices
    inside = set(members)
    owner = [leg[0] if g.is_open(leg) or leg[0] in inside else leg[1] for leg in legs]
    mats = [phis.end_factor(g, w, leg) for w, leg in zip(owner, legs)]
    internal = r.internal_legs()
    gibbs = {e: phis.left[e] @ phis.right[e] for e in internal}

    # F[x̄, ᾱ] with x̄ over boundary vertices in order
    F = np.zeros((m.d ** len(rbar), m.d ** len(legs)), dtype=complex)
    for xb in itertools.product(range(m.d), repeat=len(rbar)):
        val = dict(zip(rbar, xb))
        row = np.ones(())
        for w, mat in zip(owner, mats):
            row = np.multiply.outer(row, mat[val[w]])
        F[int(np.ravel_multi_index(xb, (m.d,) * len(rbar))) if rbar else 0] = row.reshape(-1)
    C = np.zeros(m.d ** len(members))
    pred = np.zeros_like(gamma)
    pos = [members.index(w) for w in rbar]
    for k, x in enumerate(itertools.product(range(m.d), repeat=len(members))):
        c = 1.0
        for e in internal:
            c *= float(np.real(gibbs[e][x[members.index(e[0])], x[members.index(e[1])]]))
        C[k] = c
        xb = tuple(x[q] for q in pos)
        pred[k] = c * F[int(np.ravel_multi_index(xb, (m.d,) * len(rbar))) if rbar else 0]
    scale = max(np.abs(gamma).max(), 1e-300)
    err = float(np.abs(gamma - pred).max() / scale)
    f_rank = rank(F, rtol) if np.any(F) else 0
    return {
        "region": members,
        "boundary_legs": len(legs),
        "boundary_vertices": len(rbar),
        "F_shape": list(F.shape),
        "F_rank": f_rank,
        "F_square": F.shape[0] == F.shape[1],
        "F_invertible": F.shape[0] == F.shape[1] and f_rank == F.shape[0],
        "min_abs_C": float(np.abs(C).min()),
        "C_has_zero": bool(np.any(np.abs(C) <= tol * np.abs(C).max())),
        "max_rel_error": err,
        "agrees": err <= tol,
    }


# -- square-lattice dimension facts -----------------------------------------------


def _project_site(sub, site_pos: int, n: int, d: int, state: int = 0) -> int:
    """Dimension of ``(1 ⊗ |s><s|_site) sub``."""
    proj = np.zeros((d, d))
    proj[state, state] = 1.0
    img = apply_on_sites(proj, sub.basis, [site_pos], list(range(n)), d)
    return rank(img) if np.any(img) else 0


def square_dimension_arguments(beta: float, rtol: float = DEFAULT_RTOL) -> dict:
    """Range dimensions of the square-lattice Ising PEPS on open patches.

    Reports ``dim G`` of a 3 x 4 patch, the dimensions of ``G`` of a 3 x 3
    patch after projecting its centre, respectively its middle-right site,
    onto ``|0>``, the identity ``(G_left ⊗ H) ∩ (H ⊗ G_right) = G_{3x4}``
    for the two overlapping 3 x 3 patches, and ``P_block = P_cross ⊗ 1``.
    """
    wide = generate_lattice("square-open", (3, 4), D=2)
    pw = build_classical_peps(ising_model(wide, beta), rtol)
    full = list(wide.vertices)
    g34 = range_space(pw, full, rtol)
    left = sorted(wide.vertex_at((a, b)) for a in range(3) for b in range(3))
    right = sorted(wide.vertex_at((a, b)) for a in range(3) for b in range(1, 4))
    gl = embed_subspace(range_space(pw, left, rtol), left, full, 2)
    gr = embed_subspace(range_space(pw, right, rtol), right, full, 2)
    inter = intersect(gl, gr, rtol)

    block = generate_lattice("square-open", (3, 3), D=2)
    pb = build_classical_peps(ising_model(block, beta), rtol)
    g33 = range_space(pb, list(block.vertices), rtol)
    centre = block.vertex_at((1, 1))
    mid_right = block.vertex_at((1, 2))
    cross = sorted(block.vertex_at(c) for c in ((0, 1), (1, 0), (1, 1), (1, 2), (2, 1)))
    g_cross = range_space(pb, cross, rtol)
    lifted = embed_subspace(g_cross, cross, list(block.vertices), 2)
    p_block = np.eye(2 ** 9) - g33.projector()
    p_lift = np.eye(2 ** 9) - lifted.projector()
    return {
        "beta": float(beta),
        "dim_G_3x4": g34.dim,
        "dim_G_3x3": g33.dim,
        "dim_projected_centre": _project_site(g33, centre, 9, 2),
        "dim_projected_middle_right": _project_site(g33, mid_right, 9, 2),
        "dim_intersection": inter.dim,
        "intersection_distance": projector_distance(inter, g34),
        "dim_G_cross": g_cross.dim,
        "cross_lift_distance": float(np.linalg.norm(p_block - p_lift, 2)),
    }


# -- regions used by the bridge -------------------------------------------------


def cross_regions(graph: LatticeGraph) -> list:
    """Each vertex with its neighbours (the 5-site crosses on the square torus)."""
    return [Region.of(graph, [v] + graph.neighbors(v)) for v in graph.vertices]


def defect_region_sizes(p_missing: float, dims=(10, 10), seed: int = 0, max_size: int = 40) -> dict:
    """Greedy injective-region sizes on a defect lattice, judged by the geometric rule.

    Grows regions from uncovered vertices by the neighbour that least
    increases the boundary-leg excess until no member has two boundary legs.
    The order-of-magnitude prediction ``(1-p)^2/p^3`` is reported alongside.
    """
    g = generate_lattice("square-with-defects", dims, D=2, defect_probability=p_missing, seed=seed)
    covered: set = set()
    sizes = []
    for seed_v in g.vertices:
        if seed_v in covered:
            continue
        members = [seed_v]
        ok = geometric_injectivity(g, members)
        while not ok and len(members) < max_size:
            cands = sorted({w for v in members for w in g.neighbors(v)} - covered - set(members))
            if not cands:
                break

            def excess(w):
                r = as_region(g, members + [w])
                return len(r.boundary_legs) - len(r.boundary_vertices)

            w = min(cands, key=lambda c: (excess(c), c))
            members.append(w)
            ok = geometric_injectivity(g, members)
        if ok:
            sizes.append(len(members))
        covered |= set(members)
    pred = (1 - p_missing) ** 2 / p_missing ** 3 if p_missing > 0 else float("inf")
    return {
        "p": float(p_missing),
        "regions": len(sizes),
        "mean_size": float(np.mean(sizes)) if sizes else None,
        "prediction": pred,
    }
