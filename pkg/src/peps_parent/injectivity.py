"""Injectivity of regions, the union property and greedy injective tilings."""

from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import LatticeGraph, Region, are_disjoint, as_region, union
from .peps import MATRIX_CAP, Peps, compressed_boundary_map
from .tensors import DEFAULT_RTOL, rank


@dataclass(frozen=True)
class InjectivityReport:
    region: tuple
    boundary_legs: int
    bulk_dim: int
    boundary_dim: int
    rank: int
    injective: bool
    rtol: float

    def to_dict(self) -> dict:
        return {
            "region": list(self.region),
            "boundary_legs": self.boundary_legs,
            "bulk_dim": self.bulk_dim,
            "boundary_dim": self.boundary_dim,
            "rank": self.rank,
            "injective": self.injective,
            "rtol": self.rtol,
        }


def check_injective(p: Peps, region, rtol: float = DEFAULT_RTOL, cap: int = MATRIX_CAP) -> InjectivityReport:
    """Decide whether ``Γ_R`` is injective, i.e. has rank ``D^|E|``.

    The rank is read off a column-compressed copy of ``Γ_R`` with the same
    range, so regions with many boundary legs stay cheap.
    """
    r = as_region(p.graph, region)
    n_legs = len(r.boundary_legs)
    bulk, bdim = p.d ** len(r), p.D ** n_legs
    m = compressed_boundary_map(p, r, rtol, cap)
    rk = rank(m, rtol) if m.size else 0
    return InjectivityReport(tuple(r.members), n_legs, bulk, bdim, rk, rk == bdim, rtol)


def union_preserves_injectivity_test(p: Peps, r, s, rtol: float = DEFAULT_RTOL) -> bool:
    """Injectivity verdict of ``r ∪ s`` for disjoint injective ``r`` and ``s``.

    A ``False`` return contradicts the union property and signals a bug.
    """
    r, s = as_region(p.graph, r), as_region(p.graph, s)
    if not are_disjoint(r, s):
        raise ValueError("regions must be disjoint")
    for reg in (r, s):
        if not check_injective(p, reg, rtol).injective:
            raise ValueError(f"region {list(reg.members)} is not injective")
    return check_injective(p, union(r, s), rtol).injective


@dataclass(frozen=True)
class InjectiveTiling:
    """Disjoint regions covering the graph, with the induced super-lattice."""

    graph: LatticeGraph
    regions: tuple
    super_edges: tuple
    injective: tuple = field(default=())

    @property
    def all_injective(self) -> bool:
        return all(self.injective)

    def to_dict(self) -> dict:
        return {
            "regions": [list(r.members) for r in self.regions],
            "super_edges": [list(e) for e in self.super_edges],
            "injective": list(self.injective),
        }


@dataclass(frozen=True)
class TilingFailure:
    region: tuple
    reason: str

    def __bool__(self):
        return False

    def to_dict(self) -> dict:
        return {"failed_region": list(self.region), "reason": self.reason}


def super_lattice_edges(graph: LatticeGraph, regions) -> tuple:
    """Pairs ``(a, b)``, ``a < b``, of regions joined by at least one edge."""
    owner = {}
    for k, r in enumerate(regions):
        for v in r.members:
            owner[v] = k
    pairs = set()
    for u, v, _ in graph.edges:
        a, b = owner[u], owner[v]
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    return tuple(sorted(pairs))


def tiling_from_regions(p: Peps, regions, rtol: float = DEFAULT_RTOL, check: bool = True) -> InjectiveTiling:
    """Wrap an explicit covering; ``check`` computes the injectivity flags."""
    regs = tuple(as_region(p.graph, r) for r in regions)
    seen: set = set()
    for r in regs:
        if len(r) == 0:
            raise ValueError("empty region in covering")
        if seen & set(r.members):
            raise ValueError("regions overlap")
        seen |= set(r.members)
    if seen != set(p.graph.vertices):
        raise ValueError("regions do not cover every vertex")
    flags = tuple(check_injective(p, r, rtol).injective for r in regs) if check else ()
    return InjectiveTiling(p.graph, regs, super_lattice_edges(p.graph, regs), flags)


def find_injective_tiling(p: Peps, max_region_size: int, rtol: float = DEFAULT_RTOL):
    """Greedy covering by injective regions, or a :class:`TilingFailure`.

    Each region starts at the first uncovered vertex and grows by the
    uncovered neighbour with the largest rank of the enlarged ``Γ`` (ties go
    to the lowest vertex id) until it is injective.
    """
    if max_region_size < 1:
        raise ValueError("max_region_size must be at least 1")
    g = p.graph
    covered: set = set()
    regions = []
    for seed in g.vertices:
        if seed in covered:
            continue
        members = [seed]
        rep = check_injective(p, members, rtol)
        while not rep.injective:
            if len(members) >= max_region_size:
                return TilingFailure(tuple(sorted(members)), f"not injective at size cap {max_region_size}")
            cands = sorted({w for v in members for w in g.neighbors(v)} - covered - set(members))
            if not cands:
                return TilingFailure(tuple(sorted(members)), "no uncovered neighbour left to add")
            best = None
            for w in cands:
                trial = check_injective(p, members + [w], rtol)
                if best is None or trial.rank > best[1].rank:
                    best = (w, trial)
            members.append(best[0])
            rep = best[1]
        covered |= set(members)
        regions.append(Region.of(g, members))
    regs = tuple(regions)
    return InjectiveTiling(g, regs, super_lattice_edges(g, regs), tuple(True for _ in regs))
