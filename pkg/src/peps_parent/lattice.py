"""Interaction graphs, regions and the standard lattice generators.

Vertices are the integers ``0 .. n-1`` and their order is the global site
order used by every matricization in the package.  Virtual legs are keyed by
triples ``(a, b, slot)``:

* a real edge between ``u < v`` is ``(u, v, slot)``, where ``slot`` counts
  parallel edges between the same pair (they appear on small tori);
* the ``j``-th open leg of vertex ``w`` is ``(w, n, j)``.

Sorting these keys lexicographically gives the global leg order, with the
open legs of a vertex after its real edges.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

LATTICE_KINDS = (
    "square-torus",
    "square-open",
    "hexagonal-open",
    "hexagonal-torus",
    "square-with-defects",
    "square-with-substructure",
)

# direction labels for oriented edges: "+h" is right, "-h" left, "+v" down, "-v" up
_SQUARE_OPEN_ORDER = ("-v", "+v", "-h", "+h")


def _flip(direction: str) -> str:
    return ("-" if direction[0] == "+" else "+") + direction[1:]


class LatticeGraph:
    """Multigraph with uniform bond dimension and optional open legs.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : sequence of (u, v) or (src, dst, axis)
        Edges.  The three-element form records an orientation (``src`` to
        ``dst`` is the positive direction along ``axis``); generators use it
        so that legs can be named by direction.
    D : int
        Bond dimension of every virtual leg, open legs included.
    open_legs : sequence of int, optional
        Number of dangling virtual legs per vertex.
    open_dirs : sequence of sequence of str, optional
        Direction label of each open leg.
    meta : dict, optional
        Generator metadata (kind, dims, coordinates, seed, ...).
    """

    def __init__(self, n, edges=(), D=2, open_legs=None, open_dirs=None, meta=None):
        n = int(n)
        if n < 1:
            raise ValueError("a lattice graph needs at least one vertex")
        if int(D) < 1:
            raise ValueError("bond dimension must be positive")
        self.n = n
        self.D = int(D)
        raw = []
        for e in edges:
            if len(e) == 2:
                a, b = int(e[0]), int(e[1])
                axis = None
            elif len(e) == 3:
                a, b, axis = int(e[0]), int(e[1]), str(e[2])
            else:
                raise ValueError(f"malformed edge {e!r}")
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge {e!r} references an unknown vertex")
            raw.append((min(a, b), max(a, b), a, axis))
        slots = Counter()
        keyed = []
        for u, v, src, axis in raw:
            keyed.append(((u, v, slots[(u, v)]), (src, axis) if axis is not None else None))
            slots[(u, v)] += 1
        keyed.sort(key=lambda item: item[0])
        self.edges: tuple[tuple[int, int, int], ...] = tuple(k for k, _ in keyed)
        self.edge_axes = {k: a for k, a in keyed if a is not None}

        if open_legs is None:
            open_legs = [0] * n
        if len(open_legs) != n or any(int(c) < 0 for c in open_legs):
            raise ValueError("open_legs must give a non-negative count per vertex")
        self.open_legs: tuple[int, ...] = tuple(int(c) for c in open_legs)
        if open_dirs is not None:
            open_dirs = tuple(tuple(str(x) for x in row) for row in open_dirs)
            if len(open_dirs) != n or any(len(r) != c for r, c in zip(open_dirs, self.open_legs)):
                raise ValueError("open_dirs must label every open leg")
        self.open_dirs = open_dirs
        self.meta = dict(meta or {})

        self._incident: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        for key in self.edges:
            self._incident[key[0]].append(key)
            self._incident[key[1]].append(key)
        for w in range(n):
            self._incident[w].extend((w, n, j) for j in range(self.open_legs[w]))
            self._incident[w].sort()
        self._neighbors = [sorted({k[0] if k[1] == w else k[1] for k in self._incident[w] if k[1] != n})
                           for w in range(n)]

    # -- basic structure -------------------------------------------------

    @property
    def vertices(self) -> range:
        return range(self.n)

    def is_open(self, leg) -> bool:
        return leg[1] == self.n

    def legs(self, v: int) -> list[tuple[int, int, int]]:
        """Virtual legs of ``v`` in global order (the tensor leg order)."""
        return list(self._incident[v])

    def degree(self, v: int) -> int:
        return sum(1 for k in self._incident[v] if k[1] != self.n)

    def leg_count(self, v: int) -> int:
        """``e_v``: real edges plus open legs."""
        return len(self._incident[v])

    def neighbors(self, v: int) -> list[int]:
        return list(self._neighbors[v])

    def leg_direction(self, v: int, leg) -> str | None:
        """Direction label of ``leg`` as seen from ``v``, if recorded."""
        if self.is_open(leg):
            if self.open_dirs is None:
                return None
            return self.open_dirs[v][leg[2]]
        tag = self.edge_axes.get(tuple(leg))
        if tag is None:
            return None
        src, axis = tag
        return "+" + axis if src == v else "-" + axis

    def leg_other_end(self, v: int, leg) -> int | None:
        if self.is_open(leg):
            return None
        return leg[1] if leg[0] == v else leg[0]

    def with_bond_dimension(self, D: int) -> "LatticeGraph":
        return LatticeGraph.from_dict({**self.to_dict(), "D": int(D)})

    def without_open_legs(self) -> "LatticeGraph":
        d = self.to_dict()
        d["open_legs"] = [0] * self.n
        d["open_dirs"] = None
        return LatticeGraph.from_dict(d)

    def coords(self, v: int):
        c = self.meta.get("coords")
        return None if c is None else tuple(c[v])

    def vertex_at(self, coord) -> int:
        coord = list(coord)
        for v, c in enumerate(self.meta.get("coords", ())):
            if list(c) == coord:
                return v
        raise KeyError(f"no vertex at {tuple(coord)}")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        edges = []
        for key in self.edges:
            tag = self.edge_axes.get(key)
            if tag is None:
                edges.append([key[0], key[1]])
            else:
                src, axis = tag
                dst = key[1] if src == key[0] else key[0]
                edges.append([src, dst, axis])
        return {
            "n": self.n,
            "D": self.D,
            "edges": edges,
            "open_legs": list(self.open_legs),
            "open_dirs": None if self.open_dirs is None else [list(r) for r in self.open_dirs],
            "meta": _jsonable(self.meta),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeGraph":
        unknown = set(d) - {"n", "D", "edges", "open_legs", "open_dirs", "meta"}
        if unknown:
            raise ValueError(f"unknown graph keys: {sorted(unknown)}")
        return cls(d["n"], [tuple(e) for e in d["edges"]], D=d.get("D", 2),
                   open_legs=d.get("open_legs"), open_dirs=d.get("open_dirs"),
                   meta=d.get("meta"))

    def __eq__(self, other):
        if not isinstance(other, LatticeGraph):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.n, self.D, self.edges, self.open_legs))

    def __repr__(self):
        kind = self.meta.get("kind", "custom")
        return f"LatticeGraph({kind}, n={self.n}, edges={len(self.edges)}, D={self.D})"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


# -- regions ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Region:
    """A set of vertices of ``graph``; boundary data is derived on demand."""

    graph: LatticeGraph
    members: tuple[int, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        for m in members:
            if not 0 <= m < self.graph.n:
                raise ValueError(f"unknown vertex id {m}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, graph: LatticeGraph, members: Iterable[int]) -> "Region":
        return cls(graph, tuple(members))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return v in self.members

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return self.members == other.members and self.graph == other.graph

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"Region{list(self.members)}"

    @property
    def boundary_legs(self) -> list[tuple[int, int, int]]:
        if "E" not in self._cache:
            self._cache["E"], self._cache["Rbar"] = boundary(self.graph, self)
        return self._cache["E"]

    @property
    def boundary_vertices(self) -> list[int]:
        self.boundary_legs
        return self._cache["Rbar"]

    def internal_legs(self) -> list[tuple[int, int, int]]:
        inside = set(self.members)
        return [k for k in self.graph.edges if k[0] in inside and k[1] in inside]


def as_region(graph: LatticeGraph, r) -> Region:
    if isinstance(r, Region):
        if r.graph is not graph and r.graph != graph:
            raise ValueError("region belongs to a different graph")
        return r
    return Region.of(graph, r)


def boundary(graph: LatticeGraph, region) -> tuple[list, list]:
    """Boundary legs ``E`` (global order) and boundary vertices ``R̄``."""
    members = region.members if isinstance(region, Region) else sorted(set(int(m) for m in region))
    inside = set(members)
    for m in inside:
        if not 0 <= m < graph.n:
            raise ValueError(f"unknown vertex id {m}")
    legs = []
    for key in graph.edges:
        if (key[0] in inside) != (key[1] in inside):
            legs.append(key)
    for w in members:
        legs.extend((w, graph.n, j) for j in range(graph.open_legs[w]))
    legs.sort()
    rbar = sorted({k[0] if graph.is_open(k) or k[0] in inside else k[1] for k in legs})
    return legs, rbar


def _same_graph(a: Region, b: Region):
    if a.graph is not b.graph and a.graph != b.graph:
        raise ValueError("regions live on different graphs")


def union(a: Region, b: Region) -> Region:
    _same_graph(a, b)
    return Region.of(a.graph, set(a.members) | set(b.members))


def intersection(a: Region, b: Region) -> Region:
    _same_graph(a, b)
    return Region.of(a.graph, set(a.members) & set(b.members))


def are_disjoint(a: Region, b: Region) -> bool:
    _same_graph(a, b)
    return not (set(a.members) & set(b.members))


def are_adjacent(a: Region, b: Region) -> bool:
    """Disjoint with at least one edge between them."""
    if not are_disjoint(a, b):
        return False
    sa, sb = set(a.members), set(b.members)
    return any((k[0] in sa and k[1] in sb) or (k[0] in sb and k[1] in sa) for k in a.graph.edges)


def is_connected(a: Region) -> bool:
    members = set(a.members)
    if not members:
        return False
    start = next(iter(members))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in a.graph.neighbors(v):
            if w in members and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen == members


def connected_regions(graph: LatticeGraph, max_size: int) -> list[Region]:
    """All connected vertex sets of size ``1..max_size``, each listed once."""
    found = set()
    frontier = {frozenset([v]) for v in graph.vertices}
    found |= frontier
    for _ in range(max_size - 1):
        nxt = set()
        for s in frontier:
            for v in s:
                for w in graph.neighbors(v):
                    if w not in s:
                        t = s | {w}
                        if t not in found:
                            nxt.add(t)
        found |= nxt
        frontier = nxt
    return [Region.of(graph, s) for s in sorted(found, key=lambda s: (len(s), sorted(s)))]


# -- generators --------------------------------------------------------------


def _cyclic_pairs(length: int):
    """Oriented pairs (i, i+1 mod length); none when length < 2."""
    if length < 2:
        return []
    return [(i, (i + 1) % length) for i in range(length)]


def _square_torus_edges(N, M):
    idx = lambda a, b: a * M + b  # noqa: E731
    edges = []
    for a in range(N):
        for b, b2 in _cyclic_pairs(M):
            edges.append((idx(a, b), idx(a, b2), "h"))
    for b in range(M):
        for a, a2 in _cyclic_pairs(N):
            edges.append((idx(a, b), idx(a2, b), "v"))
    return edges


def generate_lattice(kind: str, dims: Sequence[int], D: int = 2,
                     defect_probability: float = 0.0, seed: int = 0) -> LatticeGraph:
    """Build one of the standard lattices.

    ``dims`` is ``(rows, cols)``.  Hexagonal lattices use the brick-wall
    embedding of the honeycomb on a ``rows x cols`` site grid: site
    ``(r, c)`` has horizontal neighbours ``(r, c±1)`` and one vertical
    neighbour, below when ``r + c`` is even and above otherwise, so
    ``hexagonal-open`` with dims ``(2, 3)`` is a single hexagon.  The torus
    version needs even dims.  Open kinds attach open legs so that every vertex
    carries its full coordination (4 on the square lattice, 3 on the
    honeycomb).
    """
    if kind not in LATTICE_KINDS:
        raise ValueError(f"unknown lattice kind {kind!r}")
    dims = tuple(int(x) for x in dims)
    if len(dims) != 2:
        raise ValueError("dims must be (rows, cols)")
    if any(x < 1 for x in dims):
        raise ValueError("dims must be positive")
    N, M = dims
    meta = {"kind": kind, "dims": [N, M]}

    if kind == "square-torus":
        meta["coords"] = [[a, b] for a in range(N) for b in range(M)]
        meta["periodic"] = [True, True]
        return LatticeGraph(N * M, _square_torus_edges(N, M), D=D, meta=meta)

    if kind == "square-with-defects":
        if not 0.0 <= defect_probability <= 1.0:
            raise ValueError("defect_probability must lie in [0, 1]")
        edges = _square_torus_edges(N, M)
        rng = np.random.default_rng(seed)
        keep = rng.random(len(edges)) >= defect_probability
        meta.update(coords=[[a, b] for a in range(N) for b in range(M)], periodic=[True, True],
                    defect_probability=float(defect_probability), seed=int(seed))
        return LatticeGraph(N * M, [e for e, k in zip(edges, keep) if k], D=D, meta=meta)

    if kind == "square-open":
        idx = lambda a, b: a * M + b  # noqa: E731
        edges = [(idx(a, b), idx(a, b + 1), "h") for a in range(N) for b in range(M - 1)]
        edges += [(idx(a, b), idx(a + 1, b), "v") for a in range(N - 1) for b in range(M)]
        open_dirs = []
        for a in range(N):
            for b in range(M):
                present = {"-v": a > 0, "+v": a < N - 1, "-h": b > 0, "+h": b < M - 1}
                open_dirs.append([dname for dname in _SQUARE_OPEN_ORDER if not present[dname]])
        meta.update(coords=[[a, b] for a in range(N) for b in range(M)], periodic=[False, False])
        return LatticeGraph(N * M, edges, D=D, open_legs=[len(o) for o in open_dirs],
                            open_dirs=open_dirs, meta=meta)

    if kind == "hexagonal-open":
        idx = lambda r, c: r * M + c  # noqa: E731
        edges = [(idx(r, c), idx(r, c + 1), "h") for r in range(N) for c in range(M - 1)]
        edges += [(idx(r, c), idx(r + 1, c), "v") for r in range(N - 1) for c in range(M)
                  if (r + c) % 2 == 0]
        open_dirs = []
        for r in range(N):
            for c in range(M):
                missing = []
                if c == 0:
                    missing.append("-h")
                if c == M - 1:
                    missing.append("+h")
                if (r + c) % 2 == 0 and r == N - 1:
                    missing.append("+v")
                if (r + c) % 2 == 1 and r == 0:
                    missing.append("-v")
                open_dirs.append(missing)
        meta.update(coords=[[r, c] for r in range(N) for c in range(M)], periodic=[False, False])
        return LatticeGraph(N * M, edges, D=D, open_legs=[len(o) for o in open_dirs],
                            open_dirs=open_dirs, meta=meta)

    if kind == "hexagonal-torus":
        if N % 2 or M % 2:
            raise ValueError("hexagonal-torus needs even dims")
        idx = lambda r, c: r * M + c  # noqa: E731
        edges = [(idx(r, c), idx(r, c2), "h") for r in range(N) for c, c2 in _cyclic_pairs(M)]
        edges += [(idx(r, c), idx((r + 1) % N, c), "v") for r in range(N) for c in range(M)
                  if (r + c) % 2 == 0]
        meta.update(coords=[[r, c] for r in range(N) for c in range(M)], periodic=[True, True])
        return LatticeGraph(N * M, edges, D=D, meta=meta)

    # square-with-substructure: every lattice point becomes a ring of four
    # sub-sites (N, E, S, W), each carrying exactly one inter-cluster bond
    base = lambda a, b: 4 * (a * M + b)  # noqa: E731
    edges = []
    for a in range(N):
        for b in range(M):
            o = base(a, b)
            edges += [(o, o + 1, "c"), (o + 1, o + 2, "c"), (o + 2, o + 3, "c"), (o + 3, o, "c")]
            edges.append((o + 1, base(a, (b + 1) % M) + 3, "h"))
            edges.append((o + 2, base((a + 1) % N, b) + 0, "v"))
    meta.update(coords=[[a, b, s] for a in range(N) for b in range(M) for s in range(4)],
                periodic=[True, True])
    return LatticeGraph(4 * N * M, edges, D=D, meta=meta)


def hexagon_cell(graph: LatticeGraph, r: int, c: int) -> Region:
    """The six sites of the brick-wall hexagon with top-left corner ``(r, c)``."""
    if (r + c) % 2:
        raise ValueError("hexagon cells start where r + c is even")
    sites = [(r, c), (r, c + 1), (r, c + 2), (r + 1, c), (r + 1, c + 1), (r + 1, c + 2)]
    if graph.meta.get("periodic", [False, False])[0]:
        N, M = graph.meta["dims"]
        sites = [(a % N, b % M) for a, b in sites]
    return Region.of(graph, [graph.vertex_at(s) for s in sites])
