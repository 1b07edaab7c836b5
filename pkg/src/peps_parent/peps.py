"""PEPS on arbitrary graphs: amplitudes, state vectors, boundary maps, ranges."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapExceeded
from .lattice import LatticeGraph, Region, as_region, generate_lattice, is_connected
from .subspace import Subspace, site_permutation
from .tensors import DEFAULT_RTOL, contract_network, orthonormal_range, tensor_from_dict, tensor_to_dict

STATE_CAP = 2 ** 20
MATRIX_CAP = 2 ** 26
TI_TOL = 1e-10


@dataclass(frozen=True)
class Peps:
    """Per-vertex tensors ``A[v]`` of shape ``(d, D, ..., D)`` on ``graph``.

    Virtual legs of ``A[v]`` follow ``graph.legs(v)``.
    """

    graph: LatticeGraph
    tensors: tuple
    d: int

    def __post_init__(self):
        g = self.graph
        if len(self.tensors) != g.n:
            raise ValueError("one tensor per vertex is required")
        ts = []
        for v, t in enumerate(self.tensors):
            t = np.asarray(t, dtype=complex)
            expected = (self.d,) + (g.D,) * g.leg_count(v)
            if t.shape != expected:
                raise ValueError(f"tensor at vertex {v} has shape {t.shape}, expected {expected}")
            if not np.any(t):
                raise ValueError(f"tensor at vertex {v} is identically zero")
            if not np.all(np.isfinite(t)):
                raise ValueError(f"tensor at vertex {v} has non-finite entries")
            ts.append(t)
        object.__setattr__(self, "tensors", tuple(ts))

    @property
    def D(self) -> int:
        return self.graph.D

    @property
    def n(self) -> int:
        return self.graph.n


def random_peps(graph: LatticeGraph, d: int, seed: int | np.random.Generator = 0,
                real: bool = False) -> Peps:
    """PEPS with i.i.d. Gaussian entries (complex unless ``real``)."""
    rng = np.random.default_rng(seed)
    ts = []
    for v in graph.vertices:
        shape = (d,) + (graph.D,) * graph.leg_count(v)
        t = rng.standard_normal(shape)
        if not real:
            t = t + 1j * rng.standard_normal(shape)
        ts.append(t)
    return Peps(graph, tuple(ts), d)


def from_directional(graph: LatticeGraph, d: int, tensors: Sequence[np.ndarray],
                     directions: Sequence[str]) -> Peps:
    """Build a PEPS from tensors whose virtual legs are ordered by ``directions``.

    ``tensors[v]`` has shape ``(d,) + (D,) * len(directions)``; a direction
    the vertex does not have must carry dimension-1 or be sliced at index 0.
    """
    out = []
    for v, t in enumerate(tensors):
        t = np.asarray(t)
        legs = graph.legs(v)
        names = [graph.leg_direction(v, leg) for leg in legs]
        if None in names:
            raise ValueError("graph has unlabelled legs")
        missing = [k for k, dname in enumerate(directions) if dname not in names]
        idx = [slice(None)] * t.ndim
        for k in missing:
            idx[k + 1] = 0
        t = t[tuple(idx)]
        kept = [dname for dname in directions if dname in names]
        if sorted(kept) != sorted(names):
            raise ValueError(f"vertex {v}: directions {names} not covered by {list(directions)}")
        perm = [0] + [1 + kept.index(dname) for dname in names]
        out.append(np.transpose(t, perm))
    return Peps(graph, tuple(out), d)


# -- contraction helpers -------------------------------------------------


def _leg_label(graph, v, leg, inside):
    if graph.is_open(leg):
        return ("b", leg)
    other = graph.leg_other_end(v, leg)
    return ("e", leg) if other in inside else ("b", leg)


def _region_network(p: Peps, members: Sequence[int], phys=True):
    inside = set(members)
    arrays, labels = [], []
    for v in members:
        labs = [("p", v)] + [_leg_label(p.graph, v, leg, inside) for leg in p.graph.legs(v)]
        arrays.append(p.tensors[v])
        labels.append(labs)
    return arrays, labels


def amplitude(p: Peps, config: Sequence[int]) -> complex:
    """Coefficient of ``|config>`` (one physical index per vertex)."""
    if any(p.graph.open_legs):
        raise ValueError("amplitude needs a graph without open legs")
    if len(config) != p.n:
        raise ValueError("config needs one index per vertex")
    arrays, labels = [], []
    for v, i in enumerate(config):
        if not 0 <= int(i) < p.d:
            raise ValueError(f"physical index {i} out of range at vertex {v}")
        arrays.append(p.tensors[v][int(i)])
        labels.append([("e", leg) for leg in p.graph.legs(v)])
    return complex(contract_network(arrays, labels, []))


def state_vector(p: Peps, cap: int = STATE_CAP) -> np.ndarray:
    """Unnormalized coefficients, sites in vertex order, most significant first."""
    if any(p.graph.open_legs):
        raise ValueError("state_vector needs a graph without open legs")
    size = p.d ** p.n
    if size > cap:
        raise CapExceeded(f"state vector of size {size} exceeds cap {cap}")
    arrays, labels = _region_network(p, list(p.graph.vertices))
    t = contract_network(arrays, labels, [("p", v) for v in p.graph.vertices])
    return t.reshape(size)


def boundary_map(p: Peps, region, cap: int = MATRIX_CAP) -> np.ndarray:
    """``Γ_R`` as a ``d^|R| x D^|E|`` matrix (columns follow the order of ``E``)."""
    r = as_region(p.graph, region)
    if len(r) == 0:
        raise ValueError("region must be nonempty")
    if not is_connected(r):
        warnings.warn("boundary_map on a disconnected region", stacklevel=2)
    legs = r.boundary_legs
    rows, cols = p.d ** len(r), p.D ** len(legs)
    if rows * cols > cap:
        raise CapExceeded(f"boundary map {rows}x{cols} exceeds cap {cap}")
    arrays, labels = _region_network(p, r.members)
    out = [("p", v) for v in r.members] + [("b", leg) for leg in legs]
    return contract_network(arrays, labels, out).reshape(rows, cols)


def compressed_boundary_map(p: Peps, region, rtol: float = DEFAULT_RTOL,
                            cap: int = MATRIX_CAP) -> np.ndarray:
    """A matrix with the same column space as ``Γ_R`` but fewer columns.

    At each member vertex the boundary legs are grouped and replaced by the
    range of the matrix (physical + internal legs) x (boundary legs).  The
    dropped factor is surjective, so the column space is unchanged.
    """
    r = as_region(p.graph, region)
    inside = set(r.members)
    g = p.graph
    arrays, labels, out_b = [], [], []
    for v in r.members:
        t = p.tensors[v]
        labs = [("p", v)] + [_leg_label(g, v, leg, inside) for leg in g.legs(v)]
        bpos = [k for k, lab in enumerate(labs) if lab[0] == "b"]
        if bpos:
            keep = [k for k in range(len(labs)) if k not in bpos]
            m = np.transpose(t, keep + bpos).reshape(int(np.prod([t.shape[k] for k in keep])), -1)
            u, s, _ = np.linalg.svd(m, full_matrices=False)
            rk = int(np.count_nonzero(s > rtol * s[0])) if s.size and s[0] > 0 else 0
            if rk < m.shape[1]:
                t = (u[:, :rk] * s[:rk]).reshape([t.shape[k] for k in keep] + [rk])
                labs = [labs[k] for k in keep] + [("c", v)]
                out_b.append(("c", v))
            else:
                out_b.extend(labs[k] for k in bpos)
        arrays.append(t)
        labels.append(labs)
    rows = p.d ** len(r)
    dims = {lab: a.shape[k] for a, ls in zip(arrays, labels) for k, lab in enumerate(ls)}
    cols = int(np.prod([dims[lab] for lab in out_b], dtype=np.int64))
    if rows * cols > cap:
        raise CapExceeded(f"compressed boundary map {rows}x{cols} exceeds cap {cap}")
    out = [("p", v) for v in r.members] + out_b
    return contract_network(arrays, labels, out).reshape(rows, cols)


def range_space(p: Peps, region, rtol: float = DEFAULT_RTOL) -> Subspace:
    """``G_R``: the range of ``Γ_R`` in the physical space of ``R``."""
    m = compressed_boundary_map(p, region, rtol)
    return Subspace(orthonormal_range(m, rtol), rtol)


def reduced_support(p: Peps, region, rtol: float = DEFAULT_RTOL, cap: int = STATE_CAP) -> Subspace:
    """``S_R``: support of the reduced density operator on ``R``."""
    r = as_region(p.graph, region)
    psi = state_vector(p, cap)
    n = p.n
    rest = [v for v in p.graph.vertices if v not in r.members]
    t = psi.reshape([p.d] * n)
    t = np.transpose(t, site_permutation(list(range(n)), list(r.members) + rest))
    m = t.reshape(p.d ** len(r), -1)
    return Subspace(orthonormal_range(m, rtol), rtol)


# -- translation invariance and the site-independent form ----------------------

_TI_DIRECTIONS = ("-v", "+v", "-h", "+h")  # u, d, l, r


def _torus_dims(graph: LatticeGraph):
    if graph.meta.get("kind") != "square-torus":
        raise ValueError("site_independent_form needs a square-torus PEPS")
    N, M = graph.meta["dims"]
    return N, M


def translate_state(psi: np.ndarray, d: int, N: int, M: int, shift=(1, 0)) -> np.ndarray:
    """``psi`` with every site ``(a, b)`` moved to ``(a + s, b + t)``."""
    t = psi.reshape([d] * (N * M))
    s0, s1 = shift
    # new site (a, b) holds the old site (a - s0, b - s1)
    perm = [((a - s0) % N) * M + (b - s1) % M for a in range(N) for b in range(M)]
    return np.transpose(t, perm).reshape(psi.shape)


def is_translation_invariant(p: Peps, tol: float = TI_TOL, cap: int = STATE_CAP) -> bool:
    N, M = _torus_dims(p.graph)
    psi = state_vector(p, cap)
    norm = np.linalg.norm(psi)
    for shift in ((1, 0), (0, 1)):
        if np.linalg.norm(translate_state(psi, p.d, N, M, shift) - psi) > tol * norm:
            return False
    return True


def site_independent_form(p: Peps, check_ti: bool = True, cap: int = STATE_CAP) -> Peps:
    """Rewrite a translation-invariant torus PEPS with one shared tensor.

    Each bond gets a position tag: the horizontal bond index becomes
    ``(row, col, D)`` and the vertical one ``(col, row, D)``, with the tags
    advancing by one (cyclically) across the bond.  Every vertex then carries
    the same tensor, scaled by ``(N M)^(-1/(N M))``.
    """
    N, M = _torus_dims(p.graph)
    if check_ti and not is_translation_invariant(p, cap=cap):
        raise ValueError("PEPS is not translation invariant")
    D, d = p.D, p.d
    has_h, has_v = M >= 2, N >= 2
    Dh = N * M * D if has_h else 1
    Dv = N * M * D if has_v else 1
    S = np.zeros((d, Dv, Dv, Dh, Dh), dtype=complex)
    hidx = lambda j, k, x: (j * M + k) * D + x  # noqa: E731
    vidx = lambda k, j, x: (k * N + j) * D + x  # noqa: E731
    for v in p.graph.vertices:
        j, k = p.graph.coords(v)
        names = [p.graph.leg_direction(v, leg) for leg in p.graph.legs(v)]
        A = p.tensors[v]
        # bring A to (d, u, d, l, r) with dimension-1 placeholders for absent directions
        perm = [0] + [1 + names.index(dn) for dn in _TI_DIRECTIONS if dn in names]
        A = np.transpose(A, perm)
        shape = [d] + [D if dn in names else 1 for dn in _TI_DIRECTIONS]
        A = A.reshape(shape)
        for u in range(shape[1]):
            for dd in range(shape[2]):
                for l in range(shape[3]):
                    for r in range(shape[4]):
                        iu = vidx(k, j, u) if has_v else 0
                        idn = vidx(k, (j + 1) % N, dd) if has_v else 0
                        il = hidx(j, k, l) if has_h else 0
                        ir = hidx(j, (k + 1) % M, r) if has_h else 0
                        S[:, iu, idn, il, ir] += A[:, u, dd, l, r]
    S *= (N * M) ** (-1.0 / (N * M))
    if has_h and has_v:
        Dnew = N * M * D
    else:
        Dnew = N * M * D if (has_h or has_v) else 1
    graph = p.graph.with_bond_dimension(Dnew)
    shared = S
    tensors = []
    for v in graph.vertices:
        names = [graph.leg_direction(v, leg) for leg in graph.legs(v)]
        idx = [slice(None)] + [slice(None) if dn in names else 0 for dn in _TI_DIRECTIONS]
        t = shared[tuple(idx)]
        present = [dn for dn in _TI_DIRECTIONS if dn in names]
        tensors.append(np.transpose(t, [0] + [1 + present.index(dn) for dn in names]))
    return Peps(graph, tuple(tensors), d)


def shared_tensor(p: Peps, v: int = 0) -> np.ndarray:
    """Tensor of ``v`` with virtual legs ordered (up, down, left, right)."""
    names = [p.graph.leg_direction(v, leg) for leg in p.graph.legs(v)]
    return np.transpose(p.tensors[v], [0] + [1 + names.index(dn) for dn in _TI_DIRECTIONS if dn in names])


# -- serialization ---------------------------------------------------------------


def peps_to_dict(p: Peps, shared: bool = False) -> dict:
    out = {"graph": p.graph.to_dict(), "d": p.d, "shared": bool(shared)}
    if shared:
        out["directions"] = [dn for dn in _TI_DIRECTIONS
                             if dn in {p.graph.leg_direction(0, leg) for leg in p.graph.legs(0)}]
        out["tensor"] = tensor_to_dict(shared_tensor(p))
    else:
        out["tensors"] = [tensor_to_dict(t) for t in p.tensors]
    return out


def peps_from_dict(d: dict) -> Peps:
    graph = LatticeGraph.from_dict(d["graph"])
    if d.get("shared"):
        t = tensor_from_dict(d["tensor"])
        return from_directional(graph, int(d["d"]), [t] * graph.n, d["directions"])
    return Peps(graph, tuple(tensor_from_dict(t) for t in d["tensors"]), int(d["d"]))


def product_peps(vectors: Sequence[np.ndarray]) -> Peps:
    """Product state on isolated vertices (D = 1)."""
    g = LatticeGraph(len(vectors), [], D=1)
    return Peps(g, tuple(np.asarray(v, dtype=complex) for v in vectors), len(vectors[0]))


def ring(n: int, D: int = 2) -> LatticeGraph:
    """1D periodic chain, the ``1 x n`` square torus."""
    return generate_lattice("square-torus", (1, n), D=D)
