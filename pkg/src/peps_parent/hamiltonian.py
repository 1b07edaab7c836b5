"""Parent Hamiltonians: local kernel projectors, assembly and exact diagonalization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse.linalg as spla

from . import kernels
from .errors import CapExceeded, ConvergenceError
from .injectivity import InjectiveTiling, super_lattice_edges, tiling_from_regions
from .lattice import LatticeGraph, Region, as_region, union
from .peps import STATE_CAP, Peps, range_space, state_vector
from .subspace import Subspace, embed_subspace, intersect, intersect_all, projector_distance
from .tensors import DEFAULT_RTOL, tensor_to_dict

TERM_CAP = 2 ** 11
DENSE_CAP = 2 ** 11
ITERATIVE_CAP = 2 ** 20


@dataclass(frozen=True)
class LocalTerm:
    """Hermitian PSD operator on the physical space of ``sites`` (sorted)."""

    sites: tuple
    operator: np.ndarray
    kernel: Subspace | None = None

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.operator).min())

    def idempotency_error(self) -> float:
        return float(np.abs(self.operator @ self.operator - self.operator).max())


def local_projector(p: Peps, region, rtol: float = DEFAULT_RTOL, cap: int = TERM_CAP) -> LocalTerm:
    """``1 - P_G`` for ``G = range(Γ_R)``: the canonical term with kernel ``G_R``."""
    r = as_region(p.graph, region)
    dim = p.d ** len(r)
    if dim > cap:
        raise CapExceeded(f"local term of dimension {dim} exceeds cap {cap}")
    g = range_space(p, r, rtol)
    op = np.eye(dim) - g.projector()
    op = (op + op.conj().T) / 2
    return LocalTerm(tuple(r.members), op, g)


@dataclass
class AssembledHamiltonian:
    """``H = Σ_t h_t ⊗ 1`` acting on ``d^n`` dimensional space."""

    n: int
    d: int
    terms: list
    graph: LatticeGraph | None = None
    _index: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        for t in self.terms:
            if t.operator.shape != (self.d ** len(t.sites),) * 2:
                raise ValueError(f"term on {t.sites} has the wrong shape")
            if any(not 0 <= s < self.n for s in t.sites):
                raise ValueError(f"term on {t.sites} references unknown sites")
        self._index = [kernels.local_offsets(list(t.sites), self.n, self.d) for t in self.terms]

    @property
    def dim(self) -> int:
        return self.d ** self.n

    def norm_bound(self) -> float:
        """Upper bound on ``||H||`` from the term norms."""
        return float(sum(np.linalg.norm(t.operator, 2) for t in self.terms))

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        psi = np.ascontiguousarray(psi, dtype=complex).reshape(-1)
        if psi.size != self.dim:
            raise ValueError("vector has the wrong length")
        out = np.zeros(self.dim, dtype=complex)
        for t, (bases, offsets) in zip(self.terms, self._index):
            kernels.apply_local(psi, t.operator, bases, offsets, out)
        return out

    def term_expectation(self, k: int, psi: np.ndarray) -> complex:
        """``<psi|h_k|psi>`` for the ``k``-th term alone."""
        psi = np.ascontiguousarray(psi, dtype=complex)
        bases, offsets = self._index[k]
        out = np.zeros(self.dim, dtype=complex)
        kernels.apply_local(psi, self.terms[k].operator, bases, offsets, out)
        return complex(np.vdot(psi, out))

    def to_dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        if self.dim > cap:
            raise CapExceeded(f"dense Hamiltonian of dimension {self.dim} exceeds cap {cap}")
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for t, (bases, offsets) in zip(self.terms, self._index):
            idx = bases[:, None] + offsets[None, :]
            h[idx[:, :, None], idx[:, None, :]] += t.operator[None, :, :]
        return h

    def as_linear_operator(self) -> spla.LinearOperator:
        return spla.LinearOperator((self.dim, self.dim), matvec=self.matvec, dtype=complex)

    def export(self) -> list:
        return [{"sites": list(t.sites), "matrix": tensor_to_dict(t.operator)} for t in self.terms]


def assemble_terms(p: Peps, regions: Sequence, rtol: float = DEFAULT_RTOL,
                   cap: int = TERM_CAP) -> AssembledHamiltonian:
    """One canonical term per region; regions may overlap."""
    terms = [local_projector(p, r, rtol, cap) for r in regions]
    return AssembledHamiltonian(p.n, p.d, terms, p.graph)


def assemble(p: Peps, tiling, rtol: float = DEFAULT_RTOL, cap: int = TERM_CAP) -> AssembledHamiltonian:
    """Nearest-neighbour parent Hamiltonian over a covering.

    One term per super-lattice edge ``(α, β)``, with kernel ``G_{R_α ∪ R_β}``.
    A covering without super-lattice edges gets one term per region.
    """
    if not isinstance(tiling, InjectiveTiling):
        tiling = tiling_from_regions(p, tiling, rtol, check=False)
    regs = tiling.regions
    if tiling.super_edges:
        unions = [union(regs[a], regs[b]) for a, b in tiling.super_edges]
    else:
        unions = list(regs)
    return assemble_terms(p, unions, rtol, cap)


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray
    residual: float
    method: str


def ground_space(h: AssembledHamiltonian, k: int = 4, tol: float = 1e-10, dense_cap: int = DENSE_CAP,
                 seed: int = 0) -> Spectrum:
    """Lowest ``k`` eigenpairs, dense below ``dense_cap`` and Lanczos above."""
    k = min(k, h.dim)
    if h.dim <= dense_cap:
        w, v = np.linalg.eigh(h.to_dense(dense_cap))
        w, v = w[:k], v[:, :k]
        method = "dense"
    else:
        if h.dim > ITERATIVE_CAP:
            raise CapExceeded(f"dimension {h.dim} exceeds iterative cap {ITERATIVE_CAP}")
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
        w, v = spla.eigsh(h.as_linear_operator(), k=k, which="SA", v0=v0, tol=tol * 1e-2,
                          ncv=min(h.dim, max(4 * k, 40)), maxiter=20 * h.dim)
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        method = "lanczos"
    scale = max(h.norm_bound(), 1.0)
    resid = 0.0
    for j in range(v.shape[1]):
        resid = max(resid, float(np.linalg.norm(h.matvec(v[:, j]) - w[j] * v[:, j])))
    if resid > tol * scale:
        raise ConvergenceError(f"eigenpair residual {resid:.3e} above {tol * scale:.3e}", resid)
    return Spectrum(np.asarray(w, dtype=float), v, resid, method)


def frustration(p: Peps, h: AssembledHamiltonian, cap: int = STATE_CAP) -> list:
    """``<φ|h_t|φ>/<φ|φ>`` for every term."""
    psi = state_vector(p, cap)
    psi = psi / np.linalg.norm(psi)
    return [float(h.term_expectation(k, psi).real) for k in range(len(h.terms))]


def verify_uniqueness(p: Peps, tiling, k: int = 4, rtol: float = DEFAULT_RTOL, zero_tol: float = 1e-10,
                      seed: int = 0) -> dict:
    """ED of the assembled parent Hamiltonian; deviations are reported, not raised."""
    h = assemble(p, tiling, rtol)
    eig = ground_space(h, k=min(k, p.d ** p.n), seed=seed)
    psi = state_vector(p)
    psi = psi / np.linalg.norm(psi)
    deg = int(np.count_nonzero(eig.values < zero_tol))
    ground = eig.vectors[:, :max(deg, 1)]
    overlap = float(np.linalg.norm(ground.conj().T @ psi))
    fr = frustration(p, h)
    return {
        "lambda0": float(eig.values[0]),
        "lambda1": float(eig.values[1]) if eig.values.size > 1 else None,
        "eigenvalues": [float(x) for x in eig.values],
        "degeneracy": deg,
        "overlap": overlap,
        "unique": deg == 1 and overlap >= 1 - 1e-8,
        "max_term_energy": max(fr) if fr else 0.0,
        "terms": len(h.terms),
        "method": eig.method,
        "residual": eig.residual,
    }


def _embedded_range(p: Peps, region: Region, rtol: float) -> Subspace:
    g = range_space(p, region, rtol)
    return embed_subspace(g, list(region.members), list(p.graph.vertices), p.d)


def intersection_identity_check(p: Peps, tiling, rtol: float = DEFAULT_RTOL, tol: float = 1e-8) -> dict:
    """Compare ``∩ G_{R_α ∪ R_β}`` (embedded) with ``G`` of the whole lattice."""
    if not isinstance(tiling, InjectiveTiling):
        tiling = tiling_from_regions(p, tiling, rtol, check=False)
    regs = tiling.regions
    pairs = [union(regs[a], regs[b]) for a, b in tiling.super_edges] or list(regs)
    spaces = [_embedded_range(p, r, rtol) for r in pairs]
    lhs = intersect_all(spaces, rtol)
    rhs = range_space(p, list(p.graph.vertices), rtol)
    dist = projector_distance(lhs, rhs)
    return {"lhs_dim": lhs.dim, "rhs_dim": rhs.dim, "distance": dist, "equal": dist <= tol}


def triple_intersection_check(p: Peps, r1, r2, r3, rtol: float = DEFAULT_RTOL, tol: float = 1e-8) -> dict:
    """Inclusion and equalities for three disjoint regions.

    ``inclusion``: ``G_123 ⊆ (G_12 ⊗ H_3) ∩ (H_1 ⊗ G_23)``;
    ``two_way``: distance between ``G_123`` and that intersection;
    ``three_way``: distance after also intersecting with ``G_13 ⊗ H_2``.
    """
    g = p.graph
    r1, r2, r3 = (as_region(g, r) for r in (r1, r2, r3))
    if set(r1.members) & set(r2.members) or set(r1.members) & set(r3.members) or set(r2.members) & set(r3.members):
        raise ValueError("regions must be disjoint")
    target = sorted(set(r1.members) | set(r2.members) | set(r3.members))
    total = Region.of(g, target)

    def emb(r):
        return embed_subspace(range_space(p, r, rtol), list(r.members), target, p.d)

    g123 = range_space(p, total, rtol)
    a = emb(union(r1, r2))
    b = emb(union(r2, r3))
    c = emb(union(r1, r3))
    two = intersect(a, b, rtol)
    three = intersect(two, c, rtol)
    incl = max(a.residual(g123.basis), b.residual(g123.basis))
    return {
        "dim": g123.dim,
        "inclusion_residual": incl,
        "inclusion": incl <= tol,
        "two_way_dim": two.dim,
        "two_way_distance": projector_distance(g123, two),
        "three_way_dim": three.dim,
        "three_way_distance": projector_distance(g123, three),
    }


def nested_inclusion_residual(p: Peps, inner, outer, rtol: float = DEFAULT_RTOL) -> float:
    """Residual of ``G_outer`` against ``G_inner ⊗ H`` (zero when contained)."""
    inner, outer = as_region(p.graph, inner), as_region(p.graph, outer)
    if not set(inner.members) <= set(outer.members):
        raise ValueError("inner region must be contained in the outer one")
    target = list(outer.members)
    emb = embed_subspace(range_space(p, inner, rtol), list(inner.members), target, p.d)
    return emb.residual(range_space(p, outer, rtol).basis)


def ground_dimension_from_ranges(p: Peps, tiling, rtol: float = DEFAULT_RTOL) -> int:
    return intersection_identity_check(p, tiling, rtol)["lhs_dim"]


def perturbed_hamiltonian(h: AssembledHamiltonian, seed: int = 0) -> AssembledHamiltonian:
    """Replace each term ``t`` by ``t + t Q t`` with a random ``Q ≥ 0``."""
    rng = np.random.default_rng(seed)
    terms = []
    for t in h.terms:
        x = rng.standard_normal(t.operator.shape) + 1j * rng.standard_normal(t.operator.shape)
        q = x @ x.conj().T
        op = t.operator + t.operator @ q @ t.operator
        terms.append(LocalTerm(t.sites, (op + op.conj().T) / 2, t.kernel))
    return AssembledHamiltonian(h.n, h.d, terms, h.graph)


def super_edges_of(graph: LatticeGraph, regions) -> tuple:
    return super_lattice_edges(graph, [as_region(graph, r) for r in regions])
