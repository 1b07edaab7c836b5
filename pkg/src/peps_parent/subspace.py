"""Subspaces of tensor-product spaces given by orthonormal bases."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .tensors import DEFAULT_RTOL, fix_phases


@dataclass(frozen=True)
class Subspace:
    """Column span of ``basis`` (orthonormal columns) in ``C^ambient``."""

    basis: np.ndarray
    tol: float = DEFAULT_RTOL

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual(self, vectors: np.ndarray) -> float:
        """Spectral norm of the part of ``vectors`` outside this subspace."""
        vectors = np.asarray(vectors)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        if vectors.shape[1] == 0:
            return 0.0
        q, vectors = _maybe_real(self.basis), _maybe_real(vectors)
        rest = vectors - q @ (q.conj().T @ vectors)
        return float(np.linalg.norm(rest, 2))

    def contains(self, other: "Subspace", tol: float = 1e-8) -> bool:
        return other.ambient == self.ambient and self.residual(other.basis) <= tol


def projector_distance(a: Subspace, b: Subspace) -> float:
    """``||P_a - P_b||_2``; equals 1 whenever the dimensions differ."""
    if a.ambient != b.ambient:
        raise ValueError("subspaces live in different spaces")
    if a.dim != b.dim:
        return 1.0
    if a.dim == 0:
        return 0.0
    return min(1.0, b.residual(a.basis))


def intersect(a: Subspace, b: Subspace, tol: float = DEFAULT_RTOL) -> Subspace:
    """Intersection, as the vectors of ``a`` whose distance to ``b`` is below ``tol``.

    The sines of the principal angles between ``a`` and ``b`` are the singular
    values of ``(1 - P_b) Q_a``.  They are first screened through the small
    Gram matrix ``Q_a^† (1 - P_b) Q_a`` and the surviving directions are
    re-measured by an SVD, so the final cut acts on sines, not their squares.
    """
    if a.ambient != b.ambient:
        raise ValueError("subspaces live in different spaces")
    if a.dim == 0 or b.dim == 0:
        return Subspace(np.zeros((a.ambient, 0), dtype=complex), tol)
    if a.dim > b.dim:
        a, b = b, a
    qa, qb = _maybe_real(a.basis), _maybe_real(b.basis)
    if np.isrealobj(qa) != np.isrealobj(qb):
        qa, qb = a.basis, b.basis
    overlap = qb.conj().T @ qa
    gram = np.eye(a.dim) - overlap.conj().T @ overlap
    cut = max(1e-6, 10 * tol)
    _, v = scipy.linalg.eigh((gram + gram.conj().T) / 2, subset_by_value=(-np.inf, cut), driver="evr")
    if v.shape[1] == 0:
        return Subspace(np.zeros((a.ambient, 0), dtype=complex), tol)
    c = qa @ v
    rest = c - qb @ (qb.conj().T @ c)
    _, s, vh = np.linalg.svd(rest, full_matrices=False)
    keep = vh[s <= tol].conj().T
    if keep.shape[1] == 0:
        return Subspace(np.zeros((a.ambient, 0), dtype=complex), tol)
    q, _ = np.linalg.qr(c @ keep)
    return Subspace(fix_phases(q.astype(complex)), tol)


def _maybe_real(m: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(m) and not np.any(m.imag):
        return np.ascontiguousarray(m.real)
    return m


def intersect_all(spaces: Sequence[Subspace], tol: float = DEFAULT_RTOL) -> Subspace:
    spaces = sorted(spaces, key=lambda s: s.dim)
    acc = spaces[0]
    for s in spaces[1:]:
        acc = intersect(acc, s, tol)
        if acc.dim == 0:
            break
    return acc


def site_permutation(sites: Sequence[int], target: Sequence[int]) -> list[int]:
    """Axis permutation taking tensor axes ordered as ``sites`` to ``target`` order."""
    pos = {s: k for k, s in enumerate(sites)}
    return [pos[s] for s in target]


def embed_subspace(sub: Subspace, sites: Sequence[int], target: Sequence[int], d: int) -> Subspace:
    """``sub ⊗ H_rest`` with the tensor factors reordered to ``target``.

    ``sub`` lives on ``sites`` (in that order); ``target`` is a site list
    containing them.
    """
    sites = list(sites)
    rest = [s for s in target if s not in sites]
    if len(rest) + len(sites) != len(target):
        raise ValueError("target must contain every site of the subspace")
    if not rest:
        basis = sub.basis
    else:
        basis = np.kron(sub.basis, np.eye(d ** len(rest)))
    n = len(target)
    order = sites + rest
    t = basis.reshape([d] * n + [basis.shape[1]])
    t = np.transpose(t, site_permutation(order, target) + [n])
    return Subspace(np.ascontiguousarray(t.reshape(d ** n, -1)), sub.tol)


def apply_on_sites(op: np.ndarray, vectors: np.ndarray, sites: Sequence[int],
                   target: Sequence[int], d: int) -> np.ndarray:
    """Apply ``op`` (acting on ``sites``) to columns of ``vectors`` over ``target``."""
    n = len(target)
    vecs = vectors.reshape([d] * n + [-1])
    axes = [list(target).index(s) for s in sites]
    k = len(sites)
    opt = op.reshape([d] * (2 * k))
    out = np.tensordot(opt, vecs, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the op's output legs first; move them back into place
    rest_axes = [a for a in range(n + 1) if a not in axes]
    current = axes + rest_axes
    out = np.transpose(out, np.argsort(current))
    return out.reshape(vectors.shape)
