"""Dense tensor primitives: contraction, rank, orthonormal ranges, factorization.

Tensors are plain :class:`numpy.ndarray` objects.  A contraction network is a
list of arrays plus one label tuple per array; a label shared by two arrays
is summed over, every other label stays open.
"""

from __future__ import annotations

import warnings
from typing import Hashable, Sequence

import numpy as np

DEFAULT_RTOL = 1e-10


class LossyFactorizationWarning(UserWarning):
    """A factorization was truncated below the numerical rank."""


def contract_network(arrays: Sequence[np.ndarray], labels: Sequence[Sequence[Hashable]],
                     output: Sequence[Hashable] | None = None) -> np.ndarray:
    """Contract a labelled network pairwise, greedily by smallest intermediate.

    Each label may appear on at most two legs.  Labels appearing once are open
    and are returned in ``output`` order (default: first appearance order).
    """
    if len(arrays) != len(labels):
        raise ValueError("one label tuple per array is required")
    dims: dict = {}
    counts: dict = {}
    items = []
    for arr, labs in zip(arrays, labels):
        arr = np.asarray(arr)
        labs = tuple(labs)
        if arr.ndim != len(labs):
            raise ValueError(f"array of rank {arr.ndim} given {len(labs)} labels")
        if len(set(labs)) != len(labs):
            raise ValueError("a label is repeated within one tensor")
        for lab, n in zip(labs, arr.shape):
            if lab in dims and dims[lab] != n:
                raise ValueError(f"dimension mismatch on label {lab!r}: {dims[lab]} vs {n}")
            dims[lab] = n
            counts[lab] = counts.get(lab, 0) + 1
            if counts[lab] > 2:
                raise ValueError(f"label {lab!r} is paired more than once")
        items.append((arr, labs))
    open_labels = [lab for lab in dict.fromkeys(l for _, ls in items for l in ls) if counts[lab] == 1]
    if output is None:
        output = open_labels
    output = tuple(output)
    if sorted(map(repr, output)) != sorted(map(repr, open_labels)):
        raise ValueError("output labels must be exactly the open labels")
    if not items:
        return np.ones(())

    def size_of(labs):
        s = 1
        for lab in labs:
            s *= dims[lab]
        return s

    while len(items) > 1:
        best = None
        for i in range(len(items)):
            li = set(items[i][1])
            for j in range(i + 1, len(items)):
                shared = li.intersection(items[j][1])
                if not shared:
                    continue
                out = [l for l in items[i][1] if l not in shared] + [l for l in items[j][1] if l not in shared]
                cost = size_of(out)
                if best is None or cost < best[0]:
                    best = (cost, i, j)
        if best is None:
            # disconnected pieces: outer product of the two smallest
            order = sorted(range(len(items)), key=lambda k: (items[k][0].size, k))
            i, j = sorted(order[:2])
        else:
            _, i, j = best
        (a, la), (b, lb) = items[i], items[j]
        shared = [l for l in la if l in lb]
        ax_a = [la.index(l) for l in shared]
        ax_b = [lb.index(l) for l in shared]
        c = np.tensordot(a, b, axes=(ax_a, ax_b))
        lc = tuple(l for l in la if l not in shared) + tuple(l for l in lb if l not in shared)
        items = [it for k, it in enumerate(items) if k not in (i, j)] + [(c, lc)]
    result, labs = items[0]
    if labs != output:
        result = np.transpose(result, [labs.index(l) for l in output])
    return result


def contract(tensors: Sequence[np.ndarray], pairings) -> np.ndarray:
    """Contract ``tensors`` along ``pairings`` of ``((t1, leg1), (t2, leg2))``.

    Unpaired legs are returned ordered by (tensor index, leg index).
    """
    labels = [[(t, k) for k in range(np.ndim(arr))] for t, arr in enumerate(tensors)]
    used = set()
    for (t1, k1), (t2, k2) in pairings:
        for tk in ((t1, k1), (t2, k2)):
            if tk in used:
                raise ValueError(f"leg {tk} is paired more than once")
            used.add(tk)
        if np.shape(tensors[t1])[k1] != np.shape(tensors[t2])[k2]:
            raise ValueError(f"dimension mismatch between legs {(t1, k1)} and {(t2, k2)}")
        if t1 == t2:
            raise ValueError("pairing two legs of the same tensor is not supported")
        labels[t2][k2] = ("pair", t1, k1)
        labels[t1][k1] = ("pair", t1, k1)
    output = [(t, k) for t, arr in enumerate(tensors) for k in range(np.ndim(arr)) if (t, k) not in used]
    return contract_network(tensors, labels, output)


def matricize(t: np.ndarray, row_legs: Sequence[int], col_legs: Sequence[int]) -> np.ndarray:
    """Matrix view with the given bipartition of legs (row-major flattening)."""
    row_legs, col_legs = list(row_legs), list(col_legs)
    if sorted(row_legs + col_legs) != list(range(t.ndim)):
        raise ValueError("bipartition must cover every leg exactly once")
    rows = int(np.prod([t.shape[k] for k in row_legs], dtype=np.int64))
    return np.transpose(t, row_legs + col_legs).reshape(rows, -1)


def singular_values(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def rank(m: np.ndarray, rtol: float = DEFAULT_RTOL) -> int:
    """Number of singular values above ``rtol`` times the largest one."""
    if not 0 < rtol < 1:
        raise ValueError("rtol must lie in (0, 1)")
    s = singular_values(m)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    v = np.array(vectors, dtype=complex, copy=True)
    if v.size == 0:
        return v
    idx = np.argmax(np.abs(v) - 1e-12 * np.arange(v.shape[0])[:, None], axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(pivots) / pivots)[None, :]


def orthonormal_range(m: np.ndarray, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column space of ``m``."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("orthonormal_range expects a matrix")
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    if not np.any(m.imag):
        m = m.real
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    k = int(np.count_nonzero(s > rtol * s[0]))
    return fix_phases(u[:, :k].astype(complex))


def factor_symmetric(m: np.ndarray, target_rank: int | None = None, rtol: float = DEFAULT_RTOL,
                     allow_lossy: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Split ``m`` into ``left @ right`` with inner dimension ``target_rank``.

    Symmetric input uses the eigendecomposition ``m = U diag(w) U^T`` and
    returns ``left = U diag(sqrt(w))``, ``right = left.T``; a negative
    eigenvalue contributes a factor ``i`` on both sides.  Other input falls
    back to the SVD.  Rows of ``left`` are the per-state vectors on one edge
    end, columns of ``right`` those on the other end.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("factor_symmetric expects a square matrix")
    d = m.shape[0]
    if target_rank is None:
        target_rank = d
    if not 1 <= target_rank <= d:
        raise ValueError("target_rank must lie in [1, d]")
    numerical_rank = rank(m, rtol) if np.any(m) else 0
    if target_rank < numerical_rank:
        msg = f"target rank {target_rank} below numerical rank {numerical_rank}"
        if not allow_lossy:
            raise ValueError(msg)
        warnings.warn(msg, LossyFactorizationWarning, stacklevel=2)

    if np.allclose(m, m.T, rtol=0, atol=1e-14 * max(1.0, np.abs(m).max())):
        if np.iscomplexobj(m):
            # complex symmetric: Takagi-free route through the SVD
            u, s, vh = np.linalg.svd(m)
            root = np.sqrt(s[:target_rank])
            return u[:, :target_rank] * root, root[:, None] * vh[:target_rank]
        w, u = np.linalg.eigh(m)
        order = np.argsort(-np.abs(w), kind="stable")[:target_rank]
        w, u = w[order], u[:, order]
        root = np.sqrt(w.astype(complex))
        left = u * root
        if np.all(w >= 0):
            left = left.real
        return left, left.T.copy()
    u, s, vh = np.linalg.svd(m)
    root = np.sqrt(s[:target_rank])
    return u[:, :target_rank] * root, root[:, None] * vh[:target_rank]


# -- serialization ----------------------------------------------------------


def tensor_to_dict(t: np.ndarray) -> dict:
    """Shape plus row-major ``[re, im]`` entries as exact hex floats."""
    t = np.asarray(t, dtype=complex)
    return {
        "shape": list(t.shape),
        "entries": [[float(z.real).hex(), float(z.imag).hex()] for z in t.ravel()],
    }


def tensor_from_dict(d: dict) -> np.ndarray:
    shape = tuple(int(x) for x in d["shape"])
    vals = np.array([complex(float.fromhex(re), float.fromhex(im)) for re, im in d["entries"]],
                    dtype=complex)
    if vals.size != int(np.prod(shape, dtype=np.int64)):
        raise ValueError("entry count does not match shape")
    if not np.all(np.isfinite(vals)):
        raise ValueError("tensor entries must be finite")
    return vals.reshape(shape)
