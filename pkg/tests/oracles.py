"""Brute-force reference implementations, independent of the package code.

Every routine here works from explicit loops over indices or configurations,
so that agreement with the package is evidence rather than tautology.
"""

from __future__ import annotations

import itertools

import numpy as np


def nested_loop_contract(tensors, pairings):
    """Contract by summing over every joint assignment of all leg indices.

    Free legs come out ordered by (tensor index, leg index), the same
    convention as ``peps_parent.tensors.contract``.
    """
    paired = {}
    for a, b in pairings:
        paired[a] = b
        paired[b] = a
    legs = [(t, k) for t, arr in enumerate(tensors) for k in range(np.ndim(arr))]
    free = [tk for tk in legs if tk not in paired]
    bonds = sorted({tuple(sorted((a, b))) for a, b in paired.items()})
    dim = lambda tk: np.shape(tensors[tk[0]])[tk[1]]  # noqa: E731
    out = np.zeros([dim(tk) for tk in free], dtype=complex)
    for fidx in itertools.product(*[range(dim(tk)) for tk in free]):
        total = 0j
        for bidx in itertools.product(*[range(dim(b[0])) for b in bonds]):
            val = {}
            val.update(zip(free, fidx))
            for (a, b), i in zip(bonds, bidx):
                val[a] = i
                val[b] = i
            prod = 1 + 0j
            for t, arr in enumerate(tensors):
                prod *= arr[tuple(val[(t, k)] for k in range(np.ndim(arr)))]
            total += prod
        out[fidx] = total
    return out


def graph_amplitude(graph, tensors, config):
    """PEPS coefficient by summing over all assignments of every edge index."""
    edges = list(graph.edges)
    D = graph.D
    total = 0j
    for assign in itertools.product(range(D), repeat=len(edges)):
        val = dict(zip(edges, assign))
        prod = 1 + 0j
        for v, x in enumerate(config):
            idx = (x,) + tuple(val[leg] for leg in graph.legs(v))
            prod *= tensors[v][idx]
        total += prod
    return total


def graph_state(graph, tensors, d):
    n = graph.n
    return np.array([graph_amplitude(graph, tensors, c)
                     for c in itertools.product(range(d), repeat=n)])


def gram_schmidt(m, tol=1e-9):
    """Orthonormal basis of the column span by twice-iterated Gram-Schmidt."""
    m = np.asarray(m, dtype=complex)
    basis = []
    scale = max(np.abs(m).max(), 1e-300)
    for j in range(m.shape[1]):
        v = m[:, j].copy()
        for _ in range(2):
            for q in basis:
                v = v - q * np.vdot(q, v)
        nv = np.linalg.norm(v)
        if nv > tol * scale:
            basis.append(v / nv)
    if not basis:
        return np.zeros((m.shape[0], 0), dtype=complex)
    return np.array(basis).T


def projector(basis):
    return basis @ basis.conj().T


def mps_state(mats):
    """``Σ_x tr(A_1[x_1] ... A_n[x_n]) |x>`` by an explicit transfer-matrix product."""
    d = mats[0].shape[0]
    n = len(mats)
    out = np.zeros(d ** n, dtype=complex)
    for k, x in enumerate(itertools.product(range(d), repeat=n)):
        prod = np.eye(mats[0].shape[1], dtype=complex)
        for a, xi in zip(mats, x):
            prod = prod @ a[xi]
        out[k] = np.trace(prod)
    return out


def mps_two_site_range(a, b):
    """Span of ``Σ (A[x] B[y])_{lr} |x y>`` over boundary indices ``l, r``."""
    d, D, _ = a.shape
    cols = []
    for l in range(D):
        for r in range(b.shape[2]):
            v = np.zeros(d * d, dtype=complex)
            for x in range(d):
                for y in range(d):
                    v[x * d + y] = (a[x] @ b[y])[l, r]
            cols.append(v)
    return gram_schmidt(np.array(cols).T)


def embed_two_site(op, i, j, n, d):
    """Dense ``op`` acting on sites ``i < j`` of an ``n``-site chain, by loops."""
    dim = d ** n
    out = np.zeros((dim, dim), dtype=complex)
    configs = list(itertools.product(range(d), repeat=n))
    index = {c: k for k, c in enumerate(configs)}
    for c in configs:
        for xi in range(d):
            for xj in range(d):
                amp = op[xi * d + xj, c[i] * d + c[j]]
                if amp == 0:
                    continue
                c2 = list(c)
                c2[i], c2[j] = xi, xj
                out[index[tuple(c2)], index[c]] += amp
    return out


def mps_parent_hamiltonian(mats):
    """Ring parent Hamiltonian from two-site range projectors, built by hand."""
    n = len(mats)
    d = mats[0].shape[0]
    h = np.zeros((d ** n, d ** n), dtype=complex)
    for i in range(n):
        j = (i + 1) % n
        g = mps_two_site_range(mats[i], mats[j])
        term = np.eye(d * d) - projector(g)
        if j < i:
            # swap the factor order so the operator acts on (j, i)
            t = term.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
            h += embed_two_site(t, j, i, n, d)
        else:
            h += embed_two_site(term, i, j, n, d)
    return h


def brute_gibbs(n, edges, beta, spins=(1.0, -1.0)):
    """Configurations, Boltzmann weights and ``<s_i s_j>`` for ``H = -Σ s_u s_v``."""
    configs = list(itertools.product(range(len(spins)), repeat=n))
    weights = []
    for c in configs:
        e = 0.0
        for u, v in edges:
            e -= spins[c[u]] * spins[c[v]]
        weights.append(np.exp(-beta * e))
    w = np.array(weights)
    z = w.sum()
    corr = np.zeros((n, n))
    for c, wc in zip(configs, w):
        s = np.array([spins[x] for x in c])
        corr += wc * np.outer(s, s)
    return configs, w / z, corr / z


def metropolis_matrix(n, edges, beta):
    """Metropolis single-flip generator ``Q[y, x]`` (columns are sources), by loops."""
    dim = 2 ** n
    q = np.zeros((dim, dim))
    configs = list(itertools.product((1, -1), repeat=n))
    for k, s in enumerate(configs):
        for i in range(n):
            field = sum(s[v] for u, v in edges if u == i) + sum(s[u] for u, v in edges if v == i)
            delta = 2.0 * s[i] * field
            rate = min(1.0, np.exp(-beta * delta))
            t = list(s)
            t[i] = -t[i]
            j = configs.index(tuple(t))
            q[j, k] += rate
            q[k, k] -= rate
    return q


def dense_kron_term(op, sites, n, d):
    """``op`` on ``sites`` (in order) tensored with identities, via permutation of a Kronecker product."""
    rest = [s for s in range(n) if s not in sites]
    full = np.kron(op, np.eye(d ** len(rest)))
    order = list(sites) + rest
    t = full.reshape([d] * (2 * n))
    inv = [order.index(s) for s in range(n)]
    t = t.transpose(inv + [n + k for k in inv])
    return t.reshape(d ** n, d ** n)
