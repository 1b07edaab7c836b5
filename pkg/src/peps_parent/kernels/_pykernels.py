"""Numpy versions of the compiled kernels, with identical signatures."""

from __future__ import annotations

import numpy as np


def apply_local(psi, op, bases, offsets, out):
    """``out[b + offsets[a]] += sum_c op[a, c] psi[b + offsets[c]]`` for every base ``b``."""
    idx = bases[:, None] + offsets[None, :]
    out[idx] += psi[idx] @ op.T


def spin_flip_rates(n, nbr_ptr, nbr_idx, beta):
    """Metropolis rates ``c[i, x] = min(1, exp(-2 beta x_i sum_j x_j))``.

    Site ``i`` is bit ``n - 1 - i`` of ``x``; bit 0 means spin +1.
    """
    x = np.arange(1 << n, dtype=np.int64)
    spins = 1 - 2 * ((x[None, :] >> (n - 1 - np.arange(n)[:, None])) & 1)
    rates = np.empty((n, x.size))
    for i in range(n):
        field = spins[nbr_idx[nbr_ptr[i]:nbr_ptr[i + 1]]].sum(axis=0)
        de = 2.0 * beta * spins[i] * field
        rates[i] = np.exp(-np.maximum(de, 0.0))
    return rates


def config_energies(n, d, eu, ev, tables):
    """``E[x] = sum_e tables[e, x_u, x_v]`` over all ``d^n`` configurations."""
    x = np.arange(d ** n, dtype=np.int64)
    strides = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    energies = np.zeros(x.size)
    for e in range(len(eu)):
        a = (x // strides[eu[e]]) % d
        b = (x // strides[ev[e]]) % d
        energies += tables[e][a, b]
    return energies
