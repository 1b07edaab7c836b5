# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled loops for local-operator application and classical tables."""

from libc.math cimport exp

import numpy as np


def apply_local(const double complex[::1] psi, const double complex[:, ::1] op,
                const long long[::1] bases, const long long[::1] offsets,
                double complex[::1] out):
    """``out[b + offsets[a]] += sum_c op[a, c] psi[b + offsets[c]]`` for every base ``b``.

    Entries of ``op`` below ``1e-14 * max|op|`` are skipped; parent-Hamiltonian
    terms are block sparse up to rounding noise of that size.
    """
    cdef Py_ssize_t k = offsets.shape[0], nb = bases.shape[0]
    mag = np.abs(np.asarray(op))
    rows_np, cols_np = np.nonzero(mag > 1e-14 * mag.max()) if mag.size else np.nonzero(mag)
    cdef long long[::1] rows = np.ascontiguousarray(rows_np, dtype=np.int64)
    cdef long long[::1] cols = np.ascontiguousarray(cols_np, dtype=np.int64)
    vals_np = np.asarray(op)[rows_np, cols_np]
    cdef double[::1] vre = np.ascontiguousarray(vals_np.real)
    cdef double[::1] vim = np.ascontiguousarray(vals_np.imag)
    cdef Py_ssize_t nnz = rows.shape[0]
    cdef double[::1] pre = np.empty(k)
    cdef double[::1] pim = np.empty(k)
    cdef double[::1] are = np.empty(k)
    cdef double[::1] aim = np.empty(k)
    cdef double* pin = <double*> &psi[0] if psi.shape[0] else NULL
    cdef double* pout = <double*> &out[0] if out.shape[0] else NULL
    cdef Py_ssize_t i, j, a, c
    cdef long long b, idx
    with nogil:
        for i in range(nb):
            b = bases[i]
            for c in range(k):
                idx = 2 * (b + offsets[c])
                pre[c] = pin[idx]
                pim[c] = pin[idx + 1]
                are[c] = 0.0
                aim[c] = 0.0
            for j in range(nnz):
                a = rows[j]
                c = cols[j]
                are[a] += vre[j] * pre[c] - vim[j] * pim[c]
                aim[a] += vre[j] * pim[c] + vim[j] * pre[c]
            for a in range(k):
                idx = 2 * (b + offsets[a])
                pout[idx] += are[a]
                pout[idx + 1] += aim[a]


def spin_flip_rates(int n, const long long[::1] nbr_ptr, const long long[::1] nbr_idx, double beta):
    """Metropolis rates ``c[i, x] = min(1, exp(-2 beta x_i sum_j x_j))``.

    Site ``i`` is bit ``n - 1 - i`` of ``x``; bit 0 means spin +1.
    """
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    rates_arr = np.empty((n, size), dtype=np.float64)
    cdef double[:, ::1] rates = rates_arr
    cdef Py_ssize_t maxdeg = 0, i, x, p
    for i in range(n):
        maxdeg = max(maxdeg, nbr_ptr[i + 1] - nbr_ptr[i])
    # exp(-2 beta m) for m = 0 .. maxdeg; the local energy change is 2 x_i * field
    cdef double[::1] table = np.exp(-2.0 * beta * np.arange(maxdeg + 1))
    cdef int[::1] spin = np.empty(n, dtype=np.intc)
    cdef int s, field
    with nogil:
        for x in range(size):
            for i in range(n):
                spin[i] = 1 - 2 * ((x >> (n - 1 - i)) & 1)
            for i in range(n):
                field = 0
                for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    field = field + spin[nbr_idx[p]]
                s = spin[i] * field
                rates[i, x] = 1.0 if s <= 0 else table[s]
    return rates_arr


def config_energies(int n, int d, const long long[::1] eu, const long long[::1] ev,
                    const double[:, :, ::1] tables):
    """``E[x] = sum_e tables[e, x_u, x_v]`` over all ``d^n`` configurations."""
    cdef Py_ssize_t size = 1
    cdef Py_ssize_t i
    for i in range(n):
        size *= d
    energies_arr = np.zeros(size, dtype=np.float64)
    cdef double[::1] energies = energies_arr
    cdef int[::1] digit = np.zeros(n, dtype=np.intc)
    cdef Py_ssize_t x, e, m = eu.shape[0]
    cdef double acc
    with nogil:
        for x in range(size):
            acc = 0.0
            for e in range(m):
                acc = acc + tables[e, digit[eu[e]], digit[ev[e]]]
            energies[x] = acc
            # advance the odometer, last site fastest
            i = n - 1
            while i >= 0:
                digit[i] += 1
                if digit[i] < d:
                    break
                digit[i] = 0
                i -= 1
    return energies_arr
