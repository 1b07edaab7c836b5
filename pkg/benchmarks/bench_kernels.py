"""Compare the compiled and numpy kernels on representative workloads.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from peps_parent import kernels
from peps_parent.classical import build_classical_peps, cross_regions, ising_model
from peps_parent.hamiltonian import assemble_terms
from peps_parent.lattice import generate_lattice


def workloads():
    rng = np.random.default_rng(0)

    # one matvec of the 16-site Ising parent Hamiltonian (5-site cross projectors)
    n, d = 16, 2
    psi = rng.standard_normal(d ** n) + 1j * rng.standard_normal(d ** n)
    g = generate_lattice("square-torus", (4, 4))
    h = assemble_terms(build_classical_peps(ising_model(g, 0.3)), cross_regions(g))
    ops = [(t.operator, *idx) for t, idx in zip(h.terms, h._index)]

    def matvec(backend):
        out = np.zeros(d ** n, dtype=complex)
        for op, bases, offsets in ops:
            kernels.apply_local(psi, op, bases, offsets, out, backend=backend)
        return out

    # Metropolis rates on a 4x4 torus
    nbrs = [[] for _ in range(g.n)]
    for u, v, _ in g.edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    ptr = np.concatenate([[0], np.cumsum([len(x) for x in nbrs])])
    idx = np.array([w for x in nbrs for w in x])

    def rates(backend):
        return kernels.spin_flip_rates(g.n, ptr, idx, 0.3, backend=backend)

    # configuration energies of the same lattice
    m = ising_model(g, 0.3)

    def energies(backend):
        return m.energies(backend=backend)

    return {"hamiltonian matvec (2^16)": matvec, "metropolis rates (16 spins)": rates,
            "config energies (16 spins)": energies}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = ["python"] + (["cython"] if kernels.compiled_available() else [])
    print(f"{'workload':32s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for name, fn in workloads().items():
        times = []
        for b in backends:
            fn(b)
            times.append(min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)))
        ref = [fn(b) for b in backends]
        if len(ref) == 2:
            assert np.allclose(ref[0], ref[1], rtol=1e-12, atol=1e-12)
        speed = f"{times[0] / times[1]:10.2f}" if len(times) == 2 else f"{'n/a':>10s}"
        print(f"{name:32s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
