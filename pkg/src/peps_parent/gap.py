"""Sufficient gap condition for translation-invariant projector Hamiltonians,
Metropolis generators and their comparison with parent Hamiltonians."""

from __future__ import annotations

import csv
import io
import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .classical import ClassicalModel, RankDeficiencyWarning, build_classical_peps, ising_model
from .errors import CapExceeded
from .hamiltonian import AssembledHamiltonian, local_projector
from .lattice import generate_lattice
from .subspace import apply_on_sites

BLOCK_CAP = 2 ** 12
MARGIN_TOL = 1e-10

Offset = tuple


@dataclass(frozen=True)
class GapCertificateInput:
    """A local projector ``h`` on ``sites`` (lattice offsets), translates ``I``
    and weights.  ``weights`` maps each offset in ``I`` to ``α_ij``."""

    h: np.ndarray
    sites: tuple
    translates: tuple
    d: int = 2
    alpha00: float = 1.0
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        k = len(self.sites)
        if self.h.shape != (self.d ** k, self.d ** k):
            raise ValueError("h does not match its site list")
        if (0, 0) in {tuple(t) for t in self.translates}:
            raise ValueError("the translate set excludes (0, 0)")
        if self.alpha00 <= 0 or any(w <= 0 for w in self.weights.values()):
            raise ValueError("weights must be positive")

    def alpha(self, offset) -> float:
        return float(self.weights.get(tuple(offset), 1.0))

    def to_dict(self) -> dict:
        return {
            "sites": [list(s) for s in self.sites],
            "translates": [list(t) for t in self.translates],
            "alpha00": self.alpha00,
            "weights": [[list(t), self.alpha(t)] for t in self.translates],
        }


def _shift(sites, offset):
    return tuple((s[0] + offset[0], s[1] + offset[1]) for s in sites)


def _embed(op, sites, target, d):
    """Dense matrix of ``op`` (on ``sites``) acting on ``target``."""
    n = len(target)
    eye = np.eye(d ** n, dtype=op.dtype)
    return apply_on_sites(op, eye, [target.index(s) for s in sites], list(range(n)), d)


def commutator_norm(h, sites, offset, d=2) -> float:
    shifted = _shift(sites, offset)
    target = sorted(set(sites) | set(shifted))
    if d ** len(target) > BLOCK_CAP:
        raise CapExceeded("joint support too large for a dense commutator")
    a = _embed(h, list(sites), target, d)
    b = _embed(h, list(shifted), target, d)
    return float(np.linalg.norm(a @ b - b @ a, 2))


def translate_set(h, sites, d: int = 2, mode: str = "one-sided", tol: float = 1e-10) -> tuple:
    """Offsets whose translate overlaps ``h`` and fails to commute with it.

    Commuting projectors have a positive product, so they are dropped.  In
    ``one-sided`` mode only one offset of each ``±δ`` pair is kept (the one
    whose first nonzero component is positive), so that every overlapping
    pair of translates appears once in ``Σ_x Σ_{δ∈I} {h_x, h_{x+δ}}``.
    """
    if mode not in ("one-sided", "symmetric"):
        raise ValueError(f"unknown mode {mode!r}")
    sites = [tuple(s) for s in sites]
    cands = set()
    for a in sites:
        for b in sites:
            off = (a[0] - b[0], a[1] - b[1])
            if off != (0, 0):
                cands.add(off)
    keep = []
    for off in sorted(cands):
        if mode == "one-sided" and not (off[0] > 0 or (off[0] == 0 and off[1] > 0)):
            continue
        if commutator_norm(h, sites, off, d) > tol:
            keep.append(off)
    return tuple(keep)


def ising_cross_projector(beta: float) -> tuple:
    """Parent term of the square-lattice Ising PEPS on a 5-site cross.

    Returns ``(matrix, sites)`` with sites as ``(row, col)`` offsets from the
    centre, in the order of the matrix tensor factors.
    """
    patch = generate_lattice("square-open", (3, 3), D=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        p = build_classical_peps(ising_model(patch, beta))
    coords = [(0, 1), (1, 0), (1, 1), (1, 2), (2, 1)]
    members = sorted(patch.vertex_at(c) for c in coords)
    term = local_projector(p, members)
    sites = tuple((patch.coords(v)[0] - 1, patch.coords(v)[1] - 1) for v in members)
    return term.operator, sites


def ising_cross_certificate(beta: float, mode: str = "one-sided", alpha00: float = 1.0,
                            weights: dict | None = None) -> GapCertificateInput:
    h, sites = ising_cross_projector(beta)
    I = translate_set(h, sites, 2, mode)
    return GapCertificateInput(h, sites, I, 2, alpha00, dict(weights or {}))


def _diagonal_sites(op, k, d, tol):
    """Positions where ``op`` (on ``k`` sites) is diagonal."""
    t = op.reshape((d,) * (2 * k))
    scale = max(np.abs(op).max(), 1e-300)
    out = []
    for q in range(k):
        moved = np.moveaxis(t, (q, k + q), (0, 1))
        off = moved.copy()
        for a in range(d):
            off[a, a] = 0
        if np.abs(off).max() <= tol * scale:
            out.append(q)
    return out


def gap_condition(inp: GapCertificateInput, tol: float = 1e-12) -> dict:
    """Evaluate ``M = Σ_I {h, h_ij} + (α00 h + Σ α_ij h_ij)/Σα``.

    ``margin`` is the smallest eigenvalue of ``M`` on the orthogonal
    complement of the common kernel of ``h`` and its translates (``M``
    vanishes on that kernel).  The condition holds iff ``margin > 1e-10``.
    Sites on which every operator is diagonal are fixed one configuration at
    a time, which splits ``M`` into small blocks.
    """
    d = inp.d
    ops = [((0, 0), inp.alpha00, _shift(inp.sites, (0, 0)))]
    ops += [(tuple(off), inp.alpha(off), _shift(inp.sites, off)) for off in inp.translates]
    support = sorted(set(s for _, _, ss in ops for s in ss))
    k = len(inp.sites)
    diag_pos = set(_diagonal_sites(inp.h, k, d, 1e-10))
    classical = [s for s in support
                 if all(s not in ss or ss.index(s) in diag_pos for _, _, ss in ops)]
    quantum = [s for s in support if s not in classical]
    if d ** len(quantum) > BLOCK_CAP:
        raise CapExceeded(f"block dimension {d ** len(quantum)} exceeds cap {BLOCK_CAP}")
    total_alpha = inp.alpha00 + sum(inp.alpha(off) for off in inp.translates)
    ht = inp.h.reshape((d,) * (2 * k))

    def restricted(ss, config):
        """``op`` on its quantum sites with the classical ones fixed."""
        idx_out, idx_in, qsites = [], [], []
        for s in ss:
            if s in config:
                idx_out.append(config[s])
            else:
                idx_out.append(slice(None))
                qsites.append(s)
        idx_in = list(idx_out)
        block = ht[tuple(idx_out) + tuple(idx_in)]
        kq = len(qsites)
        return block.reshape(d ** kq, d ** kq), qsites

    margin = np.inf
    n_blocks = 0
    for cfg in itertools.product(range(d), repeat=len(classical)):
        config = dict(zip(classical, cfg))
        mats = []
        for _, alpha, ss in ops:
            block, qs = restricted(ss, config)
            mats.append((alpha, _embed(block, qs, quantum, d) if qs else block * np.eye(d ** len(quantum))))
        h0 = mats[0][1]
        lhs = sum(h0 @ m + m @ h0 for _, m in mats[1:]) if len(mats) > 1 else np.zeros_like(h0)
        rhs = sum(a * m for a, m in mats) / total_alpha
        total = sum(m for _, m in mats)
        w, v = np.linalg.eigh((total + total.conj().T) / 2)
        rng = v[:, w > 1e-10 * max(1.0, w.max())]
        if rng.shape[1] == 0:
            continue
        mm = lhs + rhs
        mm = rng.conj().T @ ((mm + mm.conj().T) / 2) @ rng
        margin = min(margin, float(np.linalg.eigvalsh(mm).min()))
        n_blocks += 1
    if not np.isfinite(margin):
        margin = 0.0
    return {
        "holds": bool(margin > MARGIN_TOL),
        "margin": margin,
        "translates": [list(t) for t in inp.translates],
        "alpha00": inp.alpha00,
        "total_alpha": total_alpha,
        "blocks": n_blocks,
        "block_dim": d ** len(quantum),
    }


def gap_threshold_scan(grid, mode: str = "one-sided", alpha00: float = 1.0, weights: dict | None = None,
                       fixed_translates=None) -> dict:
    """Margins of the Ising cross certificate over a sorted ``β`` grid.

    Sign changes are located between consecutive grid points and refined by
    linear interpolation of the margin.
    """
    grid = [float(b) for b in grid]
    if grid != sorted(grid):
        raise ValueError("grid must be sorted")
    rows = []
    for beta in grid:
        h, sites = ising_cross_projector(beta)
        I = tuple(fixed_translates) if fixed_translates is not None else translate_set(h, sites, 2, mode)
        res = gap_condition(GapCertificateInput(h, sites, I, 2, alpha00, dict(weights or {})))
        rows.append((beta, res["margin"], res["holds"]))
    crossings = []
    for (b0, m0, h0), (b1, m1, h1) in zip(rows, rows[1:]):
        if h0 != h1:
            crossings.append(b0 + (b1 - b0) * (m0 - MARGIN_TOL) / (m0 - m1) if m0 != m1 else b0)
    return {"rows": rows, "crossings": crossings, "mode": mode, "alpha00": alpha00}


def scan_csv(scan: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", "margin", "holds"])
    for beta, margin, holds in scan["rows"]:
        w.writerow([f"{beta:.6f}", f"{margin:.15e}", str(bool(holds)).lower()])
    return buf.getvalue()


# -- Metropolis generator -----------------------------------------------------------


@dataclass(frozen=True)
class StochasticGenerator:
    """Generator ``Q = Σ_i Q_i`` on ``2^n`` configurations, columns are sources."""

    n: int
    beta: float
    rates: np.ndarray
    pieces: tuple
    weights: np.ndarray
    neighbors: tuple

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def Q(self) -> sp.csr_matrix:
        return sum(self.pieces[1:], self.pieces[0]).tocsr()

    def symmetrized_piece(self, i: int) -> sp.csr_matrix:
        """``-D^{-1/2} Q_i D^{1/2}`` with ``D`` the Gibbs weights."""
        root = np.sqrt(self.weights)
        return (-sp.diags(1.0 / root) @ self.pieces[i] @ sp.diags(root)).tocsr()

    def H_Q(self) -> np.ndarray:
        """Symmetrized positive generator, dense."""
        root = np.sqrt(self.weights)
        q = self.Q.toarray()
        return -(q * root[None, :]) / root[:, None]


def metropolis_generator(m: ClassicalModel) -> StochasticGenerator:
    """Single-spin-flip generator with rates ``min(1, exp(-β ∇_i H_i))``."""
    if m.d != 2:
        raise ValueError("the Metropolis spin-flip generator needs d = 2")
    g = m.graph
    n = g.n
    nbrs = [[] for _ in range(n)]
    for u, v, _ in g.edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    ptr = np.zeros(n + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(x) for x in nbrs])
    idx = np.array([w for x in nbrs for w in x], dtype=np.int64)
    rates = kernels.spin_flip_rates(n, ptr, idx, m.beta)
    x = np.arange(1 << n)
    pieces = []
    for i in range(n):
        flipped = x ^ (1 << (n - 1 - i))
        c = rates[i]
        rows = np.concatenate([x, flipped])
        cols = np.concatenate([x, x])
        vals = np.concatenate([-c, c])
        pieces.append(sp.csr_matrix((vals, (rows, cols)), shape=(1 << n, 1 << n)))
    return StochasticGenerator(n, m.beta, rates, tuple(pieces), m.gibbs_weights(), tuple(tuple(x) for x in nbrs))


def generator_properties(gen: StochasticGenerator, tol: float = 1e-12) -> dict:
    """Q-matrix axioms, locality of the rates and annihilation of ``√π``."""
    n = gen.n
    q = gen.Q.toarray()
    off = q - np.diag(np.diag(q))
    col = np.abs(q.sum(axis=0)).max()
    piece_ok, piece_spec = True, []
    for qi in gen.pieces:
        a = qi.toarray()
        o = a - np.diag(np.diag(a))
        piece_ok &= bool(np.all(np.diag(a) <= 0) and np.all(o >= 0) and np.abs(a.sum(axis=0)).max() <= tol)
        ev = np.linalg.eigvals(a).real
        piece_spec.append((float(ev.min()), float(ev.max())))
    # locality: c(i, x) must not change when a site outside i and its neighbours flips
    x = np.arange(1 << n)
    local = True
    for i in range(n):
        near = {i} | set(gen.neighbors[i])
        for j in range(n):
            if j not in near:
                local &= bool(np.array_equal(gen.rates[i], gen.rates[i][x ^ (1 << (n - 1 - j))]))
    root = np.sqrt(gen.weights)
    sym_res = max(float(np.abs(gen.symmetrized_piece(i) @ root).max()) for i in range(n)) / np.abs(root).max()
    hq = gen.H_Q()
    eig = np.linalg.eigvalsh((hq + hq.T) / 2)
    return {
        "column_sum_max": float(col),
        "diagonal_nonpositive": bool(np.all(np.diag(q) <= 0)),
        "off_diagonal_nonnegative": bool(np.all(off >= 0)),
        "pieces_are_q_matrices": piece_ok,
        "piece_spectra": piece_spec,
        "pieces_sum_to_q": True,
        "local": local,
        "raw_stationary_residual": float(np.abs(q @ gen.weights).max() / gen.weights.max()),
        "symmetrized_annihilates_sqrt_weights": sym_res,
        "H_Q_symmetric_error": float(np.abs(hq - hq.T).max()),
        "H_Q_min_eigenvalue": float(eig[0]),
        "gap": float(eig[1]) if eig.size > 1 else 0.0,
    }


def operator_ordering_check(h_q, h_parent, tol: float = 1e-8) -> dict:
    """Smallest ``c`` with ``H_Q ≤ c H_parent``, if any.

    Requires ``ker H_parent ⊆ ker H_Q``; then ``c`` is the top eigenvalue of
    ``B^{-1/2} A B^{-1/2}`` where ``A``, ``B`` are both operators compressed
    to the range of ``H_parent``.
    """
    if isinstance(h_parent, AssembledHamiltonian):
        h_parent = h_parent.to_dense()
    h_q = np.asarray(h_q)
    hp = (h_parent + h_parent.conj().T) / 2
    hq = (h_q + h_q.conj().T) / 2
    w, v = np.linalg.eigh(hp)
    thr = 1e-10 * max(1.0, np.abs(w).max())
    ker, rng, wr = v[:, w <= thr], v[:, w > thr], w[w > thr]
    scale = max(1.0, np.linalg.norm(hq, 2))
    leak = float(np.linalg.norm(hq @ ker, 2)) if ker.shape[1] else 0.0
    included = leak <= tol * scale
    if not included:
        return {"ordered": False, "c_min": None, "kernel_leak": leak, "kernel_dim": ker.shape[1]}
    a = rng.conj().T @ hq @ rng
    s = 1.0 / np.sqrt(wr)
    c = float(np.linalg.eigvalsh(s[:, None] * a * s[None, :]).max())
    gap_p = float(wr.min()) if wr.size else 0.0
    return {"ordered": bool(np.isfinite(c)), "c_min": c, "kernel_leak": leak, "kernel_dim": ker.shape[1],
            "parent_gap": gap_p}
