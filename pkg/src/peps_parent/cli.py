"""Command-line front end.

Every command writes a JSON report (sorted keys, no timestamps) into
``--out`` and prints a short summary.  Exit codes: 0 success, 1 bad input,
2 size cap exceeded, 3 invariant violation or failed numerical check.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .classical import (BETA_CRIT_HEX, RankDeficiencyWarning, build_classical_peps, cross_regions,
                        factorized_boundary_check, geometric_injectivity, ising_model, peps_correlations,
                        square_dimension_arguments, thermal_correlations)
from .errors import CapExceeded, ConvergenceError, InvariantViolation
from .gap import gap_threshold_scan, generator_properties, metropolis_generator, operator_ordering_check, scan_csv
from .hamiltonian import assemble, assemble_terms, ground_space, intersection_identity_check, verify_uniqueness
from .injectivity import check_injective, find_injective_tiling, tiling_from_regions, union_preserves_injectivity_test
from .lattice import LATTICE_KINDS, connected_regions, generate_lattice, hexagon_cell
from .peps import Peps, peps_from_dict, peps_to_dict, random_peps, site_independent_form, state_vector

COMMANDS = ("lattice", "ising-peps", "inject", "tile", "parent", "ed", "verify", "classical-checks",
            "gap-scan", "qmatrix", "ti-convert")


class BadInput(ValueError):
    pass


# -- argument parsing -------------------------------------------------------------


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(x) for x in text.lower().replace("x", ",").split(",") if x)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}") from exc
    if len(dims) != 2:
        raise argparse.ArgumentTypeError("dims must look like 3x4")
    return dims


def _vertex_list(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _region_list(text: str) -> list:
    return [_vertex_list(part) for part in text.split(";") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peps-parent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="JSON file with option values")
        p.add_argument("--out", type=Path, default=Path("."), help="report directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--rtol", type=float, default=1e-10)
        p.add_argument("--cap", type=int, default=2 ** 20, help="state-vector size cap")

    def source(p, beta_default=0.4):
        p.add_argument("--peps", type=Path, help="PEPS JSON file (overrides the generator options)")
        p.add_argument("--model", choices=("ising", "random"), default="ising")
        p.add_argument("--kind", choices=LATTICE_KINDS, default="square-torus")
        p.add_argument("--dims", type=_dims, default=(2, 2))
        p.add_argument("--beta", type=float, default=beta_default)
        p.add_argument("--d", type=int, default=4, help="physical dimension of random PEPS")
        p.add_argument("--D", type=int, default=2, help="bond dimension of random PEPS")

    p = sub.add_parser("lattice", help="generate a lattice graph")
    common(p)
    p.add_argument("--kind", choices=LATTICE_KINDS, default="square-torus")
    p.add_argument("--dims", type=_dims, default=(3, 3))
    p.add_argument("--D", type=int, default=2)
    p.add_argument("--defect-probability", type=float, default=0.0)

    p = sub.add_parser("ising-peps", help="PEPS of the classical Ising model")
    common(p)
    p.add_argument("--kind", choices=LATTICE_KINDS, default="square-torus")
    p.add_argument("--dims", type=_dims, default=(2, 2))
    p.add_argument("--beta", type=float, default=0.4)

    p = sub.add_parser("inject", help="injectivity of a region")
    common(p)
    source(p)
    p.add_argument("--region", type=_vertex_list, help="comma-separated vertex ids")
    p.add_argument("--hexagon", type=_vertex_list, help="top-left corner r,c of a hexagon cell")
    p.add_argument("--union-with", type=_vertex_list, help="second region for the union property")

    for name, helptext in (("tile", "greedy injective tiling"), ("parent", "assemble and export the parent Hamiltonian"),
                           ("ed", "lowest eigenvalues of the parent Hamiltonian"),
                           ("verify", "uniqueness and ground-space identity")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        source(p)
        p.add_argument("--max-size", type=int, default=4)
        p.add_argument("--regions", type=_region_list, help="explicit covering, e.g. '0,3;1,4;2,5'")
        p.add_argument("--terms", choices=("pairs", "crosses"), default="pairs",
                       help="pairs of adjacent regions, or one cross per vertex")
        p.add_argument("--k", type=int, default=4)

    p = sub.add_parser("classical-checks", help="classical-bridge checks")
    common(p)
    p.add_argument("--kind", choices=LATTICE_KINDS, default="square-torus")
    p.add_argument("--dims", type=_dims, default=(2, 3))
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--max-region", type=int, default=4)
    p.add_argument("--dimension-arguments", action="store_true")

    p = sub.add_parser("gap-scan", help="scan the gap certificate over beta")
    common(p)
    p.add_argument("--beta-min", type=float, default=0.1)
    p.add_argument("--beta-max", type=float, default=0.5)
    p.add_argument("--beta-step", type=float, default=0.02)
    p.add_argument("--mode", choices=("one-sided", "symmetric"), default="one-sided")
    p.add_argument("--alpha00", type=float, default=1.0)

    p = sub.add_parser("qmatrix", help="Metropolis generator and operator ordering")
    common(p)
    p.add_argument("--dims", type=_dims, default=(2, 2))
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--parent-beta", type=float, help="beta of the parent Hamiltonian (default: --beta)")

    p = sub.add_parser("ti-convert", help="site-independent form of a torus PEPS")
    common(p)
    source(p)
    p.add_argument("--no-check", action="store_true")
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise BadInput("config must be a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions} - {"help", "config"}
    unknown = sorted(k for k in (key.replace("-", "_") for key in cfg) if k not in known)
    if unknown:
        raise BadInput(f"unknown config keys: {unknown}")
    converters = {a.dest: a.type for a in sub._actions if a.type is not None}
    values = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        conv = converters.get(dest)
        if conv in (_dims, _vertex_list, _region_list) and not isinstance(val, str):
            val = tuple(val) if conv is _dims else val
        elif conv is not None and val is not None:
            val = conv(val)
        values[dest] = val
    sub.set_defaults(**values)
    return parser.parse_args(argv)


# -- helpers ---------------------------------------------------------------------------


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(f"{float(x):.15g}")
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Path):
        return str(x)
    return x


def _write(out: Path, name: str, payload: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n")
    return path


def _params(args) -> dict:
    skip = {"out", "config", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load_peps(args) -> Peps:
    if args.peps is not None:
        try:
            return peps_from_dict(json.loads(Path(args.peps).read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise BadInput(f"cannot read PEPS: {exc}") from exc
    if args.model == "ising":
        g = generate_lattice(args.kind, args.dims, D=2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankDeficiencyWarning)
            return build_classical_peps(ising_model(g, args.beta), args.rtol)
    g = generate_lattice(args.kind, args.dims, D=args.D)
    return random_peps(g, args.d, args.seed)


def _tiling(args, p):
    if args.regions:
        return tiling_from_regions(p, args.regions, args.rtol)
    return find_injective_tiling(p, args.max_size, args.rtol)


def _hamiltonian(args, p):
    if args.terms == "crosses":
        return assemble_terms(p, cross_regions(p.graph), args.rtol), None
    til = _tiling(args, p)
    if not til:
        raise InvariantViolation(f"no injective tiling: {til.to_dict()}")
    return assemble(p, til, args.rtol), til


# -- commands -------------------------------------------------------------------------


def cmd_lattice(args):
    g = generate_lattice(args.kind, args.dims, D=args.D, defect_probability=args.defect_probability, seed=args.seed)
    degrees = [g.degree(v) for v in g.vertices]
    rep = {"graph": g.to_dict(), "vertices": g.n, "edges": len(g.edges), "degrees": degrees}
    return rep, f"{args.kind} {args.dims}: {g.n} vertices, {len(g.edges)} edges"


def cmd_ising_peps(args):
    g = generate_lattice(args.kind, args.dims, D=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        p = build_classical_peps(ising_model(g, args.beta), args.rtol)
    _write(args.out, "peps.json", peps_to_dict(p))
    return {"vertices": g.n, "peps_file": "peps.json"}, f"Ising PEPS on {args.kind} {args.dims} at beta={args.beta}"


def cmd_inject(args):
    p = _load_peps(args)
    if args.hexagon:
        region = list(hexagon_cell(p.graph, *args.hexagon).members)
    elif args.region:
        region = args.region
    else:
        raise BadInput("give --region or --hexagon")
    rep = check_injective(p, region, args.rtol).to_dict()
    summary = f"region {region}: {'injective' if rep['injective'] else 'not injective'} (rank {rep['rank']})"
    if args.union_with:
        ok = union_preserves_injectivity_test(p, region, args.union_with, args.rtol)
        rep["union_injective"] = ok
        if not ok:
            raise InvariantViolation("union of disjoint injective regions is not injective")
        summary += "; union injective"
    return rep, summary


def cmd_tile(args):
    p = _load_peps(args)
    til = _tiling(args, p)
    rep = {"success": bool(til), **til.to_dict()}
    return rep, f"tiling {'found' if til else 'failed'}"


def cmd_parent(args):
    p = _load_peps(args)
    h, til = _hamiltonian(args, p)
    rep = {"terms": h.export(), "term_count": len(h.terms), "tiling": til.to_dict() if til else None}
    return rep, f"{len(h.terms)} terms"


def cmd_ed(args):
    p = _load_peps(args)
    h, _ = _hamiltonian(args, p)
    eig = ground_space(h, args.k, seed=args.seed)
    rep = {"eigenvalues": [float(f"{x:.15g}") for x in eig.values], "method": eig.method,
           "residual": eig.residual}
    return rep, "eigenvalues " + ", ".join(f"{x:.6g}" for x in eig.values)


def cmd_verify(args):
    p = _load_peps(args)
    if args.terms == "crosses":
        h = assemble_terms(p, cross_regions(p.graph), args.rtol)
        eig = ground_space(h, args.k, seed=args.seed)
        psi = state_vector(p, args.cap)
        psi = psi / np.linalg.norm(psi)
        deg = int(np.count_nonzero(eig.values < 1e-10))
        rep = {"eigenvalues": list(eig.values), "degeneracy": deg,
               "overlap": float(np.linalg.norm(eig.vectors[:, :max(deg, 1)].conj().T @ psi))}
    else:
        til = _tiling(args, p)
        if not til:
            raise InvariantViolation(f"no injective tiling: {til.to_dict()}")
        rep = verify_uniqueness(p, til, args.k, args.rtol, seed=args.seed)
        rep["identity"] = intersection_identity_check(p, til, args.rtol)
        rep["tiling"] = til.to_dict()
    return rep, f"degeneracy {rep['degeneracy']}, overlap {rep['overlap']:.12f}"


def cmd_classical_checks(args):
    g = generate_lattice(args.kind, args.dims, D=2)
    m = ising_model(g, args.beta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        p = build_classical_peps(m, args.rtol)
    rep = {}
    if not any(g.open_legs):
        corr = np.abs(peps_correlations(p, m.spins) - thermal_correlations(m)).max()
        rep["correlation_max_error"] = float(corr)
    mismatches = []
    regions = connected_regions(g, args.max_region)
    for r in regions:
        if check_injective(p, r, args.rtol).injective != geometric_injectivity(g, r):
            mismatches.append(list(r.members))
    rep["regions_checked"] = len(regions)
    rep["rule_mismatches"] = mismatches
    rep["factorization"] = factorized_boundary_check(m, regions[-1], args.rtol)
    rep["beta_crit_hex"] = BETA_CRIT_HEX
    if args.dimension_arguments:
        rep["dimension_arguments"] = square_dimension_arguments(args.beta, args.rtol)
    if mismatches:
        raise InvariantViolation(f"geometric rule disagrees on {mismatches}")
    return rep, f"{len(regions)} regions agree with the geometric rule"


def cmd_gap_scan(args):
    if args.beta_step <= 0 or args.beta_max < args.beta_min:
        raise BadInput("need beta-step > 0 and beta-max >= beta-min")
    count = int(round((args.beta_max - args.beta_min) / args.beta_step)) + 1
    grid = [round(args.beta_min + k * args.beta_step, 12) for k in range(count)]
    scan = gap_threshold_scan(grid, args.mode, args.alpha00)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "gap-scan.csv").write_text(scan_csv(scan))
    rep = {"crossings": scan["crossings"], "rows": [list(r) for r in scan["rows"]], "csv": "gap-scan.csv"}
    return rep, "sign changes near " + (", ".join(f"{c:.4f}" for c in scan["crossings"]) or "none")


def cmd_qmatrix(args):
    g = generate_lattice("square-torus", args.dims, D=2)
    gen = metropolis_generator(ising_model(g, args.beta))
    props = generator_properties(gen)
    pb = args.beta if args.parent_beta is None else args.parent_beta
    p = build_classical_peps(ising_model(g, pb), args.rtol)
    h = assemble_terms(p, cross_regions(g), args.rtol)
    order = operator_ordering_check(gen.H_Q(), h)
    props.pop("piece_spectra")
    return {"properties": props, "ordering": order}, f"ordered={order['ordered']} c_min={order['c_min']}"


def cmd_ti_convert(args):
    p = _load_peps(args)
    s = site_independent_form(p, check_ti=not args.no_check, cap=args.cap)
    a, b = state_vector(p, args.cap), state_vector(s, args.cap)
    diff = float(np.linalg.norm(a / np.linalg.norm(a) - b / np.linalg.norm(b)))
    _write(args.out, "ti-peps.json", peps_to_dict(s, shared=True))
    return {"bond_dimension": s.D, "state_difference": diff, "peps_file": "ti-peps.json"}, \
        f"shared tensor with bond dimension {s.D}, difference {diff:.2e}"


HANDLERS = {
    "lattice": cmd_lattice, "ising-peps": cmd_ising_peps, "inject": cmd_inject, "tile": cmd_tile,
    "parent": cmd_parent, "ed": cmd_ed, "verify": cmd_verify, "classical-checks": cmd_classical_checks,
    "gap-scan": cmd_gap_scan, "qmatrix": cmd_qmatrix, "ti-convert": cmd_ti_convert,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse usage errors
        return 0 if exc.code in (0, None) else 1
    report = {"command": args.command, "parameters": _params(args), "seed": args.seed}
    code = 0
    try:
        rep, summary = HANDLERS[args.command](args)
        report.update(status="ok", result=rep)
    except CapExceeded as exc:
        code, summary = 2, f"cap exceeded: {exc}"
        report.update(status="cap-exceeded", error=str(exc))
    except (InvariantViolation, ConvergenceError) as exc:
        code, summary = 3, f"invariant violation: {exc}"
        report.update(status="invariant-violation", error=str(exc))
    except (ValueError, KeyError, TypeError, OSError) as exc:
        code, summary = 1, f"bad input: {exc}"
        report.update(status="bad-input", error=str(exc))
    try:
        _write(args.out, f"{args.command}.json", report)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return code or 1
    print(summary, file=sys.stderr if code else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
