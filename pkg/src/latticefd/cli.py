"""Command-line front end: `latticefd <subcommand> [flags]`.

Every subcommand writes its data as CSV (numeric tables) or JSON (reports) into
--out, with a `<name>.config.json` sidecar holding the resolved configuration.
Exit codes: 0 success, 1 usage error, 2 contract violation.
"""

from __future__ import annotations

import os

_threads = os.environ.get("LATTICEFD_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import LatticeFDError, SingularMode

EXIT_OK, EXIT_USAGE, EXIT_CONTRACT = 0, 1, 2
MAX_SITES = 2_000_000

KIND_ALIASES = {
    "naive": "NaiveSymmetric1D", "naive1d": "NaiveSymmetric1D",
    "qw1d": "DiracQW1D", "qw3d": "DiracQW3D",
    "fqw1d": "FlavoredQW1D", "fqw3d": "FlavoredQW3D",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return v


def _eps_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --eps-sweep {text!r}") from None
    if len(vals) < 2 or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("--eps-sweep needs at least two positive values")
    return sorted(vals, reverse=True)


def _common(p, scheme=True):
    if scheme:
        p.add_argument("--scheme", help="scheme JSON file or a kind name (qw1d, fqw3d, ...)")
        p.add_argument("--mass", type=_nonneg_float, help="override the mass")
        p.add_argument("--epsilon", type=_positive_float, help="override the lattice spacing")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="random seed (recorded in the sidecar)")
    p.add_argument("--samples", type=_positive_int, default=None)
    p.add_argument("--tol", type=_positive_float, default=None)


def build_parser():
    parser = _Parser(prog="latticefd", description="Doubling analysis of discrete Dirac schemes.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("bz", help="Brillouin zone from the Bragg planes of a lattice")
    _common(p, scheme=False)
    p.add_argument("--lattice", default="oblique4d",
                   choices=["square", "oblique", "bcc", "oblique4d", "degenerate4d", "degenerate-bcc"])
    p.add_argument("--epsilon", type=_positive_float, default=1.0)
    p.add_argument("--bound", type=_positive_int, default=2)

    p = sub.add_parser("dispersion", help="|det| on an (E, p) grid")
    _common(p)
    p.add_argument("--grid", type=_positive_int, default=64)

    p = sub.add_parser("doublers", help="half-period shift classes leaving |det| invariant")
    _common(p)

    p = sub.add_parser("green", help="Green's function table on a periodic lattice")
    _common(p)
    p.add_argument("--nt", type=_positive_int, default=16)
    p.add_argument("--nx", type=_positive_int, default=16)
    p.add_argument("--time-offset", type=float, default=0.0)
    p.add_argument("--space-offset", type=float, default=0.0)
    p.add_argument("--verify", action="store_true", help="print the defining-identity deviation")

    p = sub.add_parser("evolve", help="evolve a wave packet, optionally sweeping the spacing")
    _common(p)
    p.add_argument("--packet", help="packet JSON: center, width, momentum, box")
    p.add_argument("--steps", type=_positive_int, default=None)
    p.add_argument("--time", type=_positive_float, default=2.0, help="physical time for --eps-sweep")
    p.add_argument("--eps-sweep", type=_eps_list, default=None)

    p = sub.add_parser("chiral", help="commutators with the chiral projectors for every scheme")
    _common(p, scheme=False)
    p.add_argument("--mass", type=_nonneg_float, default=0.0)
    p.add_argument("--epsilon", type=_positive_float, default=0.1)

    p = sub.add_parser("neutrino", help="gauged massless flavored walk, sector leakage per step")
    _common(p, scheme=False)
    p.add_argument("--steps", type=_positive_int, default=100)
    p.add_argument("--sites", type=_positive_int, default=64)
    p.add_argument("--theta-seed", type=int, default=0)
    p.add_argument("--g-left", type=float, default=-1.0)
    p.add_argument("--epsilon", type=_positive_float, default=0.1)

    p = sub.add_parser("covering", help="fiber counts and sheet consistency of the covering maps")
    _common(p, scheme=False)
    p.add_argument("--mass", type=_nonneg_float, default=0.5)
    p.add_argument("--epsilon", type=_positive_float, default=0.1)

    p = sub.add_parser("verify-all", help="run the acceptance checks")
    p.add_argument("--out", default=".")
    p.add_argument("--quick", action="store_true")
    return parser


def _resolve_scheme(args, default="qw1d"):
    from .schemes import SchemeSpec
    src = args.scheme or default
    path = Path(src)
    if path.suffix == ".json" or path.exists():
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read scheme {src}: {exc}") from None
    else:
        kind = KIND_ALIASES.get(src.lower(), src)
        data = {"kind": kind, "mass": 0.5, "epsilon": 0.1}
    if args.mass is not None:
        data["mass"] = args.mass
    if args.epsilon is not None:
        data["epsilon"] = args.epsilon
    return SchemeSpec.from_dict(data)


def _seed(args, default):
    if args.seed is None:
        args.seed = default


def _fmt(x):
    return repr(float(x))


class Output:
    def __init__(self, args, name):
        self.dir = Path(args.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.name = name
        config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
        self.config = json.loads(json.dumps(config, default=str))

    def csv(self, header, rows, suffix=""):
        path = self.dir / f"{self.name}{suffix}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(x) if isinstance(x, (float, np.floating)) else x for x in r])
        return path

    def json(self, payload, suffix=""):
        path = self.dir / f"{self.name}{suffix}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
        return path

    def sidecar(self, extra=None):
        payload = {"config": self.config}
        if extra:
            payload.update(extra)
        return self.json(payload, ".config")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


# subcommands

def cmd_bz(args):
    from . import lattice
    out = Output(args, "bz")
    makers = {"square": lattice.square_2d, "oblique": lattice.oblique_2d,
              "bcc": lattice.body_centered_cubic, "oblique4d": lattice.oblique_4d}
    if args.lattice in makers:
        lat = makers[args.lattice](args.epsilon)
        rec = lattice.reciprocal_basis(lat)
        bz = lattice.bragg_bz(rec, args.bound)
        payload = {"lattice": lat.to_dict(), "bz": bz.to_dict(),
                   "reciprocal_pi_over_eps": [[str(x) for x in v] for v in rec.vectors],
                   "volume": bz.volume(), "vertex_count": len(bz.vertices())}
        out.csv(["vertex"] + [f"x{i}" for i in range(bz.dim)],
                [[i, *v] for i, v in enumerate(bz.vertices().tolist())], ".vertices")
    else:
        vecs = lattice.DEGENERATE_4D if args.lattice == "degenerate4d" else lattice.DEGENERATE_BCC
        cons = lattice.degenerate_bz_constraints(vecs, args.bound)
        payload = {"generators_pi_over_eps": [list(v) for v in vecs],
                   "constraints": [c.to_dict(args.epsilon) for c in cons]}
        bz = None
    out.json(payload)
    out.sidecar()
    n = len(bz.half_space_constraints) if bz else len(payload["constraints"])
    print(f"{args.lattice}: {n} half-space constraints")
    return EXIT_OK


def cmd_dispersion(args):
    from .fourier import closed_form_det
    spec = _resolve_scheme(args)
    out = Output(args, "dispersion")
    det = closed_form_det(spec)
    h = math.pi / spec.epsilon
    ticks = -h + 2 * h * np.arange(args.grid) / args.grid
    E, P = np.meshgrid(ticks, ticks, indexing="ij")
    p = np.zeros(E.shape + (spec.space_dim,))
    p[..., 0] = P
    vals = det(E, p)
    rows = ([e, q, z.real, z.imag, abs(z)] for e, q, z in zip(E.ravel(), P.ravel(), vals.ravel()))
    out.csv(["E", "px", "det_re", "det_im", "det_abs"], rows)
    out.sidecar({"scheme": spec.to_dict(), "slice": "py = pz = 0" if spec.space_dim == 3 else None})
    print(f"wrote {args.grid ** 2} rows")
    return EXIT_OK


def cmd_doublers(args):
    from .doublers import DEFAULT_SEED, classify, scan_doublers
    spec = _resolve_scheme(args)
    _seed(args, DEFAULT_SEED)
    out = Output(args, "doublers")
    rep = scan_doublers(spec, samples=args.samples or 200, tol=args.tol or 1e-9, seed=args.seed)
    invariant = {c.shift for c in rep.invariant_classes}
    print(f"{'shift':<14}{'class':<16}{'max deviation':>14}")
    for shift, dev in rep.deviations.items():
        mark = "*" if shift in invariant else " "
        print(f"{mark}{str(shift):<13}{classify(shift):<16}{dev:>14.3e}")
    print(f"{len(invariant)} invariant classes")
    out.json(rep.to_dict())
    out.sidecar()
    return EXIT_OK


def cmd_green(args):
    from . import greens
    spec = _resolve_scheme(args)
    out = Output(args, "green")
    table = greens.green_function(spec, args.nt, args.nx, args.time_offset, args.space_offset)
    header = ["dn"] + [f"dk{i}" for i in range(spec.space_dim)] + ["row", "col", "re", "im"]
    out.csv(header, table.rows())
    dev = greens.defining_identity_deviation(table)
    tol = args.tol or 1e-10
    out.sidecar({"scheme": spec.to_dict(), "defining_identity_deviation": dev, "tolerance": tol})
    if args.verify:
        print(f"defining identity deviation {dev:.3e}")
        if dev > tol:
            return EXIT_CONTRACT
    return EXIT_OK


def _load_packet(args, dim):
    from .evolve import Packet
    if not args.packet:
        return Packet(center=(0.0,) * dim, momentum=(1.0,) + (0.0,) * (dim - 1))
    try:
        data = json.loads(Path(args.packet).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read packet {args.packet}: {exc}") from None
    unknown = set(data) - {"center", "width", "momentum", "box"}
    if unknown:
        raise UsageError(f"unknown packet fields {sorted(unknown)}")
    vec = lambda v: tuple(np.atleast_1d(np.asarray(v, dtype=float)).tolist())
    return Packet(center=vec(data.get("center", 0.0)), width=float(data.get("width", 1.0)),
                  momentum=vec(data.get("momentum", 1.0)), box=data.get("box"))


def cmd_evolve(args):
    from .evolve import ContinuumOracle, StateVector, conforming_state, continuum_convergence, evolve
    spec = _resolve_scheme(args)
    if not spec.is_walk:
        raise UsageError("evolve runs the one-step walks; the naive scheme is not supported here")
    out = Output(args, "evolve")
    packet = _load_packet(args, spec.space_dim)
    if args.eps_sweep:
        res = continuum_convergence(spec, packet, args.time, args.eps_sweep)
        out.csv(["epsilon", "steps", "error"], zip(res.epsilons, res.steps, res.errors), ".convergence")
        out.json(res.to_dict(), ".convergence")
        out.sidecar({"scheme": spec.to_dict()})
        print(f"fitted order {res.order:.3f}")
        return EXIT_OK
    steps = args.steps or int(round(args.time / spec.epsilon))
    oracle = ContinuumOracle(spec.mass, spec.space_dim)
    box = packet.box_length(steps * spec.epsilon)
    n = int(round(box / spec.epsilon))
    sizes = (n,) * spec.space_dim
    if n ** spec.space_dim > MAX_SITES:
        raise UsageError(f"{n}^{spec.space_dim} sites is too large; set a smaller box in --packet")
    field0 = packet.sample(oracle, sizes, spec.epsilon, n * spec.epsilon)
    state = conforming_state(spec, field0) if spec.flavored else StateVector(field0, spec.internal_dim)
    norms = [(0, state.norm())]
    final = evolve(spec, state, steps, observer=lambda s: norms.append((s.time_index, s.norm())))
    out.csv(["step", "norm"], norms, ".norms")
    amp = final.amplitudes.reshape(-1, final.amplitudes.shape[-1])
    idx = np.indices(final.sizes).reshape(spec.space_dim, -1).T
    rows = ([*site, c, z.real, z.imag] for site, vec in zip(idx.tolist(), amp) for c, z in enumerate(vec))
    out.csv([f"k{i}" for i in range(spec.space_dim)] + ["component", "re", "im"], rows, ".final")
    out.sidecar({"scheme": spec.to_dict(), "steps": steps, "sizes": list(sizes)})
    print(f"{steps} steps, norm {norms[0][1]:.15g} -> {norms[-1][1]:.15g}")
    return EXIT_OK


def cmd_chiral(args):
    from .schemes import SchemeKind, SchemeSpec
    from .symmetry import chiral_commutator
    _seed(args, 1234)
    out = Output(args, "chiral")
    rows = []
    for kind in SchemeKind:
        spec = SchemeSpec(kind, args.mass, args.epsilon)
        val = chiral_commutator(spec, samples=args.samples or 200, seed=args.seed)
        rows.append((kind.value, args.mass, args.epsilon, val))
        print(f"{kind.value:<18} {val:.3e}")
    out.csv(["scheme", "mass", "epsilon", "commutator"], rows)
    out.sidecar()
    return EXIT_OK


def cmd_neutrino(args):
    from .schemes import SchemeKind, SchemeSpec
    from .symmetry import GaugePhaseField, left_red_state, neutrino_sector_run
    spec = SchemeSpec(SchemeKind.FQW1D, 0.0, args.epsilon)
    _seed(args, 0)
    rng = np.random.default_rng(args.seed)
    left = rng.normal(size=args.sites) + 1j * rng.normal(size=args.sites)
    init = left_red_state(spec, left / np.linalg.norm(left))
    res = neutrino_sector_run(GaugePhaseField(g_L=args.g_left, g_R=0.0, seed=args.theta_seed),
                              init, args.steps, spec)
    out = Output(args, "neutrino")
    rows = []
    for n, masses in enumerate(res.history):
        leak = sum(v for k, v in masses.items() if k not in res.populated)
        rows.append([n, leak] + [masses[k] for k in sorted(masses)])
    header = ["step", "leakage"] + [f"mass_{'RL'[c]}_{'rb'[f]}" for c, f in sorted(res.history[0])]
    out.csv(header, rows)
    out.sidecar({"max_leakage": res.leakage})
    for r in rows:
        print(f"{r[0]},{r[1]!r}")
    tol = args.tol or 1e-12
    return EXIT_OK if res.leakage <= tol else EXIT_CONTRACT


def cmd_covering(args):
    from . import covering
    _seed(args, 1234)
    out = Output(args, "covering")
    n = args.samples or 1000
    hist1 = covering.fiber_histogram(n, seed=args.seed)
    hist3 = covering.fiber_histogram(max(1, n // 5), seed=args.seed + 1, triple=True)
    phi2 = covering.phi2_well_defined(max(1, n // 5), seed=args.seed + 2)
    sheet = covering.det_sheet_consistency(args.mass, args.epsilon, samples=max(1, n // 2), seed=args.seed + 3)
    payload = {"phi_fiber_histogram": {str(k): v for k, v in sorted(hist1.items())},
               "phi3_fiber_histogram": {str(k): v for k, v in sorted(hist3.items())},
               "phi2_deviation": phi2, "sheet_consistency": sheet}
    print(json.dumps(payload, indent=2))
    out.json(payload)
    out.sidecar()
    ok = set(hist1) == {2} and set(hist3) == {8} and phi2 <= 1e-12 and sheet <= (args.tol or 1e-10)
    return EXIT_OK if ok else EXIT_CONTRACT


def cmd_verify_all(args):
    from .verify import run_all
    results = run_all(quick=args.quick, report=lambda r: print(r.line(), flush=True))
    out = Output(args, "verify")
    out.json({"quick": args.quick, "results": [r.to_dict() for r in results]})
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CONTRACT if failed else EXIT_OK


COMMANDS = {"bz": cmd_bz, "dispersion": cmd_dispersion, "doublers": cmd_doublers,
            "green": cmd_green, "evolve": cmd_evolve, "chiral": cmd_chiral,
            "neutrino": cmd_neutrino, "covering": cmd_covering, "verify-all": cmd_verify_all}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"latticefd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularMode as exc:
        print(f"latticefd: singular mode: {exc}; perturb the mass, sizes or offsets", file=sys.stderr)
        return EXIT_USAGE
    except LatticeFDError as exc:
        print(f"latticefd: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
