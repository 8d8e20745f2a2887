"""Command-line front end: model generation, basis optimization, analysis.

Exit codes: 0 success, 2 usage or model-spec error, 3 input-validation
error, 4 solver non-convergence.  All file outputs are atomic and
deterministic for a fixed invocation and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

from . import fileio
from .bondgraph import (
    bond_table,
    build_correlation_graph,
    clusters,
    records_to_csv,
    to_dot,
)
from .entanglement import mutual_information, pure_bipartite_entanglement
from .errors import ScanPointError, SolverError, ValidationError
from .fockspace import WaveFunction, rotate_wavefunction
from .indices import (
    RingSpec,
    delocalization_index,
    effective_bond_order,
    flu,
    homa,
    i_ring,
    mci,
)
from .models import (
    LatticeSpec,
    build_hamiltonian,
    hubbard_dimer_spec,
    ionic_covalent_ensemble,
    lowest_eigenstates,
    scan,
    thermal_state,
)
from .optimize import OptimizerOptions, optimize_meao
from .rdm import TwoRDM, mean_field_2rdm, two_rdm_mixed

__all__ = ["main", "RunConfig"]

I_MAX = 2.0 * math.log(4.0)


class UsageError(ValueError):
    """Bad flag combination or invalid model spec (exit code 2)."""


@dataclass
class RunConfig:
    """Validated per-invocation configuration shared by the subcommands."""

    out_dir: str = "."
    seed: int = 0
    eta: float = 0.1
    beta: float | None = None
    input_paths: tuple[str, ...] = field(default=())

    def validate(self) -> "RunConfig":
        if not 0.0 < self.eta < 1.0:
            raise UsageError(f"--eta must be in (0,1), got {self.eta}")
        if self.beta is not None and self.beta <= 0.0:
            raise UsageError(f"--beta must be > 0, got {self.beta}")
        for path in self.input_paths:
            if not os.path.exists(path):
                raise ValidationError(f"input file not found: {path}")
        os.makedirs(self.out_dir, exist_ok=True)
        return self


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}: {exc}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}: {exc}") from exc


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.out_dir, name)


def cmd_model(args) -> int:
    cfg = RunConfig(out_dir=args.out_dir, seed=args.seed).validate()
    sites = args.sites
    n_up = args.nup if args.nup is not None else sites // 2
    n_dn = args.ndn if args.ndn is not None else sites // 2
    u = _floats(args.u) if "," in args.u else float(args.u)
    eps = _floats(args.eps) if "," in args.eps else float(args.eps)
    try:
        if args.topology == "chain":
            spec = LatticeSpec.chain(sites, t=args.t, u=u, eps=eps,
                                     n_up=n_up, n_dn=n_dn)
        elif args.topology == "ring":
            spec = LatticeSpec.ring(sites, t=args.t, u=u, eps=eps,
                                    n_up=n_up, n_dn=n_dn)
        elif args.topology == "dimerized-ring":
            spec = LatticeSpec.dimerized_ring(
                sites, t_strong=args.t, t_weak=args.t2, u=u, eps=eps,
                n_up=n_up, n_dn=n_dn,
            )
        else:
            raise UsageError(f"unknown topology {args.topology!r}")
    except ValidationError as exc:
        raise UsageError(f"invalid model spec: {exc}") from exc
    h = build_hamiltonian(spec)
    sol = lowest_eigenstates(h, k=args.nstates)
    prefix = args.prefix
    if args.nstates == 1:
        fileio.write_state(sol.states[0], _out(cfg, f"{prefix}state.json"))
    else:
        for m, st in enumerate(sol.states):
            fileio.write_state(st, _out(cfg, f"{prefix}state_{m:03d}.json"))
    fileio.write_energies_csv(sol.energies, _out(cfg, f"{prefix}energies.csv"))
    return 0


def _load_gamma(args, cfg: RunConfig) -> tuple[TwoRDM, WaveFunction | None]:
    if args.state:
        wf = fileio.read_state(args.state)
        return two_rdm_mixed(wf), wf
    if args.rdm2:
        rdm = fileio.read_rdm(args.rdm2)
        if not isinstance(rdm, TwoRDM):
            raise ValidationError(f"{args.rdm2}: expected an RDM2 file")
        return rdm, None
    rdm = fileio.read_rdm(args.rdm1)
    if isinstance(rdm, TwoRDM):
        raise ValidationError(f"{args.rdm1}: expected an RDM1 file")
    if not args.mean_field:
        raise UsageError("--rdm1 requires --mean-field (no correlated "
                         "reconstruction from a 1-RDM exists)")
    return mean_field_2rdm(rdm), None


def cmd_meao(args) -> int:
    inputs = [p for p in (args.state, args.rdm2, args.rdm1, args.partition) if p]
    cfg = RunConfig(out_dir=args.out_dir, seed=args.seed,
                    input_paths=tuple(inputs)).validate()
    gamma, wf = _load_gamma(args, cfg)
    partition = fileio.read_partition(args.partition)
    opts = OptimizerOptions(
        tolerance=args.tol,
        max_sweeps=args.max_sweeps,
        restarts=args.restarts,
        seed=args.seed,
        damping=args.damping,
        allow_interatom_rotations=args.allow_interatom,
    )
    result = optimize_meao(gamma, partition, opts)
    fileio.write_meao_result(result, _out(cfg, "meao_result.json"))
    if wf is not None:
        rotated = rotate_wavefunction(wf, result.schedule)
        fileio.write_state(rotated, _out(cfg, "rotated_state.json"))
    return 0


def _load_analysis_state(args, cfg: RunConfig):
    if args.states:
        if not args.energies or args.beta is None:
            raise UsageError("--states requires --energies and --beta")
        states = [fileio.read_state(p) for p in args.states]
        energies = fileio.read_energies_csv(args.energies)
        if len(energies) < len(states):
            raise ValidationError(
                f"{args.energies}: {len(energies)} energies for "
                f"{len(states)} states"
            )
        return thermal_state(energies[: len(states)], states, args.beta)
    return fileio.read_state(args.state)


def cmd_analyze(args) -> int:
    inputs = [args.partition] + (
        [args.state] if args.state else list(args.states) + [args.energies]
    )
    cfg = RunConfig(
        out_dir=args.out_dir,
        eta=args.eta,
        beta=args.beta,
        input_paths=tuple(p for p in inputs if p),
    ).validate()
    state = _load_analysis_state(args, cfg)
    partition = fileio.read_partition(args.partition)
    graph = build_correlation_graph(
        state, partition, eta=args.eta, include_intra=args.include_intra
    )
    records = bond_table(state, graph)
    comps = clusters(graph)
    doc = {
        "clusters": [list(c) for c in comps if len(c) > 1],
        "nonbonding": sorted(c[0] for c in comps if len(c) == 1),
    }
    fileio.write_text_atomic(_out(cfg, "graph.dot"), to_dot(graph))
    fileio.write_text_atomic(_out(cfg, "bonds.csv"), records_to_csv(records))
    fileio.write_text_atomic(
        _out(cfg, "clusters.json"), json.dumps(doc, indent=1) + "\n"
    )
    return 0


def _emit_index_csv(args, rows: list[tuple[str, float]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "value"])
    for name, value in rows:
        writer.writerow([name, f"{value:.6g}"])
    if args.out:
        fileio.write_text_atomic(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def cmd_indices(args) -> int:
    sub = args.index_cmd
    if sub == "homa":
        value = homa(_floats(args.lengths), args.ropt, args.alpha)
        _emit_index_csv(args, [("homa", value)])
    elif sub == "ebo":
        value = effective_bond_order(args.bonding, args.antibonding)
        _emit_index_csv(args, [("ebo", value)])
    elif sub == "flu":
        RunConfig(input_paths=(args.delta,)).validate()
        table = fileio.read_delta_csv(args.delta)
        ring = RingSpec(tuple(args.ring.split(",")))
        value = flu(table, ring, args.ref, squared=args.squared)
        _emit_index_csv(args, [("flu", value)])
    elif sub in ("iring", "mci"):
        RunConfig(input_paths=(args.overlaps,)).validate()
        overlaps = fileio.read_overlaps(args.overlaps)
        ring = RingSpec(tuple(args.ring.split(",")))
        fn = i_ring if sub == "iring" else mci
        _emit_index_csv(args, [(sub, fn(overlaps, ring))])
    elif sub == "deloc":
        RunConfig(input_paths=(args.state,)).validate()
        wf = fileio.read_state(args.state)
        value = delocalization_index(wf, _ints(args.group_a), _ints(args.group_b))
        _emit_index_csv(args, [("deloc", value)])
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown index {sub!r}")
    return 0


def cmd_scan(args) -> int:
    cfg = RunConfig(out_dir=args.out_dir).validate()
    values = _floats(args.values)
    if not values:
        raise UsageError("--values is empty")
    if args.scan_cmd == "dimer-u":
        def _solve(u):
            return lowest_eigenstates(
                build_hamiltonian(hubbard_dimer_spec(u, t=args.t)), 1
            )

        def _dimer_record(sol):
            ground = sol.states[0]
            return {
                "energy": float(sol.energies[0]),
                "pair_entanglement":
                    pure_bipartite_entanglement(ground, [0]).raw,
                "mutual_information": mutual_information(ground, 0, 1).raw,
                "delocalization": delocalization_index(ground, [0], [1]),
            }

        rows = scan(values, prepare=_solve, analyze=_dimer_record,
                    param_name="u_over_t")
        name = args.out or "scan_dimer_u.csv"
    else:
        def _ionic_record(state):
            value = mutual_information(state, 0, 1).raw
            return {"mutual_information": value, "i_norm": value / I_MAX}

        rows = scan(
            values,
            prepare=lambda t: ionic_covalent_ensemble(
                t, beta=args.beta, u=args.u, delta0=args.delta0, kappa=args.kappa
            ),
            analyze=_ionic_record,
            param_name="t",
        )
        name = args.out or "scan_ionic_t.csv"
    fileio.write_scan_csv(rows, _out(cfg, name))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meao",
        description="Entanglement-based bonding analysis of small fermionic "
        "systems: model states, orbital-basis optimization, correlation "
        "graphs, and bonding indices.",
    )
    parser.add_argument("--threads", type=int, default=None,
                        help="cap BLAS threads (needs threadpoolctl)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="solve a lattice model, write states")
    psub = p.add_subparsers(dest="model_cmd", required=True)
    ph = psub.add_parser("hubbard", help="Hubbard-type lattice")
    ph.add_argument("--sites", type=int, required=True)
    ph.add_argument("--topology", default="chain",
                    choices=["chain", "ring", "dimerized-ring"])
    ph.add_argument("--t", type=float, default=1.0)
    ph.add_argument("--t2", type=float, default=0.2,
                    help="weak hopping of a dimerized ring")
    ph.add_argument("--u", default="0.0", help="scalar or per-site list")
    ph.add_argument("--eps", default="0.0", help="scalar or per-site list")
    ph.add_argument("--nup", type=int, default=None)
    ph.add_argument("--ndn", type=int, default=None)
    ph.add_argument("--nstates", type=int, default=1)
    ph.add_argument("--prefix", default="")
    ph.add_argument("--out-dir", default=".")
    ph.add_argument("--seed", type=int, default=0)
    ph.set_defaults(func=cmd_model)

    p = sub.add_parser("meao", help="optimize the orbital basis")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state")
    src.add_argument("--rdm2")
    src.add_argument("--rdm1")
    p.add_argument("--mean-field", action="store_true",
                   help="factorize an RDM1 input into an uncorrelated RDM2")
    p.add_argument("--partition", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-sweeps", type=int, default=200)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--allow-interatom", action="store_true")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_meao)

    p = sub.add_parser("analyze", help="correlation graph and bond table")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state")
    src.add_argument("--states", nargs="+")
    p.add_argument("--energies")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--partition", required=True)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--include-intra", action="store_true")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("indices", help="bonding and aromaticity indices")
    isub = p.add_subparsers(dest="index_cmd", required=True)
    ph = isub.add_parser("homa")
    ph.add_argument("--lengths", required=True)
    ph.add_argument("--ropt", type=float, required=True)
    ph.add_argument("--alpha", type=float, required=True)
    ph.add_argument("--out")
    ph = isub.add_parser("ebo")
    ph.add_argument("--bonding", type=float, required=True)
    ph.add_argument("--antibonding", type=float, required=True)
    ph.add_argument("--out")
    ph = isub.add_parser("flu")
    ph.add_argument("--delta", required=True, help="delta table CSV")
    ph.add_argument("--ring", required=True, help="comma-separated labels")
    ph.add_argument("--ref", type=float, required=True)
    ph.add_argument("--squared", action="store_true")
    ph.add_argument("--out")
    for name in ("iring", "mci"):
        ph = isub.add_parser(name)
        ph.add_argument("--overlaps", required=True)
        ph.add_argument("--ring", required=True)
        ph.add_argument("--out")
    ph = isub.add_parser("deloc")
    ph.add_argument("--state", required=True)
    ph.add_argument("--group-a", required=True)
    ph.add_argument("--group-b", required=True)
    ph.add_argument("--out")
    p.set_defaults(func=cmd_indices)

    p = sub.add_parser("scan", help="parameter scans over model families")
    ssub = p.add_subparsers(dest="scan_cmd", required=True)
    ph = ssub.add_parser("dimer-u", help="Hubbard dimer interaction scan")
    ph.add_argument("--values", required=True)
    ph.add_argument("--t", type=float, default=1.0)
    ph.add_argument("--out")
    ph.add_argument("--out-dir", default=".")
    ph.set_defaults(func=cmd_scan)
    ph = ssub.add_parser("ionic-t", help="ionic-covalent thermal hopping scan")
    ph.add_argument("--values", required=True)
    ph.add_argument("--u", type=float, default=2.0)
    ph.add_argument("--delta0", type=float, default=0.5)
    ph.add_argument("--kappa", type=float, default=3.0)
    ph.add_argument("--beta", type=float, default=1e3)
    ph.add_argument("--out")
    ph.add_argument("--out-dir", default=".")
    ph.set_defaults(func=cmd_scan)
    return parser


def _run(args) -> int:
    if args.threads is not None:
        try:
            from threadpoolctl import threadpool_limits
        except ImportError:
            print("warning: --threads needs threadpoolctl; ignored",
                  file=sys.stderr)
            return args.func(args)
        with threadpool_limits(limits=args.threads):
            return args.func(args)
    return args.func(args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    except (SolverError, ScanPointError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
