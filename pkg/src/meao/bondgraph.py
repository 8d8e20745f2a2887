"""Thresholded orbital-correlation graphs, clusters, and bond tables.

Orbitals are graph nodes; inter-atom pairs with mutual information at or
above eta * 2 log 4 are edges.  Connected components are bond clusters:
two-orbital clusters are two-center bonds (reported via I/I_max, plus
E/E_max when the pair reduction is pure), larger clusters are multicenter
bonds (reported via their GME over single-orbital parties), singletons are
non-bonding orbitals.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .entanglement import gme, mutual_information, von_neumann_entropy
from .errors import ValidationError
from .fockspace import MixedState, WaveFunction
from .optimize import AtomicPartition
from .rdm import reduced_density_operator

__all__ = [
    "CorrelationGraph",
    "BondRecord",
    "build_correlation_graph",
    "clusters",
    "bond_table",
    "bond_multiplicity",
    "to_dot",
    "records_to_csv",
]

I_MAX = 2.0 * math.log(4.0)
E_MAX = math.log(4.0)
PURITY_TOL = 1e-8


@dataclass(frozen=True)
class CorrelationGraph:
    """Thresholded mutual-information graph over orbitals."""

    n_orbitals: int
    atom_labels: tuple[str, ...]
    eta: float
    edges: tuple[tuple[int, int, float], ...]

    @property
    def i_max(self) -> float:
        return I_MAX


def build_correlation_graph(
    state: WaveFunction | MixedState,
    partition: AtomicPartition,
    eta: float = 0.1,
    include_intra: bool = False,
) -> CorrelationGraph:
    """Mutual-information graph keeping inter-atom edges with I >= eta * I_max.

    ``include_intra`` adds intra-atom pairs for diagnostics; bond analysis
    should leave it off (clusters represent inter-atom bonds).
    """
    if not 0.0 < eta < 1.0:
        raise ValidationError(f"eta must be in (0,1), got {eta}")
    if state.n_orbitals != partition.n_orbitals:
        raise ValidationError("state and partition disagree on orbital count")
    pairs = partition.inter_atom_pairs()
    if include_intra:
        pairs = sorted(pairs + partition.intra_atom_pairs())
    edges = []
    for i, j in pairs:
        value = mutual_information(state, i, j).raw
        if value >= eta * I_MAX:
            edges.append((i, j, float(value)))
    return CorrelationGraph(
        n_orbitals=partition.n_orbitals,
        atom_labels=tuple(partition.labels_by_orbital()),
        eta=float(eta),
        edges=tuple(edges),
    )


def clusters(graph: CorrelationGraph) -> list[tuple[int, ...]]:
    """Connected components over all orbitals, largest first, then lexicographic.

    Singleton components are the non-bonding orbitals.
    """
    adj: dict[int, set[int]] = {o: set() for o in range(graph.n_orbitals)}
    for i, j, _ in graph.edges:
        adj[i].add(j)
        adj[j].add(i)
    seen: set[int] = set()
    comps: list[tuple[int, ...]] = []
    for start in range(graph.n_orbitals):
        if start in seen:
            continue
        stack = [start]
        comp = []
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            comp.append(node)
            stack.extend(adj[node] - seen)
        comps.append(tuple(sorted(comp)))
    comps.sort(key=lambda c: (-len(c), c))
    return comps


@dataclass(frozen=True)
class BondRecord:
    """One bond cluster: two-center (I, optionally E) or multicenter (GME)."""

    kind: str
    atoms: tuple[str, ...]
    orbitals: tuple[int, ...]
    i_norm: float | None = None
    e_norm: float | None = None
    gme_norm: float | None = None


def _pair_entanglement_norm(state, i: int, j: int) -> float | None:
    """E/E_max of an orbital pair, defined only when its reduction is pure."""
    rho_ij = reduced_density_operator(state, [i, j])
    if not rho_ij.is_pure(PURITY_TOL):
        return None
    s_i = von_neumann_entropy(reduced_density_operator(state, [i]))
    return s_i / E_MAX


def _cluster_gme_norm(state, cluster: tuple[int, ...]) -> float | None:
    """Normalized GME of a cluster over single-orbital parties.

    For a proper subset of a pure state (or any mixed state) the cluster
    reduction must itself be pure within tolerance; otherwise the measure
    is undefined and None is returned.
    """
    n = state.n_orbitals
    if isinstance(state, WaveFunction) and len(cluster) == n:
        report = gme(state, [[o] for o in range(n)])
        return report.normalized
    rho = reduced_density_operator(state, sorted(cluster))
    if not rho.is_pure(PURITY_TOL):
        return None
    w, v = np.linalg.eigh(rho.matrix)
    local = WaveFunction(
        len(cluster),
        {int(c): complex(a) for c, a in enumerate(v[:, -1]) if abs(a) > 1e-13},
        normalize=True,
    )
    report = gme(local, [[a] for a in range(len(cluster))])
    return report.normalized


def bond_table(
    state: WaveFunction | MixedState, graph: CorrelationGraph
) -> list[BondRecord]:
    """Bond records for every non-singleton cluster of the graph."""
    if state.n_orbitals != graph.n_orbitals:
        raise ValidationError("state and graph disagree on orbital count")
    weight = {(i, j): w for i, j, w in graph.edges}
    records: list[BondRecord] = []
    for comp in clusters(graph):
        if len(comp) == 1:
            continue
        atoms = tuple(sorted({graph.atom_labels[o] for o in comp}))
        if len(comp) == 2:
            i, j = comp
            records.append(
                BondRecord(
                    kind="two-center",
                    atoms=atoms,
                    orbitals=comp,
                    i_norm=weight[(i, j)] / I_MAX,
                    e_norm=_pair_entanglement_norm(state, i, j),
                )
            )
        else:
            records.append(
                BondRecord(
                    kind="multicenter",
                    atoms=atoms,
                    orbitals=comp,
                    gme_norm=_cluster_gme_norm(state, comp),
                )
            )
    return records


def bond_multiplicity(records: list[BondRecord]) -> dict[tuple[str, str], int]:
    """Number of two-center bonds joining each atom pair (the bond order)."""
    out: dict[tuple[str, str], int] = {}
    for rec in records:
        if rec.kind == "two-center":
            key = (rec.atoms[0], rec.atoms[-1])
            out[key] = out.get(key, 0) + 1
    return out


def to_dot(graph: CorrelationGraph) -> str:
    """DOT export; nodes "atom:orbital", edge weight = I/I_max (4 decimals)."""
    lines = ["graph correlation {"]
    for o in range(graph.n_orbitals):
        lines.append(f'  "{graph.atom_labels[o]}:{o}";')
    for i, j, w in sorted(graph.edges):
        lines.append(
            f'  "{graph.atom_labels[i]}:{i}" -- "{graph.atom_labels[j]}:{j}" '
            f"[weight={w / I_MAX:.4f}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6g}"


def records_to_csv(records: list[BondRecord]) -> str:
    """CSV bond table: kind, atoms, orbitals, I_norm, E_norm, GME_norm."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "atoms", "orbitals", "I_norm", "E_norm", "GME_norm"])
    for rec in records:
        writer.writerow(
            [
                rec.kind,
                "+".join(rec.atoms),
                "+".join(str(o) for o in rec.orbitals),
                _fmt(rec.i_norm),
                _fmt(rec.e_norm),
                _fmt(rec.gme_norm),
            ]
        )
    return buf.getvalue()
