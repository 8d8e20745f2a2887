import math

import numpy as np
import pytest

from meao.bondgraph import (
    E_MAX,
    I_MAX,
    BondRecord,
    bond_multiplicity,
    bond_table,
    build_correlation_graph,
    clusters,
    records_to_csv,
    to_dot,
)
from meao.errors import ValidationError
from meao.fockspace import WaveFunction, ideal_bond_state
from meao.optimize import AtomicPartition

PAIR = AtomicPartition(2, (("L", (0,)), ("R", (1,))))


def _four_orbital_two_bonds():
    """Two independent ideal bonds: orbitals (0,1) and (2,3)."""
    bond = ideal_bond_state()
    amps = {}
    for c1, a1 in bond.items():
        for c2, a2 in bond.items():
            amps[(int(c2) << 4) | int(c1)] = a1 * a2
    return WaveFunction(4, amps)


def test_single_bond_graph():
    graph = build_correlation_graph(ideal_bond_state(), PAIR, eta=0.1)
    assert len(graph.edges) == 1
    i, j, w = graph.edges[0]
    assert (i, j) == (0, 1)
    assert w == pytest.approx(I_MAX, abs=1e-10)


def test_eta_threshold_prunes_edges():
    wf = WaveFunction(2, {"1111": 1.0})  # product state, no correlation
    graph = build_correlation_graph(wf, PAIR, eta=0.1)
    assert graph.edges == ()
    assert clusters(graph) == [(0,), (1,)]


def test_eta_out_of_range_rejected():
    for eta in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValidationError):
            build_correlation_graph(ideal_bond_state(), PAIR, eta=eta)


def test_two_bond_state_clusters():
    wf = _four_orbital_two_bonds()
    part = AtomicPartition(
        4, (("A", (0,)), ("B", (1,)), ("C", (2,)), ("D", (3,)))
    )
    graph = build_correlation_graph(wf, part, eta=0.1)
    assert sorted((i, j) for i, j, _ in graph.edges) == [(0, 1), (2, 3)]
    assert clusters(graph) == [(0, 1), (2, 3)]


def test_clusters_sorted_by_size_then_lexicographic():
    wf = _four_orbital_two_bonds()
    part = AtomicPartition(
        4, (("A", (0,)), ("B", (1,)), ("C", (2,)), ("D", (3,)))
    )
    graph = build_correlation_graph(wf, part, eta=0.1)
    # singleton clusters sort after bonded pairs
    got = clusters(graph)
    assert all(len(got[k]) >= len(got[k + 1]) for k in range(len(got) - 1))


def test_bond_table_two_center():
    wf = _four_orbital_two_bonds()
    part = AtomicPartition(
        4, (("A", (0,)), ("B", (1,)), ("C", (2,)), ("D", (3,)))
    )
    graph = build_correlation_graph(wf, part, eta=0.1)
    records = bond_table(wf, graph)
    assert len(records) == 2
    for rec in records:
        assert rec.kind == "two-center"
        assert rec.i_norm == pytest.approx(1.0, abs=1e-10)
        assert rec.e_norm == pytest.approx(1.0, abs=1e-10)
        assert rec.gme_norm is None
    assert records[0].atoms == ("A", "B")
    assert records[1].atoms == ("C", "D")


def test_bond_multiplicity_counts_pairs():
    records = [
        BondRecord("two-center", ("A", "B"), (0, 1), 1.0, 1.0, None),
        BondRecord("two-center", ("A", "B"), (2, 3), 0.9, 0.8, None),
        BondRecord("two-center", ("A", "C"), (4, 5), 0.7, 0.6, None),
    ]
    counts = bond_multiplicity(records)
    assert counts[("A", "B")] == 2
    assert counts[("A", "C")] == 1


def test_dot_output_golden():
    graph = build_correlation_graph(ideal_bond_state(), PAIR, eta=0.1)
    expected = (
        "graph correlation {\n"
        '  "L:0";\n'
        '  "R:1";\n'
        '  "L:0" -- "R:1" [weight=1.0000];\n'
        "}\n"
    )
    assert to_dot(graph) == expected


def test_csv_output_golden():
    wf = _four_orbital_two_bonds()
    part = AtomicPartition(
        4, (("A", (0,)), ("B", (1,)), ("C", (2,)), ("D", (3,)))
    )
    graph = build_correlation_graph(wf, part, eta=0.1)
    text = records_to_csv(bond_table(wf, graph))
    lines = text.strip().split("\n")
    assert lines[0] == "kind,atoms,orbitals,I_norm,E_norm,GME_norm"
    assert lines[1] == "two-center,A+B,0+1,1,1,"
    assert lines[2] == "two-center,C+D,2+3,1,1,"


def test_include_intra_adds_diagnostic_edges():
    wf = _four_orbital_two_bonds()
    part = AtomicPartition(4, (("A", (0, 1)), ("B", (2, 3))))
    graph = build_correlation_graph(wf, part, eta=0.1)
    assert graph.edges == ()  # bonds are inside the atoms here
    graph = build_correlation_graph(wf, part, eta=0.1, include_intra=True)
    assert sorted((i, j) for i, j, _ in graph.edges) == [(0, 1), (2, 3)]


def test_multicenter_cluster_on_ghz_like_state():
    """Three orbitals pairwise correlated form one 3-orbital cluster."""
    # fermionic GHZ analog: all three orbitals empty or all doubly occupied
    wf = WaveFunction(
        3, {"000000": 1 / math.sqrt(2), "111111": 1 / math.sqrt(2)}
    )
    part = AtomicPartition(3, (("A", (0,)), ("B", (1,)), ("C", (2,))))
    graph = build_correlation_graph(wf, part, eta=0.1)
    assert clusters(graph)[0] == (0, 1, 2)
    records = bond_table(wf, graph)
    multi = [r for r in records if r.kind == "multicenter"]
    assert len(multi) == 1
    # GME of the doubly-occupied GHZ analog: log 2 over log 4
    assert multi[0].gme_norm == pytest.approx(0.5, abs=1e-10)
    assert multi[0].i_norm is None
    assert multi[0].e_norm is None
