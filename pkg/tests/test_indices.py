import math
from itertools import permutations

import numpy as np
import pytest

from meao.errors import ValidationError
from meao.fockspace import MixedState, WaveFunction, ideal_bond_state, ionic_state
from meao.indices import (
    AtomicOverlaps,
    RingSpec,
    delocalization_index,
    effective_bond_order,
    flu,
    homa,
    i_ring,
    mci,
)


def test_effective_bond_order_goldens():
    assert effective_bond_order(2.0, 0.0) == 1.0
    assert effective_bond_order(2.0, 2.0) == 0.0
    assert effective_bond_order(1.5, 0.5) == 0.5
    with pytest.raises(ValueError):
        effective_bond_order(2.5, 0.0)
    with pytest.raises(ValueError):
        effective_bond_order(1.0, -0.1)


def test_delocalization_of_ideal_bond_is_one():
    assert delocalization_index(ideal_bond_state(), [0], [1]) == pytest.approx(
        1.0, abs=1e-12
    )


def test_delocalization_of_pure_ionic_is_zero():
    assert delocalization_index(ionic_state(1.0), [0], [1]) == pytest.approx(
        0.0, abs=1e-12
    )


def test_delocalization_of_product_state_is_zero():
    wf = WaveFunction(2, {"1101": 1.0})
    assert delocalization_index(wf, [0], [1]) == pytest.approx(0.0, abs=1e-12)


def test_delocalization_group_arguments():
    wf = ideal_bond_state()
    with pytest.raises(ValueError):
        delocalization_index(wf, [0], [0])  # overlapping groups
    with pytest.raises(ValidationError):
        delocalization_index(wf, [], [1])
    with pytest.raises(ValidationError):
        delocalization_index(wf, [0], [5])


def test_delocalization_of_ensemble_uses_ensemble_moments():
    cov = ideal_bond_state()
    ion = ionic_state(1.0)
    mixed = MixedState([(0.5, cov), (0.5, ion)])
    # ensemble covariance differs from the average of the two pure values
    d = delocalization_index(mixed, [0], [1])
    avg = 0.5 * 1.0 + 0.5 * 0.0
    assert d != pytest.approx(avg, abs=1e-6)
    # exact value from the pooled first and second moments
    # <Na>=1, <Nb>=1 for covalent; <Na>=2,<Nb>=0 for ionic
    # mixture: <Na>=1.5 <Nb>=0.5 <NaNb>=0.5*<NaNb>_cov + 0 = 0.25
    expected = 2 * (1.5 * 0.5 - 0.25)
    assert d == pytest.approx(expected, abs=1e-12)


def test_flu_uniform_ring_is_zero():
    labels = ("A", "B", "C", "D", "E", "F")
    table = {}
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            table[(a, b)] = 1.4
    ring = RingSpec(labels)
    assert flu(table, ring, 1.4) == pytest.approx(0.0, abs=1e-14)
    assert flu(table, ring, 1.4, squared=True) == pytest.approx(0.0, abs=1e-14)


def test_flu_alternating_ring():
    """Hand-computed alternation: deltas 1.6/1.2 around a six-ring."""
    labels = ("A", "B", "C", "D", "E", "F")
    ring = RingSpec(labels)
    table = {}
    for i in range(6):
        a, b = labels[i], labels[(i + 1) % 6]
        table[tuple(sorted((a, b)))] = 1.6 if i % 2 == 0 else 1.2
    # complete the table so every V_i is defined: distant pairs small
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            table.setdefault(tuple(sorted((a, b))), 0.05)
    ref = 1.4
    # every atom has the same V (one strong, one weak neighbor, three 0.05)
    # so the ratio factor is (V/V)^(-1) = 1 and terms alternate +-0.2/1.4
    expected = sum(
        ((1.6 if i % 2 == 0 else 1.2) - ref) / ref for i in range(6)
    ) / 6.0
    assert flu(table, ring, ref) == pytest.approx(expected, abs=1e-12)
    expected_sq = sum(
        (((1.6 if i % 2 == 0 else 1.2) - ref) / ref) ** 2 for i in range(6)
    ) / 6.0
    assert flu(table, ring, ref, squared=True) == pytest.approx(
        expected_sq, abs=1e-12
    )


def test_flu_missing_pair_rejected():
    ring = RingSpec(("A", "B", "C"))
    with pytest.raises(ValidationError):
        flu({("A", "B"): 1.0, ("B", "C"): 1.0}, ring, 1.0)


def test_ring_spec_validation():
    with pytest.raises(ValidationError):
        RingSpec(("A", "B"))  # too short
    with pytest.raises(ValidationError):
        RingSpec(("A", "B", "A"))  # repeated member


def test_i_ring_diagonal_fixture():
    """Diagonal overlaps make the ring trace a plain product of weights."""
    occ = np.array([2.0, 2.0])
    s = np.eye(2) / 3.0
    overlaps = AtomicOverlaps(occ, (("A", s), ("B", s), ("C", s)))
    ring = RingSpec(("A", "B", "C"))
    # each factor contributes diag(2)*I/3; trace of the 3-fold product
    expected = 2 * (2.0 / 3.0) ** 3
    assert i_ring(overlaps, ring) == pytest.approx(expected, abs=1e-14)


def test_mci_equals_iring_sum_over_permutations():
    rng = np.random.default_rng(3)
    occ = rng.uniform(0.0, 2.0, size=3)
    mats = []
    for label in "ABC":
        m = rng.normal(size=(3, 3))
        mats.append((label, 0.5 * (m + m.T)))
    overlaps = AtomicOverlaps(occ, tuple(mats))
    ring = RingSpec(("A", "B", "C"))
    total = sum(
        i_ring(overlaps, RingSpec(perm))
        for perm in permutations(("A", "B", "C"))
    )
    assert mci(overlaps, ring) == pytest.approx(total / 6.0, abs=1e-13)


def test_mci_invariant_under_ring_relabeling():
    rng = np.random.default_rng(5)
    occ = rng.uniform(0.0, 2.0, size=2)
    mats = tuple(
        (label, (lambda m: 0.5 * (m + m.T))(rng.normal(size=(2, 2))))
        for label in "ABCD"
    )
    overlaps = AtomicOverlaps(occ, mats)
    a = mci(overlaps, RingSpec(("A", "B", "C", "D")))
    b = mci(overlaps, RingSpec(("D", "B", "A", "C")))
    assert a == pytest.approx(b, abs=1e-13)


def test_mci_ring_size_cap():
    occ = np.array([1.0])
    mats = tuple((f"X{i}", np.eye(1)) for i in range(9))
    overlaps = AtomicOverlaps(occ, mats)
    with pytest.raises(ValueError):
        mci(overlaps, RingSpec(tuple(f"X{i}" for i in range(9))))


def test_overlaps_resolution_defect():
    occ = np.array([2.0, 0.0])
    half = np.eye(2) * 0.5
    overlaps = AtomicOverlaps(occ, (("A", half), ("B", half)))
    assert overlaps.resolution_defect() == pytest.approx(0.0, abs=1e-14)
    overlaps = AtomicOverlaps(occ, (("A", half), ("B", half * 0.5)))
    assert overlaps.resolution_defect() == pytest.approx(0.25, abs=1e-14)


def test_homa_goldens():
    assert homa([1.4] * 6, 1.4, 257.7) == pytest.approx(1.0, abs=1e-14)
    lengths = [1.35, 1.45] * 3
    expected = 1.0 - 257.7 / 6.0 * sum((1.4 - r) ** 2 for r in lengths)
    assert homa(lengths, 1.4, 257.7) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        homa([], 1.4, 257.7)
    with pytest.raises(ValueError):
        homa([1.4], 1.4, -1.0)
