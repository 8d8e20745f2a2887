"""Classical bonding and aromaticity indices.

Populations here are orbital-subset particle numbers (the Hilbert-space
analog of real-space atomic regions).  The fluctuation index follows the
plain (unsquared) bracket; ``squared=True`` selects the squared variant
common elsewhere in the literature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .fockspace import MixedState, WaveFunction

__all__ = [
    "RingSpec",
    "AtomicOverlaps",
    "effective_bond_order",
    "delocalization_index",
    "flu",
    "i_ring",
    "mci",
    "homa",
]


@dataclass(frozen=True)
class RingSpec:
    """Ordered atom labels around a ring."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(labels) < 3:
            raise ValidationError("a ring needs at least 3 atoms")
        if len(set(labels)) != len(labels):
            raise ValidationError("ring labels must be distinct")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class AtomicOverlaps:
    """Per-atom overlap matrices over natural orbitals, with occupations.

    The atomic matrices should resolve the identity (sum over atoms = 1);
    that is validated by :meth:`resolution_defect` and the file reader, not
    at construction, so synthetic fixtures stay usable.
    """

    occupations: np.ndarray
    atoms: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        occ = np.asarray(self.occupations, dtype=float)
        if occ.ndim != 1 or occ.size == 0:
            raise ValidationError("occupations must be a nonempty vector")
        if occ.min() < -1e-12 or occ.max() > 2.0 + 1e-12:
            raise ValidationError("occupations must lie in [0, 2]")
        n = occ.size
        atoms = []
        labels = set()
        for label, s in self.atoms:
            label = str(label)
            if label in labels:
                raise ValidationError(f"duplicate atom label {label!r}")
            labels.add(label)
            s = np.asarray(s, dtype=float)
            if s.shape != (n, n):
                raise ValidationError(
                    f"overlap matrix of {label!r} must be {n}x{n}, got {s.shape}"
                )
            atoms.append((label, s))
        occ.setflags(write=False)
        for _, s in atoms:
            s.setflags(write=False)
        object.__setattr__(self, "occupations", occ)
        object.__setattr__(self, "atoms", tuple(atoms))

    def matrix(self, label: str) -> np.ndarray:
        for lab, s in self.atoms:
            if lab == label:
                return s
        raise ValidationError(f"no overlap matrix for atom {label!r}")

    def resolution_defect(self) -> float:
        """Max deviation of sum_A S(A) from the identity."""
        total = sum(s for _, s in self.atoms)
        return float(np.max(np.abs(total - np.eye(self.occupations.size))))


def effective_bond_order(n_bonding: float, n_antibonding: float) -> float:
    """(n_bonding - n_antibonding) / 2 for a bonding/antibonding orbital pair."""
    for name, v in (("bonding", n_bonding), ("antibonding", n_antibonding)):
        if not 0.0 <= v <= 2.0:
            raise ValueError(f"{name} occupation {v} outside [0, 2]")
    return (n_bonding - n_antibonding) / 2.0


def _population_moments(state, mask_a: int, mask_b: int) -> tuple[float, float, float]:
    components = (
        ((1.0, state),) if isinstance(state, WaveFunction) else state.components
    )
    ea = eb = eab = 0.0
    for w, wf in components:
        probs = np.abs(wf.amps) ** 2
        na = np.bitwise_count(wf.configs & np.uint64(mask_a)).astype(float)
        nb = np.bitwise_count(wf.configs & np.uint64(mask_b)).astype(float)
        ea += w * float(probs @ na)
        eb += w * float(probs @ nb)
        eab += w * float(probs @ (na * nb))
    return ea, eb, eab


def delocalization_index(
    state: WaveFunction | MixedState, set_a: Sequence[int], set_b: Sequence[int]
) -> float:
    """delta_AB = -2 Cov(N_A, N_B) between two disjoint orbital groups.

    For ensembles the covariance is taken over the ensemble expectation.
    """
    a = sorted(int(x) for x in set_a)
    b = sorted(int(x) for x in set_b)
    if not a or not b:
        raise ValidationError("orbital groups must be nonempty")
    if set(a) & set(b):
        raise ValueError(f"orbital groups overlap: {sorted(set(a) & set(b))}")
    n = state.n_orbitals
    if any(not 0 <= o < n for o in a + b):
        raise ValidationError("orbital group out of range")
    mask_a = sum(3 << (2 * o) for o in a)
    mask_b = sum(3 << (2 * o) for o in b)
    ea, eb, eab = _population_moments(state, mask_a, mask_b)
    return 2.0 * (ea * eb - eab)


def _delta_lookup(table: Mapping, a: str, b: str) -> float:
    for key in ((a, b), (b, a)):
        if key in table:
            return float(table[key])
    raise ValidationError(f"delocalization table is missing the pair ({a},{b})")


def _table_atoms(table: Mapping) -> list[str]:
    atoms: list[str] = []
    for x, y in table:
        for lab in (x, y):
            if lab not in atoms:
                atoms.append(lab)
    return atoms


def flu(
    delta: Mapping[tuple[str, str], float],
    ring: RingSpec,
    delta_ref: float | Mapping[tuple[str, str], float],
    squared: bool = False,
) -> float:
    """Aromatic fluctuation index over a ring.

    FLU = (1/N) sum_i (V_i/V_{i-1})^alpha * (delta(A_i, A_{i-1}) - ref)/ref
    with alpha = +1 when V_i > V_{i-1} and -1 otherwise, V_i the total
    delocalization of atom i against all other table atoms, indices cyclic.
    ``squared=True`` squares each summand (the common literature variant).
    """
    atoms = _table_atoms(delta)
    v: dict[str, float] = {}
    for lab in ring.labels:
        if lab not in atoms:
            raise ValidationError(f"ring atom {lab!r} absent from the table")
        v[lab] = sum(
            _delta_lookup(delta, lab, other) for other in atoms if other != lab
        )
        if v[lab] <= 0.0:
            raise ValueError(f"nonpositive total delocalization V({lab}) = {v[lab]}")
    total = 0.0
    n = ring.size
    for i in range(n):
        cur, prev = ring.labels[i], ring.labels[i - 1]
        d = _delta_lookup(delta, cur, prev)
        ref = (
            float(delta_ref)
            if np.isscalar(delta_ref)
            else _delta_lookup(delta_ref, cur, prev)
        )
        if ref <= 0.0:
            raise ValueError(f"nonpositive reference for ({prev},{cur})")
        alpha = 1.0 if v[cur] > v[prev] else -1.0
        term = (v[cur] / v[prev]) ** alpha * (d - ref) / ref
        total += term * term if squared else term
    return total / n


def i_ring(overlaps: AtomicOverlaps, ring: RingSpec) -> float:
    """Multicenter ring index as the trace of prod_m diag(n) S(A_m)."""
    n = np.diag(overlaps.occupations)
    prod = np.eye(overlaps.occupations.size)
    for label in ring.labels:
        prod = prod @ (n @ overlaps.matrix(label))
    return float(np.trace(prod))


MCI_MAX_RING = 8


def mci(overlaps: AtomicOverlaps, ring: RingSpec) -> float:
    """Multicenter index: (1/2N) sum of i_ring over all N! label orderings."""
    n = ring.size
    if n > MCI_MAX_RING:
        raise ValueError(f"mci supports rings of at most {MCI_MAX_RING} atoms")
    total = 0.0
    for perm in permutations(ring.labels):
        total += i_ring(overlaps, RingSpec(perm))
    return total / (2.0 * n)


def homa(bond_lengths: Sequence[float], r_opt: float, alpha: float) -> float:
    """Geometric aromaticity: 1 - (alpha/N) sum (R_opt - R_i)^2."""
    lengths = [float(x) for x in bond_lengths]
    if not lengths:
        raise ValueError("bond length list is empty")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    return 1.0 - (alpha / len(lengths)) * sum((r_opt - r) ** 2 for r in lengths)
