"""Entropy, mutual information, and multipartite entanglement measures.

All entropies are von Neumann entropies in natural units (nats).
Normalizations follow the maximal values on the relevant local spaces:
log 4 per orbital side for bipartite measures (a spin-orbital pair has a
4-dimensional local Fock space), 2 log 4 for orbital-orbital mutual
information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .fockspace import MixedState, QuditState, WaveFunction
from .rdm import DensityOperator, reduced_density_operator

__all__ = [
    "EntanglementReport",
    "von_neumann_entropy",
    "mutual_information",
    "pure_bipartite_entanglement",
    "gme",
]

EIG_CLAMP = 1e-10
TRACE_TOL = 1e-8


@dataclass(frozen=True)
class EntanglementReport:
    """A measure value with its normalization.

    subsets: the orbital (or party) groups the measure refers to.
    raw: value in nats; normalized = raw / normalization.
    bipartition: for minimized measures, the minimizing side containing
    party 0 (party indices, lexicographically smallest among ties).
    """

    subsets: tuple[tuple[int, ...], ...]
    raw: float
    normalization: float
    bipartition: tuple[int, ...] | None = None

    @property
    def normalized(self) -> float:
        return self.raw / self.normalization


def von_neumann_entropy(rho: DensityOperator | np.ndarray) -> float:
    """-Tr rho ln rho, clamping eigenvalues in [-1e-10, 0) to zero."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"density-operator trace {tr} deviates from 1")
    w = np.linalg.eigvalsh(m)
    if w.min() < -EIG_CLAMP:
        raise ValidationError(
            f"density operator has negative eigenvalue {w.min():.3e}"
        )
    w = w[w > 0.0]
    return float(-np.sum(w * np.log(w)))


def mutual_information(
    state: WaveFunction | MixedState, i: int, j: int
) -> EntanglementReport:
    """Orbital-orbital mutual information I = S_i + S_j - S_ij.

    Normalized by its maximum 2 log 4 (two four-dimensional local spaces).
    """
    if i == j:
        raise ValidationError("mutual information needs two distinct orbitals")
    s_i = von_neumann_entropy(reduced_density_operator(state, [i]))
    s_j = von_neumann_entropy(reduced_density_operator(state, [j]))
    s_ij = von_neumann_entropy(reduced_density_operator(state, [i, j]))
    return EntanglementReport(
        subsets=((i,), (j,)),
        raw=s_i + s_j - s_ij,
        normalization=2.0 * math.log(4.0),
    )


def _qudit_reduced(state: QuditState, parties: Sequence[int]) -> np.ndarray:
    dims = state.local_dims
    keep = sorted(parties)
    psi = state.amplitudes.reshape(dims)
    perm = keep + [p for p in range(len(dims)) if p not in keep]
    psi = np.transpose(psi, perm)
    d_keep = math.prod(dims[p] for p in keep)
    m = psi.reshape(d_keep, -1)
    return m @ m.conj().T


def _entropy_of_subset(state, orbital_subset: Sequence[int], n_total: int) -> float:
    """Entropy of an orbital subset of a pure state, via the smaller side."""
    subset = sorted(orbital_subset)
    comp = [o for o in range(n_total) if o not in subset]
    side = subset if len(subset) <= len(comp) else comp
    return von_neumann_entropy(reduced_density_operator(state, side))


def pure_bipartite_entanglement(
    state: WaveFunction | QuditState, subset: Sequence[int]
) -> EntanglementReport:
    """Entanglement entropy of a subset against the rest of a pure state.

    Normalized by log(min of the two local dimensions).  For fermionic
    states the subset lists orbitals (local dimension 4 each); for qudit
    states it lists parties.
    """
    subset = sorted(int(x) for x in subset)
    if isinstance(state, WaveFunction):
        n = state.n_orbitals
        if not subset or len(subset) >= n or len(set(subset)) != len(subset):
            raise ValidationError("subset must be a proper nonempty orbital set")
        raw = _entropy_of_subset(state, subset, n)
        d_sub = 4 ** len(subset)
        d_comp = 4 ** (n - len(subset))
    elif isinstance(state, QuditState):
        n = state.n_parties
        if not subset or len(subset) >= n or len(set(subset)) != len(subset):
            raise ValidationError("subset must be a proper nonempty party set")
        raw = von_neumann_entropy(_qudit_reduced(state, subset))
        dims = state.local_dims
        d_sub = math.prod(dims[p] for p in subset)
        d_comp = math.prod(dims[p] for p in range(n) if p not in subset)
    else:
        raise ValidationError(f"unsupported state type {type(state).__name__}")
    comp = tuple(x for x in range(n) if x not in subset)
    return EntanglementReport(
        subsets=(tuple(subset), comp),
        raw=raw,
        normalization=math.log(min(d_sub, d_comp)),
    )


def gme(
    state: WaveFunction | QuditState, parties: Sequence[Sequence[int]]
) -> EntanglementReport:
    """Genuine multipartite entanglement of a pure state.

    Minimum over all bipartitions of the parties of the bipartite
    entanglement entropy, normalized by the log local dimension of the
    smallest party.  Zero iff the state is separable across some
    bipartition.
    """
    groups = [tuple(int(x) for x in g) for g in parties]
    if len(groups) < 2:
        raise ValidationError("GME needs at least 2 parties")
    flat = [x for g in groups for x in g]
    if len(set(flat)) != len(flat):
        raise ValidationError("parties must be disjoint")
    if isinstance(state, WaveFunction):
        n = state.n_orbitals
        party_dims = [4 ** len(g) for g in groups]

        def side_entropy(party_set: tuple[int, ...]) -> float:
            orbs = [o for p in party_set for o in groups[p]]
            return _entropy_of_subset(state, orbs, n)

    elif isinstance(state, QuditState):
        n = state.n_parties
        dims = state.local_dims
        party_dims = [math.prod(dims[x] for x in g) for g in groups]

        def side_entropy(party_set: tuple[int, ...]) -> float:
            idx = [x for p in party_set for x in groups[p]]
            comp = [x for x in range(n) if x not in idx]
            side = idx if len(idx) <= len(comp) else comp
            return von_neumann_entropy(_qudit_reduced(state, side))

    else:
        raise ValidationError(f"unsupported state type {type(state).__name__}")
    if sorted(flat) != list(range(n)):
        raise ValidationError("parties must cover all modes exactly once")
    k = len(groups)
    best = math.inf
    best_side: tuple[int, ...] | None = None
    # Bipartitions are proper subsets containing party 0; scanning them in
    # lexicographic order keeps the smallest representative among ties.
    sides = sorted(
        (0,) + rest
        for size in range(1, k)
        for rest in combinations(range(1, k), size - 1)
    )
    for side in sides:
        s = side_entropy(side)
        if s < best - 1e-12:
            best = s
            best_side = side
    return EntanglementReport(
        subsets=tuple(tuple(g) for g in groups),
        raw=best,
        normalization=math.log(min(party_dims)),
        bipartition=best_side,
    )
