"""Reduced density matrices and fermionic reduced density operators.

The mixed-spin two-body RDM follows the convention

    Gamma[i, j, k, l] = < f+_{i,up} f+_{j,dn} f_{l,dn} f_{k,up} >

so the composite-index matrix Gamma[(i,j), (k,l)] is Hermitian and PSD.
Reduced density operators of orbital subsets act on the subset's local
Fock space; the local basis index is itself a configuration bitmask over
the subset's spin-orbitals (bit 2a+spin = occupation of the a-th subset
orbital).  Fermionic reordering signs are handled by the kernel layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ValidationError
from .fockspace import MixedState, WaveFunction

__all__ = [
    "OneRDM",
    "TwoRDM",
    "DensityOperator",
    "one_rdm",
    "two_rdm_mixed",
    "mean_field_2rdm",
    "reduced_density_operator",
]

HERM_TOL = 1e-12


@dataclass(frozen=True)
class OneRDM:
    """Spin-resolved one-body RDM: gamma[spin][i, k] = <f+_{i,spin} f_{k,spin}>."""

    up: np.ndarray
    dn: np.ndarray

    def __post_init__(self):
        up = np.asarray(self.up, dtype=np.complex128)
        dn = np.asarray(self.dn, dtype=np.complex128)
        n = up.shape[0]
        if up.shape != (n, n) or dn.shape != (n, n):
            raise ValidationError("one-body RDM blocks must be square and equal size")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "dn", dn)

    @property
    def n_orbitals(self) -> int:
        return self.up.shape[0]

    def spin(self, spin: int) -> np.ndarray:
        return self.up if spin == 0 else self.dn

    def validate(self, herm_tol: float = HERM_TOL, eig_tol: float = 1e-10):
        """Check Hermiticity and occupation-eigenvalue range [0, 1]."""
        for name, g in (("up", self.up), ("dn", self.dn)):
            dev = float(np.max(np.abs(g - g.conj().T))) if g.size else 0.0
            if dev > herm_tol:
                raise ValidationError(
                    f"one-body RDM ({name}) non-Hermitian, deviation {dev:.3e}"
                )
            w = np.linalg.eigvalsh(g)
            if w.min() < -eig_tol or w.max() > 1 + eig_tol:
                raise ValidationError(
                    f"one-body RDM ({name}) eigenvalues outside [0,1]: "
                    f"[{w.min():.3e}, {w.max():.3e}]"
                )


@dataclass(frozen=True)
class TwoRDM:
    """Mixed-spin two-body RDM tensor, shape (n, n, n, n)."""

    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=np.complex128)
        n = t.shape[0]
        if t.shape != (n, n, n, n):
            raise ValidationError(f"two-body RDM has shape {t.shape}, expected 4D")
        object.__setattr__(self, "tensor", t)

    @property
    def n_orbitals(self) -> int:
        return self.tensor.shape[0]

    def as_matrix(self) -> np.ndarray:
        """Composite-index view Gamma[(i,j), (k,l)]."""
        n = self.n_orbitals
        return self.tensor.reshape(n * n, n * n)

    def trace(self) -> complex:
        """sum_ij Gamma[i,j,i,j] = N_up * N_dn on number eigenstates."""
        n = self.n_orbitals
        return complex(np.einsum("ijij->", self.tensor))

    def validate(self, herm_tol: float = HERM_TOL):
        m = self.as_matrix()
        dev = float(np.max(np.abs(m - m.conj().T)))
        if dev > herm_tol:
            raise ValidationError(
                f"two-body RDM non-Hermitian as composite matrix, deviation {dev:.3e}"
            )


def one_rdm(state: WaveFunction | MixedState) -> OneRDM:
    """One-body RDM of a pure state or ensemble (both spin blocks)."""
    if isinstance(state, MixedState):
        parts = [(w, one_rdm(wf)) for w, wf in state.components]
        return OneRDM(
            up=sum(w * d.up for w, d in parts),
            dn=sum(w * d.dn for w, d in parts),
        )
    wf = state
    blocks = []
    for spin in (0, 1):
        rows, targets, vals = kernels.single_annihilation(
            wf.configs, wf.amps, wf.n_orbitals, spin
        )
        blocks.append(_gram(rows, targets, vals, wf.n_orbitals))
    return OneRDM(up=blocks[0], dn=blocks[1])


def two_rdm_mixed(state: WaveFunction | MixedState) -> TwoRDM:
    """Mixed-spin two-body RDM of a pure state or ensemble.

    For a pure state it is built as the Gram matrix of the
    pair-annihilated vectors X_{kl} = f_{l,dn} f_{k,up} |psi>, which
    makes Hermiticity and positive semidefiniteness automatic; ensembles
    are convex combinations of their components.
    """
    if isinstance(state, MixedState):
        return TwoRDM(
            sum(w * two_rdm_mixed(wf).tensor for w, wf in state.components)
        )
    wf = state
    n = wf.n_orbitals
    rows, targets, vals = kernels.pair_annihilation(wf.configs, wf.amps, n)
    mat = _gram(rows, targets, vals, n * n)
    return TwoRDM(mat.reshape(n, n, n, n))


def _gram(rows, targets, vals, n_rows: int) -> np.ndarray:
    """Gram matrix <row_i, row_k> of sparse vectors grouped by target config."""
    if len(rows) == 0:
        return np.zeros((n_rows, n_rows), dtype=np.complex128)
    _, inverse = np.unique(targets, return_inverse=True)
    x = np.zeros((n_rows, int(inverse.max()) + 1), dtype=np.complex128)
    x[rows, inverse] = vals
    return x.conj() @ x.T


def mean_field_2rdm(one: OneRDM) -> TwoRDM:
    """Uncorrelated factorization Gamma[i,j,k,l] = gamma_up[i,k] gamma_dn[j,l]."""
    return TwoRDM(np.einsum("ik,jl->ijkl", one.up, one.dn))


@dataclass(frozen=True)
class DensityOperator:
    """Density operator on the local Fock space of an orbital subset."""

    orbitals: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        orbs = tuple(int(o) for o in self.orbitals)
        m = np.asarray(self.matrix, dtype=np.complex128)
        dim = 4 ** len(orbs)
        if m.shape != (dim, dim):
            raise ValidationError(
                f"density operator on {len(orbs)} orbitals must be "
                f"{dim}x{dim}, got {m.shape}"
            )
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > 1e-8:
            raise ValidationError(f"density operator trace {tr} deviates from 1")
        dev = float(np.max(np.abs(m - m.conj().T)))
        if dev > 1e-10:
            raise ValidationError(f"density operator non-Hermitian, deviation {dev:.3e}")
        object.__setattr__(self, "orbitals", orbs)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def is_pure(self, tol: float = 1e-8) -> bool:
        return self.purity() >= 1.0 - tol

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def validate(self, psd_tol: float = 1e-10):
        w = np.linalg.eigvalsh(self.matrix)
        if w.min() < -psd_tol:
            raise ValidationError(
                f"density operator has negative eigenvalue {w.min():.3e}"
            )


def _pure_reduction_matrix(wf: WaveFunction, subset: Sequence[int]) -> np.ndarray:
    modes = np.array(
        [2 * o + s for o in subset for s in (0, 1)], dtype=np.int64
    )
    sub_idx, env_key, signs = kernels.subset_split(
        wf.configs, modes, 2 * wf.n_orbitals
    )
    _, env_inv = (
        np.unique(env_key, return_inverse=True)
        if len(env_key)
        else (None, np.zeros(0, dtype=np.int64))
    )
    dim = 4 ** len(subset)
    n_env = int(env_inv.max()) + 1 if len(env_inv) else 1
    m = np.zeros((n_env, dim), dtype=np.complex128)
    m[env_inv, sub_idx] = signs * wf.amps
    return m.T @ m.conj()


def reduced_density_operator(
    state: WaveFunction | MixedState, subset: Sequence[int]
) -> DensityOperator:
    """Partial trace onto an orbital subset, with fermionic reordering signs.

    ``subset`` lists distinct orbital indices; their order fixes the local
    mode order of the result.
    """
    subset = [int(o) for o in subset]
    if len(set(subset)) != len(subset) or not subset:
        raise ValidationError(f"subset {subset} must be nonempty without duplicates")
    n = state.n_orbitals
    if any(not 0 <= o < n for o in subset):
        raise ValidationError(f"subset {subset} out of range for {n} orbitals")
    if isinstance(state, WaveFunction):
        rho = _pure_reduction_matrix(state, subset)
    elif isinstance(state, MixedState):
        rho = sum(
            w * _pure_reduction_matrix(wf, subset) for w, wf in state.components
        )
    else:
        raise ValidationError(f"unsupported state type {type(state).__name__}")
    return DensityOperator(tuple(subset), rho)
