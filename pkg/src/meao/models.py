"""Model Hamiltonians on small lattices, exact eigenstates, thermal ensembles.

The Hamiltonian is the single-band Hubbard form

    H = - sum_edges t_e sum_sigma (f+_{i,sigma} f_{j,sigma} + h.c.)
        + sum_i U_i n_{i,up} n_{i,dn} + sum_i eps_i (n_{i,up} + n_{i,dn})

restricted to one (n_up, n_dn) sector.  Small sectors are diagonalized
densely; larger ones by Lanczos with full reorthogonalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse

from . import kernels
from .errors import ScanPointError, SolverError, ValidationError
from .fileio import read_partition, read_rdm, read_state
from .fockspace import MixedState, WaveFunction, sector_configs

__all__ = [
    "LatticeSpec",
    "SectorHamiltonian",
    "EigenSolution",
    "build_hamiltonian",
    "lowest_eigenstates",
    "thermal_state",
    "scan",
    "hubbard_dimer_spec",
    "detuned_dimer_spec",
    "ionic_covalent_ensemble",
    "read_state",
    "read_rdm",
    "read_partition",
]

DENSE_LIMIT = 4096
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice Hubbard model restricted to an (n_up, n_dn) sector."""

    sites: int
    edges: tuple[tuple[int, int, float], ...]
    u: tuple[float, ...]
    eps: tuple[float, ...]
    n_up: int
    n_dn: int
    topology: str = "custom"

    def __post_init__(self):
        if self.sites < 1:
            raise ValidationError("sites must be >= 1")
        if not (0 <= self.n_up <= self.sites and 0 <= self.n_dn <= self.sites):
            raise ValidationError(
                f"sector ({self.n_up},{self.n_dn}) out of range for "
                f"{self.sites} sites"
            )
        edges = tuple((int(i), int(j), float(t)) for i, j, t in self.edges)
        seen = set()
        for i, j, _ in edges:
            if i == j or not (0 <= i < self.sites and 0 <= j < self.sites):
                raise ValidationError(f"bad edge ({i},{j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"duplicate edge ({i},{j})")
            seen.add(key)
        u = tuple(float(x) for x in self.u)
        eps = tuple(float(x) for x in self.eps)
        if len(u) != self.sites or len(eps) != self.sites:
            raise ValidationError("u and eps must have one entry per site")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "eps", eps)

    @classmethod
    def chain(cls, sites, t=1.0, u=0.0, eps=0.0, *, n_up, n_dn) -> "LatticeSpec":
        edges = tuple((i, i + 1, t) for i in range(sites - 1))
        return cls(
            sites, edges, _per_site(u, sites), _per_site(eps, sites),
            n_up, n_dn, topology="chain",
        )

    @classmethod
    def ring(cls, sites, t=1.0, u=0.0, eps=0.0, *, n_up, n_dn) -> "LatticeSpec":
        if sites < 3:
            raise ValidationError("a ring needs at least 3 sites")
        edges = tuple((i, (i + 1) % sites, t) for i in range(sites))
        return cls(
            sites, edges, _per_site(u, sites), _per_site(eps, sites),
            n_up, n_dn, topology="ring",
        )

    @classmethod
    def dimerized_ring(
        cls, sites, t_strong, t_weak, u=0.0, eps=0.0, *, n_up, n_dn
    ) -> "LatticeSpec":
        """Ring with alternating bond strengths, strong bond on (0, 1)."""
        if sites < 4 or sites % 2:
            raise ValidationError("a dimerized ring needs an even site count >= 4")
        edges = tuple(
            (i, (i + 1) % sites, t_strong if i % 2 == 0 else t_weak)
            for i in range(sites)
        )
        return cls(
            sites, edges, _per_site(u, sites), _per_site(eps, sites),
            n_up, n_dn, topology="dimerized-ring",
        )


def _per_site(val, sites) -> tuple[float, ...]:
    if np.isscalar(val):
        return (float(val),) * sites
    out = tuple(float(x) for x in val)
    if len(out) != sites:
        raise ValidationError(f"expected {sites} per-site values, got {len(out)}")
    return out


@dataclass(frozen=True)
class SectorHamiltonian:
    """Sparse sector-restricted Hamiltonian with its configuration basis."""

    n_orbitals: int
    n_up: int
    n_dn: int
    configs: np.ndarray
    matrix: scipy.sparse.csr_matrix

    @property
    def dim(self) -> int:
        return len(self.configs)


def build_hamiltonian(spec: LatticeSpec) -> SectorHamiltonian:
    configs = sector_configs(spec.sites, spec.n_up, spec.n_dn)
    dim = len(configs)
    p_list, q_list, c_list = [], [], []
    for i, j, t in spec.edges:
        if t == 0.0:
            continue
        for spin in (0, 1):
            p_list += [2 * i + spin, 2 * j + spin]
            q_list += [2 * j + spin, 2 * i + spin]
            c_list += [-t, -t]
    if p_list:
        rows, cols, vals = kernels.one_body_elements(
            configs,
            np.array(p_list, dtype=np.int64),
            np.array(q_list, dtype=np.int64),
            np.array(c_list, dtype=np.float64),
        )
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    diag = np.zeros(dim)
    for i in range(spec.sites):
        occ_up = (configs >> np.uint64(2 * i)) & np.uint64(1)
        occ_dn = (configs >> np.uint64(2 * i + 1)) & np.uint64(1)
        if spec.u[i] != 0.0:
            diag += spec.u[i] * (occ_up & occ_dn).astype(float)
        if spec.eps[i] != 0.0:
            diag += spec.eps[i] * (occ_up + occ_dn).astype(float)
    h = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    h = h + scipy.sparse.diags(diag, format="csr")
    return SectorHamiltonian(spec.sites, spec.n_up, spec.n_dn, configs, h)


@dataclass(frozen=True)
class EigenSolution:
    """Lowest eigenpairs of one sector, energies ascending."""

    energies: np.ndarray
    states: tuple[WaveFunction, ...]


def _fix_gauge(vec: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry real positive (first index on ties)."""
    i = int(np.argmax(np.abs(vec)))
    pivot = vec[i]
    if abs(pivot) == 0.0:
        return vec
    return vec * (abs(pivot) / pivot)


def _vec_to_state(h: SectorHamiltonian, vec: np.ndarray) -> WaveFunction:
    vec = _fix_gauge(vec / np.linalg.norm(vec))
    table = {
        int(h.configs[i]): complex(vec[i])
        for i in np.nonzero(np.abs(vec) > 1e-14)[0]
    }
    return WaveFunction(h.n_orbitals, table, normalize=True)


def lowest_eigenstates(h: SectorHamiltonian, k: int = 1) -> EigenSolution:
    """k lowest eigenpairs: dense below DENSE_LIMIT, Lanczos above.

    Raises SolverError if any returned pair has residual above 1e-9.
    """
    if not 1 <= k <= h.dim:
        raise ValidationError(f"need 1 <= k <= {h.dim}, got {k}")
    if h.dim <= DENSE_LIMIT:
        energies, vecs = np.linalg.eigh(h.matrix.toarray())
        energies, vecs = energies[:k], vecs[:, :k]
    else:
        energies, vecs = _lanczos_lowest(h.matrix, k)
    states = tuple(_vec_to_state(h, vecs[:, m]) for m in range(k))
    for m in range(k):
        v = vecs[:, m] / np.linalg.norm(vecs[:, m])
        res = float(np.linalg.norm(h.matrix @ v - energies[m] * v))
        if res > RESIDUAL_TOL:
            raise SolverError(
                f"eigenpair {m} residual {res:.3e} exceeds {RESIDUAL_TOL}"
            )
    return EigenSolution(np.asarray(energies, dtype=float), states)


def _lanczos_lowest(mat, k, max_dim=None, seed=7):
    """Lanczos with full reorthogonalization; deterministic seeded start.

    The Krylov basis grows until the k lowest Ritz pairs have residuals
    below RESIDUAL_TOL (checked explicitly), re-diagonalizing the
    tridiagonal matrix each iteration.  Degenerate clusters come out
    orthonormal because the Ritz vectors of one Krylov basis are.
    """
    dim = mat.shape[0]
    if max_dim is None:
        max_dim = min(dim, max(40 * k, 200))
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    for it in range(max_dim):
        w = mat @ basis[-1]
        a = float(basis[-1] @ w)
        alphas.append(a)
        w = w - a * basis[-1]
        if betas:
            w = w - betas[-1] * basis[-2]
        # full reorthogonalization, twice for safety
        for _ in range(2):
            for b in basis:
                w = w - (b @ w) * b
        beta = float(np.linalg.norm(w))
        if it >= k:
            tri = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            evals, evecs = np.linalg.eigh(tri)
            # residual of Ritz pair m is |beta * last component|
            resid = abs(beta) * np.abs(evecs[-1, :k])
            if np.all(resid < 0.1 * RESIDUAL_TOL) or beta < 1e-14:
                vecs = np.column_stack(basis) @ evecs[:, :k]
                vecs, _ = np.linalg.qr(vecs)
                return evals[:k], vecs
        if beta < 1e-14:
            # invariant subspace smaller than requested; restart deflated
            w = rng.standard_normal(dim)
            for b in basis:
                w = w - (b @ w) * b
            beta = float(np.linalg.norm(w))
            if beta < 1e-14:
                break
        betas.append(beta)
        basis.append(w / beta)
    raise SolverError(
        f"Lanczos failed to converge {k} pairs within {max_dim} iterations"
    )


def thermal_state(
    energies: Sequence[float], states: Sequence[WaveFunction], beta: float
) -> MixedState:
    """Boltzmann ensemble over the given eigenpairs at inverse temperature beta.

    Energies are shifted by their minimum before exponentiation, so large
    beta (e.g. 1e3) is safe.
    """
    if len(energies) != len(states) or not states:
        raise ValidationError("need matching nonempty energies and states")
    if beta < 0:
        raise ValidationError("beta must be >= 0")
    e = np.asarray(energies, dtype=float)
    w = np.exp(-beta * (e - e.min()))
    w /= w.sum()
    return MixedState(tuple((float(wi), st) for wi, st in zip(w, states)))


def scan(
    values: Sequence[float],
    prepare: Callable[[float], WaveFunction | MixedState],
    analyze: Callable[[WaveFunction | MixedState], Mapping[str, float]],
    param_name: str = "param",
) -> list[dict]:
    """Evaluate an analysis over a parameter family, one record per value.

    Each point is prepared and analyzed independently; failures are
    re-raised as ScanPointError carrying the parameter value.
    """
    rows: list[dict] = []
    for v in values:
        try:
            state = prepare(v)
            record = dict(analyze(state))
        except (ValidationError, SolverError, FloatingPointError) as exc:
            raise ScanPointError(v, str(exc)) from exc
        rows.append({param_name: float(v), **record})
    return rows


def hubbard_dimer_spec(u_over_t: float, t: float = 1.0) -> LatticeSpec:
    """Half-filled two-site Hubbard model at interaction ratio u_over_t."""
    return LatticeSpec(
        sites=2,
        edges=((0, 1, t),),
        u=(u_over_t * t, u_over_t * t),
        eps=(0.0, 0.0),
        n_up=1,
        n_dn=1,
        topology="chain",
    )


# Constants of the avoided-crossing (charge-transfer) dimer family scanned
# in t: the on-site detuning grows with the hopping, Delta(t) = DELTA0 +
# KAPPA * t, so the ionic configurations cross the covalent manifold
# inside the scan window while t -> 0 decouples the sites entirely.
HARPOON_U = 2.0
HARPOON_DELTA0 = 0.5
HARPOON_KAPPA = 3.0


def detuned_dimer_spec(
    t: float,
    n_up: int,
    n_dn: int,
    u: float = HARPOON_U,
    delta0: float = HARPOON_DELTA0,
    kappa: float = HARPOON_KAPPA,
) -> LatticeSpec:
    delta = delta0 + kappa * t
    return LatticeSpec(
        sites=2,
        edges=((0, 1, t),),
        u=(u, u),
        eps=(+delta / 2.0, -delta / 2.0),
        n_up=n_up,
        n_dn=n_dn,
        topology="chain",
    )


def ionic_covalent_ensemble(
    t: float,
    beta: float = 1e3,
    n_states: int = 4,
    u: float = HARPOON_U,
    delta0: float = HARPOON_DELTA0,
    kappa: float = HARPOON_KAPPA,
) -> MixedState:
    """Thermal ensemble of the detuned dimer across charge sectors.

    The n_states lowest eigenpairs pooled from the (1,1), (2,0) and (0,2)
    sectors form the Boltzmann ensemble; at weak coupling this mixes the
    covalent singlet with the ionic states and the mutual information
    between the sites collapses.
    """
    pool: list[tuple[float, WaveFunction]] = []
    for n_up, n_dn in ((1, 1), (2, 0), (0, 2)):
        spec = detuned_dimer_spec(t, n_up, n_dn, u=u, delta0=delta0, kappa=kappa)
        h = build_hamiltonian(spec)
        sol = lowest_eigenstates(h, k=h.dim)
        pool += list(zip(sol.energies, sol.states))
    pool.sort(key=lambda p: p[0])
    pool = pool[:n_states]
    return thermal_state([e for e, _ in pool], [s for _, s in pool], beta)
