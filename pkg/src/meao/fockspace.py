"""Fermionic Fock space on n spatial orbitals with spin-1/2 electrons.

Conventions used throughout the package:

* Spin-orbital (mode) index: ``p = 2 * orbital + spin`` with spin 0 = up,
  spin 1 = down, i.e. orbital-major ordering with up before down.
* A configuration is an integer bitmask; bit ``p`` is the occupation of
  spin-orbital ``p``.
* The basis state for a configuration is the product of creation operators
  in ascending mode order applied to the vacuum.  All signs follow from
  this ordering: ``f_p`` acting on a configuration picks up
  ``(-1)**(number of occupied modes below p)``.
* Configuration strings list occupations most-significant-first in mode
  order: character ``j`` of the string is the occupation of spin-orbital
  ``j`` (so ``"1100"`` on 2 orbitals is orbital 0 doubly occupied).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "UP",
    "DN",
    "mode_index",
    "parse_config",
    "format_config",
    "config_sector",
    "sector_configs",
    "sector_dimension",
    "WaveFunction",
    "MixedState",
    "QuditState",
    "RotationSchedule",
    "jacobi_matrix",
    "ideal_bond_state",
    "ionic_state",
    "ghz_state",
    "w_state",
    "rotate_wavefunction",
]

UP = 0
DN = 1

NORM_TOL = 1e-12
DROP_TOL = 1e-14


def mode_index(orbital: int, spin: int) -> int:
    """Spin-orbital index of (orbital, spin); spin 0 is up, 1 is down."""
    return 2 * orbital + spin


def parse_config(s: str) -> int:
    """Parse an occupation string (mode 0 first) into a bitmask."""
    c = 0
    for j, ch in enumerate(s):
        if ch == "1":
            c |= 1 << j
        elif ch != "0":
            raise ValidationError(f"configuration string {s!r}: bad character {ch!r}")
    return c


def format_config(config: int, n_orbitals: int) -> str:
    """Inverse of parse_config."""
    return "".join("1" if config >> j & 1 else "0" for j in range(2 * n_orbitals))


def config_sector(config: int, n_orbitals: int = 0) -> tuple[int, int]:
    """(n_up, n_dn) electron counts of a configuration."""
    up_mask = 0x5555555555555555
    n_up = (config & up_mask).bit_count()
    return n_up, config.bit_count() - n_up


def sector_configs(n_orbitals: int, n_up: int, n_dn: int) -> np.ndarray:
    """All configurations of the (n_up, n_dn) sector, ascending, as uint64."""
    if not 0 <= n_up <= n_orbitals or not 0 <= n_dn <= n_orbitals:
        raise ValidationError(
            f"sector ({n_up},{n_dn}) out of range for {n_orbitals} orbitals"
        )
    orbs = range(n_orbitals)
    ups = [sum(1 << (2 * i) for i in occ) for occ in combinations(orbs, n_up)]
    dns = [sum(1 << (2 * i + 1) for i in occ) for occ in combinations(orbs, n_dn)]
    out = np.array([u | d for u in ups for d in dns], dtype=np.uint64)
    out.sort()
    return out


def sector_dimension(n_orbitals: int, n_up: int, n_dn: int) -> int:
    return math.comb(n_orbitals, n_up) * math.comb(n_orbitals, n_dn)


class WaveFunction:
    """Pure many-electron state as a sparse map configuration -> amplitude.

    Amplitudes below ``drop_tolerance`` in magnitude are pruned.  The norm
    must be 1 within 1e-12 unless ``normalize=True`` rescales it.
    """

    __slots__ = ("n_orbitals", "_configs", "_amps")

    def __init__(
        self,
        n_orbitals: int,
        amplitudes: Mapping[int | str, complex] | Sequence[tuple[int | str, complex]],
        *,
        normalize: bool = False,
        drop_tolerance: float = DROP_TOL,
    ):
        if n_orbitals < 1:
            raise ValidationError("n_orbitals must be >= 1")
        self.n_orbitals = int(n_orbitals)
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        table: dict[int, complex] = {}
        limit = 1 << (2 * self.n_orbitals)
        for key, amp in items:
            if isinstance(key, str):
                if len(key) != 2 * self.n_orbitals:
                    raise ValidationError(
                        f"configuration {key!r} has length {len(key)}, "
                        f"expected {2 * self.n_orbitals}"
                    )
                c = parse_config(key)
            else:
                c = int(key)
            if not 0 <= c < limit:
                raise ValidationError(f"configuration {key!r} out of range")
            if c in table:
                raise ValidationError(f"duplicate configuration {key!r}")
            table[c] = complex(amp)
        configs = np.array(sorted(table), dtype=np.uint64)
        amps = np.array([table[int(c)] for c in configs], dtype=np.complex128)
        nrm = float(np.linalg.norm(amps))
        if normalize:
            if nrm == 0.0:
                raise ValidationError("cannot normalize the zero vector")
            amps = amps / nrm
        elif abs(nrm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {nrm!r} deviates from 1 beyond 1e-12")
        keep = np.abs(amps) > drop_tolerance
        self._configs = configs[keep]
        self._amps = amps[keep]
        self._configs.setflags(write=False)
        self._amps.setflags(write=False)

    @property
    def configs(self) -> np.ndarray:
        """Sorted uint64 configurations with nonzero amplitude."""
        return self._configs

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))

    def amplitude(self, config: int | str) -> complex:
        c = parse_config(config) if isinstance(config, str) else int(config)
        i = np.searchsorted(self._configs, np.uint64(c))
        if i < len(self._configs) and int(self._configs[i]) == c:
            return complex(self._amps[i])
        return 0j

    def items(self) -> Iterator[tuple[int, complex]]:
        for c, a in zip(self._configs, self._amps):
            yield int(c), complex(a)

    def as_dict(self) -> dict[str, complex]:
        n = self.n_orbitals
        return {format_config(int(c), n): complex(a) for c, a in self.items()}

    def sectors(self) -> set[tuple[int, int]]:
        return {config_sector(int(c)) for c in self._configs}

    def __len__(self) -> int:
        return len(self._configs)

    def __repr__(self) -> str:
        return (
            f"WaveFunction(n_orbitals={self.n_orbitals}, "
            f"n_configs={len(self._configs)})"
        )


@dataclass(frozen=True)
class MixedState:
    """Statistical ensemble of wavefunctions with weights summing to 1."""

    components: tuple[tuple[float, WaveFunction], ...]

    def __post_init__(self):
        if not self.components:
            raise ValidationError("MixedState needs at least one component")
        n = self.components[0][1].n_orbitals
        total = 0.0
        for w, wf in self.components:
            if w < -NORM_TOL:
                raise ValidationError(f"negative ensemble weight {w}")
            if wf.n_orbitals != n:
                raise ValidationError("ensemble components differ in n_orbitals")
            total += w
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError(f"ensemble weights sum to {total}, expected 1")

    @property
    def n_orbitals(self) -> int:
        return self.components[0][1].n_orbitals


@dataclass(frozen=True)
class QuditState:
    """Dense pure state on a tensor product of small local spaces.

    ``amplitudes`` is indexed in row-major order over ``local_dims``
    (party 0 varies slowest).
    """

    local_dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.local_dims)
        if any(d < 2 for d in dims):
            raise ValidationError("local dimensions must be >= 2")
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != math.prod(dims):
            raise ValidationError(
                f"amplitude vector of length {amps.size} does not match dims {dims}"
            )
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {nrm!r} deviates from 1 beyond 1e-12")
        amps.setflags(write=False)
        object.__setattr__(self, "local_dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_parties(self) -> int:
        return len(self.local_dims)


@dataclass(frozen=True)
class RotationSchedule:
    """Sequence of orbital-pair rotation steps (k, l, theta), applied in order.

    Each step rotates orbitals k and l by angle theta for both spins; the
    equivalent single-particle map is :func:`jacobi_matrix`.
    """

    n_orbitals: int
    steps: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        steps = tuple((int(k), int(l), float(t)) for k, l, t in self.steps)
        for k, l, _ in steps:
            if k == l or not (0 <= k < self.n_orbitals and 0 <= l < self.n_orbitals):
                raise ValidationError(f"bad rotation pair ({k},{l})")
        object.__setattr__(self, "steps", steps)

    def then(self, k: int, l: int, theta: float) -> "RotationSchedule":
        return RotationSchedule(self.n_orbitals, self.steps + ((k, l, theta),))

    @property
    def matrix(self) -> np.ndarray:
        """Accumulated orbital transformation U = J_last ... J_first."""
        u = np.eye(self.n_orbitals)
        for k, l, theta in self.steps:
            u = jacobi_matrix(self.n_orbitals, k, l, theta) @ u
        return u


def jacobi_matrix(n_orbitals: int, k: int, l: int, theta: float) -> np.ndarray:
    """Orbital-space rotation matrix J of one step.

    J is the transformation with gamma -> J gamma J^T for the one-body RDM;
    J[k,k] = J[l,l] = cos(theta), J[k,l] = -sin(theta), J[l,k] = +sin(theta).
    """
    j = np.eye(n_orbitals)
    c, s = math.cos(theta), math.sin(theta)
    j[k, k] = j[l, l] = c
    j[k, l] = -s
    j[l, k] = s
    return j


def ideal_bond_state() -> WaveFunction:
    """Maximally entangled two-orbital singlet with one electron per spin mix.

    Equal-weight superposition of both ionic and both covalent
    configurations; the single negative sign sits on the down-up covalent
    term.
    """
    h = 0.5
    return WaveFunction(
        2, {"0011": h, "1001": h, "0110": -h, "1100": h}
    )


def ionic_state(p: float) -> WaveFunction:
    """One-parameter family interpolating ionic weight against the rest.

    p is the amplitude of the right-doubly-occupied configuration; the
    remaining three configurations share amplitude sqrt((1 - p^2)/3) with
    the singlet sign pattern.  p = 1/2 reproduces :func:`ideal_bond_state`;
    p = 1 is the pure ionic product.
    """
    if not -1.0 <= p <= 1.0:
        raise ValidationError(f"ionic parameter p={p} outside [-1, 1]")
    c = math.sqrt((1.0 - p * p) / 3.0)
    return WaveFunction(2, {"0011": p, "1001": c, "0110": -c, "1100": c})


def ghz_state(n_parties: int = 3) -> QuditState:
    """(|00...0> + |11...1>)/sqrt(2) on n qubits."""
    if n_parties < 2:
        raise ValidationError("GHZ needs at least 2 parties")
    v = np.zeros(2**n_parties, dtype=np.complex128)
    v[0] = v[-1] = 1.0 / math.sqrt(2.0)
    return QuditState((2,) * n_parties, v)


def w_state(n_parties: int = 3) -> QuditState:
    """Equal superposition of all single-excitation basis states on n qubits."""
    if n_parties < 2:
        raise ValidationError("W needs at least 2 parties")
    v = np.zeros(2**n_parties, dtype=np.complex128)
    for j in range(n_parties):
        v[1 << (n_parties - 1 - j)] = 1.0 / math.sqrt(n_parties)
    return QuditState((2,) * n_parties, v)


def _rotation_generator_terms(k: int, l: int):
    """One-body terms (p, q, coeff) of the anti-Hermitian step generator.

    The step operator is exp(theta * sum_sigma (f+_l f_k - f+_k f_l)); with
    this sign a +pi/4 step on the doubly occupied orbital k produces the
    ideal bond superposition over orbitals (k, l).
    """
    terms = []
    for spin in (UP, DN):
        terms.append((mode_index(l, spin), mode_index(k, spin), 1.0))
        terms.append((mode_index(k, spin), mode_index(l, spin), -1.0))
    return terms


_DENSE_EXP_LIMIT = 1024


def rotate_wavefunction(wf: WaveFunction, schedule: RotationSchedule) -> WaveFunction:
    """Apply an orbital rotation schedule to a wavefunction.

    Each step exponentiates its one-body generator exactly within every
    occupied (n_up, n_dn) sector: dense expm for small sectors, a Krylov
    applied-exponential above _DENSE_EXP_LIMIT.  Particle numbers per spin
    are conserved, so sectors never mix.
    """
    import scipy.linalg
    import scipy.sparse
    import scipy.sparse.linalg

    from . import kernels

    if schedule.n_orbitals != wf.n_orbitals:
        raise ValidationError(
            f"schedule on {schedule.n_orbitals} orbitals applied to a state "
            f"on {wf.n_orbitals}"
        )
    n = wf.n_orbitals
    table: dict[int, complex] = dict(wf.items())
    for k, l, theta in schedule.steps:
        terms = _rotation_generator_terms(k, l)
        p_arr = np.array([t[0] for t in terms], dtype=np.int64)
        q_arr = np.array([t[1] for t in terms], dtype=np.int64)
        c_arr = np.array([t[2] for t in terms], dtype=np.float64)
        new_table: dict[int, complex] = {}
        by_sector: dict[tuple[int, int], list[int]] = {}
        for c in table:
            by_sector.setdefault(config_sector(c), []).append(c)
        for (n_up, n_dn), members in by_sector.items():
            basis = sector_configs(n, n_up, n_dn)
            vec = np.zeros(len(basis), dtype=np.complex128)
            idx = np.searchsorted(basis, np.array(sorted(members), dtype=np.uint64))
            for c, i in zip(sorted(members), idx):
                vec[i] = table[c]
            rows, cols, vals = kernels.one_body_elements(basis, p_arr, q_arr, c_arr)
            gen = scipy.sparse.coo_matrix(
                (vals, (rows, cols)), shape=(len(basis), len(basis))
            ).tocsr()
            if len(basis) <= _DENSE_EXP_LIMIT:
                out = scipy.linalg.expm(theta * gen.toarray()) @ vec
            else:
                out = scipy.sparse.linalg.expm_multiply(theta * gen, vec)
            for i in np.nonzero(np.abs(out) > DROP_TOL)[0]:
                key = int(basis[i])
                new_table[key] = new_table.get(key, 0j) + complex(out[i])
        table = new_table
    return WaveFunction(n, table)
