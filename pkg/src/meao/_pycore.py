"""Pure-Python reference implementation of the hot bitstring kernels.

Mirrors the compiled ``meao._core`` extension function-for-function; the
active backend is selected in :mod:`meao.kernels`.  All functions take a
sorted uint64 configuration array of one particle-number sector and use the
ascending-mode-order sign convention (annihilating mode p picks up
(-1)**(occupied modes below p)).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "pair_annihilation",
    "single_annihilation",
    "subset_split",
    "one_body_elements",
]


def _parity_below(c: int, p: int) -> int:
    """+1 or -1 for the occupied modes of c strictly below mode p."""
    return -1 if (c & ((1 << p) - 1)).bit_count() & 1 else 1


def pair_annihilation(configs: np.ndarray, amps: np.ndarray, n_orbitals: int):
    """Expand f_{l,dn} f_{k,up} |psi> for every orbital pair (k, l).

    Returns (rows, targets, vals): row index k * n_orbitals + l, the
    resulting configuration, and the signed amplitude.
    """
    rows: list[int] = []
    targets: list[int] = []
    vals: list[complex] = []
    n = n_orbitals
    for c_u64, amp in zip(configs, amps):
        c = int(c_u64)
        a = complex(amp)
        for k in range(n):
            pk = 2 * k
            if not c >> pk & 1:
                continue
            s1 = _parity_below(c, pk)
            c1 = c & ~(1 << pk)
            for l in range(n):
                pl = 2 * l + 1
                if not c1 >> pl & 1:
                    continue
                rows.append(k * n + l)
                targets.append(c1 & ~(1 << pl))
                vals.append(s1 * _parity_below(c1, pl) * a)
    return (
        np.array(rows, dtype=np.int64),
        np.array(targets, dtype=np.uint64),
        np.array(vals, dtype=np.complex128),
    )


def single_annihilation(
    configs: np.ndarray, amps: np.ndarray, n_orbitals: int, spin: int
):
    """Expand f_{k,spin} |psi> for every orbital k; rows are orbital indices."""
    rows: list[int] = []
    targets: list[int] = []
    vals: list[complex] = []
    for c_u64, amp in zip(configs, amps):
        c = int(c_u64)
        a = complex(amp)
        for k in range(n_orbitals):
            p = 2 * k + spin
            if not c >> p & 1:
                continue
            rows.append(k)
            targets.append(c & ~(1 << p))
            vals.append(_parity_below(c, p) * a)
    return (
        np.array(rows, dtype=np.int64),
        np.array(targets, dtype=np.uint64),
        np.array(vals, dtype=np.complex128),
    )


def subset_split(configs: np.ndarray, subset_modes: np.ndarray, n_modes: int):
    """Split each configuration into (subset index, environment key, sign).

    ``subset_modes`` lists global mode indices in the desired local order;
    bit a of the subset index is the occupation of subset_modes[a].  The
    environment key packs the remaining modes in ascending global order.
    The sign is the parity of the permutation that reorders the occupied
    modes of the configuration from ascending global order to
    subset-before-environment order.
    """
    subset = [int(m) for m in subset_modes]
    in_subset = [False] * n_modes
    new_pos = [0] * n_modes
    for a, m in enumerate(subset):
        in_subset[m] = True
        new_pos[m] = a
    env_rank = 0
    env_bit = [0] * n_modes
    for m in range(n_modes):
        if not in_subset[m]:
            new_pos[m] = len(subset) + env_rank
            env_bit[m] = env_rank
            env_rank += 1
    sub_idx = np.empty(len(configs), dtype=np.int64)
    env_key = np.empty(len(configs), dtype=np.uint64)
    signs = np.empty(len(configs), dtype=np.int8)
    for j, c_u64 in enumerate(configs):
        c = int(c_u64)
        s = 0
        e = 0
        seq: list[int] = []
        m = c
        while m:
            p = (m & -m).bit_length() - 1
            m &= m - 1
            if in_subset[p]:
                s |= 1 << new_pos[p]
            else:
                e |= 1 << env_bit[p]
            seq.append(new_pos[p])
        inv = 0
        for x in range(len(seq)):
            for y in range(x + 1, len(seq)):
                if seq[x] > seq[y]:
                    inv += 1
        sub_idx[j] = s
        env_key[j] = e
        signs[j] = -1 if inv & 1 else 1
    return sub_idx, env_key, signs


def one_body_elements(
    configs: np.ndarray, p: np.ndarray, q: np.ndarray, coeff: np.ndarray
):
    """Sparse matrix elements of sum_t coeff[t] f+_{p[t]} f_{q[t]}.

    ``configs`` must be sorted ascending; rows/cols index into it.  Terms
    that leave the sector (target configuration absent) are dropped.
    """
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    clist = [int(c) for c in configs]
    index = {c: j for j, c in enumerate(clist)}
    for pt, qt, ct in zip(p, q, coeff):
        pt, qt, ct = int(pt), int(qt), float(ct)
        for j, c in enumerate(clist):
            if not c >> qt & 1:
                continue
            sign = _parity_below(c, qt)
            c1 = c & ~(1 << qt)
            if c1 >> pt & 1:
                continue
            sign *= _parity_below(c1, pt)
            c2 = c1 | 1 << pt
            i = index.get(c2)
            if i is None:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(ct * sign)
    return (
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals, dtype=np.float64),
    )
