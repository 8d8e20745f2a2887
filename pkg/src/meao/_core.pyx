# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of :mod:`meao._pycore`; see that module for semantics.

Both backends must stay element-for-element identical; the equivalence
tests exercise them against each other as independent sign bookkeeping
paths.
"""

import numpy as np

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define MEAO_POPCOUNT(x) __builtin_popcountll(x)
    #else
    static int MEAO_POPCOUNT(unsigned long long x) {
        int n = 0;
        while (x) { x &= x - 1; ++n; }
        return n;
    }
    #endif
    """
    int MEAO_POPCOUNT(unsigned long long x) nogil

ctypedef unsigned long long u64

__all__ = [
    "pair_annihilation",
    "single_annihilation",
    "subset_split",
    "one_body_elements",
]


cdef inline int _parity_below(u64 c, int p) nogil:
    cdef u64 mask = ((<u64>1) << p) - 1
    if MEAO_POPCOUNT(c & mask) & 1:
        return -1
    return 1


def pair_annihilation(configs, amps, int n_orbitals):
    """Expand f_{l,dn} f_{k,up} |psi> for every orbital pair (k, l)."""
    cdef const u64[::1] cfg = np.ascontiguousarray(configs, dtype=np.uint64)
    cdef const double complex[::1] amp = np.ascontiguousarray(
        amps, dtype=np.complex128)
    cdef Py_ssize_t nc = cfg.shape[0]
    cdef Py_ssize_t j, total = 0
    cdef u64 c, up_mask = 0, dn_mask = 0
    cdef int i
    for i in range(n_orbitals):
        up_mask |= (<u64>1) << (2 * i)
        dn_mask |= (<u64>1) << (2 * i + 1)
    for j in range(nc):
        c = cfg[j]
        total += MEAO_POPCOUNT(c & up_mask) * MEAO_POPCOUNT(c & dn_mask)
    rows_arr = np.empty(total, dtype=np.int64)
    targets_arr = np.empty(total, dtype=np.uint64)
    vals_arr = np.empty(total, dtype=np.complex128)
    cdef long[::1] rows = rows_arr
    cdef u64[::1] targets = targets_arr
    cdef double complex[::1] vals = vals_arr
    cdef Py_ssize_t out = 0
    cdef int k, l, pk, pl, s1
    cdef u64 c1
    cdef double complex a
    for j in range(nc):
        c = cfg[j]
        a = amp[j]
        for k in range(n_orbitals):
            pk = 2 * k
            if not (c >> pk) & 1:
                continue
            s1 = _parity_below(c, pk)
            c1 = c & ~((<u64>1) << pk)
            for l in range(n_orbitals):
                pl = 2 * l + 1
                if not (c1 >> pl) & 1:
                    continue
                rows[out] = k * n_orbitals + l
                targets[out] = c1 & ~((<u64>1) << pl)
                vals[out] = s1 * _parity_below(c1, pl) * a
                out += 1
    return rows_arr, targets_arr, vals_arr


def single_annihilation(configs, amps, int n_orbitals, int spin):
    """Expand f_{k,spin} |psi> for every orbital k; rows are orbital indices."""
    cdef const u64[::1] cfg = np.ascontiguousarray(configs, dtype=np.uint64)
    cdef const double complex[::1] amp = np.ascontiguousarray(
        amps, dtype=np.complex128)
    cdef Py_ssize_t nc = cfg.shape[0]
    cdef Py_ssize_t j, total = 0
    cdef u64 c, spin_mask = 0
    cdef int i
    for i in range(n_orbitals):
        spin_mask |= (<u64>1) << (2 * i + spin)
    for j in range(nc):
        total += MEAO_POPCOUNT(cfg[j] & spin_mask)
    rows_arr = np.empty(total, dtype=np.int64)
    targets_arr = np.empty(total, dtype=np.uint64)
    vals_arr = np.empty(total, dtype=np.complex128)
    cdef long[::1] rows = rows_arr
    cdef u64[::1] targets = targets_arr
    cdef double complex[::1] vals = vals_arr
    cdef Py_ssize_t out = 0
    cdef int k, p
    cdef double complex a
    for j in range(nc):
        c = cfg[j]
        a = amp[j]
        for k in range(n_orbitals):
            p = 2 * k + spin
            if not (c >> p) & 1:
                continue
            rows[out] = k
            targets[out] = c & ~((<u64>1) << p)
            vals[out] = _parity_below(c, p) * a
            out += 1
    return rows_arr, targets_arr, vals_arr


def subset_split(configs, subset_modes, int n_modes):
    """Split configurations into (subset index, environment key, sign)."""
    cdef const u64[::1] cfg = np.ascontiguousarray(configs, dtype=np.uint64)
    cdef const long[::1] subset = np.ascontiguousarray(
        subset_modes, dtype=np.int64)
    cdef Py_ssize_t nc = cfg.shape[0]
    cdef int n_sub = <int>subset.shape[0]
    cdef int in_subset[64]
    cdef int new_pos[64]
    cdef int env_bit[64]
    cdef int seq[64]
    cdef int m, a, env_rank = 0
    if n_modes > 64:
        raise ValueError("at most 64 spin-orbitals supported")
    for m in range(n_modes):
        in_subset[m] = 0
    for a in range(n_sub):
        in_subset[subset[a]] = 1
        new_pos[subset[a]] = a
    for m in range(n_modes):
        if not in_subset[m]:
            new_pos[m] = n_sub + env_rank
            env_bit[m] = env_rank
            env_rank += 1
    sub_arr = np.empty(nc, dtype=np.int64)
    env_arr = np.empty(nc, dtype=np.uint64)
    sign_arr = np.empty(nc, dtype=np.int8)
    cdef long[::1] sub_idx = sub_arr
    cdef u64[::1] env_key = env_arr
    cdef signed char[::1] signs = sign_arr
    cdef Py_ssize_t j
    cdef u64 c, rest
    cdef long s
    cdef u64 e
    cdef int p, nk, x, y, inv
    for j in range(nc):
        c = cfg[j]
        s = 0
        e = 0
        nk = 0
        rest = c
        while rest:
            p = MEAO_POPCOUNT((rest & (~rest + 1)) - 1)
            rest &= rest - 1
            if in_subset[p]:
                s |= (<long>1) << new_pos[p]
            else:
                e |= (<u64>1) << env_bit[p]
            seq[nk] = new_pos[p]
            nk += 1
        inv = 0
        for x in range(nk):
            for y in range(x + 1, nk):
                if seq[x] > seq[y]:
                    inv += 1
        sub_idx[j] = s
        env_key[j] = e
        signs[j] = -1 if inv & 1 else 1
    return sub_arr, env_arr, sign_arr


cdef inline Py_ssize_t _bisect(const u64[::1] arr, Py_ssize_t n, u64 key) nogil:
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    while lo <= hi:
        mid = (lo + hi) >> 1
        if arr[mid] < key:
            lo = mid + 1
        elif arr[mid] > key:
            hi = mid - 1
        else:
            return mid
    return -1


def one_body_elements(configs, p, q, coeff):
    """Sparse matrix elements of sum_t coeff[t] f+_{p[t]} f_{q[t]}."""
    cdef const u64[::1] cfg = np.ascontiguousarray(configs, dtype=np.uint64)
    cdef const long[::1] pm = np.ascontiguousarray(p, dtype=np.int64)
    cdef const long[::1] qm = np.ascontiguousarray(q, dtype=np.int64)
    cdef const double[::1] cf = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t nc = cfg.shape[0]
    cdef Py_ssize_t nt = pm.shape[0]
    rows_arr = np.empty(nc * nt, dtype=np.int64)
    cols_arr = np.empty(nc * nt, dtype=np.int64)
    vals_arr = np.empty(nc * nt, dtype=np.float64)
    cdef long[::1] rows = rows_arr
    cdef long[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef Py_ssize_t out = 0, j, i, t
    cdef int pt, qt, sign
    cdef double ct
    cdef u64 c, c1, c2
    for t in range(nt):
        pt = <int>pm[t]
        qt = <int>qm[t]
        ct = cf[t]
        for j in range(nc):
            c = cfg[j]
            if not (c >> qt) & 1:
                continue
            sign = _parity_below(c, qt)
            c1 = c & ~((<u64>1) << qt)
            if (c1 >> pt) & 1:
                continue
            sign *= _parity_below(c1, pt)
            c2 = c1 | ((<u64>1) << pt)
            i = _bisect(cfg, nc, c2)
            if i < 0:
                continue
            rows[out] = i
            cols[out] = j
            vals[out] = ct * sign
            out += 1
    return rows_arr[:out].copy(), cols_arr[:out].copy(), vals_arr[:out].copy()
