"""Numba kernels for sparse Hamiltonian assembly over bitmask bases.

Entry counts per basis state are exact, so COO arrays are allocated once and
filled sequentially; duplicate (row, col) entries are summed by the CSR
constructor downstream.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> 1) & 0x5555555555555555)
    x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
    return (x * 0x0101010101010101) >> 56


@njit(cache=True, inline="always")
def _parity_below(state, site):
    # (-1)^(# occupied sites below `site`)
    mask = (np.int64(1) << site) - 1
    return -1 if _popcount(state & mask) & 1 else 1


@njit(cache=True)
def quartic_coo(states, n_sites, pair_a, pair_b, vpair, pref, fermionic):
    """COO entries of sum_{p,q pairs} 4*pref*V[p,q] c†_i c†_j c_k c_l on a bitmask basis.

    p = (i<j) creates, q = (k<l) annihilates; V is the Hermitian pair matrix of
    couplings. With fermionic=False the string signs are dropped (hard-core
    bosons), leaving the occupation rules unchanged.
    """
    npair = len(pair_a)
    n_states = len(states)
    # entries per state = C(Q,2) * C(N-Q+2,2), exact
    total = 0
    for c in range(n_states):
        q_occ = _popcount(states[c])
        nfree = n_sites - q_occ + 2
        total += (q_occ * (q_occ - 1) // 2) * (nfree * (nfree - 1) // 2)

    rows = np.empty(total, dtype=np.int32)
    cols = np.empty(total, dtype=np.int32)
    vals = np.empty(total, dtype=np.complex128)

    occ = np.empty(n_sites, dtype=np.int64)
    free = np.empty(n_sites, dtype=np.int64)
    pair_index = np.full((n_sites, n_sites), -1, dtype=np.int64)
    for p in range(npair):
        pair_index[pair_a[p], pair_b[p]] = p

    pos = 0
    for c in range(n_states):
        s = states[c]
        nocc = 0
        for site in range(n_sites):
            if (s >> site) & 1:
                occ[nocc] = site
                nocc += 1
        for a in range(nocc):
            for b in range(a + 1, nocc):
                k = occ[a]
                l = occ[b]
                q = pair_index[k, l]
                # apply c_l then c_k (right-to-left)
                sign = 1
                if fermionic:
                    sign *= _parity_below(s, l)
                s1 = s & ~(np.int64(1) << l)
                if fermionic:
                    sign *= _parity_below(s1, k)
                s2 = s1 & ~(np.int64(1) << k)
                nfree = 0
                for site in range(n_sites):
                    if not (s2 >> site) & 1:
                        free[nfree] = site
                        nfree += 1
                for fa in range(nfree):
                    for fb in range(fa + 1, nfree):
                        i = free[fa]
                        j = free[fb]
                        p = pair_index[i, j]
                        # apply c†_j then c†_i
                        sign2 = sign
                        if fermionic:
                            sign2 *= _parity_below(s2, j)
                        s3 = s2 | (np.int64(1) << j)
                        if fermionic:
                            sign2 *= _parity_below(s3, i)
                        s4 = s3 | (np.int64(1) << i)
                        rows[pos] = np.searchsorted(states, s4)
                        cols[pos] = c
                        vals[pos] = 4.0 * pref * vpair[p, q] * sign2
                        pos += 1
    return rows[:pos], cols[:pos], vals[:pos]


@njit(cache=True)
def bilinear_coo(states, tmat, fermionic):
    """COO entries of sum_{i,j} T[i,j] c†_i c_j on a bitmask basis."""
    n_sites = tmat.shape[0]
    n_states = len(states)
    total = 0
    for c in range(n_states):
        q_occ = _popcount(states[c])
        total += q_occ * (n_sites - q_occ + 1)

    rows = np.empty(total, dtype=np.int32)
    cols = np.empty(total, dtype=np.int32)
    vals = np.empty(total, dtype=np.complex128)

    pos = 0
    for c in range(n_states):
        s = states[c]
        for j in range(n_sites):
            if not (s >> j) & 1:
                continue
            sign = _parity_below(s, j) if fermionic else 1
            s1 = s & ~(np.int64(1) << j)
            for i in range(n_sites):
                if (s1 >> i) & 1:
                    continue
                sign2 = sign * (_parity_below(s1, i) if fermionic else 1)
                s2 = s1 | (np.int64(1) << i)
                rows[pos] = np.searchsorted(states, s2)
                cols[pos] = c
                vals[pos] = tmat[i, j] * sign2
                pos += 1
    return rows[:pos], cols[:pos], vals[:pos]


def warmup():
    """Trigger JIT compilation on tiny inputs (call before forking workers)."""
    states = np.array([3, 5, 6, 9, 10, 12], dtype=np.int64)
    pa = np.array([0, 0, 0, 1, 1, 2], dtype=np.int64)
    pb = np.array([1, 2, 3, 2, 3, 3], dtype=np.int64)
    v = np.eye(6, dtype=np.complex128)
    quartic_coo(states, 4, pa, pb, v, 1.0, True)
    quartic_coo(states, 4, pa, pb, v, 1.0, False)
    bilinear_coo(states, np.eye(4, dtype=np.complex128), True)
    bilinear_coo(states, np.eye(4, dtype=np.complex128), False)
