"""Bit-level Fock space: sector enumeration, signed fermionic operators, partial trace.

Basis states are plain integers. Bit ``i`` (least significant = site 0) holds
the occupation of site ``i``, so a state with charge Q has popcount Q. The
fermionic sign convention counts occupied sites *below* the acted site, which
makes every sign a popcount of a masked word.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

ENUMERATION_CAP = 24   # largest N for sector enumeration
DENSE_CAP = 16         # largest N for full-space (2^N) work


def popcount(state: int) -> int:
    return int(state).bit_count()


def parity_below(state: int, site: int) -> int:
    """Sign (-1)^(# occupied sites j < site) of the Jordan-Wigner string."""
    return -1 if (int(state) & ((1 << site) - 1)).bit_count() & 1 else 1


@dataclass(frozen=True)
class SectorBasis:
    """All occupation bitmasks of ``n_sites`` sites with exactly ``charge`` set bits."""

    n_sites: int
    charge: int
    states: np.ndarray = field(repr=False)  # ascending int64

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, state: int) -> int:
        """Dense index of ``state``; raises KeyError if not in the sector."""
        pos = int(np.searchsorted(self.states, state))
        if pos == self.dim or self.states[pos] != state:
            raise KeyError(f"state {state:#b} not in sector (N={self.n_sites}, Q={self.charge})")
        return pos


@dataclass(frozen=True)
class FullBasis:
    """The full 2^N occupation basis; states are their own indices."""

    n_sites: int

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @property
    def states(self) -> np.ndarray:
        return np.arange(self.dim, dtype=np.int64)

    def index_of(self, state: int) -> int:
        if not 0 <= state < self.dim:
            raise KeyError(f"state {state} outside 2^{self.n_sites} space")
        return int(state)


def enumerate_sector(n_sites: int, charge: int) -> SectorBasis:
    """Ascending list of all bitmasks with ``charge`` of ``n_sites`` bits set."""
    if not 0 <= charge <= n_sites:
        raise ValueError(f"charge {charge} outside [0, {n_sites}]")
    if n_sites > ENUMERATION_CAP:
        raise ValueError(f"n_sites {n_sites} exceeds enumeration cap {ENUMERATION_CAP}")
    states = np.fromiter(
        (sum(1 << i for i in occ) for occ in combinations(range(n_sites), charge)),
        dtype=np.int64,
        count=comb(n_sites, charge),
    )
    states.sort()
    states.flags.writeable = False
    return SectorBasis(n_sites, charge, states)


def full_basis(n_sites: int) -> FullBasis:
    if n_sites > DENSE_CAP:
        raise ValueError(f"n_sites {n_sites} exceeds dense cap {DENSE_CAP}")
    return FullBasis(n_sites)


# -- elementary signed operators ------------------------------------------------

def apply_annihilate(site: int, state: int, fermionic: bool = True):
    """c_site |state>. Returns (state', sign) or None if the site is empty."""
    bit = 1 << site
    if not state & bit:
        return None
    sign = parity_below(state, site) if fermionic else 1
    return state & ~bit, sign


def apply_create(site: int, state: int, fermionic: bool = True):
    """c†_site |state>. Returns (state', sign) or None if the site is occupied."""
    bit = 1 << site
    if state & bit:
        return None
    sign = parity_below(state, site) if fermionic else 1
    return state | bit, sign


def apply_bilinear(i: int, j: int, state: int, fermionic: bool = True):
    """c†_i c_j |state>, applied right to left. Returns (state', sign) or None."""
    res = apply_annihilate(j, state, fermionic)
    if res is None:
        return None
    s, sign = res
    res = apply_create(i, s, fermionic)
    if res is None:
        return None
    s, sign2 = res
    return s, sign * sign2


def apply_quartic(i: int, j: int, k: int, l: int, state: int, fermionic: bool = True):
    """c†_i c†_j c_k c_l |state>, applied right to left (c_l first).

    Returns (state', sign) with the sign accumulated one elementary step at a
    time, or None when any step annihilates. With ``fermionic=False`` the
    operators are hard-core bosonic (same occupation rules, no signs).
    """
    s, total = state, 1
    for op, site in ((apply_annihilate, l), (apply_annihilate, k),
                     (apply_create, j), (apply_create, i)):
        res = op(site, s, fermionic)
        if res is None:
            return None
        s, sign = res
        total *= sign
    return s, total


# -- states and density matrices ------------------------------------------------

@dataclass(frozen=True)
class PureState:
    """Complex amplitudes over a SectorBasis or the full 2^N space."""

    basis: SectorBasis | FullBasis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.amplitudes) != self.basis.dim:
            raise ValueError(f"amplitude length {len(self.amplitudes)} != basis dim {self.basis.dim}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return PureState(self.basis, self.amplitudes / n)


def embed_full(state: PureState) -> PureState:
    """Embed a sector state into the full 2^N space (zero outside the sector)."""
    if isinstance(state.basis, FullBasis):
        return state
    basis = full_basis(state.basis.n_sites)
    amps = np.zeros(basis.dim, dtype=complex)
    amps[state.basis.states] = state.amplitudes
    return PureState(basis, amps)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace density matrix."""

    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = self.elements
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        defect = float(np.abs(m - m.conj().T).max())
        if defect > 1e-12:
            raise ValueError(f"density matrix not Hermitian: defect {defect:.2e}")

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def trace(self) -> float:
        return float(self.elements.trace().real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.elements)


def partial_trace(state: PureState, keep_sites: int) -> DensityMatrix:
    """Reduced density matrix of the first ``keep_sites`` JW sites of a full-space pure state."""
    if not isinstance(state.basis, FullBasis):
        raise ValueError("partial_trace needs a full-space state; embed_full() first")
    n = state.basis.n_sites
    if not 0 < keep_sites < n:
        raise ValueError(f"keep_sites must lie in (0, {n})")
    # index s = b * 2^keep + a with a the kept low bits
    m = state.amplitudes.reshape(1 << (n - keep_sites), 1 << keep_sites)
    rho = m.T @ m.conj()
    rho = 0.5 * (rho + rho.conj().T)  # scrub roundoff asymmetry
    return DensityMatrix(rho)
