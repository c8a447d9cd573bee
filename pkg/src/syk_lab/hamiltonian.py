"""Sparse Hermitian builders for every Hamiltonian used here: fermionic SYK,
PH-symmetrized SYK, free-fermion hopping, hard-core-bosonic SYK, the battery
reference H0 = w J^y, and the Dicke model on the symmetric-spin + photon space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .couplings import CouplingTensor, HoppingMatrix, site_pairs
from .fock import FullBasis, SectorBasis, full_basis

PRUNE_TOL = 1e-15


@dataclass(frozen=True)
class SparseHermitian:
    """CSR complex Hermitian matrix tagged with the basis it acts on."""

    matrix: sp.csr_matrix = field(repr=False)
    basis: object  # SectorBasis | FullBasis | DickeSpace

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.getH()
        return float(np.abs(d.data).max()) if d.nnz else 0.0

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class DickeSpace:
    """Symmetric (j = N/2) collective-spin sector times a truncated photon Fock space.

    Basis index = k * (photon_cutoff + 1) + n_ph, where k = 0..N labels the
    spin projection m = k - N/2 and n_ph = 0..photon_cutoff.
    """

    n_atoms: int
    photon_cutoff: int

    @property
    def dim(self) -> int:
        return (self.n_atoms + 1) * (self.photon_cutoff + 1)

    def index(self, k: int, n_ph: int) -> int:
        return k * (self.photon_cutoff + 1) + n_ph


def _to_csr(rows, cols, vals, dim) -> sp.csr_matrix:
    m = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    m.data[np.abs(m.data) < PRUNE_TOL] = 0.0
    m.eliminate_zeros()
    return m


def _quartic_matrix(tensor: CouplingTensor, basis, fermionic: bool) -> sp.csr_matrix:
    n = tensor.n_sites
    if basis.n_sites != n:
        raise ValueError(f"basis has {basis.n_sites} sites, tensor has {n}")
    pairs = site_pairs(n)
    pair_a = np.array([p[0] for p in pairs], dtype=np.int64)
    pair_b = np.array([p[1] for p in pairs], dtype=np.int64)
    pref = (2.0 * n) ** (-1.5)
    rows, cols, vals = _kernels.quartic_coo(
        np.asarray(basis.states, dtype=np.int64), n, pair_a, pair_b,
        tensor.pair_matrix(), pref, fermionic,
    )
    return _to_csr(rows, cols, vals, basis.dim)


def _bilinear_matrix(tmat: np.ndarray, basis, fermionic: bool = True) -> sp.csr_matrix:
    rows, cols, vals = _kernels.bilinear_coo(
        np.asarray(basis.states, dtype=np.int64),
        np.ascontiguousarray(tmat, dtype=np.complex128), fermionic,
    )
    return _to_csr(rows, cols, vals, basis.dim)


def _number_diagonal(basis) -> np.ndarray:
    return np.bitwise_count(np.asarray(basis.states, dtype=np.uint64)).astype(np.float64)


def build_syk(tensor: CouplingTensor, mu: float, basis) -> SparseHermitian:
    """H = sum J~_ijkl/(2N)^{3/2} c†_i c†_j c_k c_l - mu sum c†_i c_i on the given basis."""
    h = _quartic_matrix(tensor, basis, fermionic=True)
    if mu != 0.0:
        h = h - sp.diags(mu * _number_diagonal(basis), format="csr")
    return SparseHermitian(h.tocsr(), basis)


def build_syk_quartic(tensor: CouplingTensor, basis) -> SparseHermitian:
    """The interaction part alone (mu = 0); the battery charging Hamiltonian."""
    return build_syk(tensor, 0.0, basis)


def ph_correction_matrix(tensor: CouplingTensor) -> np.ndarray:
    """Coefficients T_ab of the bilinear that restores particle-hole symmetry.

    From the four Kronecker-delta terms with weight J~_ijkl/2; the 1/(2N)^{3/2}
    prefactor is applied by the builder.
    """
    n = tensor.n_sites
    t = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            acc = 0.0 + 0.0j
            for i in range(n):
                acc += tensor.value(i, a, i, b)   # delta_ik
                acc -= tensor.value(i, a, b, i)   # delta_il
                acc -= tensor.value(a, i, i, b)   # delta_jk
                acc += tensor.value(a, i, b, i)   # delta_jl
            t[a, b] = 0.5 * acc
    return t


def build_syk_ph(tensor: CouplingTensor, mu: float, basis) -> SparseHermitian:
    """SYK with the two-equal-index subtractions that make PH an exact symmetry at mu=0."""
    base = build_syk(tensor, mu, basis)
    n = tensor.n_sites
    corr = _bilinear_matrix(ph_correction_matrix(tensor) * (2.0 * n) ** (-1.5), basis)
    return SparseHermitian((base.matrix + corr).tocsr(), basis)


def build_free_fermion(hopping: HoppingMatrix, basis) -> SparseHermitian:
    """H = (1/sqrt(N)) sum t_ij c†_i c_j restricted to the basis."""
    n = hopping.n_sites
    if basis.n_sites != n:
        raise ValueError(f"basis has {basis.n_sites} sites, hopping has {n}")
    return SparseHermitian(_bilinear_matrix(hopping.entries / np.sqrt(n), basis), basis)


def build_bosonic_syk(tensor: CouplingTensor, basis) -> SparseHermitian:
    """Same quartic sum with hard-core bosons: no Jordan-Wigner strings, no mu term."""
    return SparseHermitian(_quartic_matrix(tensor, basis, fermionic=False), basis)


def build_charge_operator(basis) -> SparseHermitian:
    """Q = sum_i c†_i c_i (diagonal popcount)."""
    return SparseHermitian(sp.diags(_number_diagonal(basis), format="csr"), basis)


def build_battery_h0(n_sites: int, omega: float) -> SparseHermitian:
    """H0 = (omega/2) sum_j sigma^y_j on the full 2^N space.

    In the occupation basis sigma^y|0> = -i|1>, sigma^y|1> = +i|0>.
    """
    basis = full_basis(n_sites)
    dim = basis.dim
    states = np.arange(dim, dtype=np.int64)
    rows = np.empty(n_sites * dim, dtype=np.int64)
    cols = np.empty(n_sites * dim, dtype=np.int64)
    vals = np.empty(n_sites * dim, dtype=complex)
    for j in range(n_sites):
        bit = 1 << j
        lo = j * dim
        occupied = (states & bit) != 0
        rows[lo:lo + dim] = states ^ bit
        cols[lo:lo + dim] = states
        vals[lo:lo + dim] = np.where(occupied, 0.5j * omega, -0.5j * omega)
    return SparseHermitian(_to_csr(rows, cols, vals, dim), basis)


def battery_ground_state(n_sites: int) -> np.ndarray:
    """Ground state of H0: every spin in the sigma^y = -1 state (|0> + i|1>)/sqrt(2)."""
    states = np.arange(1 << n_sites, dtype=np.uint64)
    return (1j ** np.bitwise_count(states).astype(np.float64)) / 2.0 ** (n_sites / 2.0)


def build_dicke(n_atoms: int, omega: float, lam: float, photon_cutoff: int,
                rescale: bool = False) -> SparseHermitian:
    """Dicke Hamiltonian w[a†a + J^z + 2 lam' (J+ + J-)(a† + a)] with counter-rotating terms.

    lam is dimensionless; rescale=True divides it by sqrt(N). Restricted to the
    maximal-spin sector j = N/2, photon number capped at photon_cutoff.
    """
    if photon_cutoff < n_atoms:
        raise ValueError(
            f"photon_cutoff {photon_cutoff} < n_atoms {n_atoms}: initial Fock state missing")
    space = DickeSpace(n_atoms, photon_cutoff)
    lam_eff = lam / np.sqrt(n_atoms) if rescale else lam
    j = 0.5 * n_atoms
    nph_max = photon_cutoff
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    for k in range(n_atoms + 1):
        proj = k - j
        jp = np.sqrt(max(j * (j + 1) - proj * (proj + 1), 0.0))  # J+ |m> -> |m+1>
        for nph in range(nph_max + 1):
            idx = space.index(k, nph)
            add(idx, idx, omega * (nph + proj))
            if k < n_atoms:
                coup = 2.0 * lam_eff * omega * jp
                if nph < nph_max:   # J+ a†
                    add(space.index(k + 1, nph + 1), idx, coup * np.sqrt(nph + 1))
                if nph > 0:         # J+ a
                    add(space.index(k + 1, nph - 1), idx, coup * np.sqrt(nph))
    h = sp.csr_matrix((vals, (rows, cols)), shape=(space.dim, space.dim), dtype=complex)
    h = h + sp.tril(h, k=-1).getH()  # J- terms are the adjoints of the J+ ones
    h.data[np.abs(h.data) < PRUNE_TOL] = 0.0
    h.eliminate_zeros()
    return SparseHermitian(h.tocsr(), space)
