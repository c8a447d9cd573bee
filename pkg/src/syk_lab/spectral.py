"""Dense spectra and everything derived from them: gap statistics, thermal
entropy from the grand spectrum, bipartite entanglement entropy, and the
Lehmann-representation retarded Green's function with Lorentzian broadening.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .couplings import CouplingTensor
from .errors import ResourceError
from .fock import PureState, SectorBasis, enumerate_sector, partial_trace
from .hamiltonian import SparseHermitian, build_syk

VECTOR_DIM_CAP = 13000
VALUES_DIM_CAP = 16384
DEGENERACY_RTOL = 1e-10  # ground pair threshold, relative to the spectral scale


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues, optional eigenvector matrix (column k = mode k)."""

    values: np.ndarray = field(repr=False)
    vectors: np.ndarray | None = field(repr=False, default=None)
    basis: object = None

    @property
    def dim(self) -> int:
        return len(self.values)

    def residual(self, h: SparseHermitian) -> float:
        """max_k ||H v_k - E_k v_k|| / ||H||, for tests."""
        if self.vectors is None:
            raise ValueError("eigenvectors not stored")
        r = h.matrix @ self.vectors - self.vectors * self.values
        scale = max(np.abs(self.values).max(), 1e-300)
        return float(np.linalg.norm(r, axis=0).max() / scale)


def diagonalize(h: SparseHermitian, want_vectors: bool = True) -> EigenSystem:
    """Dense Hermitian solve; sector dimensions up to ~13k are in scope here."""
    dim = h.dim
    if want_vectors and dim > VECTOR_DIM_CAP:
        raise ResourceError(
            f"dim {dim} > {VECTOR_DIM_CAP} for a dense eigenvector solve; "
            "use the Krylov propagation path in syk_lab.dynamics")
    if dim > VALUES_DIM_CAP:
        raise ResourceError(f"dim {dim} > {VALUES_DIM_CAP} for a dense solve")
    dense = h.to_dense()
    if want_vectors:
        values, vectors = la.eigh(dense)
        return EigenSystem(values, vectors, h.basis)
    return EigenSystem(la.eigh(dense, eigvals_only=True), None, h.basis)


@dataclass(frozen=True)
class GrandSpectrum:
    """Per-charge-sector eigensystems of a number-conserving Hamiltonian."""

    n_sites: int
    sectors: tuple  # EigenSystem for Q = 0..N, basis = SectorBasis

    def all_values(self) -> np.ndarray:
        return np.sort(np.concatenate([e.values for e in self.sectors]))

    def ground_states(self):
        """(E0, [(Q, column index), ...]) within the degeneracy threshold."""
        e0 = min(float(e.values[0]) for e in self.sectors)
        scale = max(abs(float(e.values[-1])) for e in self.sectors)
        tol = DEGENERACY_RTOL * max(scale, 1e-300)
        hits = []
        for q, eig in enumerate(self.sectors):
            for idx in np.flatnonzero(eig.values <= e0 + tol):
                hits.append((q, int(idx)))
        return e0, hits


def grand_eigensystem(tensor: CouplingTensor, mu: float, *, builder=build_syk,
                      vector_sectors=()) -> GrandSpectrum:
    """Diagonalize every charge sector of the (number-conserving) model."""
    n = tensor.n_sites
    vec = set(vector_sectors)
    eigs = []
    for q in range(n + 1):
        basis = enumerate_sector(n, q)
        eigs.append(diagonalize(builder(tensor, mu, basis), want_vectors=q in vec))
    return GrandSpectrum(n, tuple(eigs))


def green_ready_spectrum(tensor: CouplingTensor, mu: float, *, builder=build_syk) -> GrandSpectrum:
    """Grand spectrum carrying eigenvectors for the ground-adjacent sectors only."""
    n = tensor.n_sites
    probe = grand_eigensystem(tensor, mu, builder=builder)
    _, hits = probe.ground_states()
    needed = set()
    for q, _ in hits:
        needed.update({q - 1, q, q + 1})
    needed = {q for q in needed if 0 <= q <= n}
    return grand_eigensystem(tensor, mu, builder=builder, vector_sectors=needed)


# -- thermodynamics ---------------------------------------------------------------

@dataclass(frozen=True)
class ThermoCurve:
    temperatures: np.ndarray
    free_energy_per_site: np.ndarray
    entropy_per_site: np.ndarray
    energy_per_site: np.ndarray


def thermodynamics(spectrum, t_grid, n_sites: int | None = None) -> ThermoCurve:
    """F, S, E per site from the grand many-body spectrum.

    F = -T ln Z with the log-sum-exp anchored at the ground energy;
    S = (<E> - F)/T. ``spectrum`` is a GrandSpectrum or a raw value array
    (then ``n_sites`` is required).
    """
    if isinstance(spectrum, GrandSpectrum):
        values, n = spectrum.all_values(), spectrum.n_sites
    else:
        values = np.sort(np.asarray(spectrum, dtype=float))
        if n_sites is None:
            raise ValueError("n_sites required for a raw spectrum")
        n = n_sites
    t_grid = np.asarray(t_grid, dtype=float)
    if (t_grid <= 0).any():
        raise ValueError("temperatures must be positive")
    e0 = values[0]
    shifted = values - e0
    f = np.empty_like(t_grid)
    e = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        w = np.exp(-shifted / t)
        z = w.sum()
        f[i] = e0 - t * np.log(z)
        e[i] = e0 + (shifted * w).sum() / z
    s = (e - f) / t_grid
    return ThermoCurve(t_grid, f / n, s / n, e / n)


# -- ground gap -------------------------------------------------------------------

@dataclass(frozen=True)
class GapStats:
    mean: float
    stderr: float
    n_kept: int
    n_degenerate: int


def ground_gap(ensemble, n_sites: int, mu: float, j_scale: float = 1.0,
               *, builder=build_syk) -> GapStats:
    """Disorder-averaged E1 - E0 of the half-filling sector.

    Realizations whose ground pair is degenerate (gap below 1e-10 of the
    spectral scale) are excluded from the mean and counted separately; if all
    realizations are degenerate the gap is reported as 0.
    """
    if n_sites % 2:
        raise ValueError("half filling needs even n_sites")
    basis = enumerate_sector(n_sites, n_sites // 2)
    if basis.dim < 2:
        raise ValueError("sector has fewer than 2 levels")
    from .couplings import sample_syk

    gaps, n_deg = [], 0
    for r in range(ensemble.realization_count):
        tensor = sample_syk(n_sites, j_scale, ensemble.stream(r))
        h = builder(tensor, mu, basis)
        values = la.eigh(h.to_dense(), eigvals_only=True)
        gap = float(values[1] - values[0])
        scale = max(abs(values[0]), abs(values[-1]), 1e-300)
        if gap < DEGENERACY_RTOL * scale:
            n_deg += 1
        else:
            gaps.append(gap)
    if not gaps:
        return GapStats(0.0, 0.0, 0, n_deg)
    gaps = np.array(gaps)
    stderr = float(gaps.std(ddof=1) / np.sqrt(len(gaps))) if len(gaps) > 1 else 0.0
    return GapStats(float(gaps.mean()), stderr, len(gaps), n_deg)


def level_spacing_ratio(values, fraction: float = 0.5) -> float:
    """Mean r-statistic over the central ``fraction`` of the sorted spectrum."""
    values = np.sort(np.asarray(values, dtype=float))
    n = len(values)
    lo = int(n * (1 - fraction) / 2)
    center = values[lo:n - lo]
    d = np.diff(center)
    d = d[d > 0]
    r = np.minimum(d[:-1], d[1:]) / np.maximum(d[:-1], d[1:])
    return float(r.mean())


# -- entanglement -----------------------------------------------------------------

def entanglement_entropy(ground: PureState, keep_sites: int) -> float:
    """Von Neumann entropy (nats) of the first ``keep_sites`` JW sites."""
    rho = partial_trace(ground, keep_sites)
    p = np.clip(rho.eigenvalues(), 0.0, None)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


# -- Lehmann Green's function -----------------------------------------------------

@dataclass(frozen=True)
class SpectralFunction:
    omega_grid: np.ndarray
    retarded_g: np.ndarray = field(repr=False)
    eta: float

    def sum_rule(self) -> float:
        return float(np.trapezoid(-self.retarded_g.imag / np.pi, self.omega_grid))


def annihilation_matrix(site: int, basis_from: SectorBasis, basis_to: SectorBasis):
    """Sparse c_site mapping sector Q to sector Q-1, with JW signs."""
    from .fock import apply_annihilate

    rows, cols, vals = [], [], []
    for col, s in enumerate(basis_from.states):
        res = apply_annihilate(site, int(s))
        if res is not None:
            s2, sign = res
            rows.append(basis_to.index_of(s2))
            cols.append(col)
            vals.append(float(sign))
    return sp.csr_matrix((vals, (rows, cols)), shape=(basis_to.dim, basis_from.dim))


def greens_lehmann(grand: GrandSpectrum, site: int, omega_grid, eta: float,
                   temperature: float = 0.0) -> SpectralFunction:
    """Retarded on-site Green's function from the Lehmann sum.

    At T=0 only the two ground-adjacent sectors contribute; degenerate ground
    states (within 1e-10 of the spectral scale, e.g. the mu=0 particle-hole
    case) are averaged with equal weights. At T>0 the full double sum is
    evaluated, which is kept as a cross-check for total dimension <= 2000.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    omega_grid = np.asarray(omega_grid, dtype=float)
    n = grand.n_sites
    if temperature == 0.0:
        e0, hits = grand.ground_states()
        g = np.zeros(len(omega_grid), dtype=complex)
        for q, idx in hits:
            eig = grand.sectors[q]
            if eig.vectors is None:
                raise ValueError(f"eigenvectors missing for ground sector Q={q}")
            psi0 = eig.vectors[:, idx]
            basis_q = eig.basis
            if q < n:
                up = grand.sectors[q + 1]
                if up.vectors is None:
                    raise ValueError(f"eigenvectors missing for sector Q={q + 1}")
                cdag_psi = annihilation_matrix(site, up.basis, basis_q).getH() @ psi0
                w = np.abs(up.vectors.conj().T @ cdag_psi) ** 2
                de = up.values - e0
                g += (w / (omega_grid[:, None] - de[None, :] + 1j * eta)).sum(axis=1)
            if q > 0:
                dn = grand.sectors[q - 1]
                if dn.vectors is None:
                    raise ValueError(f"eigenvectors missing for sector Q={q - 1}")
                c_psi = annihilation_matrix(site, basis_q, dn.basis) @ psi0
                w = np.abs(dn.vectors.conj().T @ c_psi) ** 2
                de = dn.values - e0
                g += (w / (omega_grid[:, None] + de[None, :] + 1j * eta)).sum(axis=1)
        g /= len(hits)
        return SpectralFunction(omega_grid, g, eta)

    # finite-temperature cross-check (small systems only)
    total_dim = sum(e.dim for e in grand.sectors)
    if total_dim > 2000:
        raise ResourceError(f"finite-T Lehmann sum capped at total dim 2000, got {total_dim}")
    beta = 1.0 / temperature
    e0 = min(float(e.values[0]) for e in grand.sectors)
    z = sum(np.exp(-beta * (e.values - e0)).sum() for e in grand.sectors)
    g = np.zeros(len(omega_grid), dtype=complex)
    for q in range(n):  # pairs (Q, Q+1); <n|c_i|m> with n in Q, m in Q+1
        lo, hi = grand.sectors[q], grand.sectors[q + 1]
        if lo.vectors is None or hi.vectors is None:
            raise ValueError("finite-T Lehmann sum needs eigenvectors for every sector")
        c_block = annihilation_matrix(site, hi.basis, lo.basis)
        m = lo.vectors.conj().T @ (c_block @ hi.vectors)
        w = np.abs(m) ** 2 * (np.exp(-beta * (lo.values[:, None] - e0))
                              + np.exp(-beta * (hi.values[None, :] - e0)))
        de = lo.values[:, None] - hi.values[None, :]
        for iw, omega in enumerate(omega_grid):
            g[iw] += (w / (omega + de + 1j * eta)).sum()
    return SpectralFunction(omega_grid, g / z, eta)


def default_eta(values, omega: float = 0.0, factor: float = 4.0) -> float:
    """Lorentzian width: ``factor`` times the mean level spacing near ``omega``."""
    values = np.sort(np.asarray(values, dtype=float))
    idx = np.searchsorted(values, omega)
    lo = max(idx - 25, 0)
    hi = min(idx + 25, len(values))
    window = values[lo:hi]
    if len(window) < 2:
        window = values
    return float(factor * np.diff(window).mean())


# -- CSV emitters -----------------------------------------------------------------

def _write_csv(path, header, columns):
    rows = zip(*columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" if isinstance(x, float) else str(x)
                              for x in row) + "\n")


def write_entropy_csv(path, temperatures, s_per_site, stderr):
    _write_csv(path, ["T", "S_per_site", "stderr"],
               [map(float, temperatures), map(float, s_per_site), map(float, stderr)])


def write_gap_csv(path, n_values, mean_gap, stderr, n_kept):
    _write_csv(path, ["N", "mean_gap", "stderr", "n_kept"],
               [n_values, map(float, mean_gap), map(float, stderr), n_kept])


def write_green_csv(path, omega, g):
    _write_csv(path, ["omega", "re_G", "im_G"],
               [map(float, omega), (float(x.real) for x in g), (float(x.imag) for x in g)])


def write_see_csv(path, n_a, s_ee, stderr):
    _write_csv(path, ["N_A", "S_EE", "stderr"],
               [n_a, map(float, s_ee), map(float, stderr)])
