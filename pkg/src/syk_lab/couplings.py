"""Disordered coupling ensembles: the complex quartic tensor, the Hermitian
hopping matrix, and deterministic splittable RNG streams for disorder averages.

Quartic couplings are stored once per canonical quadruple (i<j, k<l, with the
pair (i,j) lexicographically <= (k,l)); antisymmetry and Hermiticity are
restored by sign/conjugation on access. The 1/(2N)^{3/2} prefactor is *not*
part of the stored values; it belongs to the Hamiltonian builders.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

_MAGIC = b"SYKJ"
_VERSION = 1


def site_pairs(n_sites: int) -> list[tuple[int, int]]:
    """Ordered pairs (i<j), lexicographic; index into the pair matrix."""
    return list(combinations(range(n_sites), 2))


@dataclass(frozen=True)
class CouplingTensor:
    """Quartic couplings with antisymmetry/Hermiticity by canonical storage."""

    n_sites: int
    variance_scale: float
    entries: dict = field(repr=False)  # (i, j, k, l) canonical -> complex

    def value(self, i: int, j: int, k: int, l: int) -> complex:
        """Tensor element for arbitrary index order (0 when i==j or k==l)."""
        if i == j or k == l:
            return 0.0 + 0.0j
        sign = 1.0
        if i > j:
            i, j = j, i
            sign = -sign
        if k > l:
            k, l = l, k
            sign = -sign
        if (i, j) <= (k, l):
            return sign * self.entries[(i, j, k, l)]
        return sign * np.conj(self.entries[(k, l, i, j)])

    def pair_matrix(self) -> np.ndarray:
        """Dense Hermitian matrix V[p, q] over ordered site pairs, V[p,q] = J~_{(ij)(kl)}."""
        pairs = site_pairs(self.n_sites)
        npair = len(pairs)
        v = np.zeros((npair, npair), dtype=complex)
        for (a, (i, j)) in enumerate(pairs):
            for (b, (k, l)) in enumerate(pairs):
                if a <= b:
                    v[a, b] = self.entries[(i, j, k, l)]
                    v[b, a] = np.conj(v[a, b])
        return v

    def dump(self, path) -> None:
        """Binary layout: magic 'SYKJ', version u32, N u32, J f64, then canonical
        entries as (i, j, k, l: u8 each, re: f64, im: f64), little endian."""
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IId", _VERSION, self.n_sites, self.variance_scale))
            for (i, j, k, l) in sorted(self.entries):
                val = self.entries[(i, j, k, l)]
                fh.write(struct.pack("<BBBBdd", i, j, k, l, val.real, val.imag))

    @classmethod
    def load(cls, path) -> "CouplingTensor":
        with open(path, "rb") as fh:
            if fh.read(4) != _MAGIC:
                raise ValueError(f"{path}: not a coupling-tensor file (bad magic)")
            version, n_sites = struct.unpack("<II", fh.read(8))
            if version != _VERSION:
                raise ValueError(f"{path}: unsupported version {version}")
            (scale,) = struct.unpack("<d", fh.read(8))
            entries = {}
            rec = struct.Struct("<BBBBdd")
            while chunk := fh.read(rec.size):
                i, j, k, l, re, im = rec.unpack(chunk)
                entries[(i, j, k, l)] = complex(re, im)
        return cls(n_sites, scale, entries)


@dataclass(frozen=True)
class HoppingMatrix:
    """Hermitian random hopping amplitudes t_ij."""

    n_sites: int
    variance_scale: float
    entries: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DisorderEnsemble:
    """Deterministic, splittable per-realization RNG streams.

    stream(r) is a pure function of (master_seed, r): the same bits come out
    no matter how many other streams were consumed, or in which order.
    """

    master_seed: int
    realization_count: int

    def __post_init__(self):
        if self.realization_count < 1:
            raise ValueError("realization_count must be >= 1")

    def stream(self, realization: int) -> np.random.Generator:
        if not 0 <= realization < self.realization_count:
            raise ValueError(f"realization {realization} outside [0, {self.realization_count})")
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(realization,))
        return np.random.default_rng(seq)


def ensemble_streams(master_seed: int, realization_count: int) -> DisorderEnsemble:
    return DisorderEnsemble(master_seed, realization_count)


def sample_syk(n_sites: int, j_scale: float, rng: np.random.Generator) -> CouplingTensor:
    """Draw a quartic tensor: <|J~|^2> = J^2 off the pair diagonal, real N(0, J^2) on it.

    Complex entries get independent real/imag parts of variance J^2/2 each, so
    the total second moment is exactly J^2.
    """
    if n_sites < 4:
        raise ValueError(f"n_sites {n_sites} < 4: no quartic coupling exists")
    pairs = site_pairs(n_sites)
    npair = len(pairs)
    n_off = npair * (npair - 1) // 2
    off = rng.normal(0.0, j_scale / np.sqrt(2.0), size=(n_off, 2))
    diag = rng.normal(0.0, j_scale, size=npair)
    entries = {}
    pos = 0
    for a in range(npair):
        i, j = pairs[a]
        entries[(i, j, i, j)] = complex(diag[a])
        for b in range(a + 1, npair):
            k, l = pairs[b]
            entries[(i, j, k, l)] = complex(off[pos, 0], off[pos, 1])
            pos += 1
    return CouplingTensor(n_sites, j_scale, entries)


def sample_hopping(n_sites: int, t_scale: float, rng: np.random.Generator) -> HoppingMatrix:
    """Hermitian hopping matrix: <|t_ij|^2> = t^2 off-diagonal, real N(0, t^2) diagonal."""
    if n_sites < 2:
        raise ValueError(f"n_sites {n_sites} < 2")
    m = np.zeros((n_sites, n_sites), dtype=complex)
    iu, ju = np.triu_indices(n_sites, k=1)
    off = rng.normal(0.0, t_scale / np.sqrt(2.0), size=(len(iu), 2))
    m[iu, ju] = off[:, 0] + 1j * off[:, 1]
    m += m.conj().T
    m[np.diag_indices(n_sites)] = rng.normal(0.0, t_scale, size=n_sites)
    m.flags.writeable = False
    return HoppingMatrix(n_sites, t_scale, m)
