"""Hamiltonian families, Fock-block enumeration and Liouvillian dynamics.

Three model families are supported, all as dense Hermitian matrices built at
standard precision (their entries are exact small rationals or recorded
uniform draws, so promotion to the high-precision Lanczos loop is lossless):

* mixed-field Ising chain,  H = -sum_j [S_z^j S_z^{j+1} + h_x S_x^j + h_z S_z^j]
* XYZ Heisenberg chain,     H = sum_j [J_x S_x^j S_x^{j+1} + J_y S_y^j S_y^{j+1}
                                       + J_z S_z^j S_z^{j+1} - h_z S_z^j]
* quantum resonant system,  H = (1/2) sum_{n+m=k+l} C_nmkl a_n+ a_m+ a_k a_l
                            restricted to a conserved (N, M) block.

Both chains are periodic (site L+1 is site 1).  The spin operators default to
Pauli matrices; a spin-1/2 convention (S = sigma/2) is available as a switch.

The Liouvillian L = [H, .] acts on flattened d x d operators.  It is applied
through the matrix commutator at the working precision of the Lanczos loop
and never materialized as a d**2 x d**2 matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from gmpy2 import mpc, mpfr

from .precision import (
    ContractViolation,
    DimensionError,
    HVector,
    Precision,
    symmetric_eigen,
)


class ModelError(ValueError):
    """Invalid model parameters."""


SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def spin_matrices(convention: str = "pauli") -> dict:
    """Single-site spin operators for the requested normalization."""
    if convention == "pauli":
        s = 1.0
    elif convention == "half":
        s = 0.5
    else:
        raise ModelError(f"unknown spin convention {convention!r}")
    return {"x": s * SIGMA_X, "y": s * SIGMA_Y, "z": s * SIGMA_Z}


def site_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a single-site operator at ``site`` (0-based) in an L-site chain."""
    mat = np.array([[1.0 + 0.0j]])
    for j in range(n_sites):
        mat = np.kron(mat, op if j == site else np.eye(2, dtype=complex))
    return mat


def _as_real_symmetric(h: np.ndarray) -> np.ndarray:
    if np.max(np.abs(h.imag)) > 1e-12 * max(np.max(np.abs(h.real)), 1.0):
        return h
    return np.ascontiguousarray(h.real)


def build_ising(L: int, h_x: float, h_z: float, convention: str = "pauli") -> np.ndarray:
    """Periodic mixed-field Ising chain on L sites (dense 2**L x 2**L)."""
    if L < 3:
        raise ModelError(f"Ising chain needs L >= 3 (periodic), got L={L}")
    spins = spin_matrices(convention)
    dim = 2**L
    h = np.zeros((dim, dim), dtype=complex)
    for j in range(L):
        jp = (j + 1) % L
        h -= site_operator(spins["z"], j, L) @ site_operator(spins["z"], jp, L)
        h -= h_x * site_operator(spins["x"], j, L)
        h -= h_z * site_operator(spins["z"], j, L)
    return _as_real_symmetric(h)


def build_xyz(
    L: int, J_x: float, J_y: float, J_z: float, h_z: float, convention: str = "pauli"
) -> np.ndarray:
    """Periodic XYZ chain with a z-direction magnetic field."""
    if L < 3:
        raise ModelError(f"XYZ chain needs L >= 3 (periodic), got L={L}")
    spins = spin_matrices(convention)
    dim = 2**L
    h = np.zeros((dim, dim), dtype=complex)
    couplings = {"x": J_x, "y": J_y, "z": J_z}
    for j in range(L):
        jp = (j + 1) % L
        for a, J in couplings.items():
            h += J * site_operator(spins[a], j, L) @ site_operator(spins[a], jp, L)
        h -= h_z * site_operator(spins["z"], j, L)
    return _as_real_symmetric(h)


# -- quantum resonant systems -----------------------------------------------


@dataclass(frozen=True)
class FockBlock:
    """The finite Fock basis of one conserved (N, M) block.

    ``occupations`` lists every tuple (occ_0, ..., occ_M) with
    sum(occ) = N and sum(n * occ_n) = M, sorted lexicographically.
    """

    n_total: int
    m_total: int
    occupations: tuple

    @property
    def dim(self) -> int:
        return len(self.occupations)

    def index(self, occ) -> int:
        return self.occupations.index(tuple(occ))


def enumerate_fock(N: int, M: int) -> FockBlock:
    """Enumerate the (N, M) block deterministically.

    The block dimension equals the number of partitions of M into at most
    N parts.
    """
    if N < 1 or M < 0:
        raise ModelError(f"need N >= 1 and M >= 0, got N={N}, M={M}")
    states = []

    def fill(mode: int, n_left: int, m_left: int, occ: list):
        if mode == 0:
            if m_left == 0:
                occ[0] = n_left
                states.append(tuple(occ))
            return
        max_occ = min(n_left, m_left // mode)
        for c in range(max_occ + 1):
            occ[mode] = c
            fill(mode - 1, n_left - c, m_left - c * mode, occ)
        occ[mode] = 0

    fill(M, N, M, [0] * (M + 1))
    return FockBlock(N, M, tuple(sorted(states)))


def canonical_quartet(n: int, m: int, k: int, l: int) -> tuple:
    """Representative of the coupling-symmetry orbit of (n, m, k, l).

    The couplings satisfy C_nmkl = C_klnm = C_nmlk (and hence C_mnkl), so a
    single value per orbit determines the tensor.
    """
    p = (n, m) if n <= m else (m, n)
    q = (k, l) if k <= l else (l, k)
    return p + q if p <= q else q + p


def qrs_couplings(M: int, kind: str, rng_seed: int | None = None) -> dict:
    """Coupling values per canonical quartet for every resonant total 0..M.

    * ``integrable``: 1 when any index is 0, else 0.
    * ``chaotic``: one Uniform(0, 1) draw per symmetry orbit, enumerated in
      a fixed lexicographic order so a seed pins the whole tensor.
    """
    if kind == "integrable":
        couplings = {}
        for s in range(M + 1):
            pairs = [(a, s - a) for a in range(s // 2 + 1)]
            for i, p in enumerate(pairs):
                for q in pairs[i:]:
                    couplings[p + q] = 1.0 if 0 in p + q else 0.0
        return couplings
    if kind == "chaotic":
        rng = np.random.default_rng(rng_seed)
        couplings = {}
        for s in range(M + 1):
            pairs = [(a, s - a) for a in range(s // 2 + 1)]
            for i, p in enumerate(pairs):
                for q in pairs[i:]:
                    couplings[p + q] = float(rng.random())
        return couplings
    raise ModelError(f"unknown coupling kind {kind!r}")


def build_qrs(
    N: int, M: int, coupling: str = "integrable", rng_seed: int | None = None
) -> np.ndarray:
    """Resonant quartic Hamiltonian restricted to the (N, M) block.

    Matrix elements carry the usual bosonic sqrt(occupation) ladder factors;
    the sum runs over all ordered index quartets with n + m = k + l, with the
    1/2 prefactor of the definition.
    """
    block = enumerate_fock(N, M)
    couplings = qrs_couplings(M, coupling, rng_seed)
    index = {occ: i for i, occ in enumerate(block.occupations)}
    h = np.zeros((block.dim, block.dim))
    for col, occ in enumerate(block.occupations):
        for s in range(M + 1):
            for n in range(s + 1):
                m = s - n
                for k in range(s + 1):
                    l = s - k
                    c = couplings[canonical_quartet(n, m, k, l)]
                    if c == 0.0:
                        continue
                    t = list(occ)
                    if t[l] == 0:
                        continue
                    amp = t[l]
                    t[l] -= 1
                    if t[k] == 0:
                        continue
                    amp *= t[k]
                    t[k] -= 1
                    t[m] += 1
                    amp *= t[m]
                    t[n] += 1
                    amp *= t[n]
                    h[index[tuple(t)], col] += 0.5 * c * np.sqrt(amp)
    return h


# -- model specification ------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """One Hamiltonian instance: family, size, parameters and RNG seed."""

    family: str  # "ising" | "xyz" | "qrs"
    size: object  # L for chains, (N, M) for qrs
    params: dict = field(default_factory=dict)
    rng_seed: int | None = None
    convention: str = "pauli"

    def build(self) -> np.ndarray:
        if self.family == "ising":
            return build_ising(
                int(self.size), self.params["h_x"], self.params["h_z"], self.convention
            )
        if self.family == "xyz":
            return build_xyz(
                int(self.size),
                self.params["J_x"],
                self.params["J_y"],
                self.params["J_z"],
                self.params["h_z"],
                self.convention,
            )
        if self.family == "qrs":
            n, m = self.size
            return build_qrs(n, m, self.params["coupling"], self.rng_seed)
        raise ModelError(f"unknown family {self.family!r}")

    def with_rng_seed(self, seed: int) -> "ModelSpec":
        return ModelSpec(self.family, self.size, dict(self.params), seed, self.convention)


# -- Liouvillian and Hamiltonian actions -------------------------------------


def _check_hermitian(h: np.ndarray):
    scale = max(float(np.max(np.abs(h))), 1.0)
    if np.max(np.abs(h - h.conj().T)) > 8 * 2.0**-52 * scale:
        raise ContractViolation("Hamiltonian is not Hermitian")


def _sparse_rows(h: np.ndarray, precision: Precision):
    """Nonzero entries per row, promoted exactly to working precision."""
    real = not np.iscomplexobj(h)
    rows = []
    with precision.context():
        for i in range(h.shape[0]):
            row = []
            for k in np.nonzero(h[i])[0]:
                v = h[i, k]
                row.append((int(k), mpfr(float(v)) if real else mpc(complex(v))))
            rows.append(row)
    return rows


class Liouvillian:
    """Commutator map O -> H O - O H on flattened operators.

    The Hamiltonian's sparsity is precomputed once; one application costs
    2 * nnz(H) * d fused multiply-accumulates at working precision.
    """

    def __init__(self, h: np.ndarray, precision: Precision):
        h = np.asarray(h)
        _check_hermitian(h)
        self.h = h
        self.precision = precision
        self.d = h.shape[0]
        self.dim = self.d * self.d
        self._rows = _sparse_rows(h, precision)
        self._cols = _sparse_rows(h.T, precision)  # cols[j] holds (k, H[k, j])

    def apply(self, v: HVector) -> HVector:
        if len(v) != self.dim:
            raise DimensionError(f"expected length {self.dim}, got {len(v)}")
        d = self.d
        o = v.entries
        with self.precision.context():
            out = [mpc(0)] * self.dim
            for i in range(d):
                ib = i * d
                for k, hik in self._rows[i]:
                    kb = k * d
                    for j in range(d):
                        out[ib + j] += hik * o[kb + j]
            for j in range(d):
                for k, hkj in self._cols[j]:
                    for i in range(d):
                        out[i * d + j] -= o[i * d + k] * hkj
        return HVector(out, self.precision)

    __call__ = apply


class HamiltonianAction:
    """Matrix-vector action of H on Hilbert-space states at working precision."""

    def __init__(self, h: np.ndarray, precision: Precision):
        h = np.asarray(h)
        _check_hermitian(h)
        self.h = h
        self.precision = precision
        self.dim = h.shape[0]
        self._rows = _sparse_rows(h, precision)

    def apply(self, v: HVector) -> HVector:
        if len(v) != self.dim:
            raise DimensionError(f"expected length {self.dim}, got {len(v)}")
        x = v.entries
        with self.precision.context():
            out = []
            for row in self._rows:
                s = mpc(0)
                for k, hik in row:
                    s += hik * x[k]
                out.append(s)
        return HVector(out, self.precision)

    __call__ = apply


def liouvillian_apply(h: np.ndarray, o: HVector) -> HVector:
    """One-off commutator [H, O] on a flattened operator (see Liouvillian)."""
    return Liouvillian(h, o.precision).apply(o)


# -- spectral decomposition with degeneracy clustering ------------------------


def _single_linkage(values: np.ndarray, tol: float) -> list:
    """Group indices of ``values`` into clusters split at sorted gaps > tol."""
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    if len(values) == 0:
        return []
    breaks = np.nonzero(np.diff(sorted_vals) > tol)[0]
    return [np.sort(chunk) for chunk in np.split(order, breaks + 1)]


@dataclass
class SpectralDecomposition:
    """Eigendecomposition of H with clustered Liouvillian frequencies.

    The Liouvillian eigenpairs are implicitly (omega_ij = E_i - E_j,
    |E_i><E_j|); a flat pair index alpha = i * d + j matches the row-major
    flattening used for operator vectors.  ``frequency_clusters`` groups pair
    indices whose frequencies coincide within ``cluster_tol`` under single
    linkage; ``energy_clusters`` does the same for the energies themselves
    (used by the state-space variant).
    """

    energies: np.ndarray
    vectors: np.ndarray
    cluster_tol: float
    energy_cluster_tol: float
    frequencies: np.ndarray
    frequency_clusters: list
    energy_clusters: list

    @property
    def d(self) -> int:
        return len(self.energies)


def spectral(h: np.ndarray, cluster_tol: float | None = None) -> SpectralDecomposition:
    """Diagonalize H and cluster degenerate Liouvillian frequencies.

    The default tolerance is 1e-8 times the spectral range of the
    Liouvillian; exact rational degeneracies of integrable spectra must be
    captured while generic spacings stay resolved.
    """
    energies, vectors = symmetric_eigen(h)
    freqs = np.subtract.outer(energies, energies).ravel()
    freq_range = float(freqs.max() - freqs.min()) if len(freqs) else 0.0
    tol = 1e-8 * freq_range if cluster_tol is None else float(cluster_tol)
    e_range = float(energies[-1] - energies[0]) if len(energies) else 0.0
    e_tol = 1e-8 * e_range if cluster_tol is None else float(cluster_tol)
    return SpectralDecomposition(
        energies=energies,
        vectors=vectors,
        cluster_tol=tol,
        energy_cluster_tol=e_tol,
        frequencies=freqs,
        frequency_clusters=_single_linkage(freqs, tol),
        energy_clusters=_single_linkage(energies, e_tol),
    )
