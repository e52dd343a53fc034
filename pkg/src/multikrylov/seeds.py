"""Seed families for the block Krylov recursion and graded operator bases.

Seed families fix the "simple" directions the recursion starts from: all
single-site spins for chains, Fock-diagonal projectors or mode number
operators for resonant blocks, and near-aligned product states for the
state-space variant.  Construction order is fixed and documented field by
field so that Gram-Schmidt deflation, and therefore every downstream number,
is reproducible.

Raw members are synthesized directly at working precision.  That matters for
deflation: exact linear dependencies between raw members must show up as
residuals at the epsilon scale, far below the deflation threshold, which a
double-precision detour would destroy.

Graded bases serve the operator-size diagnostic only.  They are Hamiltonian
independent and consumed at standard precision, so they are plain numpy.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .models import FockBlock, ModelError, spin_matrices
from .precision import HVector, Precision, orthogonalize_against


@dataclass
class SeedFamily:
    """Mutually orthonormal seed vectors plus deflation bookkeeping."""

    kind: str
    vectors: list
    labels: list
    n_requested: int
    precision: Precision

    @property
    def m(self) -> int:
        return len(self.vectors)

    @property
    def n_deflated(self) -> int:
        return self.n_requested - self.m

    def rows_numpy(self) -> np.ndarray:
        return np.array([v.to_numpy() for v in self.vectors])


def orthonormalize_family(
    raw: list, labels: list, kind: str, precision: Precision
) -> SeedFamily:
    """Sequential two-pass Gram-Schmidt with deflation of dependent members.

    A member is deflated when its residual norm drops below sqrt(epsilon)
    times its original norm (members of zero norm deflate outright).
    """
    kept, kept_labels = [], []
    sqrt_eps = precision.sqrt_epsilon
    for v, label in zip(raw, labels):
        raw_norm = v.norm()
        if float(raw_norm) == 0.0:
            continue
        w, _ = orthogonalize_against(v, kept, passes=2)
        if float(w.norm()) <= sqrt_eps * float(raw_norm):
            continue
        with precision.context():
            kept.append(w.scaled(1 / w.norm()))
        kept_labels.append(label)
    return SeedFamily(kind, kept, kept_labels, len(raw), precision)


def seeds_single_site_spins(
    L: int, convention: str = "pauli", precision: Precision = Precision()
) -> SeedFamily:
    """All 3L normalized single-site spin operators, site-major then x, y, z.

    These are exactly orthogonal under the trace inner product, so no
    deflation occurs and m = 3L.
    """
    if L < 3:
        raise ModelError(f"chain seeds need L >= 3, got {L}")
    spins = spin_matrices(convention)
    d = 2**L
    vectors, labels = [], []
    with precision.context():
        for j in range(L):
            for a in ("x", "y", "z"):
                entries = [mpc(0)] * (d * d)
                op = spins[a]
                # op acts on site j: nonzeros at ((r, sj), (c, sj')) block pattern
                stride = 2 ** (L - 1 - j)
                for r in range(d):
                    sj = (r // stride) % 2
                    base = r - sj * stride
                    for sjp in range(2):
                        val = op[sj, sjp]
                        if val != 0:
                            entries[r * d + base + sjp * stride] = mpc(complex(val))
                v = HVector(entries, precision)
                vectors.append(v.scaled(1 / v.norm()))
                labels.append(f"S_{a}[{j}]")
    return SeedFamily("single_site_spins", vectors, labels, 3 * L, precision)


def seeds_zero_body(block: FockBlock, precision: Precision = Precision()) -> SeedFamily:
    """The Fock-diagonal projectors of a block; orthonormal by construction."""
    d = block.dim
    vectors, labels = [], []
    for i, occ in enumerate(block.occupations):
        entries = [mpc(0)] * (d * d)
        entries[i * d + i] = mpc(1)
        vectors.append(HVector(entries, precision))
        labels.append(f"P{occ}")
    return SeedFamily("zero_body", vectors, labels, d, precision)


def seeds_number_operators(
    block: FockBlock, precision: Precision = Precision()
) -> SeedFamily:
    """Mode occupation operators a_k+ a_k on the block, k ascending.

    Restricted to one block these are diagonal integer matrices; they are
    orthonormalized in k order and dependent members deflate, so m <= M + 1.
    """
    d = block.dim
    occ_matrix = np.array(block.occupations)  # (d, M+1)
    raw, labels = [], []
    for k in range(block.m_total + 1):
        entries = [mpc(0)] * (d * d)
        for i in range(d):
            if occ_matrix[i, k]:
                entries[i * d + i] = mpc(int(occ_matrix[i, k]))
        raw.append(HVector(entries, precision))
        labels.append(f"n[{k}]")
    return orthonormalize_family(raw, labels, "number_operators", precision)


_DIRECTIONS = ("+z", "-z", "+x", "-x", "+y", "-y")


def _spinor(direction: str, precision: Precision) -> list:
    with precision.context():
        r = 1 / gmpy2.sqrt(mpfr(2))
        table = {
            "+z": [mpc(1), mpc(0)],
            "-z": [mpc(0), mpc(1)],
            "+x": [mpc(r), mpc(r)],
            "-x": [mpc(r), -mpc(r)],
            "+y": [mpc(r), mpc(0, 1) * r],
            "-y": [mpc(r), mpc(0, -1) * r],
        }
        return table[direction]


_OPPOSITE = {"+z": "-z", "-z": "+z", "+x": "-x", "-x": "+x", "+y": "-y", "-y": "+y"}


def _product_state(dirs: list, precision: Precision) -> HVector:
    with precision.context():
        amp = [mpc(1)]
        for direction in dirs:
            s = _spinor(direction, precision)
            amp = [a * c for a in amp for c in s]
        return HVector(amp, precision)


def seeds_product_states(L: int, precision: Precision = Precision()) -> SeedFamily:
    """Aligned and one-flip product states, orthonormalized with deflation.

    Raw members, in order: the six fully aligned states (+z, -z, +x, -x,
    +y, -y), then for each direction in the same order one state per site
    with that site's spin reversed.  6 + 6L raw members; m is whatever
    survives deflation (at most 2**L).
    """
    if L < 3:
        raise ModelError(f"chain seeds need L >= 3, got {L}")
    raw, labels = [], []
    for direction in _DIRECTIONS:
        raw.append(_product_state([direction] * L, precision))
        labels.append(f"all{direction}")
    for direction in _DIRECTIONS:
        for site in range(L):
            dirs = [direction] * L
            dirs[site] = _OPPOSITE[direction]
            raw.append(_product_state(dirs, precision))
            labels.append(f"all{direction}-flip{site}")
    return orthonormalize_family(raw, labels, "product_states", precision)


# -- graded operator bases (standard precision, Hamiltonian independent) -----


@dataclass
class GradedBasis:
    """A complete orthonormal operator basis graded by structural complexity.

    ``vectors`` holds the flattened, normalized members as rows; ``grades``
    the integer weight of each row.  Rows are ordered by grade, then by the
    construction order within a grade.
    """

    grading: str
    grades: np.ndarray
    vectors: np.ndarray
    labels: list

    @property
    def max_grade(self) -> int:
        return int(self.grades.max())

    def levels(self) -> list:
        return [
            (g, np.nonzero(self.grades == g)[0])
            for g in range(self.max_grade + 1)
            if np.any(self.grades == g)
        ]

    def simple_rows(self, grade: int) -> np.ndarray:
        """The members at one grade, used as the averaged simple set."""
        idx = np.nonzero(self.grades == grade)[0]
        if len(idx) == 0:
            raise ValueError(f"no members at grade {grade}")
        return self.vectors[idx]


_PAULI_SYMBOLS = "ixyz"


def graded_pauli_basis(L: int) -> GradedBasis:
    """All 4**L normalized Pauli strings graded by non-identity weight.

    Level sizes are C(L, n) * 3**n for weight n; the union is a complete
    orthonormal basis of the 4**L dimensional operator space.
    """
    if L < 3:
        raise ModelError(f"chain basis needs L >= 3, got {L}")
    spins = spin_matrices("pauli")
    singles = {"i": np.eye(2, dtype=complex), **spins}
    d = 2**L
    norm = np.sqrt(d)
    entries, grades, labels = [], [], []
    for combo in itertools.product(_PAULI_SYMBOLS, repeat=L):
        mat = np.array([[1.0 + 0.0j]])
        for s in combo:
            mat = np.kron(mat, singles[s])
        entries.append(mat.ravel() / norm)
        grades.append(sum(1 for s in combo if s != "i"))
        labels.append("".join(combo))
    grades = np.array(grades)
    order = np.argsort(grades, kind="stable")
    return GradedBasis(
        "pauli_weight",
        grades[order],
        np.array(entries)[order],
        [labels[i] for i in order],
    )


def graded_fock_basis(block: FockBlock) -> GradedBasis:
    """All dim**2 Fock transition operators graded by occupation change rank.

    The member |F_i><F_j| gets grade sum_n |F_i(n) - F_j(n)| (always even,
    zero on the diagonal).  Memory scales as dim**4; fine at desk scale.
    """
    d = block.dim
    occ = np.array(block.occupations)
    grades, labels, idx_pairs = [], [], []
    for i in range(d):
        for j in range(d):
            grades.append(int(np.abs(occ[i] - occ[j]).sum()))
            labels.append(f"|{block.occupations[i]}><{block.occupations[j]}|")
            idx_pairs.append(i * d + j)
    grades = np.array(grades)
    order = np.argsort(grades, kind="stable")
    vectors = np.zeros((d * d, d * d), dtype=complex)
    for row, flat in enumerate(np.array(idx_pairs)[order]):
        vectors[row, flat] = 1.0
    return GradedBasis(
        "fock_rank", grades[order], vectors, [labels[i] for i in order]
    )
