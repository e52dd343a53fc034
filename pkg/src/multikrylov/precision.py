"""Configurable-precision complex vector arithmetic and orthogonalization kernels.

Everything the (block) Lanczos recursion touches runs through this module:
inner products, norms, scaled updates, Gram-Schmidt passes and the
orthogonality-drift measurement.  Scalars are GMP/MPFR floats via ``gmpy2``;
a complex scalar is a single ``mpc`` whose real and imaginary parts share the
same mantissa width.  Eigendecompositions are deliberately *not* done here at
high precision: they are numerically stable and run at standard 53-bit
precision (see :func:`symmetric_eigen`).

The working precision is described by :class:`Precision`.  Its unit roundoff
``epsilon = 2**(1 - bits)`` sets two derived tolerances used throughout the
package: the reorthogonalization threshold ``sqrt(epsilon)`` and the deflation
scale of the block recursion.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class ContractViolation(ValueError):
    """An input broke a documented precondition (e.g. a non-Hermitian matrix)."""


@dataclass(frozen=True)
class Precision:
    """Working precision of the high-accuracy arithmetic.

    Parameters
    ----------
    bits : int
        Mantissa width in bits of every real scalar.  Must be at least 53
        (IEEE double).  The default of 256 bits is far beyond double
        precision; full reorthogonalization at machine precision is not
        enough to produce a stable Krylov basis once the operator space
        reaches a few thousand dimensions, hence the generous default.
    """

    bits: int = 256

    def __post_init__(self):
        if self.bits < 53:
            raise ValueError(f"precision must be >= 53 bits, got {self.bits}")

    @property
    def epsilon(self) -> float:
        """Unit roundoff 2**(1 - bits).

        Returned as a double; underflows to a denormal only past ~1000 bits,
        far beyond any practical setting here.
        """
        return 2.0 ** (1 - self.bits)

    @property
    def sqrt_epsilon(self) -> float:
        """Reorthogonalization threshold, sqrt(epsilon)."""
        return 2.0 ** ((1 - self.bits) / 2)

    def context(self) -> "gmpy2.context":
        """A gmpy2 context rounding every operation to ``bits``."""
        return gmpy2.context(precision=self.bits)


DOUBLE = Precision(53)


def _serialize_digits(bits: int) -> int:
    # enough decimal digits for an exact binary->decimal->binary round trip
    return math.ceil(bits * math.log10(2)) + 4


def mpfr_to_str(x: mpfr, bits: int) -> str:
    """Decimal string that reproduces ``x`` exactly when parsed at ``bits``."""
    if gmpy2.is_zero(x):
        return "-0" if gmpy2.is_signed(x) else "0"
    digits, exp, _ = x.digits(10, _serialize_digits(bits))
    if digits.startswith("-"):
        return f"-0.{digits[1:]}e{exp}"
    return f"0.{digits}e{exp}"


def str_to_mpfr(s: str, bits: int) -> mpfr:
    with gmpy2.context(precision=bits):
        return mpfr(s)


class HVector:
    """A complex vector at a fixed working precision.

    Entries are ``gmpy2.mpc`` scalars.  The inner product is conjugate-linear
    in the *first* argument, matching the trace inner product on operator
    space once a d x d matrix is flattened row-major to length d**2.

    Instances are treated as immutable: every kernel returns a new vector.
    """

    __slots__ = ("entries", "precision", "_conj")

    def __init__(self, entries: Sequence[mpc], precision: Precision):
        self.entries = list(entries)
        self.precision = precision
        self._conj = None

    # -- construction -------------------------------------------------

    @classmethod
    def from_complex(cls, values: Iterable[complex], precision: Precision) -> "HVector":
        """Promote double-precision values; the promotion is exact."""
        with precision.context():
            return cls([mpc(complex(v)) for v in values], precision)

    @classmethod
    def zeros(cls, n: int, precision: Precision) -> "HVector":
        return cls([mpc(0)] * n, precision)

    def to_numpy(self) -> np.ndarray:
        """Round to complex128 (used for all standard-precision post-processing)."""
        return np.array([complex(e) for e in self.entries], dtype=np.complex128)

    def copy(self) -> "HVector":
        return HVector(list(self.entries), self.precision)

    # -- basics --------------------------------------------------------

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def conj_entries(self) -> list:
        """Entrywise conjugate, cached (basis vectors are reused many times)."""
        if self._conj is None:
            self._conj = [e.conjugate() for e in self.entries]
        return self._conj

    def scaled(self, c) -> "HVector":
        """Entrywise multiple.  ``c`` must already live at working precision:
        compute it inside ``precision.context()`` (or use :meth:`normalized`)."""
        with self.precision.context():
            return HVector(list(map(mpc(c).__mul__, self.entries)), self.precision)

    def normalized(self) -> "HVector":
        """Unit vector in the same direction, at working precision."""
        with self.precision.context():
            return self.scaled(1 / self.norm())

    def minus_scaled(self, c, other: "HVector") -> "HVector":
        """self - c * other, rounded at working precision."""
        if len(other) != len(self):
            raise DimensionError(f"length mismatch: {len(self)} vs {len(other)}")
        with self.precision.context():
            return HVector(
                list(map(operator.sub, self.entries, map(mpc(c).__mul__, other.entries))),
                self.precision,
            )

    def norm2(self) -> mpfr:
        """Squared Euclidean norm as a high-precision real."""
        with self.precision.context():
            return mpfr(sum(map(gmpy2.norm, self.entries)))

    def norm(self) -> mpfr:
        with self.precision.context():
            return gmpy2.sqrt(self.norm2())


def inner(a: HVector, b: HVector) -> mpc:
    """Trace-style inner product sum(conj(a_i) * b_i) at working precision."""
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")
    with a.precision.context():
        return mpc(sum(map(operator.mul, a.conj_entries(), b.entries)))


def orthogonalize_against(
    v: HVector, basis: Sequence[HVector], passes: int = 2
) -> tuple[HVector, list]:
    """Remove the projections of ``v`` onto ``basis`` by classical Gram-Schmidt.

    Each pass computes all projection coefficients against the *current*
    vector and subtracts them; two passes are the default ("twice is
    enough"), after which residual overlaps with an orthonormal basis are
    at the epsilon level.  Returns the residual vector and the accumulated
    coefficients, one per basis member.  A (near-)zero residual is a valid
    output and signals linear dependence to the caller.
    """
    if passes not in (1, 2):
        raise ValueError("passes must be 1 or 2")
    coeffs = [mpc(0)] * len(basis)
    with v.precision.context():
        w = v
        for _ in range(passes):
            cs = [inner(b, w) for b in basis]
            for k, (c, b) in enumerate(zip(cs, basis)):
                w = w.minus_scaled(c, b)
                coeffs[k] = coeffs[k] + c
    return w, coeffs


def orthogonality_drift(basis: Sequence[HVector]) -> float:
    """Worst deviation of ``basis`` from orthonormality.

    The maximum over all off-diagonal |<b_i, b_j>| and all |norm(b_i) - 1|,
    as a double.  This is the measured quantity the partial
    reorthogonalization policy tries to keep below sqrt(epsilon).
    """
    if not basis:
        raise ValueError("empty basis")
    worst = 0.0
    for i, bi in enumerate(basis):
        worst = max(worst, abs(float(bi.norm()) - 1.0))
        for bj in basis[i + 1 :]:
            worst = max(worst, float(abs(inner(bi, bj))))
    return worst


def symmetric_eigen(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix at standard precision.

    High precision is needed only inside the Lanczos recursion; spectral
    post-processing is stable, so this runs at 53 bits via LAPACK.  Accepts a
    numpy array (real symmetric or complex Hermitian).  Returns ascending
    eigenvalues and the matrix whose columns are orthonormal eigenvectors.
    """
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    tol = 8 * 2.0**-52 * max(scale, 1.0)
    if np.max(np.abs(a - a.conj().T)) > tol:
        raise ContractViolation("matrix is not Hermitian at working tolerance")
    w, v = np.linalg.eigh(a)
    return w, v
