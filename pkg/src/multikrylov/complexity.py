"""Complexity time series, plateau formulas and the time-average oracle.

Once the block Krylov basis exists, everything here runs at standard
precision: the basis is rounded to complex128 and every operator (or state)
is expressed over the eigenpairs of the Hamiltonian.  For an operator O and
eigenvectors V, the "eigenframe" is V+ O V flattened row-major, so the flat
index alpha = i*d + j carries the Liouvillian frequency E_i - E_j and

    <O | omega_alpha> = conj(frame[alpha]),   <omega_alpha | O> = frame[alpha].

The late-time plateau is the all-time average of the complexity series.  The
closed form sums, for every group of mutually degenerate frequencies c,

    sum_{alpha, beta in c}  J <s|w_a><w_b|s> <q|w_b><w_a|q>
        =  J * | sum_{alpha in c} conj(s[alpha]) q[alpha] |^2,

i.e. one overlap of cluster-restricted frames per (seed, basis row) pair.
This keeps the degenerate double sum exact while avoiding any loop over
pairs of eigenvectors.

An independent check, :func:`time_average_oracle`, averages the time series
itself over a long window by the trapezoid rule; it shares nothing with the
degeneracy bookkeeping and is the standing cross-validation of the plateau
path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .lanczos import BlockKrylovBasis, block_lanczos
from .models import HamiltonianAction, Liouvillian, SpectralDecomposition, spectral
from .precision import Precision
from .seeds import GradedBasis, SeedFamily


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


@dataclass
class PlateauResult:
    """All-time average of a complexity series with its bookkeeping.

    ``value`` is the raw average, bounded by the largest weight
    (``n_levels - 1``); ``normalized`` divides by that weight (pair runs
    re-normalize with the shared denominator, see :func:`normalize_pair`).
    """

    value: float
    n_levels: int
    normalized: float
    per_seed: np.ndarray
    diagnostics: dict

    @classmethod
    def from_per_seed(cls, per_seed: np.ndarray, n_levels: int, diagnostics: dict):
        value = float(np.mean(per_seed))
        denom = n_levels - 1
        return cls(
            value=value,
            n_levels=n_levels,
            normalized=value / denom if denom > 0 else 0.0,
            per_seed=np.asarray(per_seed, dtype=float),
            diagnostics=diagnostics,
        )


def normalize_pair(
    value_int: float, m_int: int, value_cha: float, m_cha: int
) -> tuple[float, float]:
    """Normalize an integrable/chaotic pair by the shared max level count.

    Both raw plateaus are divided by max(M_int, M_cha) - 1 so the pair is
    comparable on a single [0, 1] scale.
    """
    if value_int < 0 or value_cha < 0:
        raise ValueError("plateau values must be nonnegative")
    if m_int < 1 or m_cha < 1:
        raise ValueError("level counts must be >= 1")
    denom = max(m_int, m_cha) - 1
    if denom == 0:
        if value_int != 0 or value_cha != 0:
            raise ValueError("nonzero plateau with a single level is inconsistent")
        return 0.0, 0.0
    return value_int / denom, value_cha / denom


# -- eigenframes ---------------------------------------------------------------


def operator_frame(spec: SpectralDecomposition, rows: np.ndarray) -> np.ndarray:
    """Express flattened operators over Liouvillian eigenpairs (see module doc)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    d = spec.d
    ops = rows.reshape(len(rows), d, d)
    v = spec.vectors
    return (v.conj().T @ ops @ v).reshape(len(rows), d * d)


def state_frame(spec: SpectralDecomposition, rows: np.ndarray) -> np.ndarray:
    """Express state vectors over the energy eigenbasis."""
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    return rows @ spec.vectors.conj()


def _frames(spec, basis: BlockKrylovBasis, seed_rows: np.ndarray, variant: str):
    if variant == "operator":
        to_frame, freqs, clusters = (
            operator_frame,
            spec.frequencies,
            spec.frequency_clusters,
        )
    elif variant == "state":
        to_frame, freqs, clusters = state_frame, spec.energies, spec.energy_clusters
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return (
        to_frame(spec, seed_rows),
        to_frame(spec, basis.rows_numpy()),
        freqs,
        clusters,
    )


# -- time-domain quantities ----------------------------------------------------


def phi_coefficients(
    spec: SpectralDecomposition,
    basis: BlockKrylovBasis,
    n: int,
    t: float,
    variant: str = "operator",
) -> np.ndarray:
    """Expansion of the evolved seed n over the Krylov basis at time t.

    Returns one complex coefficient per basis row (level-major order);
    their squared magnitudes sum to one.
    """
    seed_rows = basis.rows_numpy()[: basis.p[0]]
    if not 0 <= n < len(seed_rows):
        raise IndexError(f"seed index {n} out of range")
    sf, bf, freqs, _ = _frames(spec, basis, seed_rows, variant)
    return bf.conj() @ (np.exp(1j * freqs * t) * sf[n])


def _weighted_series(
    seed_frame: np.ndarray,
    basis_frame: np.ndarray,
    weights: np.ndarray,
    freqs: np.ndarray,
    times: np.ndarray,
    chunk: int = 64,
) -> np.ndarray:
    m = len(seed_frame)
    values = np.empty(len(times))
    bw = basis_frame.conj()
    for lo in range(0, len(times), chunk):
        ts = times[lo : lo + chunk]
        phases = np.exp(1j * np.outer(ts, freqs))  # (T, F)
        for ti, ph in enumerate(phases):
            phi = bw @ (ph * seed_frame).T  # (rows, m)
            values[lo + ti] = float(weights @ np.sum(np.abs(phi) ** 2, axis=1)) / m
    return values


def c_mult_timeseries(
    spec: SpectralDecomposition,
    basis: BlockKrylovBasis,
    times: np.ndarray,
    variant: str = "operator",
) -> TimeSeries:
    """Level-weighted spreading of all seeds, averaged over the seed family."""
    times = np.asarray(times, dtype=float)
    seed_rows = basis.rows_numpy()[: basis.p[0]]
    sf, bf, freqs, _ = _frames(spec, basis, seed_rows, variant)
    values = _weighted_series(sf, bf, basis.grades().astype(float), freqs, times)
    return TimeSeries(times, values)


# -- plateau contractions --------------------------------------------------------


def _plateau_per_seed(
    seed_frame: np.ndarray,
    basis_frame: np.ndarray,
    weights: np.ndarray,
    clusters: list,
) -> np.ndarray:
    per_seed = np.zeros(len(seed_frame))
    for cluster in clusters:
        u = seed_frame[:, cluster].conj() @ basis_frame[:, cluster].T  # (m, rows)
        per_seed += np.abs(u) ** 2 @ weights
    return per_seed


def _basis_diagnostics(basis: BlockKrylovBasis, n_clusters: int) -> dict:
    return {
        "p": list(basis.p),
        "n_levels": basis.n_levels,
        "n_deflated": basis.n_deflated,
        "lnorm_estimate": basis.lnorm_estimate,
        "max_drift_estimate": max((r.estimate for r in basis.drift_log), default=0.0),
        "n_full_reorth": sum(r.reorthogonalized for r in basis.drift_log),
        "n_clusters": n_clusters,
    }


def plateau_operator(
    spec: SpectralDecomposition, basis: BlockKrylovBasis, seeds: SeedFamily
) -> PlateauResult:
    """Closed-form all-time average of the multiseed complexity."""
    sf, bf, _, clusters = _frames(spec, basis, seeds.rows_numpy(), "operator")
    per_seed = _plateau_per_seed(sf, bf, basis.grades().astype(float), clusters)
    return PlateauResult.from_per_seed(
        per_seed, basis.n_levels, _basis_diagnostics(basis, len(clusters))
    )


def plateau_state(
    spec: SpectralDecomposition, basis: BlockKrylovBasis, seeds: SeedFamily
) -> PlateauResult:
    """State-space analogue: energy degeneracies replace frequency ones."""
    sf, bf, _, clusters = _frames(spec, basis, seeds.rows_numpy(), "state")
    per_seed = _plateau_per_seed(sf, bf, basis.grades().astype(float), clusters)
    return PlateauResult.from_per_seed(
        per_seed, basis.n_levels, _basis_diagnostics(basis, len(clusters))
    )


def min_frequency_gap(spec: SpectralDecomposition, variant: str = "operator") -> float:
    """Smallest spacing between distinct (clustered) frequencies."""
    clusters = (
        spec.frequency_clusters if variant == "operator" else spec.energy_clusters
    )
    freqs = spec.frequencies if variant == "operator" else spec.energies
    reps = np.sort([float(np.mean(freqs[c])) for c in clusters])
    if len(reps) < 2:
        return 0.0
    return float(np.min(np.diff(reps)))


def time_average_oracle(
    spec: SpectralDecomposition,
    basis: BlockKrylovBasis,
    seeds: SeedFamily,
    T: float | None = None,
    samples: int = 4000,
    variant: str = "operator",
) -> float:
    """Trapezoidal all-time average of the complexity series on [0, T].

    The default window is 200 periods of the slowest beat between distinct
    frequencies, long enough for every oscillatory cross term to average
    down to the percent level.  This is the independent check of the
    closed-form plateau and deliberately ignores the degeneracy clustering.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples for a trustworthy average")
    if T is None:
        gap = min_frequency_gap(spec, variant)
        T = 200.0 / gap if gap > 0 else 1.0
    if T <= 0:
        raise ValueError("T must be positive")
    times = np.linspace(0.0, T, samples)
    series = c_mult_timeseries(spec, basis, times, variant)
    return float(np.trapz(series.values, series.times) / T)


# -- operator size ---------------------------------------------------------------


def size_timeseries(
    spec: SpectralDecomposition,
    graded: GradedBasis,
    simple: np.ndarray,
    times: np.ndarray,
) -> TimeSeries:
    """Average graded weight of the evolving simple set.

    Unlike the Krylov construction the grading is fixed beforehand, so no
    recursion is involved: each simple operator is evolved and re-expanded
    over the full graded basis.
    """
    times = np.asarray(times, dtype=float)
    sf = operator_frame(spec, simple)
    bf = operator_frame(spec, graded.vectors)
    values = _weighted_series(
        sf, bf, graded.grades.astype(float), spec.frequencies, times
    )
    return TimeSeries(times, values)


def plateau_size(
    spec: SpectralDecomposition, graded: GradedBasis, simple: np.ndarray
) -> PlateauResult:
    """All-time average of the operator size, normalized by the top grade."""
    sf = operator_frame(spec, simple)
    bf = operator_frame(spec, graded.vectors)
    per_seed = _plateau_per_seed(
        sf, bf, graded.grades.astype(float), spec.frequency_clusters
    )
    diagnostics = {
        "grading": graded.grading,
        "max_grade": graded.max_grade,
        "n_simple": len(np.atleast_2d(simple)),
        "n_clusters": len(spec.frequency_clusters),
    }
    return PlateauResult.from_per_seed(per_seed, graded.max_grade + 1, diagnostics)


# -- estimators --------------------------------------------------------------------


class MultiseedKrylovComplexity(BaseEstimator):
    """Full diagnostic: spectral data, block Krylov basis and plateau.

    Parameters
    ----------
    variant : {"operator", "state"}
        Whether the recursion runs on flattened operators under the
        commutator map or on states under the Hamiltonian itself.
    precision_bits : int
        Working precision of the recursion (the plateau itself is evaluated
        at standard precision).
    cluster_tol : float, optional
        Degeneracy tolerance; default is 1e-8 of the spectral range.
    deflation_scale : float
        Multiplies the deflation threshold sqrt(eps) * ||L||_est.
    max_levels : int, optional
        Hard cap on the number of levels (diagnostics only; the physical
        runs always terminate by deflation).

    Attributes
    ----------
    spectral_ : SpectralDecomposition
    basis_ : BlockKrylovBasis
    result_ : PlateauResult
    plateau_ : float
        Raw plateau value, ``result_.value``.
    n_levels_ : int
    """

    def __init__(
        self,
        variant: str = "operator",
        precision_bits: int = 256,
        cluster_tol: float | None = None,
        deflation_scale: float = 1.0,
        max_levels: int | None = None,
    ):
        self.variant = variant
        self.precision_bits = precision_bits
        self.cluster_tol = cluster_tol
        self.deflation_scale = deflation_scale
        self.max_levels = max_levels

    def fit(self, h: np.ndarray, seeds: SeedFamily):
        if self.variant not in ("operator", "state"):
            raise ValueError(f"unknown variant {self.variant!r}")
        h = np.asarray(h)
        precision = Precision(self.precision_bits)
        action = (
            Liouvillian(h, precision)
            if self.variant == "operator"
            else HamiltonianAction(h, precision)
        )
        if seeds.m == 0 or len(seeds.vectors[0]) != action.dim:
            raise ValueError(
                f"seed family does not live in the {self.variant} space of this "
                f"Hamiltonian (need vectors of length {action.dim})"
            )
        self.spectral_ = spectral(h, self.cluster_tol)
        self.seeds_ = seeds
        self.basis_ = block_lanczos(
            action.apply,
            seeds,
            precision,
            max_levels=self.max_levels,
            deflation_scale=self.deflation_scale,
        )
        contraction = plateau_operator if self.variant == "operator" else plateau_state
        self.result_ = contraction(self.spectral_, self.basis_, seeds)
        self.plateau_ = self.result_.value
        self.n_levels_ = self.basis_.n_levels
        return self

    def timeseries(self, times: np.ndarray) -> TimeSeries:
        check_is_fitted(self)
        return c_mult_timeseries(self.spectral_, self.basis_, times, self.variant)

    def time_average(self, T: float | None = None, samples: int = 4000) -> float:
        check_is_fitted(self)
        return time_average_oracle(
            self.spectral_, self.basis_, self.seeds_, T, samples, self.variant
        )

    def phi(self, n: int, t: float) -> np.ndarray:
        check_is_fitted(self)
        return phi_coefficients(self.spectral_, self.basis_, n, t, self.variant)


class OperatorSizePlateau(BaseEstimator):
    """Operator-size diagnostic over a fixed graded basis.

    No recursion: fit diagonalizes H and contracts the graded basis with the
    degenerate-frequency clusters.  The simple set defaults to the grade the
    grading scheme designates as simplest (grade 1 for Pauli strings, grade 0
    for Fock transitions).
    """

    def __init__(self, cluster_tol: float | None = None, simple_grade: int | None = None):
        self.cluster_tol = cluster_tol
        self.simple_grade = simple_grade

    def fit(self, h: np.ndarray, graded: GradedBasis):
        grade = self.simple_grade
        if grade is None:
            grade = 1 if graded.grading == "pauli_weight" else 0
        self.spectral_ = spectral(np.asarray(h), self.cluster_tol)
        self.graded_ = graded
        self.simple_ = graded.simple_rows(grade)
        self.result_ = plateau_size(self.spectral_, graded, self.simple_)
        self.plateau_ = self.result_.value
        return self

    def timeseries(self, times: np.ndarray) -> TimeSeries:
        check_is_fitted(self)
        return size_timeseries(self.spectral_, self.graded_, self.simple_, times)
