"""Self-check battery behind the ``verify`` CLI verb.

Runs the analytic cases and the core invariants on desk-scale instances,
printing one PASS/FAIL line per check.  Kept fast (seconds, not minutes);
the full acceptance suite lives in the test tree.
"""

from __future__ import annotations

import numpy as np

from .complexity import (
    c_mult_timeseries,
    phi_coefficients,
    plateau_operator,
    time_average_oracle,
)
from .lanczos import block_lanczos, lanczos
from .models import Liouvillian, build_ising, build_qrs, enumerate_fock, spectral
from .precision import HVector, Precision, inner, orthogonality_drift
from .seeds import SeedFamily, seeds_single_site_spins, seeds_zero_body


def _two_level_case(prec: Precision):
    h = np.diag([1.0, -1.0])
    act = Liouvillian(h, prec)
    seed = HVector.from_complex(np.array([0, 1, 1, 0]) / np.sqrt(2), prec)
    run = lanczos(act.apply, seed, prec)
    ok = run.K == 2 and abs(run.b_floats()[0] - 2.0) < 1e-30
    ok &= max(abs(x) for x in run.a_floats()) < 1e-30
    fam = SeedFamily("single", [seed], ["sx"], 1, prec)
    basis = block_lanczos(act.apply, fam, prec)
    spec = spectral(h)
    res = plateau_operator(spec, basis, fam)
    ok &= abs(res.value - 0.5) < 1e-10
    ts = c_mult_timeseries(spec, basis, np.linspace(0.1, 2.0, 5))
    ok &= np.max(np.abs(ts.values - np.sin(2 * ts.times) ** 2)) < 1e-10
    return bool(ok), f"K={run.K} b1={run.b_floats()[0]:.3e} plateau={res.value:.6f}"


def _conserved_seeds(prec: Precision):
    h = np.diag([0.0, 1.0, 2.5])
    act = Liouvillian(h, prec)
    block_states = 3
    vecs = []
    for i in range(block_states):
        e = np.zeros(9)
        e[i * 3 + i] = 1.0
        vecs.append(HVector.from_complex(e, prec))
    fam = SeedFamily("diag", vecs, ["p0", "p1", "p2"], 3, prec)
    basis = block_lanczos(act.apply, fam, prec)
    res = plateau_operator(spectral(h), basis, fam)
    ok = basis.n_levels == 1 and abs(res.value) < 1e-30
    return ok, f"M={basis.n_levels} plateau={res.value:.1e}"


def _ising_invariants(prec: Precision):
    h = build_ising(3, -1.05, 0.5)
    act = Liouvillian(h, prec)
    fam = seeds_single_site_spins(3, precision=prec)
    basis = block_lanczos(act.apply, fam, prec)
    allv = basis.all_vectors()
    drift = orthogonality_drift(allv)
    ok = drift <= prec.sqrt_epsilon
    ok &= all(p2 <= p1 for p1, p2 in zip(basis.p, basis.p[1:]))
    ok &= basis.total_vectors <= 64
    spec = spectral(h)
    res = plateau_operator(spec, basis, fam)
    oracle = time_average_oracle(spec, basis, fam)
    rel = abs(res.value - oracle) / res.value
    ok &= rel < 0.01
    phi = phi_coefficients(spec, basis, 0, 1.7)
    ok &= abs(np.sum(np.abs(phi) ** 2) - 1.0) < 1e-10
    return bool(ok), f"drift={drift:.1e} oracle_rel={rel:.1e} M={basis.n_levels}"


def _single_vs_block(prec: Precision):
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 3))
    h = (a + a.T) / 2
    act = Liouvillian(h, prec)
    op = rng.standard_normal((3, 3))
    op = op + op.T
    op = op - np.trace(op) / 3 * np.eye(3)
    op = op / np.sqrt(np.sum(op * op))
    seed = HVector.from_complex(op.ravel(), prec)
    run = lanczos(act.apply, seed, prec)
    fam = SeedFamily("one", [seed], ["op"], 1, prec)
    basis = block_lanczos(act.apply, fam, prec)
    bs = np.array([abs(complex(b[0, 0])) for b in basis.b_blocks])
    ok = basis.total_vectors == run.K
    ok &= np.max(np.abs(bs - run.b_floats())) <= prec.sqrt_epsilon * max(run.lnorm_estimate, 1)
    return bool(ok), f"K={run.K} max|b_block - b|={np.max(np.abs(bs - run.b_floats())):.1e}"


def _precision_stability():
    h = build_qrs(4, 4, "chaotic", rng_seed=3)
    runs = {}
    for bits in (128, 256):
        prec = Precision(bits)
        act = Liouvillian(h, prec)
        fam = seeds_zero_body(enumerate_fock(4, 4), prec)
        basis = block_lanczos(act.apply, fam, prec)
        runs[bits] = [float(x) for level in basis.residual_norms for x in level]
    lo, hi = runs[128], runs[256]
    ok = len(lo) == len(hi)
    rel = max(abs(a - b) / b for a, b in zip(lo, hi)) if ok and hi else 1.0
    ok = ok and rel <= 1e-20
    return bool(ok), f"max relative b shift 128->256 bits = {rel:.1e}"


CHECKS = [
    ("two-level analytic case", _two_level_case),
    ("conserved seeds terminate at M=1", _conserved_seeds),
    ("ising L=3 drift/tridiagonality/oracle", _ising_invariants),
    ("single-seed vs block consistency", _single_vs_block),
    ("precision bump stability", lambda prec: _precision_stability()),
]


def run_battery(precision_bits: int = 256) -> bool:
    prec = Precision(precision_bits)
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn(prec)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"error: {exc}"
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    return all_ok
