import itertools

import numpy as np
import pytest

from multikrylov.models import (
    FockBlock,
    HamiltonianAction,
    Liouvillian,
    ModelError,
    ModelSpec,
    build_ising,
    build_qrs,
    build_xyz,
    canonical_quartet,
    enumerate_fock,
    liouvillian_apply,
    qrs_couplings,
    spectral,
)
from multikrylov.precision import ContractViolation, HVector, Precision, inner

P = Precision(256)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
ID = np.eye(2, dtype=complex)


def kron_chain(ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def embed(op, site, L):
    return kron_chain([op if j == site else ID for j in range(L)])


class TestIsing:
    def test_zero_fields_diagonal_traceless(self):
        h = build_ising(3, 0.0, 0.0)
        assert np.allclose(h, np.diag(np.diag(h)))
        assert np.trace(h) == pytest.approx(0.0)

    def test_requires_three_sites(self):
        with pytest.raises(ModelError):
            build_ising(2, -1.05, 0.5)

    def test_matches_independent_kron_build(self):
        # second implementation path as oracle
        L, hx, hz = 3, -1.05, 0.5
        h = build_ising(L, hx, hz)
        ref = np.zeros((8, 8), dtype=complex)
        for j in range(L):
            ref -= embed(SZ, j, L) @ embed(SZ, (j + 1) % L, L)
            ref -= hx * embed(SX, j, L) + hz * embed(SZ, j, L)
        assert np.max(np.abs(h - ref)) < 1e-14

    def test_periodic_wrap_term_present(self):
        # open chain would differ exactly by the (L-1, 0) bond
        L = 4
        h = build_ising(L, 0.0, 0.0)
        ref = -sum(
            embed(SZ, j, L) @ embed(SZ, (j + 1) % L, L) for j in range(L)
        )
        assert np.max(np.abs(h - ref)) < 1e-14

    def test_half_convention_scale(self):
        h_pauli = build_ising(3, 0.0, 1.0, "pauli")
        h_half = build_ising(3, 0.0, 1.0, "half")
        # field term scales by 1/2, coupling by 1/4; pure field here after
        # removing the zz part built at zero field
        zz_pauli = build_ising(3, 0.0, 0.0, "pauli")
        zz_half = build_ising(3, 0.0, 0.0, "half")
        assert np.allclose(zz_half, zz_pauli / 4)
        assert np.allclose(h_half - zz_half, (h_pauli - zz_pauli) / 2)


class TestXYZ:
    def test_isotropic_conserves_total_sz(self):
        h = build_xyz(3, 1.0, 1.0, 1.0, 0.0)
        total_sz = sum(embed(SZ, j, 3) for j in range(3))
        assert np.max(np.abs(h @ total_sz - total_sz @ h)) < 1e-13

    def test_anisotropic_breaks_sz_keeps_parity(self):
        h = build_xyz(3, -0.35, 0.5, -1.0, 0.0)
        total_sz = sum(embed(SZ, j, 3) for j in range(3))
        assert np.max(np.abs(h @ total_sz - total_sz @ h)) > 1e-3
        flip = kron_chain([SX] * 3)  # global spin flip
        assert np.max(np.abs(h @ flip - flip @ h)) < 1e-13

    def test_matches_independent_build(self):
        L, jx, jy, jz, hz = 3, -0.35, 0.5, -1.0, 0.8
        h = build_xyz(L, jx, jy, jz, hz)
        ref = np.zeros((8, 8), dtype=complex)
        for j in range(L):
            jp = (j + 1) % L
            ref += jx * embed(SX, j, L) @ embed(SX, jp, L)
            ref += jy * embed(SY, j, L) @ embed(SY, jp, L)
            ref += jz * embed(SZ, j, L) @ embed(SZ, jp, L)
            ref -= hz * embed(SZ, j, L)
        assert np.max(np.abs(h - ref)) < 1e-14

    def test_real_symmetric(self):
        h = build_xyz(4, -0.35, 0.5, -1.0, 0.8)
        assert not np.iscomplexobj(h)
        assert np.array_equal(h, h.T)


class TestFockEnumeration:
    def test_two_two(self):
        block = enumerate_fock(2, 2)
        assert block.occupations == ((0, 2, 0), (1, 0, 1))
        assert block.dim == 2

    def test_nine_nine_partition_count(self):
        # brute oracle for small sizes: scan every occupation tuple
        def brute(N, M):
            count = 0
            for occ in itertools.product(range(N + 1), repeat=M + 1):
                if sum(occ) == N and sum(n * o for n, o in enumerate(occ)) == M:
                    count += 1
            return count

        # independent recursion: partitions of m into at most n parts
        def partitions(m, n):
            if m == 0:
                return 1
            if n == 0:
                return 0
            return partitions(m, n - 1) + partitions(m - n, min(n, m - n))

        assert enumerate_fock(9, 9).dim == 30
        assert enumerate_fock(9, 9).dim == partitions(9, 9)
        assert enumerate_fock(5, 5).dim == brute(5, 5)
        assert enumerate_fock(6, 4).dim == brute(6, 4)

    def test_single_particle(self):
        block = enumerate_fock(1, 5)
        assert block.occupations == ((0, 0, 0, 0, 0, 1),)

    def test_sorted_lexicographically(self):
        occ = enumerate_fock(4, 6).occupations
        assert list(occ) == sorted(occ)

    def test_invalid(self):
        with pytest.raises(ModelError):
            enumerate_fock(0, 3)


class TestQRSCouplings:
    def test_integrable_values(self):
        c = qrs_couplings(3, "integrable")
        assert c[(0, 2, 1, 1)] == 1.0
        assert c[(1, 1, 1, 1)] == 0.0
        assert c[(0, 0, 0, 0)] == 1.0

    def test_symmetry_orbit(self):
        for quartet in [(1, 2, 0, 3), (2, 1, 3, 0), (0, 3, 1, 2), (3, 0, 2, 1)]:
            assert canonical_quartet(*quartet) == (0, 3, 1, 2)

    def test_chaotic_symmetric_and_seeded(self):
        c1 = qrs_couplings(4, "chaotic", 11)
        c2 = qrs_couplings(4, "chaotic", 11)
        assert c1 == c2
        assert all(0 < v < 1 for v in c1.values())
        c3 = qrs_couplings(4, "chaotic", 12)
        assert c1 != c3


def oracle_qrs(N, M, kind, seed=None):
    """Term-by-term ladder application, independent of the matrix builder."""
    block = enumerate_fock(N, M)
    idx = {occ: i for i, occ in enumerate(block.occupations)}
    coupl = qrs_couplings(M, kind, seed)
    h = np.zeros((block.dim, block.dim))
    for j, occ in enumerate(block.occupations):
        for s in range(M + 1):
            for n in range(s + 1):
                for k in range(s + 1):
                    m, l = s - n, s - k
                    coef = 0.5 * coupl[canonical_quartet(n, m, k, l)]
                    if coef == 0:
                        continue
                    ket = dict(enumerate(occ))
                    if ket.get(l, 0) == 0:
                        continue
                    coef *= np.sqrt(ket[l])
                    ket[l] -= 1
                    if ket.get(k, 0) == 0:
                        continue
                    coef *= np.sqrt(ket[k])
                    ket[k] -= 1
                    ket[m] = ket.get(m, 0) + 1
                    coef *= np.sqrt(ket[m])
                    ket[n] = ket.get(n, 0) + 1
                    coef *= np.sqrt(ket[n])
                    key = tuple(ket[x] for x in range(M + 1))
                    h[idx[key], j] += coef
    return h


class TestBuildQRS:
    def test_two_two_integrable_symmetries(self):
        h = build_qrs(2, 2, "integrable")
        assert h.shape == (2, 2)
        assert np.array_equal(h, h.T)
        c = qrs_couplings(2, "integrable")
        assert c[canonical_quartet(0, 2, 1, 1)] == c[canonical_quartet(1, 1, 0, 2)]
        assert c[canonical_quartet(0, 2, 1, 1)] == c[canonical_quartet(0, 2, 1, 1)]

    def test_chaotic_deterministic(self):
        a = build_qrs(2, 2, "chaotic", rng_seed=7)
        b = build_qrs(2, 2, "chaotic", rng_seed=7)
        assert np.array_equal(a, b)

    def test_matches_ladder_oracle(self):
        for (n, m, kind, seed) in [(3, 3, "integrable", None), (4, 4, "chaotic", 5)]:
            assert np.max(np.abs(build_qrs(n, m, kind, seed) - oracle_qrs(n, m, kind, seed))) < 1e-13

    def test_conserved_numbers_are_scalars_on_block(self):
        n, m = 4, 4
        block = enumerate_fock(n, m)
        occ = np.array(block.occupations)
        n_op = np.diag(occ.sum(axis=1).astype(float))
        m_op = np.diag((occ * np.arange(m + 1)).sum(axis=1).astype(float))
        assert np.allclose(n_op, n * np.eye(block.dim))
        assert np.allclose(m_op, m * np.eye(block.dim))
        h = build_qrs(n, m, "chaotic", rng_seed=1)
        assert np.max(np.abs(h @ n_op - n_op @ h)) == 0.0

    def test_unknown_coupling(self):
        with pytest.raises(ModelError):
            build_qrs(2, 2, "mixed")


class TestLiouvillian:
    def test_identity_commutes(self):
        h = build_ising(3, -1.05, 0.5)
        o = HVector.from_complex(np.eye(8).ravel(), P)
        out = liouvillian_apply(h, o)
        assert float(out.norm()) < 1e-60

    def test_hamiltonian_commutes_with_itself(self):
        h = build_ising(3, -1.05, 0.5)
        o = HVector.from_complex(h.ravel() / np.linalg.norm(h), P)
        assert float(liouvillian_apply(h, o).norm()) < 1e-60

    def test_two_level_offdiagonal(self):
        h = np.diag([1.0, -1.0])
        e12 = np.zeros((2, 2))
        e12[0, 1] = 1.0
        out = liouvillian_apply(h, HVector.from_complex(e12.ravel(), P))
        assert np.allclose(out.to_numpy(), 2 * e12.ravel())

    def test_antisymmetry_under_dagger(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal((4, 4))
        h = (h + h.T) / 2
        o = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        lo = liouvillian_apply(h, HVector.from_complex(o.ravel(), P)).to_numpy()
        lod = liouvillian_apply(h, HVector.from_complex(o.conj().T.ravel(), P)).to_numpy()
        assert np.max(np.abs(lo.reshape(4, 4).conj().T + lod.reshape(4, 4))) < 1e-13

    def test_trace_preserved(self):
        rng = np.random.default_rng(1)
        h = rng.standard_normal((5, 5))
        h = (h + h.T) / 2
        o = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        out = liouvillian_apply(h, HVector.from_complex(o.ravel(), P)).to_numpy()
        assert abs(np.trace(out.reshape(5, 5))) < 1e-13

    def test_hermitian_as_bilinear_form(self):
        rng = np.random.default_rng(2)
        h = rng.standard_normal((4, 4))
        h = (h + h.T) / 2
        act = Liouvillian(h, P)
        a = HVector.from_complex(rng.standard_normal(16) + 1j * rng.standard_normal(16), P)
        b = HVector.from_complex(rng.standard_normal(16) + 1j * rng.standard_normal(16), P)
        lhs = complex(inner(a, act.apply(b)))
        rhs = complex(inner(b, act.apply(a))).conjugate()
        assert abs(lhs - rhs) < 1e-13 * max(abs(lhs), 1)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolation):
            Liouvillian(np.array([[0.0, 1.0], [0.0, 0.0]]), P)

    def test_dimension_check(self):
        act = Liouvillian(np.diag([1.0, -1.0]), P)
        with pytest.raises(Exception):
            act.apply(HVector.from_complex(np.zeros(3), P))

    def test_hamiltonian_action_matches_dense(self):
        rng = np.random.default_rng(3)
        h = rng.standard_normal((6, 6))
        h = (h + h.T) / 2
        act = HamiltonianAction(h, P)
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        out = act.apply(HVector.from_complex(v, P)).to_numpy()
        assert np.allclose(out, h @ v)


class TestSpectral:
    def test_two_level_clusters(self):
        spec = spectral(np.diag([0.0, 1.0]))
        sizes = sorted(len(c) for c in spec.frequency_clusters)
        assert sizes == [1, 1, 2]
        zero = [c for c in spec.frequency_clusters if len(c) == 2][0]
        assert set(zero.tolist()) == {0, 3}  # the two diagonal pairs

    def test_three_level_resonance(self):
        spec = spectral(np.diag([0.0, 1.0, 2.0]))
        # omega = 1 from (1,0) and (2,1): flat indices 1*3+0=3 and 2*3+1=7
        ones = [c for c in spec.frequency_clusters if np.allclose(spec.frequencies[c], 1.0)]
        assert len(ones) == 1 and set(ones[0].tolist()) == {3, 7}

    def test_generic_has_only_diagonal_zero_cluster(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((10, 10))
        spec = spectral((a + a.T) / 2, cluster_tol=1e-8)
        zero = [c for c in spec.frequency_clusters if np.any(spec.frequencies[c] == 0)]
        assert len(zero) == 1 and len(zero[0]) == 10
        assert all(i % 11 == 0 for i in zero[0])  # flat indices of (i, i)

    def test_cluster_internal_spread(self):
        spec = spectral(build_ising(3, -1.05, 0.0))
        for c in spec.frequency_clusters:
            vals = spec.frequencies[c]
            assert vals.max() - vals.min() <= spec.cluster_tol * len(c)

    def test_energy_clusters_for_state_variant(self):
        spec = spectral(np.diag([0.0, 0.0, 1.0]))
        sizes = sorted(len(c) for c in spec.energy_clusters)
        assert sizes == [1, 2]


class TestModelSpec:
    def test_build_dispatch(self):
        spec = ModelSpec("ising", 3, {"h_x": -1.05, "h_z": 0.5})
        assert spec.build().shape == (8, 8)
        spec = ModelSpec("qrs", (3, 3), {"coupling": "chaotic"}, rng_seed=2)
        assert spec.build().shape == (3, 3)

    def test_with_rng_seed(self):
        spec = ModelSpec("qrs", (3, 3), {"coupling": "chaotic"}, rng_seed=2)
        assert spec.with_rng_seed(5).rng_seed == 5
        assert spec.rng_seed == 2
