import gmpy2
import numpy as np
import pytest
from gmpy2 import mpc
from hypothesis import given, settings
from hypothesis import strategies as st

from multikrylov.precision import (
    ContractViolation,
    DimensionError,
    HVector,
    Precision,
    inner,
    mpfr_to_str,
    orthogonality_drift,
    orthogonalize_against,
    str_to_mpfr,
    symmetric_eigen,
)

P256 = Precision(256)
P53 = Precision(53)


def hv(values, prec=P256):
    return HVector.from_complex(np.asarray(values, dtype=complex), prec)


class TestPrecision:
    def test_epsilon(self):
        assert Precision(256).epsilon == 2.0**-255
        assert Precision(53).epsilon == 2.0**-52

    def test_sqrt_epsilon_is_reorth_threshold(self):
        p = Precision(256)
        assert p.sqrt_epsilon == pytest.approx(np.sqrt(p.epsilon))

    def test_rejects_below_double(self):
        with pytest.raises(ValueError):
            Precision(52)

    def test_string_round_trip(self):
        with gmpy2.context(precision=256):
            x = gmpy2.sqrt(gmpy2.mpfr(2)) / 3
        assert str_to_mpfr(mpfr_to_str(x, 256), 256) == x
        assert str_to_mpfr(mpfr_to_str(-x, 256), 256) == -x
        assert str_to_mpfr(mpfr_to_str(gmpy2.mpfr(0), 256), 256) == 0


class TestInner:
    def test_unit_vector(self):
        a = hv([1, 0])
        assert complex(inner(a, a)) == 1

    def test_orthogonal_axes(self):
        assert complex(inner(hv([1, 0]), hv([0, 1]))) == 0

    def test_conjugation_pair(self):
        # conj(i) * (-i) = -1, so (1 - 1)/2 = 0
        a = hv(np.array([1, 1j]) / np.sqrt(2))
        b = hv(np.array([1, -1j]) / np.sqrt(2))
        assert abs(complex(inner(a, b))) < 1e-70

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            inner(hv([1, 0]), hv([1, 0, 0]))

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_conjugate_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        a = hv(rng.standard_normal(8) + 1j * rng.standard_normal(8))
        b = hv(rng.standard_normal(8) + 1j * rng.standard_normal(8))
        lhs = complex(inner(a, b))
        rhs = complex(inner(b, a)).conjugate()
        assert abs(lhs - rhs) <= 64 * P256.epsilon * max(abs(lhs), 1.0)


class TestOrthogonalize:
    def test_single_projection(self):
        v = hv(np.array([1, 1]) / np.sqrt(2))
        basis = [hv([1, 0])]
        w, coeffs = orthogonalize_against(v, basis)
        assert abs(complex(coeffs[0]) - 1 / np.sqrt(2)) < 1e-15
        out = w.to_numpy()
        assert abs(out[0]) < 1e-70
        assert out[1] == pytest.approx(1 / np.sqrt(2))

    def test_dependent_input_deflates(self):
        basis = [hv([1, 0]), hv([0, 1])]
        v = hv(np.array([0.6, 0.8]))
        w, _ = orthogonalize_against(v, basis)
        assert float(w.norm()) <= P256.sqrt_epsilon

    @staticmethod
    def _orthonormal_set(rng, n, k):
        basis = []
        for _ in range(k):
            v = hv(rng.standard_normal(n) + 1j * rng.standard_normal(n))
            w, _ = orthogonalize_against(v, basis, passes=2)
            basis.append(w.normalized())
        return basis

    def test_residual_overlap_bound(self):
        rng = np.random.default_rng(42)
        basis = self._orthonormal_set(rng, 50, 10)
        v = hv(rng.standard_normal(50) + 1j * rng.standard_normal(50))
        w, _ = orthogonalize_against(v, basis, passes=2)
        worst = max(float(abs(inner(b, w))) for b in basis)
        assert worst <= P256.sqrt_epsilon * float(v.norm())

    def test_idempotent_at_tolerance(self):
        rng = np.random.default_rng(3)
        basis = self._orthonormal_set(rng, 20, 5)
        v = hv(rng.standard_normal(20))
        w1, _ = orthogonalize_against(v, basis)
        w2, _ = orthogonalize_against(w1, basis)
        diff = max(abs(x - y) for x, y in zip(w1.to_numpy(), w2.to_numpy()))
        assert diff <= P256.sqrt_epsilon

    def test_bad_passes(self):
        with pytest.raises(ValueError):
            orthogonalize_against(hv([1, 0]), [], passes=3)


class TestDrift:
    def test_exact_orthonormal_pair(self):
        assert orthogonality_drift([hv([1, 0]), hv([0, 1])]) < 1e-70

    def test_constructed_overlap(self):
        eps = 1e-8
        a = np.array([1.0, 0.0])
        b = np.array([eps, np.sqrt(1 - eps**2)])
        drift = orthogonality_drift([hv(a), hv(b)])
        assert drift == pytest.approx(eps, rel=1e-12)

    def test_plain_lanczos_drifts_at_double_precision(self):
        # three-term recurrence without any reorthogonalization
        rng = np.random.default_rng(0)
        a = rng.standard_normal((200, 200))
        h = (a + a.T) / 2
        v = rng.standard_normal(200)
        v /= np.linalg.norm(v)
        basis = [v]
        beta_prev, v_prev = 0.0, np.zeros_like(v)
        for _ in range(99):
            w = h @ basis[-1] - beta_prev * v_prev
            alpha = basis[-1] @ w
            w = w - alpha * basis[-1]
            beta = np.linalg.norm(w)
            v_prev, beta_prev = basis[-1], beta
            basis.append(w / beta)
        gram = np.array(basis) @ np.array(basis).T
        measured = np.max(np.abs(gram - np.eye(len(basis))))
        assert measured > P53.sqrt_epsilon

    def test_empty_basis(self):
        with pytest.raises(ValueError):
            orthogonality_drift([])


class TestSymmetricEigen:
    def test_diagonal(self):
        w, _ = symmetric_eigen(np.diag([2.0, -1.0, 0.0]))
        assert np.allclose(w, [-1, 0, 2])

    def test_pauli_x(self):
        w, _ = symmetric_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(w, [-1, 1])

    def test_residual_random_hermitian(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((100, 100)) + 1j * rng.standard_normal((100, 100))
        h = (a + a.conj().T) / 2
        w, v = symmetric_eigen(h)
        resid = np.max(np.abs(h @ v - v * w))
        assert resid <= 1e-10 * np.max(np.abs(w))

    def test_reconstruction_d500(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((500, 500))
        h = (a + a.T) / 2
        w, v = symmetric_eigen(h)
        recon = (v * w) @ v.conj().T
        assert np.max(np.abs(recon - h)) <= 1e-10 * np.max(np.abs(h))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolation):
            symmetric_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            symmetric_eigen(np.zeros((2, 3)))


class TestHVector:
    def test_promotion_is_exact(self):
        vals = np.array([0.1, -2.5, 3e-17 + 1j])
        v = hv(vals)
        assert np.array_equal(v.to_numpy(), vals.astype(complex))

    def test_scaled_and_norm(self):
        v = hv([3.0, 4.0])
        assert float(v.norm()) == pytest.approx(5.0)
        u = v.scaled(1 / v.norm())
        assert float(u.norm()) == pytest.approx(1.0)
