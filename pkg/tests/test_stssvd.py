import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchsvd import (
    CauchySpec,
    RankDeficiencyError,
    ShapeError,
    SketchRankWarning,
    build_sketch,
    compare_spectra,
    empirical_epsilon,
    gen_cauchy,
    jacobi_svd,
    numerical_rank,
    range_basis,
    s_fro_norm,
    s_two_norm,
    sketched_qr,
    sts_svd,
    sts_svd_via_qr,
    truncate,
)
from sketchsvd.densekernels import SvdFactors


def rand_orthonormal(rng, m, n):
    return np.linalg.qr(rng.standard_normal((m, n)))[0]


def dense_checks(A, f, op):
    """Direct dense verification of the factorization contract."""
    recon = f.reconstruct()
    assert np.linalg.norm(A - recon) <= 1e-12 * np.linalg.norm(A)
    SW = op.apply(f.W)
    assert np.linalg.norm(SW.T @ SW - np.eye(f.r), 2) <= 1e-12
    assert np.linalg.norm(f.V.T @ f.V - np.eye(f.r), 2) <= 1e-12
    assert (np.diff(f.theta) <= 1e-15).all()
    assert (f.theta >= 0).all()


class TestStsSvd:
    def test_single_canonical_column(self):
        m = 12
        e1 = np.zeros((m, 1))
        e1[0, 0] = 1.0
        op = build_sketch("gaussian", 5, m, seed=1)
        f = sts_svd(e1, op)
        theta1 = np.linalg.norm(op.apply(e1))
        assert f.r == 1
        assert f.theta[0] == pytest.approx(theta1, rel=1e-14)
        assert abs(f.V[0, 0]) == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(
            f.W[:, 0] * f.V[0, 0], e1[:, 0] / theta1, atol=1e-14
        )

    def test_zero_matrix(self):
        op = build_sketch("srtt", 6, 10, seed=2)
        f = sts_svd(np.zeros((10, 4)), op)
        assert f.r == 0
        assert f.W.shape == (10, 0)
        assert f.theta.shape == (0,)
        assert f.V.shape == (4, 0)
        assert np.linalg.norm(f.reconstruct()) == 0.0

    def test_small_dense_direct_checks(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((8, 3))
        op = build_sketch("gaussian", 6, 8, seed=4)
        f = sts_svd(A, op)
        dense_checks(A, f, op)
        # theta equals the singular values of the materialized S A
        ref = np.linalg.svd(op.materialize() @ A, compute_uv=False)
        np.testing.assert_allclose(f.theta, ref, rtol=1e-12)

    @pytest.mark.parametrize("kind", ["gaussian", "srtt", "sparse-sign"])
    def test_exactness_well_conditioned(self, kind):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((100, 12))
        op = build_sketch(kind, 48, 100, seed=6)
        f = sts_svd(A, op)
        assert f.r == 12
        assert np.linalg.norm(A - f.reconstruct()) <= 1e-10 * np.linalg.norm(A)

    def test_exactness_ill_conditioned(self):
        # documented degradation: kappa = 1e10 still reconstructs to 1e-6
        rng = np.random.default_rng(7)
        n = 30
        A = rng.standard_normal((200, n)) @ np.diag(
            np.power(1e10, -np.arange(n) / (n - 1))
        )
        op = build_sketch("gaussian", 4 * n, 200, seed=8)
        f = sts_svd(A, op)
        assert f.r == n
        assert np.linalg.norm(A - f.reconstruct()) <= 1e-6 * np.linalg.norm(A)

    def test_exact_for_rank_deficient_input(self):
        # exactness only needs the sketch to preserve the rank, not full
        # column rank: the retained right factor spans the row space
        rng = np.random.default_rng(21)
        A = rng.standard_normal((30, 3)) @ rng.standard_normal((3, 8))
        op = build_sketch("gaussian", 16, 30, seed=22)
        f = sts_svd(A, op)
        assert f.r == 3
        assert np.linalg.norm(A - f.reconstruct()) <= 1e-10 * np.linalg.norm(A)

    def test_sparse_input_not_densified(self):
        class NoDense(sp.csr_matrix):
            def toarray(self, *a, **k):  # pragma: no cover
                raise AssertionError("matrix was densified")

        rng = np.random.default_rng(9)
        A = NoDense(sp.random_array((300, 10), density=0.05, rng=rng))
        op = build_sketch("gaussian", 40, 300, seed=10)
        f = sts_svd(A, op)
        assert f.r == 10
        dense = sp.csr_matrix(A).toarray()
        assert np.linalg.norm(dense - f.reconstruct()) <= 1e-10 * np.linalg.norm(dense)

    def test_low_sketch_dimension_warns(self):
        rng = np.random.default_rng(11)
        A = rng.standard_normal((40, 10))
        op = build_sketch("gaussian", 4, 40, seed=12)
        with pytest.warns(SketchRankWarning):
            f = sts_svd(A, op)
        assert f.r == 4

    def test_row_mismatch(self):
        op = build_sketch("gaussian", 4, 40, seed=0)
        with pytest.raises(ShapeError):
            sts_svd(np.ones((41, 2)), op)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(13)
        A = rng.standard_normal((60, 8))
        op = build_sketch("srtt", 32, 60, seed=14)
        f = sts_svd(A, op)
        SW = op.apply(f.W)
        base = np.linalg.norm(SW.T @ SW - np.eye(8), 2)
        for seed in range(10):
            U = rand_orthonormal(np.random.default_rng(seed), 8, 8)
            SWU = op.apply(f.W @ U)
            assert np.linalg.norm(SWU.T @ SWU - np.eye(8), 2) <= base + 1e-12


class TestSketchedQR:
    def test_orthonormal_input_full_sample(self):
        m, n = 24, 5
        op = build_sketch("srtt", m, m, seed=1)
        A = rand_orthonormal(np.random.default_rng(2), m, n)
        Q, R = sketched_qr(A, op)
        np.testing.assert_allclose(Q, A, atol=1e-10)
        np.testing.assert_allclose(R, np.eye(n), atol=1e-10)

    def test_dependent_columns_raise(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal(30)
        A = np.column_stack([a, 2 * a])
        op = build_sketch("gaussian", 10, 30, seed=4)
        with pytest.raises(RankDeficiencyError) as err:
            sketched_qr(A, op)
        assert err.value.column == 1

    def test_residual_and_orthogonality(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((100, 10))
        op = build_sketch("gaussian", 40, 100, seed=6)
        Q, R = sketched_qr(A, op)
        assert np.linalg.norm(A - Q @ R) <= 1e-10 * np.linalg.norm(A)
        SQ = op.apply(Q)
        assert np.linalg.norm(SQ.T @ SQ - np.eye(10), 2) <= 1e-8
        assert (np.diag(R) > 0).all()

    def test_sketch_too_small(self):
        op = build_sketch("gaussian", 3, 30, seed=7)
        with pytest.raises(ShapeError):
            sketched_qr(np.ones((30, 5)), op)

    def test_sparse_input(self):
        rng = np.random.default_rng(8)
        A = sp.random_array((80, 6), density=0.3, rng=rng).tocsr()
        op = build_sketch("srtt", 30, 80, seed=9)
        Q, R = sketched_qr(A, op)
        assert np.linalg.norm(A.toarray() - Q @ R) <= 1e-10 * np.linalg.norm(A.toarray())


class TestViaQrRoute:
    def test_orthogonal_input_full_sample(self):
        m, n = 20, 6
        op = build_sketch("srtt", m, m, seed=1)
        A = rand_orthonormal(np.random.default_rng(2), m, n)
        f = sts_svd_via_qr(A, op)
        np.testing.assert_allclose(f.theta, np.ones(n), atol=1e-12)

    def test_route_agreement(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((50, 5))
        op = build_sketch("gaussian", 30, 50, seed=4)
        direct = sts_svd(A, op)
        via_qr = sts_svd_via_qr(A, op)
        np.testing.assert_allclose(via_qr.theta, direct.theta, rtol=1e-10)
        dense_checks(A, via_qr, op)

    def test_route_agreement_many_seeds(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            A = rng.standard_normal((40, 6))
            op = build_sketch("srtt", 24, 40, seed=seed)
            direct = sts_svd(A, op)
            via_qr = sts_svd_via_qr(A, op)
            np.testing.assert_allclose(via_qr.theta, direct.theta, rtol=1e-8)

    def test_rank_deficient_raises(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal(25)
        A = np.column_stack([a, -0.5 * a])
        op = build_sketch("gaussian", 10, 25, seed=6)
        with pytest.raises(RankDeficiencyError):
            sts_svd_via_qr(A, op)


class TestTruncate:
    @pytest.fixture
    def factored(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((30, 6))
        op = build_sketch("gaussian", 24, 30, seed=8)
        return A, op, sts_svd(A, op)

    def test_full_rank_zero_error(self, factored):
        A, op, f = factored
        fk = truncate(f, f.r)
        assert s_fro_norm(A - fk.reconstruct(), op) <= 1e-12 * np.linalg.norm(A)

    def test_drop_one_tail(self, factored):
        A, op, f = factored
        fk = truncate(f, f.r - 1)
        err = s_fro_norm(A - fk.reconstruct(), op)
        assert err == pytest.approx(f.theta[-1], rel=1e-10)
        err2 = s_two_norm(A - fk.reconstruct(), op)
        assert err2 == pytest.approx(f.theta[-1], rel=1e-10)

    def test_tail_identities_all_k(self, factored):
        A, op, f = factored
        tail_sq = np.cumsum(f.theta[::-1] ** 2)[::-1]
        for k in range(1, f.r):
            fk = truncate(f, k)
            err_f = s_fro_norm(A - fk.reconstruct(), op)
            assert err_f**2 == pytest.approx(tail_sq[k], rel=1e-10)
            err_2 = s_two_norm(A - fk.reconstruct(), op)
            assert err_2 == pytest.approx(f.theta[k], rel=1e-10)

    def test_beats_random_competitors(self, factored):
        A, op, f = factored
        k = 3
        fk = truncate(f, k)
        best_f = s_fro_norm(A - fk.reconstruct(), op)
        best_2 = s_two_norm(A - fk.reconstruct(), op)
        rng = np.random.default_rng(9)
        Wk, Vk = f.W[:, :k], f.V[:, :k]
        for trial in range(200):
            if trial % 2 == 0:
                L = np.diag(f.theta[:k]) + 0.1 * rng.standard_normal((k, k))
            else:
                L = rng.standard_normal((k, k))
            B = (Wk @ L) @ Vk.T
            assert s_fro_norm(A - B, op) >= best_f - 1e-10
            assert s_two_norm(A - B, op) >= best_2 - 1e-10
        # the classical truncated SVD is also no better in the sketch norms
        U, sig, Vt = np.linalg.svd(A, full_matrices=False)
        B = (U[:, :k] * sig[:k]) @ Vt[:k]
        assert s_fro_norm(A - B, op) >= best_f - 1e-10
        assert s_two_norm(A - B, op) >= best_2 - 1e-10

    @settings(max_examples=15, deadline=None)
    @given(k=st.integers(1, 6), seed=st.integers(0, 10))
    def test_truncation_rank_property(self, k, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((30, 6))
        op = build_sketch("gaussian", 24, 30, seed=seed)
        f = sts_svd(A, op)
        fk = truncate(f, k)
        assert fk.r == k
        assert fk.W.shape[1] == k
        np.testing.assert_allclose(fk.theta, f.theta[:k])

    def test_out_of_range(self, factored):
        _, _, f = factored
        with pytest.raises(ValueError):
            truncate(f, 0)
        with pytest.raises(ValueError):
            truncate(f, f.r + 1)

    def test_minmax_characterization(self, factored):
        # theta_k dominates the sketched smallest gain over random
        # k-dimensional trial subspaces, with equality on the leading
        # right singular subspace.
        A, op, f = factored
        SA = op.apply(A)
        rng = np.random.default_rng(10)
        n = A.shape[1]
        for k in (1, 3, 5):
            for _ in range(200):
                U = rand_orthonormal(rng, n, k)
                gain = np.linalg.svd(SA @ U, compute_uv=False)[-1]
                assert gain <= f.theta[k - 1] + 1e-10
            opt = np.linalg.svd(SA @ f.V[:, :k], compute_uv=False)[-1]
            assert opt == pytest.approx(f.theta[k - 1], rel=1e-10)


class TestSNorms:
    def test_zero(self):
        op = build_sketch("gaussian", 5, 12, seed=1)
        assert s_fro_norm(np.zeros((12, 3)), op) == 0.0
        assert s_two_norm(np.zeros((12, 3)), op) == 0.0

    def test_full_sample_matches_classical(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((18, 4))
        op = build_sketch("srtt", 18, 18, seed=3)
        assert s_fro_norm(X, op) == pytest.approx(np.linalg.norm(X), rel=1e-12)
        assert s_two_norm(X, op) == pytest.approx(np.linalg.norm(X, 2), rel=1e-12)

    def test_theta_identities(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((40, 7))
        op = build_sketch("gaussian", 28, 40, seed=5)
        f = sts_svd(A, op)
        assert s_fro_norm(A, op) == pytest.approx(
            np.sqrt(np.sum(f.theta**2)), rel=1e-10
        )
        assert s_two_norm(A, op) == pytest.approx(f.theta[0], rel=1e-10)

    def test_certificate_inequality(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((50, 6))
        op = build_sketch("gaussian", 30, 50, seed=7)
        cert = empirical_epsilon(op, range_basis(X))
        lo = np.sqrt(max(1.0 - cert.epsilon_emp, 0.0))
        hi = np.sqrt(1.0 + cert.epsilon_emp)
        for norm, s_norm in (
            (np.linalg.norm(X), s_fro_norm(X, op)),
            (np.linalg.norm(X, 2), s_two_norm(X, op)),
        ):
            assert lo * norm - 1e-10 <= s_norm <= hi * norm + 1e-10


class TestCompareSpectra:
    def test_orthonormal_full_sample(self):
        m, n = 30, 5
        A = rand_orthonormal(np.random.default_rng(1), m, n)
        op = build_sketch("srtt", m, m, seed=2)
        f = sts_svd(A, op)
        ref = jacobi_svd(A)
        cert = empirical_epsilon(op, range_basis(A))
        cmp = compare_spectra(f, ref, cert)
        assert cmp.all_within
        np.testing.assert_allclose(cmp.theta, np.ones(n), atol=1e-12)
        np.testing.assert_allclose(cmp.sigma, np.ones(n), atol=1e-12)

    def test_sandwich_many_seeds(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            A = rng.standard_normal((40, 8))
            op = build_sketch("gaussian", 24, 40, seed=seed)
            f = sts_svd(A, op)
            ref = SvdFactors(
                U=np.zeros((40, 8)),
                sigma=np.linalg.svd(A, compute_uv=False),
                V=np.zeros((8, 8)),
            )
            cert = empirical_epsilon(op, range_basis(A))
            assert compare_spectra(f, ref, cert).all_within

    def test_cauchy_rank_detection(self):
        C = gen_cauchy(CauchySpec(n=200))
        sigma = np.linalg.svd(C, compute_uv=False)
        rank_sigma = numerical_rank(sigma)
        assert rank_sigma <= 12
        op = build_sketch("srtt", 60, 200, seed=3)
        from sketchsvd import sts_singular_values

        theta, _ = sts_singular_values(C, op)
        assert numerical_rank(theta) == rank_sigma

    def test_sandwich_with_sketch_below_columns(self):
        # s < n: the certificate over the full range degenerates
        # (epsilon_emp >= 1) but the upper side still binds every theta
        C = gen_cauchy(CauchySpec(n=200))
        sigma = np.linalg.svd(C, compute_uv=False)
        ref = SvdFactors(U=np.zeros((200, 200)), sigma=sigma, V=np.zeros((200, 200)))
        for seed in range(5):
            op = build_sketch("srtt", 30, 200, seed=seed)
            with pytest.warns(SketchRankWarning):
                f = sts_svd(C, op, rtol=0.0)
            cert = empirical_epsilon(op, range_basis(C, rtol=0.0))
            assert cert.epsilon_emp >= 1.0
            assert compare_spectra(f, ref, cert).all_within

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((20, 6))
        op = build_sketch("gaussian", 12, 20, seed=5)
        f = sts_svd(A, op)
        short = SvdFactors(U=np.zeros((20, 2)), sigma=np.ones(2), V=np.zeros((6, 2)))
        cert = empirical_epsilon(op, range_basis(A))
        with pytest.raises(ShapeError):
            compare_spectra(f, short, cert)
