import numpy as np
import pytest

import oracles
from qpcanet.errors import ShapeError
from qpcanet.filters import CovarianceAccumulator, covariance, learn_pca_filters, learn_qpca_filters
from qpcanet.linalg import conj_transpose, frobenius_norm, hermitian_eig, matmul, qidentity
from qpcanet.patches import PatchMatrix, extract_centered_patches, to_quaternion_image
from qpcanet.quaternion import qmul


def qpatches(data, shape=None):
    data = np.asarray(data, dtype=float)
    return PatchMatrix(data, shape or (data.shape[0], 1))


def projector(bank):
    w = bank.vectors()
    if bank.is_quaternion:
        return matmul(w, conj_transpose(w))
    return w @ w.T


def check_bank(bank):
    w = bank.vectors()
    L = bank.size
    if bank.is_quaternion:
        gram = matmul(conj_transpose(w), w)
        np.testing.assert_allclose(gram[np.arange(L), np.arange(L), 0], 1.0, atol=1e-10)
        off = gram.copy()
        off[np.arange(L), np.arange(L)] = 0
        assert np.sqrt((off**2).sum(axis=-1)).max(initial=0) <= 1e-8
    else:
        np.testing.assert_allclose(w.T @ w, np.eye(L), atol=1e-8)
    assert np.all(np.diff(bank.eigenvalues) <= 0)
    assert bank.eigenvalues.min() >= -1e-10


class TestCovariance:
    def test_single_imaginary_column(self):
        sigma = covariance(qpatches([[[0, 1, 0, 0]]]))
        np.testing.assert_array_equal(sigma, [[[1, 0, 0, 0]]])

    def test_two_columns(self):
        sigma = covariance(qpatches([[[0, 1, 0, 0], [0, 0, 1, 0]]]))
        np.testing.assert_array_equal(sigma, [[[1, 0, 0, 0]]])

    def test_against_outer_product_loop(self, rng):
        data = rng.normal(size=(4, 50, 4))
        ref = oracles.quaternion_covariance(data.transpose(1, 0, 2).tolist())
        np.testing.assert_allclose(covariance(qpatches(data)), np.array(ref), atol=1e-13)

    def test_hermitian_psd(self, rng):
        pm = extract_centered_patches(to_quaternion_image(rng.random((16, 16, 3))), 3, 3)
        sigma = covariance(pm)
        assert frobenius_norm(sigma - conj_transpose(sigma)) <= 1e-12 * frobenius_norm(sigma)
        assert hermitian_eig(sigma).eigenvalues.min() >= -1e-10

    def test_streaming_matches_single_shot(self, rng):
        blocks = [extract_centered_patches(rng.normal(size=(9, 8, 4)), 3, 3) for _ in range(4)]
        acc = CovarianceAccumulator()
        for b in blocks:
            acc.add(b)
        whole = covariance(PatchMatrix(np.concatenate([b.data for b in blocks], axis=1), (3, 3)))
        np.testing.assert_allclose(acc.result(), whole, atol=1e-14)
        assert acc.count == sum(b.count for b in blocks)

    def test_empty(self):
        with pytest.raises(ShapeError):
            CovarianceAccumulator().result()

    def test_real(self, rng):
        x = rng.normal(size=(5, 30))
        np.testing.assert_allclose(covariance(PatchMatrix(x, (1, 5, 1))), x @ x.T / 30, atol=1e-14)


class TestQpca:
    def test_rank_one(self, rng):
        u = rng.normal(size=(9, 4))
        scalars = rng.normal(size=200)
        data = u[:, None, :] * scalars[None, :, None]
        bank = learn_qpca_filters(qpatches(data, (3, 3)), 4)
        w1 = bank.vectors()[:, :1]
        uu = matmul(u[:, None], conj_transpose(u[:, None])) / (u**2).sum()
        np.testing.assert_allclose(matmul(w1, conj_transpose(w1)), uu, atol=1e-10)
        assert np.abs(bank.eigenvalues[1:]).max() <= 1e-10
        check_bank(bank)

    def test_real_data_matches_real_pca(self, rng):
        x = rng.normal(size=(6, 300)) * np.arange(1, 7)[:, None]
        data = np.zeros((6, 300, 4))
        data[..., 0] = x
        qbank = learn_qpca_filters(qpatches(data, (3, 2)), 3)
        w, v = np.linalg.eigh(x @ x.T / 300)
        ref = v[:, -3:] @ v[:, -3:].T
        proj = projector(qbank)
        np.testing.assert_allclose(proj[..., 0], ref, atol=1e-8)
        assert np.abs(proj[..., 1:]).max() <= 1e-8
        np.testing.assert_allclose(qbank.eigenvalues, w[::-1][:3], atol=1e-10)

    def test_complete_basis(self, rng):
        pm = extract_centered_patches(rng.normal(size=(12, 12, 4)), 3, 3)
        bank = learn_qpca_filters(pm, 9)
        np.testing.assert_allclose(projector(bank), qidentity(9), atol=1e-8)
        check_bank(bank)
        assert bank.filters.shape == (9, 3, 3, 4)

    def test_filters_are_reshaped_row_major(self, rng):
        pm = extract_centered_patches(rng.normal(size=(10, 10, 4)), 3, 5)
        bank = learn_qpca_filters(pm, 2)
        res = hermitian_eig(covariance(pm))
        np.testing.assert_array_equal(bank.filters[1].reshape(15, 4), res.eigenvectors[:, 1])

    def test_permutation_stability(self, rng):
        pm = extract_centered_patches(to_quaternion_image(rng.random((14, 14, 3))), 3, 3)
        perm = rng.permutation(pm.count)
        shuffled = PatchMatrix(pm.data[:, perm], pm.patch_shape)
        a, b = learn_qpca_filters(pm, 4), learn_qpca_filters(shuffled, 4)
        np.testing.assert_allclose(projector(a), projector(b), atol=1e-8)

    def test_bad_L(self, rng):
        pm = extract_centered_patches(rng.normal(size=(6, 6, 4)), 3, 3)
        for L in (0, 10):
            with pytest.raises(ValueError):
                learn_qpca_filters(pm, L)
        with pytest.raises(ShapeError):
            learn_pca_filters(pm, 2)

    def test_warns_on_few_patches(self, rng):
        pm = extract_centered_patches(rng.normal(size=(5, 5, 4)), 5, 5)
        with pytest.warns(RuntimeWarning):
            learn_qpca_filters(pm, 3)


class TestPca:
    def test_rank_one(self, rng):
        u = rng.normal(size=9)
        x = u[:, None] * rng.normal(size=100)[None]
        bank = learn_pca_filters(PatchMatrix(x, (1, 3, 3)), 3)
        np.testing.assert_allclose(np.outer(bank.vectors()[:, 0], bank.vectors()[:, 0]), np.outer(u, u) / (u @ u), atol=1e-10)
        check_bank(bank)
        assert bank.filters.shape == (3, 1, 3, 3)

    def test_complete_basis(self, rng):
        bank = learn_pca_filters(PatchMatrix(rng.normal(size=(12, 80)), (3, 2, 2)), 12)
        np.testing.assert_allclose(projector(bank), np.eye(12), atol=1e-8)
        check_bank(bank)

    def test_white_noise_spectrum_flattens_with_count(self, rng):
        spreads = []
        for count in (200, 20000):
            bank = learn_pca_filters(PatchMatrix(rng.normal(size=(9, count)), (1, 3, 3)), 9)
            spreads.append(bank.eigenvalues[0] - bank.eigenvalues[-1])
        assert spreads[1] < spreads[0]

    def test_sign_convention(self, rng):
        bank = learn_pca_filters(PatchMatrix(rng.normal(size=(9, 200)), (1, 3, 3)), 9)
        for col in bank.vectors().T:
            assert col[np.argmax(np.abs(col))] > 0
