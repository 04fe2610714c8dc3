import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bernoulli_cs.coherence import (
    UnionOfSubspaces,
    coherence_dictionary,
    coherence_exact,
    coherence_samples,
    sample_differences,
)
from bernoulli_cs.errors import InvalidInputError
from bernoulli_cs.analysis import ToyExampleSpec, toy_alpha, toy_prior
from bernoulli_cs.transforms import dense, dft1d, haar1d, haar_atoms, identity

from conftest import random_orthogonal


def mc_sup(F, bases, rng, draws=100_000):
    """Brute-force sup of |<f_j, x>| over random unit vectors of each subspace."""
    M = F.to_matrix()
    best = np.zeros(F.n)
    for B in bases:
        c = rng.standard_normal((B.shape[1], draws))
        x = B @ (c / np.linalg.norm(c, axis=0))
        best = np.maximum(best, np.abs(M @ x).max(axis=1))
    return best


class TestExact:
    def test_axis(self):
        T = UnionOfSubspaces([np.array([[1.0], [0.0], [0.0]])])
        np.testing.assert_allclose(coherence_exact(identity(3), T).alpha, [1, 0, 0])

    def test_toy_construction(self):
        n, k = 12, 4
        spec = ToyExampleSpec(n, k, k)
        expect = np.r_[1.0, np.full(n - 1, np.sqrt((k - 1) / (n - 1)))]
        np.testing.assert_allclose(coherence_exact(identity(n), toy_prior(spec)).alpha, expect, atol=1e-12)
        np.testing.assert_allclose(toy_alpha(spec), expect, atol=1e-12)

    def test_matches_monte_carlo_sup(self, rng):
        F = dense(random_orthogonal(rng, 6))
        B = np.linalg.qr(rng.standard_normal((6, 2)))[0]
        alpha = coherence_exact(F, UnionOfSubspaces([B])).alpha
        np.testing.assert_allclose(alpha, mc_sup(F, [B], rng), atol=1e-3)
        assert np.all(mc_sup(F, [B], rng, 2000) <= alpha + 1e-12)

    def test_basis_invariance(self, rng):
        F = dft1d(10)
        B = np.linalg.qr(rng.standard_normal((10, 3)))[0]
        Q = random_orthogonal(rng, 3)
        a1 = coherence_exact(F, UnionOfSubspaces([B])).alpha
        a2 = coherence_exact(F, UnionOfSubspaces([B @ Q])).alpha
        np.testing.assert_allclose(a1, a2, atol=1e-10)

    def test_adding_subspace_is_monotone(self, rng):
        F = dft1d(9)
        B1 = np.linalg.qr(rng.standard_normal((9, 2)))[0]
        B2 = np.linalg.qr(rng.standard_normal((9, 1)))[0]
        a1 = coherence_exact(F, UnionOfSubspaces([B1])).alpha
        a12 = coherence_exact(F, UnionOfSubspaces([B1, B2])).alpha
        assert np.all(a12 >= a1 - 1e-15)
        assert np.all(a12 <= 1 + 1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            coherence_exact(identity(4), UnionOfSubspaces([np.eye(3)[:, :1]]))

    def test_non_orthonormal_basis_rejected(self):
        with pytest.raises(InvalidInputError):
            UnionOfSubspaces([np.array([[1.0], [1.0]])])

    def test_from_spanning(self):
        T = UnionOfSubspaces.from_spanning([np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])])
        assert (T.M, T.ell, T.n) == (1, 2, 3)
        np.testing.assert_allclose(coherence_exact(identity(3), T).alpha, [1, 1, 0], atol=1e-12)


class TestDictionary:
    def test_canonical_atoms(self):
        np.testing.assert_allclose(coherence_dictionary(identity(5), np.eye(5)).alpha, np.ones(5))

    def test_single_atom_dft(self):
        np.testing.assert_allclose(coherence_dictionary(dft1d(4), np.eye(4)[:1]).alpha, np.full(4, 0.5))

    def test_empty_atoms(self):
        with pytest.raises(InvalidInputError):
            coherence_dictionary(identity(3), np.zeros((0, 3)))

    def test_non_unit_atom(self):
        with pytest.raises(InvalidInputError):
            coherence_dictionary(identity(3), np.array([[1.0, 1.0, 0.0]]))

    @pytest.mark.parametrize("levels", [3, None])
    def test_representative_haar_atoms_match_exhaustive(self, levels):
        F = dft1d(1024)
        H = haar1d(1024, levels)
        full = coherence_dictionary(F, haar_atoms(H)).alpha
        fast = coherence_dictionary(F, haar_atoms(H, representative=True)).alpha
        np.testing.assert_allclose(fast, full, rtol=0, atol=1e-13)


class TestSamples:
    def test_zero_and_axis(self):
        a = coherence_samples(identity(4), np.array([[0, 0, 0, 0], [1.0, 0, 0, 0]])).alpha
        np.testing.assert_allclose(a, [1, 0, 0, 0])

    def test_three_basis_vectors(self):
        a = coherence_samples(identity(5), np.eye(5)[:3]).alpha
        s = 1 / np.sqrt(2)
        np.testing.assert_allclose(a, [s, s, s, 0, 0])

    def test_identical_samples_rejected(self):
        with pytest.raises(InvalidInputError):
            coherence_samples(identity(3), np.ones((4, 3)))

    def test_single_sample_rejected(self):
        with pytest.raises(InvalidInputError):
            coherence_samples(identity(3), np.ones((1, 3)))

    @pytest.mark.parametrize("count", [50, 200])
    def test_dominated_by_exact(self, rng, count):
        F = dft1d(16)
        B = np.linalg.qr(rng.standard_normal((16, 3)))[0]
        samples = (B @ rng.standard_normal((3, count))).T
        a = coherence_samples(F, samples, rng=1).alpha
        exact = coherence_exact(F, UnionOfSubspaces([B])).alpha
        assert np.all(a <= exact + 1e-10)

    def test_large_sample_count_uses_capped_pairs(self, rng):
        X = rng.standard_normal((100, 6))
        D = sample_differences(X, rng=0)
        assert D.shape == (100 + 1000, 6)
        np.testing.assert_allclose(np.linalg.norm(D, axis=1), 1.0)
        np.testing.assert_array_equal(D, sample_differences(X, rng=0))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_alpha_at_most_one(n, ell, seed):
    rng = np.random.default_rng(seed)
    ell = min(ell, n)
    B = np.linalg.qr(rng.standard_normal((n, ell)))[0]
    a = coherence_exact(dft1d(n), UnionOfSubspaces([B])).alpha
    assert np.all(a >= 0) and np.all(a <= 1 + 1e-12)
    # ||B^T F^*||_F^2 = ell, so the squared coherences sum to the dimension
    assert np.isclose(np.sum(a ** 2), ell)
