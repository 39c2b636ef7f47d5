import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restartfa.linalg import (
    CompletionError,
    NotPsdError,
    PartialMatrix,
    complete_unitary,
    embed_stochastic,
    is_row_stochastic,
    is_unitary,
    psd_principal_sqrt,
)

from helpers import random_stochastic, random_unitary

H = 1 / math.sqrt(2)


class TestIsUnitary:
    def test_identity(self):
        assert is_unitary(np.eye(3), 1e-12)

    def test_real_rotation(self):
        assert is_unitary(np.array([[H, H], [H, -H]]), 1e-12)

    def test_shear_is_not(self):
        assert not is_unitary(np.array([[1.0, 1.0], [0.0, 1.0]]), 1e-6)

    def test_non_square_raises(self):
        with pytest.raises(ValueError):
            is_unitary(np.ones((2, 3)))


class TestCompleteUnitary:
    def test_forced_identity(self):
        pm = PartialMatrix(2)
        pm.set_column(0, [1.0, 0.0])
        assert np.array_equal(complete_unitary(pm), np.eye(2, dtype=complex))

    def test_full_specification_unchanged(self):
        pm = PartialMatrix(2)
        pm.set_column(0, [H, H])
        pm.set_column(1, [H, -H])
        out = complete_unitary(pm)
        assert out[0, 0] == H and out[1, 1] == -H

    def test_bm_base_input_matrix(self, bm_pair):
        # the two specified columns of the modular-length base on 'a' extend
        # to a 4x4 unitary
        base, _ = bm_pair
        u = base.transitions["a"]
        assert is_unitary(u, 1e-10)
        c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
        assert u[0, 0] == c and u[1, 0] == s and u[0, 1] == -s

    def test_specified_columns_bit_exact(self):
        rng = np.random.default_rng(5)
        u = random_unitary(rng, 5)
        pm = PartialMatrix(5)
        pm.set_column(1, u[:, 1])
        pm.set_column(3, u[:, 3])
        out = complete_unitary(pm)
        assert np.array_equal(out[:, 1], u[:, 1])
        assert np.array_equal(out[:, 3], u[:, 3])
        assert is_unitary(out, 1e-10)

    def test_deterministic(self):
        pm1, pm2 = PartialMatrix(3), PartialMatrix(3)
        for pm in (pm1, pm2):
            pm.set_column(0, [H, H, 0.0])
        a, b = complete_unitary(pm1), complete_unitary(pm2)
        assert np.array_equal(a, b)

    def test_error_names_offending_pair(self):
        pm = PartialMatrix(2)
        pm.set_column(0, [1.0, 0.0])
        pm.set_column(1, [1.0, 0.0])
        with pytest.raises(CompletionError, match="0 and 1"):
            complete_unitary(pm)

    def test_unnormalized_column_rejected(self):
        pm = PartialMatrix(2)
        pm.set_column(0, [0.5, 0.0])
        with pytest.raises(CompletionError):
            complete_unitary(pm)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.data())
    @settings(max_examples=60, deadline=None)
    def test_random_partial_completion(self, seed, n, data):
        rng = np.random.default_rng(seed)
        u = random_unitary(rng, n)
        k = data.draw(st.integers(0, n))
        cols = data.draw(st.permutations(range(n))).copy()[:k]
        pm = PartialMatrix(n)
        for c in cols:
            pm.set_column(c, u[:, c])
        out = complete_unitary(pm)
        assert is_unitary(out, 1e-9)
        for c in cols:
            assert np.array_equal(out[:, c], u[:, c])


class TestPsdPrincipalSqrt:
    def test_identity(self):
        assert np.allclose(psd_principal_sqrt(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        out = psd_principal_sqrt(np.diag([4.0, 9.0]))
        assert np.allclose(out, np.diag([2.0, 3.0]))

    def test_gram_reconstruction(self):
        rng = np.random.default_rng(17)
        a = rng.normal(size=(5, 5))
        gram = a @ a.T
        b = psd_principal_sqrt(gram)
        assert np.abs(b @ b.T - gram).max() <= 1e-9

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(NotPsdError):
            psd_principal_sqrt(np.diag([1.0, -0.5]))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    @settings(max_examples=50, deadline=None)
    def test_square_then_sqrt_roundtrips(self, seed, n):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(n, n))
        gram = a @ a.T
        b = psd_principal_sqrt(gram)
        assert np.abs(b @ b.T - gram).max() <= 1e-9 * max(1.0, np.abs(gram).max())

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    @settings(max_examples=50, deadline=None)
    def test_sqrt_of_square_recovers_psd_input(self, seed, n):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(n, n)) / n
        psd = a @ a.T
        recovered = psd_principal_sqrt(psd @ psd.T)
        assert np.abs(recovered - psd).max() <= 1e-9


class TestEmbedStochastic:
    def test_degenerate_dimension(self):
        u, scale = embed_stochastic(np.array([[1.0]]))
        assert scale == 1.0
        assert u[0, 0] == 1.0
        assert is_unitary(u, 1e-12)

    def test_identity_rows_orthogonal(self):
        a = np.eye(2)
        u, scale = embed_stochastic(a)
        assert scale == math.sqrt(2)
        top = u[:2, :] * scale
        gram = top @ top.conj().T
        assert np.abs(gram - scale**2 * np.eye(2)).max() <= 1e-9

    def test_uniform_block(self):
        a = np.array([[0.5, 0.5], [0.5, 0.5]])
        u, scale = embed_stochastic(a)
        assert is_unitary(u, 1e-10)
        assert np.abs(u[:2, :2] - a / scale).max() <= 1e-12

    def test_non_stochastic_rejected(self):
        with pytest.raises(ValueError):
            embed_stochastic(np.array([[0.5, 0.6], [0.5, 0.5]]))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    @settings(max_examples=60, deadline=None)
    def test_row_gram_identity(self, seed, n):
        rng = np.random.default_rng(seed)
        a = random_stochastic(rng, n)
        u, scale = embed_stochastic(a)
        assert is_unitary(u, 1e-9)
        top = u[:n, :]
        gram = (top * scale) @ (top * scale).conj().T
        assert np.abs(gram - scale**2 * np.eye(n)).max() <= 1e-9
        assert np.abs(u[:n, :n] - a / scale).max() <= 1e-12


def test_row_stochastic_check():
    assert is_row_stochastic(np.array([[0.25, 0.75], [1.0, 0.0]]))
    assert not is_row_stochastic(np.array([[0.6, 0.6], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        is_row_stochastic(np.ones((1, 2)))
