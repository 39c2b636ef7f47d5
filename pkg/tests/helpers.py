import numpy as np


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_stochastic(rng, n):
    a = rng.random((n, n)) + 1e-3
    return a / a.sum(axis=1, keepdims=True)
