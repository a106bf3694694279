"""Dense antisymmetric-tensor reference for the pointwise algebra.

Everything here works on full rank-k arrays of shape ``(P,) + (n,) * k``
(P sample points) and brute-forces sums over permutations, so it shares no
index tables with :mod:`exmhd.exterior`.
"""
from __future__ import annotations

import math
from itertools import combinations, permutations, product

import numpy as np


def parity(perm) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def levi_civita(seq) -> int:
    """Sign of ``seq`` as a permutation of its sorted values, 0 on repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    order = sorted(range(len(seq)), key=lambda i: seq[i])
    return parity(order)


def to_dense(coeffs: np.ndarray, n: int, k: int) -> np.ndarray:
    """Increasing-index coefficients ``(P, C(n,k))`` -> dense tensors ``(P, n^k)``."""
    P = coeffs.shape[0]
    T = np.zeros((P,) + (n,) * k)
    for c, I in enumerate(combinations(range(n), k)):
        for perm in permutations(range(k)):
            idx = tuple(I[p] for p in perm)
            T[(slice(None),) + idx] = parity(perm) * coeffs[:, c]
    return T


def from_dense(T: np.ndarray, n: int, k: int) -> np.ndarray:
    return np.stack([T[(slice(None),) + I] for I in combinations(range(n), k)], axis=1) if k else T.reshape(-1, 1)


def wedge(Ta, Tb, n, k, l) -> np.ndarray:
    """``(a ^ b)_J = sum_sigma sgn(sigma) a_{J sigma(:k)} b_{J sigma(k:)} / (k! l!)``."""
    out = []
    for J in combinations(range(n), k + l):
        acc = 0.0
        for perm in permutations(range(k + l)):
            idx = tuple(J[p] for p in perm)
            acc = acc + parity(perm) * Ta[(slice(None),) + idx[:k]] * Tb[(slice(None),) + idx[k:]]
        out.append(acc / (math.factorial(k) * math.factorial(l)))
    return np.stack(out, axis=1)


def interior(X, T, n, k) -> np.ndarray:
    """``(i_X w)_I = sum_j X^j w_{j I}`` for every increasing ``I``."""
    out = []
    for I in combinations(range(n), k - 1):
        acc = 0.0
        for j in range(n):
            acc = acc + X[:, j] * T[(slice(None), j) + I]
        out.append(acc)
    return np.stack(out, axis=1)


def raise_all(T, metric, k) -> np.ndarray:
    out = T.copy()
    ginv = 1.0 / np.asarray(metric)
    for axis in range(1, k + 1):
        shape = [1] * out.ndim
        shape[axis] = len(metric)
        out = out * ginv.reshape(shape)
    return out


def star(T, n, k, metric) -> np.ndarray:
    """``(*w)_J = (1/k!) sqrt(g) w^{i_1..i_k} eps_{i_1..i_k J}`` summed over all index tuples."""
    sqrt_g = math.sqrt(math.prod(metric))
    Tup = raise_all(T, metric, k)
    out = []
    for J in combinations(range(n), n - k):
        acc = 0.0
        for idx in product(range(n), repeat=k):
            eps = levi_civita(idx + J)
            if eps:
                acc = acc + eps * Tup[(slice(None),) + idx]
        out.append(sqrt_g * acc / math.factorial(k))
    return np.stack(out, axis=1)


def norm2(T, k, metric) -> np.ndarray:
    """Full contraction ``w_{i..} w^{i..}``."""
    Tup = raise_all(T, metric, k)
    return np.sum((T * Tup).reshape(T.shape[0], -1), axis=1)
