"""Random unitaries, channels and incoherent instruments, plus helpers to
apply Kraus operators to one tensor factor."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .states import complex_gaussian


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = complex_gaussian(rng, (d, d))
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(d_out, rng)[:, :d_in]


def random_channel(d_in: int, d_out: int, n_kraus: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Kraus operators of a channel from a Haar-random Stinespring isometry."""
    if d_out * n_kraus < d_in:
        raise DimensionMismatch(f"{n_kraus} Kraus operators of size {d_out}x{d_in} cannot be trace preserving")
    v = haar_isometry(d_in, d_out * n_kraus, rng)
    return [v[k * d_out:(k + 1) * d_out, :] for k in range(n_kraus)]


def embed(op: np.ndarray, dims: Sequence[int], target: int) -> np.ndarray:
    """``op`` acting on factor ``target``; may change that factor's dimension."""
    left = int(np.prod(dims[:target]))
    right = int(np.prod(dims[target + 1:]))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def apply_local(rho: np.ndarray, dims: Sequence[int], target: int, kraus) -> np.ndarray:
    out = 0
    for k in kraus:
        big = embed(k, dims, target)
        out = out + big @ rho @ big.conj().T
    return out


def is_incoherent_kraus(k: np.ndarray, tol: float = 1e-12) -> bool:
    """At most one nonzero entry per column: diagonal inputs stay diagonal."""
    return bool(np.all(np.count_nonzero(np.abs(k) > tol, axis=0) <= 1))


def random_incoherent_instrument(d: int, rng: np.random.Generator, n_perm: int | None = None,
                                 classical_weight: float | None = None) -> list[np.ndarray]:
    """Kraus operators of a random incoherent operation on a ``d``-level system.

    Two families are mixed with weights ``1 - c`` and ``c``:

    * permutation times diagonal, ``K = P D``, with column norms rescaled so
      the family sums to the identity;
    * measure-and-reprepare ``sqrt(T[k, r]) |k><r|`` for a random
      column-stochastic ``T``.

    Each Kraus operator has one nonzero per column, so it maps incoherent
    states to incoherent states.
    """
    n_perm = n_perm or int(rng.integers(1, d + 2))
    c = float(rng.uniform(0, 1)) if classical_weight is None else classical_weight
    kraus = []
    amps = complex_gaussian(rng, (n_perm, d))
    amps /= np.linalg.norm(amps, axis=0, keepdims=True)
    for mu in range(n_perm):
        perm = rng.permutation(d)
        k = np.zeros((d, d), dtype=complex)
        k[perm, np.arange(d)] = amps[mu]
        kraus.append(np.sqrt(1 - c) * k)
    if c > 0:
        t = rng.dirichlet(np.ones(d), size=d).T  # column r is a distribution over k
        for r in range(d):
            for kk in range(d):
                k = np.zeros((d, d), dtype=complex)
                k[kk, r] = np.sqrt(c * t[kk, r]) * np.exp(2j * np.pi * rng.uniform())
                kraus.append(k)
    return [k for k in kraus if np.any(np.abs(k) > 0)]


def completeness_defect(kraus) -> float:
    d = kraus[0].shape[1]
    s = sum(k.conj().T @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(d))))
