"""Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Multipartite
operators are described by a sequence of subsystem dimensions; subsystem
``k`` is the ``k``-th tensor factor in row-major (Kronecker) order.

All logarithms are base 2.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InfiniteValue,
    NonHermitian,
    NotAState,
    SupportViolation,
)

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
STATE_TRACE_TOL = 1e-10
RANK_CUTOFF = 1e-9


class Spectrum(NamedTuple):
    """Descending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # make the first entry of largest modulus real positive, column by column
    mags = np.abs(vecs)
    idx = np.argmax(mags > mags.max(axis=0, keepdims=True) - 1e-12, axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.where(np.abs(pivots) > 0, np.abs(pivots), 1), 1)
    return vecs / phases


def eigh(m, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Eigenvector phases are fixed so the output is a deterministic function
    of the input.
    """
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NonHermitian("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(hermitize(m))
    w = w[::-1]
    v = _fix_phases(v[:, ::-1])
    return Spectrum(w, v)


def eigvalsh(m) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part of ``m``; no checks."""
    return np.linalg.eigvalsh(hermitize(as_matrix(m)))


def svd_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def trace_norm(m) -> float:
    return float(np.sum(svd_values(m)))


def l1_norm(m) -> float:
    return float(np.sum(np.abs(as_matrix(m))))


def purity(rho) -> float:
    rho = as_matrix(rho)
    return float(np.real(np.vdot(rho, rho)))


def _check_square(m: np.ndarray, dims: Sequence[int]) -> None:
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise DimensionMismatch(f"matrix of shape {m.shape} does not match dims {tuple(dims)}")


def _normalize_subsystems(sel, n: int) -> list[int]:
    if isinstance(sel, (int, np.integer)):
        sel = [int(sel)]
    out = sorted(set(int(s) for s in sel))
    for s in out:
        if not 0 <= s < n:
            raise DimensionMismatch(f"subsystem index {s} out of range for {n} subsystems")
    return out


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``keep`` is a subsystem index or a collection of indices; the kept
    factors stay in their original order.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_square(m, dims)
    n = len(dims)
    keep = _normalize_subsystems(keep, n)
    trace_out = [k for k in range(n) if k not in keep]
    t = m.reshape(dims + dims)
    # contract traced axes pairwise, highest index first so positions stay valid
    for k in sorted(trace_out, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + cur)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def permute_subsystems(m, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``k`` is old factor ``order[k]``."""
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_square(m, dims)
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise DimensionMismatch(f"{order} is not a permutation of {n} subsystems")
    t = m.reshape(dims + dims)
    t = t.transpose(list(order) + [n + k for k in order])
    d = m.shape[0]
    return t.reshape(d, d)


def permute_vector(psi, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return psi.reshape([int(d) for d in dims]).transpose(list(order)).reshape(-1)


def dephase(m, dims: Sequence[int], targets) -> np.ndarray:
    """Zero every entry that is off-diagonal in any target subsystem's basis."""
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_square(m, dims)
    n = len(dims)
    targets = _normalize_subsystems(targets, n)
    mask = np.ones((1, 1), dtype=bool)
    for k, d in enumerate(dims):
        factor = np.eye(d, dtype=bool) if k in targets else np.ones((d, d), dtype=bool)
        mask = np.kron(mask, factor).astype(bool)
    return np.where(mask, m, 0)


def tensor(*ms) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, as_matrix(m))
    return out


def block(m, dims: tuple[int, int], i: int, j: int) -> np.ndarray:
    """The ``dB x dB`` block <i|m|j>_A of a bipartite operator."""
    m = as_matrix(m)
    dA, dB = int(dims[0]), int(dims[1])
    _check_square(m, (dA, dB))
    if not (0 <= i < dA and 0 <= j < dA):
        raise IndexOutOfRange(f"block ({i}, {j}) outside {dA}x{dA}")
    return m[i * dB:(i + 1) * dB, j * dB:(j + 1) * dB].copy()


def blocks(m, dims: tuple[int, int]) -> np.ndarray:
    """All blocks as an array indexed ``[i, j, :, :]``."""
    m = as_matrix(m)
    dA, dB = int(dims[0]), int(dims[1])
    _check_square(m, (dA, dB))
    return m.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3)


def check_state(rho, psd_tol: float = PSD_TOL, trace_tol: float = STATE_TRACE_TOL) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise NotAState(f"density matrix must be square, got {rho.shape}")
    if not is_hermitian(rho):
        raise NotAState("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise NotAState(f"trace {tr!r} differs from 1")
    lmin = eigvalsh(rho)[0]
    if lmin < -psd_tol:
        raise NotAState(f"negative eigenvalue {lmin!r}")
    return rho


def entropy_of_probs(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho, check: bool = True) -> float:
    """Entropy in bits, with 0 log 0 = 0."""
    if check:
        rho = check_state(rho, psd_tol=1e-10, trace_tol=1e-10)
    w = eigvalsh(rho)
    return entropy_of_probs(np.clip(w, 0.0, None))


def _rank_mask(w: np.ndarray) -> np.ndarray:
    top = np.max(w, initial=0.0)
    if top <= 0:
        return np.zeros_like(w, dtype=bool)
    return w > RANK_CUTOFF * top


def rank(rho) -> int:
    w = eigvalsh(rho)
    return int(np.count_nonzero(_rank_mask(w)))


def support_projector(rho) -> np.ndarray:
    w, v = eigh(rho)
    vs = v[:, _rank_mask(w)]
    return vs @ vs.conj().T


def d_max(rho, sigma) -> float:
    """Max-relative entropy log2 min{t : rho <= t sigma}, in bits."""
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    w, v = eigh(sigma)
    keep = _rank_mask(w)
    vs = v[:, keep]
    # supp(rho) in supp(sigma) iff rho has no weight outside the range of sigma
    outside = np.trace(rho).real - np.trace(vs.conj().T @ rho @ vs).real
    if outside > 1e-9 * max(1.0, np.trace(rho).real):
        raise SupportViolation("support of rho is not contained in support of sigma")
    s = 1.0 / np.sqrt(w[keep])
    m = (s[:, None] * (vs.conj().T @ rho @ vs)) * s[None, :]
    lmax = eigvalsh(m)[-1]
    if lmax <= 0:
        raise InfiniteValue("rho vanishes; max-relative entropy is -inf")
    return float(np.log2(lmax))


def d_min(rho, sigma) -> float:
    """Min-relative entropy -log2 Tr(P_rho sigma), in bits."""
    overlap = np.trace(support_projector(rho) @ as_matrix(sigma)).real
    if overlap <= 0:
        raise InfiniteValue("sigma has no overlap with the support of rho")
    return float(-np.log2(overlap))


def purify(rho) -> np.ndarray:
    """Vector sum_k sqrt(l_k) |e_k>|k> on H (x) H whose reduction is ``rho``."""
    rho = check_state(rho)
    w, v = eigh(rho)
    d = rho.shape[0]
    w = np.where(_rank_mask(w), np.clip(w, 0, None), 0.0)
    psi = np.zeros(d * d, dtype=complex)
    for k in range(d):
        if w[k] > 0:
            psi += np.sqrt(w[k]) * np.kron(v[:, k], np.eye(d)[k])
    return psi / np.linalg.norm(psi)


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def psd_sqrt(m) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(as_matrix(m)))
    w = np.sqrt(np.clip(w, 0, None))
    return (v * w) @ v.conj().T


def matrix_abs(m) -> np.ndarray:
    """|m| = sqrt(m^dagger m)."""
    m = as_matrix(m)
    return psd_sqrt(m.conj().T @ m)
