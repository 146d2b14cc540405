"""Convex-roof extremization over pure-state decompositions.

Every decomposition of a rank-``r`` state into ``m`` pure states comes
from an ``m x r`` isometry ``V`` acting on the weighted eigenvectors:
``|psi_k> = sum_j V[k, j] sqrt(l_j) |e_j>`` with weight ``<psi_k|psi_k>``.
The optimizer walks the unitary group by random Givens rotations on the
rows of these unnormalized vectors, accepting only improving moves and
halving the rotation scale after a run of rejections. Restarts are run as
one vectorized batch; restart ``k`` draws its proposals from its own
Philox stream, so results do not depend on how restarts are grouped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import NotIsometry, RankTooHigh
from .states import make_rng, trial_seed


# ---------------------------------------------------------------- functionals

class PureFunctional:
    """A function of normalized pure states, evaluated row-wise on batches."""

    name = "functional"

    def batch(self, psis: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, psi) -> float:
        psi = np.asarray(psi, dtype=complex).reshape(1, -1)
        return float(self.batch(psi / np.linalg.norm(psi))[0])


def _shannon_rows(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1)), 0.0)
    return t.sum(axis=-1)


class DephasedEntropy(PureFunctional):
    """S(Delta_T(|psi><psi|)) for target subsystems T.

    On a pure state this is the Shannon entropy of the measurement
    statistics on T, because each dephased block is rank one.
    """

    def __init__(self, dims, targets):
        self.dims = tuple(int(d) for d in dims)
        self.targets = sorted({int(t) for t in ([targets] if np.isscalar(targets) else targets)})
        self.name = f"S(Delta_{self.targets})"

    def batch(self, psis):
        n = psis.shape[0]
        p = np.abs(psis.reshape((n,) + self.dims)) ** 2
        others = tuple(1 + k for k in range(len(self.dims)) if k not in self.targets)
        if others:
            p = p.sum(axis=others)
        return _shannon_rows(p.reshape(n, -1))


class ReducedEntropy(PureFunctional):
    """Entanglement entropy S(Tr_rest |psi><psi|) across ``keep`` vs the rest."""

    def __init__(self, dims, keep):
        self.dims = tuple(int(d) for d in dims)
        self.keep = sorted({int(t) for t in ([keep] if np.isscalar(keep) else keep)})
        self.name = f"S(rho_{self.keep})"

    def batch(self, psis):
        n = psis.shape[0]
        rest = [k for k in range(len(self.dims)) if k not in self.keep]
        t = psis.reshape((n,) + self.dims).transpose([0] + [1 + k for k in self.keep] + [1 + k for k in rest])
        dk = int(np.prod([self.dims[k] for k in self.keep]))
        m = t.reshape(n, dk, -1)
        if m.shape[2] < dk:
            m = m.transpose(0, 2, 1)
        # both reductions of a pure state share their nonzero spectrum
        g = m @ m.conj().transpose(0, 2, 1)
        if g.shape[1] == 2:
            tr = np.real(g[:, 0, 0] + g[:, 1, 1])
            det = np.real(g[:, 0, 0] * g[:, 1, 1]) - np.abs(g[:, 0, 1]) ** 2
            disc = np.sqrt(np.clip(tr ** 2 - 4 * det, 0, None))
            p = np.stack([(tr + disc) / 2, (tr - disc) / 2], axis=1)
        else:
            p = np.linalg.eigvalsh(g)
        return _shannon_rows(np.clip(p, 0, None))


class DephasedReducedEntropy(PureFunctional):
    """S(Delta_A(Tr_B |psi><psi|)) on a bipartite (dA, dB) pure state."""

    def __init__(self, dims):
        self.inner = DephasedEntropy(dims, [0])
        self.name = "S(Delta_A Tr_B)"

    def batch(self, psis):
        return self.inner.batch(psis)


# ---------------------------------------------------------------- types

@dataclass
class Decomposition:
    weights: np.ndarray
    states: np.ndarray  # rows are normalized pure state vectors

    def density(self) -> np.ndarray:
        return (self.states.T * self.weights) @ self.states.conj()

    def evaluate(self, f: PureFunctional) -> float:
        return float(np.dot(self.weights, f.batch(self.states)))


@dataclass(frozen=True)
class RoofConfig:
    terms: int | None = None
    restarts: int = 32
    max_steps: int = 4000
    step_tolerance: float = 1e-5
    seed: int = 0


@dataclass
class RoofResult:
    value: float
    bound_direction: str
    best: Decomposition
    restarts_agreeing: int
    restart_values: np.ndarray


# ---------------------------------------------------------------- decompositions

def _eigen_frame(rho):
    """Weighted eigenvectors sqrt(l_j) e_j as rows, rank-truncated.

    Degenerate eigenvalues keep the deterministic phase-fixed eigenvectors
    from :func:`linalg.eigh`, which are sorted lexicographically within a
    degenerate group.
    """
    w, v = la.eigh(rho)
    keep = w > la.RANK_CUTOFF * w[0]
    w, v = w[keep], v[:, keep]
    # stable secondary order within degenerate groups
    order = sorted(range(w.size), key=lambda j: (-round(w[j], 12), tuple(np.round(np.abs(v[:, j]), 12))))
    w, v = w[order], v[:, order]
    return (np.sqrt(np.clip(w, 0, None))[:, None] * v.T), w


def enumerate_decomposition(rho, isometry) -> Decomposition:
    frame, _ = _eigen_frame(rho)
    vmat = la.as_matrix(isometry)
    r = frame.shape[0]
    if vmat.shape[1] != r:
        raise NotIsometry(f"isometry has {vmat.shape[1]} columns but rank is {r}")
    if np.max(np.abs(vmat.conj().T @ vmat - np.eye(r))) > 1e-10:
        raise NotIsometry("columns are not orthonormal")
    return _normalize_rows(vmat @ frame)


def _normalize_rows(rows: np.ndarray) -> Decomposition:
    w = np.sum(np.abs(rows) ** 2, axis=1)
    keep = w > 1e-300
    return Decomposition(w[keep], rows[keep] / np.sqrt(w[keep])[:, None])


def _roof_value(rows, f):
    w = np.sum(np.abs(rows) ** 2, axis=-1)
    safe = np.where(w > 0, w, 1.0)
    vals = f.batch((rows / np.sqrt(safe)[..., None]).reshape(-1, rows.shape[-1])).reshape(w.shape)
    return np.sum(np.where(w > 0, w * vals, 0.0), axis=-1)


# ---------------------------------------------------------------- optimizer

def _optimize(rho, f: PureFunctional, cfg: RoofConfig, sign: float) -> RoofResult:
    """Minimize ``sign * roof``; sign = +1 minimizes, -1 maximizes."""
    direction = "upper-bound-of-min" if sign > 0 else "lower-bound-of-max"
    frame, _ = _eigen_frame(rho)
    r, d = frame.shape
    if r == 1:
        dec = _normalize_rows(frame)
        return RoofResult(dec.evaluate(f), direction, dec, cfg.restarts, np.full(cfg.restarts, dec.evaluate(f)))
    m = cfg.terms or r * r
    m = max(m, r)
    nres = max(1, cfg.restarts)

    # restart 0 starts at the eigendecomposition, the rest at Haar-random isometries
    rows = np.zeros((nres, m, d), dtype=complex)
    props = []
    for k in range(nres):
        rng = make_rng(trial_seed(cfg.seed, k))
        if k == 0:
            u = np.eye(m, dtype=complex)
        else:
            z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
            q, rr = np.linalg.qr(z)
            u = q * (np.diag(rr) / np.abs(np.diag(rr)))
        rows[k] = u[:, :r] @ frame
        kk = rng.integers(0, m, size=cfg.max_steps)
        ll = (kk + rng.integers(1, m, size=cfg.max_steps)) % m
        props.append((kk, ll, rng.uniform(-1, 1, cfg.max_steps), rng.uniform(0, 2 * np.pi, cfg.max_steps)))
    kk = np.stack([p[0] for p in props])
    ll = np.stack([p[1] for p in props])
    uu = np.stack([p[2] for p in props])
    ph = np.stack([p[3] for p in props])

    wts = np.sum(np.abs(rows) ** 2, axis=-1)
    safe = np.where(wts > 0, wts, 1.0)
    vals = f.batch((rows / np.sqrt(safe)[..., None]).reshape(-1, d)).reshape(nres, m)
    contrib = np.where(wts > 0, wts * vals, 0.0)
    total = contrib.sum(axis=1)

    step = np.full(nres, np.pi / 2)
    rejects = np.zeros(nres, dtype=int)
    patience = 2 * m * m
    active = np.ones(nres, dtype=bool)
    idx = np.arange(nres)
    for t in range(cfg.max_steps):
        if not active.any():
            break
        a = idx[active]
        ka, la_ = kk[a, t], ll[a, t]
        theta = step[a] * uu[a, t]
        c, s = np.cos(theta), np.sin(theta)
        e = np.exp(1j * ph[a, t])
        rk, rl = rows[a, ka], rows[a, la_]
        nk = c[:, None] * rk - (e * s)[:, None] * rl
        nl = (np.conj(e) * s)[:, None] * rk + c[:, None] * rl
        pair = np.concatenate([nk, nl])
        wp = np.sum(np.abs(pair) ** 2, axis=1)
        sp = np.where(wp > 0, wp, 1.0)
        fv = f.batch(pair / np.sqrt(sp)[:, None])
        cv = np.where(wp > 0, wp * fv, 0.0)
        n_a = a.size
        new_k, new_l = cv[:n_a], cv[n_a:]
        delta = new_k + new_l - contrib[a, ka] - contrib[a, la_]
        accept = sign * delta < -1e-15
        acc = a[accept]
        if acc.size:
            rows[acc, ka[accept]] = nk[accept]
            rows[acc, la_[accept]] = nl[accept]
            contrib[acc, ka[accept]] = new_k[accept]
            contrib[acc, la_[accept]] = new_l[accept]
            total[acc] = contrib[acc].sum(axis=1)
            rejects[acc] = 0
        rej = a[~accept]
        rejects[rej] += 1
        shrink = rej[rejects[rej] >= patience]
        step[shrink] *= 0.5
        rejects[shrink] = 0
        active[shrink[step[shrink] < cfg.step_tolerance]] = False

    totals = _roof_value(rows, f)
    best = int(np.argmin(sign * totals))
    dec = _normalize_rows(rows[best])
    value = dec.evaluate(f)
    agreeing = int(np.sum(np.abs(totals - totals[best]) <= 1e-3))
    return RoofResult(value, direction, dec, agreeing, totals)


def minimize_roof(rho, f: PureFunctional, cfg: RoofConfig | None = None) -> RoofResult:
    """Upper bound on min sum_k w_k f(psi_k) over decompositions of rho."""
    return _optimize(la.as_matrix(rho), f, cfg or RoofConfig(), +1.0)


def maximize_roof(rho, f: PureFunctional, cfg: RoofConfig | None = None) -> RoofResult:
    """Lower bound on max sum_k w_k f(psi_k) over decompositions of rho."""
    return _optimize(la.as_matrix(rho), f, cfg or RoofConfig(), -1.0)


# ---------------------------------------------------------------- brute-force oracle

def grid_oracle_rank2(rho, f: PureFunctional, resolution: float = 0.01, sense: str = "min") -> float:
    """Exhaustive scan of two-term decompositions of a rank <= 2 state.

    Two-term decompositions are the rows of ``U @ frame`` for U in U(2);
    row phases do not change the decomposition, so U is swept over
    ``[[cos(a/2), e^{ib} sin(a/2)], [-e^{-ib} sin(a/2), cos(a/2)]]`` with
    a in [0, pi] and b in [0, 2 pi) at step ``resolution``.
    """
    frame, _ = _eigen_frame(la.as_matrix(rho))
    r = frame.shape[0]
    if r > 2:
        raise RankTooHigh(f"grid oracle needs rank <= 2, got {r}")
    if r == 1:
        return f(frame[0])
    a = np.arange(0.0, np.pi + resolution / 2, resolution)
    b = np.arange(0.0, 2 * np.pi, resolution)
    aa, bb = np.meshgrid(a, b, indexing="ij")
    c, s, e = np.cos(aa / 2).ravel(), np.sin(aa / 2).ravel(), np.exp(1j * bb).ravel()
    best = np.inf if sense == "min" else -np.inf
    chunk = 20000
    for lo in range(0, c.size, chunk):
        cc, ss, ee = c[lo:lo + chunk, None], s[lo:lo + chunk, None], e[lo:lo + chunk, None]
        r1 = cc * frame[0] + ee * ss * frame[1]
        r2 = -np.conj(ee) * ss * frame[0] + cc * frame[1]
        vals = _roof_value(np.stack([r1, r2], axis=1), f)
        best = min(best, vals.min()) if sense == "min" else max(best, vals.max())
    return float(best)
