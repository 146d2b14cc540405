"""Small dense SDP engine for the three problem shapes the measures need.

* cover:   min Tr X  s.t.  X >= rho,  X block-diagonal in the A basis
           (diagonal when dB = 1). Dual: max Tr(rho T) s.t. T >= 0,
           blockdiag(T) = I.
* weight:  max Tr D  s.t.  0 <= D <= rho,  D diagonal.
           Dual: min Tr(rho Y) s.t. Y >= 0, Y_ii >= 1.

Both are solved by over-relaxed ADMM on the splitting "subspace variable =
rho + PSD slack". Every few iterations the iterate is rounded to a strictly
feasible primal point and a strictly feasible dual point, so the reported
gap is a certificate rather than a residual estimate.

After a short ADMM phase a Newton polish runs a log-barrier path on the
same problem. For the weight problem the dual is then rebuilt on the
active block (the near-kernel of rho - D) by a small least-squares solve,
since the barrier dual is too ill-conditioned near the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, MaxIterations

MAX_ITER = 50_000
GAP_TOL = 1e-8
CHECK_EVERY = 10
POLISH_START = 1e-3
POLISH_AFTER = 200


@dataclass(frozen=True)
class Subspace:
    """Operators block-diagonal with respect to the first factor of (dA, dB)."""

    dA: int
    dB: int = 1

    @property
    def dim(self) -> int:
        return self.dA * self.dB

    @classmethod
    def diagonal(cls, d: int) -> "Subspace":
        return cls(d, 1)

    def project(self, m: np.ndarray) -> np.ndarray:
        t = m.reshape(self.dA, self.dB, self.dA, self.dB)
        out = np.zeros_like(t)
        idx = np.arange(self.dA)
        out[idx, :, idx, :] = t[idx, :, idx, :]
        return out.reshape(self.dim, self.dim)

    def blocks(self, m: np.ndarray) -> np.ndarray:
        t = m.reshape(self.dA, self.dB, self.dA, self.dB)
        idx = np.arange(self.dA)
        return t[idx, :, idx, :]

    def from_blocks(self, bl: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dA, self.dB, self.dA, self.dB), dtype=complex)
        idx = np.arange(self.dA)
        out[idx, :, idx, :] = bl
        return out.reshape(self.dim, self.dim)

    def contains(self, m: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(m - self.project(m)), initial=0.0) <= tol)


@dataclass
class SdpProblem:
    target: np.ndarray
    subspace: Subspace
    sense: str = "min-cover"

    def __post_init__(self):
        self.target = la.as_matrix(self.target)
        if self.target.shape != (self.subspace.dim, self.subspace.dim):
            raise DimensionMismatch(
                f"target shape {self.target.shape} does not match subspace {self.subspace}")
        if self.sense not in ("min-cover", "max-subtract"):
            raise ValueError(f"unknown sense {self.sense!r}")


@dataclass
class SdpSolution:
    value: float
    primal_matrix: np.ndarray
    dual_value: float
    dual_matrix: np.ndarray
    dual_gap: float
    iterations: int
    status: str
    meta: dict = field(default_factory=dict)


def _psd_part(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(la.hermitize(m))
    w = np.clip(w, 0, None)
    return (v * w) @ v.conj().T


def _block_inv_sqrt(bl: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(bl)
    return (v * (1.0 / np.sqrt(w))[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


# ------------------------------------------------------------------ Newton polish

def _hermitian_basis(mask: np.ndarray):
    """Real parameterization of Hermitian matrices supported on ``mask``.

    Returns (rows, cols, B) where entry p of the matrix is (rows[p], cols[p])
    and the matrix entries are ``B @ x`` for a real parameter vector x.
    """
    d = mask.shape[0]
    rows, cols = np.nonzero(mask)
    pos = {(a, b): p for p, (a, b) in enumerate(zip(rows, cols))}
    columns = []
    for a in range(d):
        for b in range(a, d):
            if not mask[a, b]:
                continue
            if a == b:
                c = np.zeros(len(rows), dtype=complex)
                c[pos[a, a]] = 1
                columns.append(c)
            else:
                c = np.zeros(len(rows), dtype=complex)
                c[pos[a, b]] = 1
                c[pos[b, a]] = 1
                columns.append(c / np.sqrt(2))
                c = np.zeros(len(rows), dtype=complex)
                c[pos[a, b]] = 1j
                c[pos[b, a]] = -1j
                columns.append(c / np.sqrt(2))
    return rows, cols, np.array(columns).T


def _barrier_path(x0, mu0, gap_target, nu, center_fn, max_outer=40):
    """Generic short-step path following; center_fn(x, mu) -> x or None."""
    x, mu = x0, mu0
    for _ in range(max_outer):
        x_new = center_fn(x, mu)
        if x_new is None:
            return None
        x = x_new
        if mu * nu <= gap_target:
            return x, mu
        mu *= 0.2
    return x, mu


def _cover_newton(rho, sub, x_start, gap, gap_tol):
    d = sub.dim
    mask = sub.project(np.ones((d, d))) != 0
    rows, cols, bmat = _hermitian_basis(mask)
    x_mat = sub.project(x_start) + max(gap, 1e-10) / d * np.eye(d)
    x0 = np.real(bmat.conj().T @ x_mat[rows, cols])

    def assemble(v):
        m = np.zeros((d, d), dtype=complex)
        m[rows, cols] = bmat @ v
        return m

    def phi(v, mu):
        s = assemble(v) - rho
        try:
            c = np.linalg.cholesky(la.hermitize(s))
        except np.linalg.LinAlgError:
            return np.inf
        return float(np.trace(s).real) - mu * 2 * float(np.sum(np.log(np.real(np.diag(c)))))

    def center(v, mu):
        for _ in range(60):
            s = la.hermitize(assemble(v) - rho)
            w = np.linalg.inv(s)
            g_mat = np.eye(d) - mu * w
            grad = np.real(bmat.T @ g_mat[cols, rows])
            kmat = w[np.ix_(cols, rows)] * w[np.ix_(cols, rows)].T
            hess = mu * np.real(bmat.T @ kmat @ bmat)
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                return None
            dec = float(-grad @ step)
            if dec < 1e-14 * max(1.0, mu):
                return v
            t, f0 = 1.0, phi(v, mu)
            while t > 1e-12 and phi(v + t * step, mu) > f0 - 0.25 * t * dec:
                t *= 0.5
            if t <= 1e-12:
                return v
            v = v + t * step
            if dec < 1e-12:
                return v
        return v

    res = _barrier_path(x0, max(gap, 1e-10) / d, 0.1 * gap_tol, d, center)
    if res is None:
        return None
    v, mu = res
    s = la.hermitize(assemble(v) - rho)
    return assemble(v), mu * np.linalg.inv(s)


def _weight_newton(rho, gap_tol):
    n = rho.shape[0]
    w_rho, v_rho = np.linalg.eigh(rho)
    keep = w_rho > la.RANK_CUTOFF * w_rho[-1]
    vs = v_rho[:, keep]
    proj = vs @ vs.conj().T
    # basis vectors inside the support are the only admissible directions
    idx = np.nonzero(np.abs(1 - np.real(np.diag(proj))) < 1e-9)[0]
    comp = np.real(np.diag(np.eye(n) - proj))
    if idx.size == 0:
        # no diagonal direction fits under rho: D = 0, Y lives off the support
        return np.zeros(n), np.max(1.0 / comp) * (np.eye(n) - proj)
    r_red = vs.conj().T @ rho @ vs
    rows_v = vs[idx, :]  # row i of V, i.e. <i|V

    def m_of(x):
        return r_red - (rows_v.conj().T * x) @ rows_v

    def phi(x, mu):
        if np.any(x <= 0):
            return np.inf
        try:
            c = np.linalg.cholesky(la.hermitize(m_of(x)))
        except np.linalg.LinAlgError:
            return np.inf
        return -float(x.sum()) - mu * (2 * float(np.sum(np.log(np.real(np.diag(c))))) + float(np.sum(np.log(x))))

    # a well-centred interior start: sum_i x_i |v_i><v_i| <= (sum x) I
    x0 = np.full(idx.size, np.min(w_rho[keep]) / (2 * idx.size))

    def center(x, mu):
        for _ in range(80):
            m = la.hermitize(m_of(x))
            w = np.linalg.inv(m)
            q = rows_v @ w @ rows_v.conj().T
            grad = -1 + mu * np.real(np.diag(q)) - mu / x
            hess = mu * np.abs(q) ** 2 + np.diag(mu / x ** 2)
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                return None
            dec = float(-grad @ step)
            if dec < 1e-14 * max(1.0, mu):
                return x
            t, f0 = 1.0, phi(x, mu)
            while t > 1e-12 and phi(x + t * step, mu) > f0 - 0.25 * t * dec:
                t *= 0.5
            if t <= 1e-12:
                return x
            x = x + t * step
        return x

    res = _barrier_path(x0, 1.0 / (2 * n), 0.1 * gap_tol, 2 * n, center, max_outer=60)
    if res is None:
        return None
    x, mu = res
    w = np.linalg.inv(la.hermitize(m_of(x)))
    y = mu * vs @ w @ vs.conj().T
    # directions outside the support cost nothing in Tr(rho Y)
    need = np.real(1 - np.diag(y))
    c = max([need[i] / comp[i] for i in range(n) if comp[i] > 1e-9] + [0.0])
    y = y + c * (np.eye(n) - proj)
    dvec = np.zeros(n)
    dvec[idx] = x
    best_y, best_up = weight_dual_certificate(rho, y)
    for cand in _weight_active_duals(rho, dvec):
        yy, up = weight_dual_certificate(rho, cand)
        if up < best_up:
            best_y, best_up = yy, up
    return dvec, best_y


def _weight_active_duals(rho, dvec, max_k=4):
    """Dual candidates supported on the near-kernel of rho - D.

    Complementary slackness puts the optimal Y on ker(rho - D) with
    Y_ii = 1 wherever d_i > 0; for each trial kernel size k this solves
    that linear system for the k x k Gram matrix in least squares.
    """
    n = rho.shape[0]
    w, v = np.linalg.eigh(la.hermitize(rho - np.diag(dvec)))
    active = np.nonzero(dvec > 1e-9 * max(1.0, dvec.max()))[0]
    if active.size == 0:
        return []
    out = []
    for k in range(1, min(max_k, n) + 1):
        u = v[:, :k]
        mask = np.ones((k, k), dtype=bool)
        rows, cols, bmat = _hermitian_basis(mask)
        # (U G U^dagger)_ii = sum_ab U_ia G_ab conj(U_ib)
        coef = u[active][:, rows] * u[active][:, cols].conj()
        a = np.real(coef @ bmat)
        g, *_ = np.linalg.lstsq(a, np.ones(active.size), rcond=None)
        gm = np.zeros((k, k), dtype=complex)
        gm[rows, cols] = bmat @ g
        out.append(u @ gm @ u.conj().T)
    return out


# ------------------------------------------------------------------ cover

def cover_primal_certificate(rho: np.ndarray, sub: Subspace, x: np.ndarray):
    """Round ``x`` to a point of the subspace dominating rho; return (X, Tr X)."""
    xs = la.hermitize(sub.project(x))
    shift = max(0.0, -la.eigvalsh(xs - rho)[0])
    xs = xs + shift * np.eye(sub.dim)
    return xs, float(np.trace(xs).real)


def cover_dual_certificate(rho: np.ndarray, sub: Subspace, t: np.ndarray):
    """Round ``t`` to T >= 0 with blockdiag(T) = I; return (T, Tr(rho T))."""
    tp = _psd_part(t)
    scale = max(1.0, float(np.trace(tp).real) / sub.dim)
    tp = tp + 1e-13 * scale * np.eye(sub.dim)
    b = sub.from_blocks(_block_inv_sqrt(sub.blocks(tp)))
    tt = la.hermitize(b @ tp @ b)
    return tt, float(np.real(np.vdot(tt, rho)))


def solve_cover(rho, subspace: Subspace, gap_tol: float = GAP_TOL, max_iter: int = MAX_ITER,
                raise_on_max_iter: bool = False) -> SdpSolution:
    """min Tr X subject to X >= rho and X in ``subspace``.

    ``value`` is the trace of a certified feasible X, hence an upper bound on
    the optimum; ``dual_value`` is a certified lower bound.
    """
    prob = SdpProblem(rho, subspace, "min-cover")
    rho = la.hermitize(prob.target)
    sub = subspace
    d = sub.dim
    ident = np.eye(d)

    # already in the subspace: X = rho and T = I are both optimal
    if sub.contains(rho, 1e-14):
        x, up = cover_primal_certificate(rho, sub, rho)
        t, low = cover_dual_certificate(rho, sub, ident)
        return SdpSolution(up, x, low, t, max(0.0, up - low), 0, "optimal")

    beta = 1.0
    alpha = 1.6
    z = _psd_part(sub.project(rho) * sub.dA - rho)
    lam = -ident.copy()
    best_up, best_x = np.inf, None
    best_low, best_t = -np.inf, None
    it = 0
    status = "max-iter"
    polished = False
    for it in range(1, max_iter + 1):
        x = sub.project(rho + z - (ident + lam) / beta)
        xr = alpha * x + (1 - alpha) * (rho + z)
        z_old = z
        z = _psd_part(xr - rho + lam / beta)
        lam = lam + beta * (xr - rho - z)
        if it % CHECK_EVERY == 0:
            xc, up = cover_primal_certificate(rho, sub, x)
            tc, low = cover_dual_certificate(rho, sub, -lam)
            if up < best_up:
                best_up, best_x = up, xc
            if low > best_low:
                best_low, best_t = low, tc
            if best_up - best_low <= gap_tol:
                status = "optimal"
                break
            # residual balancing
            r_p = np.linalg.norm(x - rho - z)
            r_d = beta * np.linalg.norm(sub.project(z - z_old))
            if r_p > 10 * r_d:
                beta *= 2.0
            elif r_d > 10 * r_p:
                beta /= 2.0
            if (best_up - best_low <= POLISH_START or it >= POLISH_AFTER) and not polished:
                polished = True
                res = _cover_newton(rho, sub, best_x, best_up - best_low, gap_tol)
                if res is not None:
                    xc, up = cover_primal_certificate(rho, sub, res[0])
                    tc, low = cover_dual_certificate(rho, sub, res[1])
                    if up < best_up:
                        best_up, best_x = up, xc
                    if low > best_low:
                        best_low, best_t = low, tc
                    if best_up - best_low <= gap_tol:
                        status = "optimal"
                        break
    sol = SdpSolution(best_up, best_x, best_low, best_t, max(0.0, best_up - best_low), it, status)
    if status != "optimal" and raise_on_max_iter:
        raise MaxIterations(f"cover SDP gap {sol.dual_gap:.3e} after {it} iterations", sol)
    return sol


# ------------------------------------------------------------------ weight

def weight_primal_certificate(rho: np.ndarray, dvec: np.ndarray):
    """Largest t in [0, 1] with rho - t diag(d) >= 0; returns (t d, Tr)."""
    dvec = np.clip(np.real(dvec), 0, None)
    dm = np.diag(dvec).astype(complex)

    def ok(t):
        return la.eigvalsh(rho - t * dm)[0] >= -1e-14

    if ok(1.0):
        t = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        t = lo
    return t * dvec, float(t * dvec.sum())


def weight_dual_certificate(rho: np.ndarray, y: np.ndarray):
    """Round ``y`` to Y >= 0 with unit-or-larger diagonal; returns (Y, Tr(rho Y))."""
    d = rho.shape[0]
    yp = _psd_part(y) + 1e-13 * np.eye(d)
    s = np.maximum(1.0, 1.0 / np.sqrt(np.real(np.diag(yp))))
    yy = (s[:, None] * yp) * s[None, :]
    return yy, float(np.real(np.vdot(yy, rho)))


def solve_weight(rho, gap_tol: float = GAP_TOL, max_iter: int = MAX_ITER,
                 raise_on_max_iter: bool = False) -> SdpSolution:
    """max Tr D subject to 0 <= D <= rho with D diagonal.

    ``value`` is the trace of a certified feasible D (a lower bound);
    ``dual_value`` is a certified upper bound.
    """
    rho = la.hermitize(la.as_matrix(rho))
    d = rho.shape[0]
    ident = np.eye(d)
    if np.max(np.abs(rho - np.diag(np.diag(rho)))) <= 1e-14:
        dv, low = weight_primal_certificate(rho, np.real(np.diag(rho)))
        y, up = weight_dual_certificate(rho, ident)
        return SdpSolution(low, np.diag(dv), up, y, max(0.0, up - low), 0, "optimal")

    beta = 1.0
    alpha = 1.6
    dvec = np.zeros(d)
    z = rho.copy()
    lam = ident.copy()
    best_low, best_d = -np.inf, None
    best_up, best_y = np.inf, None
    status = "max-iter"
    polished = False
    it = 0
    for it in range(1, max_iter + 1):
        dvec = np.clip(np.real(np.diag(rho - z)) - (np.real(np.diag(lam)) - 1) / beta, 0, None)
        dm = np.diag(dvec)
        dr = alpha * dm + (1 - alpha) * (rho - z)
        z_old = z
        z = _psd_part(rho - dr - lam / beta)
        lam = lam + beta * (dr + z - rho)
        if it % CHECK_EVERY == 0:
            dv, low = weight_primal_certificate(rho, dvec)
            y, up = weight_dual_certificate(rho, lam)
            if low > best_low:
                best_low, best_d = low, np.diag(dv)
            if up < best_up:
                best_up, best_y = up, y
            if best_up - best_low <= gap_tol:
                status = "optimal"
                break
            if (best_up - best_low <= POLISH_START or it >= POLISH_AFTER) and not polished:
                polished = True
                res = _weight_newton(rho, gap_tol)
                if res is not None:
                    dv, low = weight_primal_certificate(rho, res[0])
                    y, up = weight_dual_certificate(rho, res[1])
                    if low > best_low:
                        best_low, best_d = low, np.diag(dv)
                    if up < best_up:
                        best_up, best_y = up, y
                    if best_up - best_low <= gap_tol:
                        status = "optimal"
                        break
            r_p = np.linalg.norm(dm + z - rho)
            r_d = beta * np.linalg.norm(z - z_old)
            if r_p > 10 * r_d:
                beta *= 2.0
            elif r_d > 10 * r_p:
                beta /= 2.0
    sol = SdpSolution(best_low, best_d, best_up, best_y, max(0.0, best_up - best_low), it, status)
    if status != "optimal" and raise_on_max_iter:
        raise MaxIterations(f"weight SDP gap {sol.dual_gap:.3e} after {it} iterations", sol)
    return sol


def dual_certificate(problem: SdpProblem, solution: SdpSolution) -> float:
    """Re-derive the dual objective from the stored dual matrix.

    For cover problems the returned value is a lower bound, for weight
    problems an upper bound, of the optimum.
    """
    rho = la.hermitize(problem.target)
    if problem.sense == "min-cover":
        _, v = cover_dual_certificate(rho, problem.subspace, solution.dual_matrix)
    else:
        _, v = weight_dual_certificate(rho, solution.dual_matrix)
    return v
