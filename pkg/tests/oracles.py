"""Independent reference computations used only by the tests.

None of these share code with the package: the SDPs go through cvxpy's
interior-point solver, and the two-qubit entanglement of formation uses the
concurrence formula from the entanglement literature.
"""

import cvxpy as cp
import numpy as np


def _solve(prob):
    prob.solve(solver=cp.CLARABEL)
    assert prob.status == cp.OPTIMAL, prob.status
    return prob.value


def block_cover(rho, dA, dB=1):
    """min Tr X over X >= rho with X block-diagonal in the first factor."""
    blocks = [cp.Variable((dB, dB), hermitian=True) for _ in range(dA)]
    x = sum(cp.kron(np.diag(np.eye(dA)[i]), blocks[i]) for i in range(dA))
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(x))), [x - rho >> 0])
    return _solve(prob)


def robustness_of_coherence(rho):
    """min s such that (rho + s tau)/(1+s) is diagonal, tau a state."""
    d = rho.shape[0]
    tau = cp.Variable((d, d), hermitian=True)
    s = cp.Variable()
    delta = cp.Variable(d)
    cons = [tau >> 0, cp.real(cp.trace(tau)) == s, rho + tau == cp.diag(delta)]
    return _solve(cp.Problem(cp.Minimize(s), cons))


def max_diagonal_subtraction(rho):
    """max Tr D over diagonal D with 0 <= D <= rho."""
    d = rho.shape[0]
    v = cp.Variable(d)
    cons = [v >= 0, rho - cp.diag(v) >> 0]
    return _solve(cp.Problem(cp.Maximize(cp.sum(v)), cons))


def qubit_weight(rho):
    """1 - coherence weight of a qubit from the 2x2 PSD condition.

    Maximize d0 + d1 with (a - d0)(b - d1) >= |c|^2: the slack pair is
    (|c|, |c|) when that fits under (a, b), otherwise it sits on the edge.
    """
    a, b, c = rho[0, 0].real, rho[1, 1].real, abs(rho[0, 1])
    if c <= min(a, b):
        return 1 - 2 * c
    lo = min(a, b)
    return 1 - lo - c * c / lo if lo > 0 else 0.0


def qubit_cover(rho):
    """min Tr X over diagonal X >= rho for a qubit: 1 + 2|rho_01|."""
    return 1 + 2 * abs(rho[0, 1])


def concurrence(rho):
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(r).real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def two_qubit_formation(rho):
    c = concurrence(rho)
    x = (1 + np.sqrt(max(0.0, 1 - c * c))) / 2
    return float(-sum(p * np.log2(p) for p in (x, 1 - x) if p > 0))


def entropy_bits(rho):
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))
