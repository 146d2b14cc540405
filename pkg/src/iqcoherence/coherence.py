"""Coherence measures on single systems and IQ coherence on bipartite states.

Single-system measures treat the whole matrix as one system with the
computational basis as incoherent basis. Bipartite measures take a
:class:`Bipartition` ``(dA, dB)``; the coherent side is A, the first factor.

Every function returns a :class:`MeasureReport` whose ``bound_direction``
says which side of the true value the number is known to lie on: roof
minimizations give upper bounds, roof maximizations lower bounds, closed
forms and certified SDP solutions are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy import optimize

from . import linalg as la
from . import sdp
from .convexroof import (
    DephasedEntropy,
    DephasedReducedEntropy,
    RoofConfig,
    maximize_roof,
    minimize_roof,
)
from .errors import DimensionMismatch, InfiniteValue, MaxIterations, UnknownMeasure
from .states import QuantumState, make_rng, trial_seed


@dataclass
class MeasureReport:
    measure: str
    value: float
    method: str
    bound_direction: str
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "measure": self.measure,
            "value": self.value,
            "method": self.method,
            "bound_direction": self.bound_direction,
            "meta": self.meta,
        }


@dataclass(frozen=True)
class Bipartition:
    """Split of a state into a coherent side A (first) and a quantum side B."""

    dA: int
    dB: int

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dA, self.dB)

    @classmethod
    def parse(cls, text: str) -> "Bipartition":
        """``"2x3"`` or, for a tripartite signature, ``"2x2x2"`` read as A|BC."""
        try:
            parts = [int(p) for p in text.lower().split("x")]
        except ValueError as exc:
            raise DimensionMismatch(f"bad bipartition {text!r}") from exc
        if len(parts) < 2 or any(p < 1 for p in parts):
            raise DimensionMismatch(f"bad bipartition {text!r}")
        return cls(parts[0], int(np.prod(parts[1:])))


def _matrix(state) -> np.ndarray:
    return la.as_matrix(state.rho if isinstance(state, QuantumState) else state)


def _split(state, bipartition) -> tuple[np.ndarray, tuple[int, int]]:
    rho = _matrix(state)
    if bipartition is None:
        if not isinstance(state, QuantumState) or len(state.dims) < 2:
            raise DimensionMismatch("a bipartition is required for this state")
        bipartition = Bipartition(state.dims[0], int(np.prod(state.dims[1:])))
    elif not isinstance(bipartition, Bipartition):
        bipartition = Bipartition(*bipartition)
    if bipartition.dA * bipartition.dB != rho.shape[0]:
        raise DimensionMismatch(f"bipartition {bipartition.dims} does not match dimension {rho.shape[0]}")
    return rho, bipartition.dims


def _report_sdp(name, sol: sdp.SdpSolution, value, method="sdp") -> MeasureReport:
    meta = {"dual_gap": sol.dual_gap, "iterations": sol.iterations, "status": sol.status,
            "primal_bound": sol.value, "dual_bound": sol.dual_value}
    direction = "exact" if sol.status == "optimal" else "upper"
    return MeasureReport(name, float(value), method, direction, meta)


def _report_roof(name, res, rank) -> MeasureReport:
    meta = {"restarts_agreeing": res.restarts_agreeing, "terms": int(res.best.weights.size)}
    if rank == 1:
        return MeasureReport(name, res.value, "formula-pure", "exact", meta)
    direction = "upper" if res.bound_direction.startswith("upper") else "lower"
    return MeasureReport(name, res.value, "roof-search", direction, meta)


# ---------------------------------------------------------------- single system

def c_l1(state) -> MeasureReport:
    rho = _matrix(state)
    off = np.abs(rho) - np.diag(np.abs(np.diag(rho)))
    return MeasureReport("c_l1", float(off.sum()), "closed-form", "exact")


def c_r(state) -> MeasureReport:
    rho = _matrix(state)
    v = la.von_neumann_entropy(np.diag(np.diag(rho)), check=False) - la.von_neumann_entropy(rho, check=False)
    return MeasureReport("c_r", max(float(v), 0.0), "closed-form", "exact")


def _cover(rho, sub):
    try:
        return sdp.solve_cover(rho, sub)
    except MaxIterations as exc:  # pragma: no cover - solver converges on desk-scale input
        return exc.solution


def c_max(state) -> MeasureReport:
    rho = _matrix(state)
    sol = _cover(rho, sdp.Subspace.diagonal(rho.shape[0]))
    return _report_sdp("c_max", sol, max(np.log2(sol.value), 0.0))


def roc(state) -> MeasureReport:
    """Robustness of coherence, through 2^{C_max} - 1."""
    rho = _matrix(state)
    sol = _cover(rho, sdp.Subspace.diagonal(rho.shape[0]))
    return _report_sdp("roc", sol, max(sol.value - 1.0, 0.0))


def c_w(state) -> MeasureReport:
    rho = _matrix(state)
    try:
        sol = sdp.solve_weight(rho)
    except MaxIterations as exc:  # pragma: no cover
        sol = exc.solution
    return _report_sdp("c_w", sol, min(max(1.0 - sol.value, 0.0), 1.0))


def c_f(state, cfg: RoofConfig | None = None) -> MeasureReport:
    rho = _matrix(state)
    res = minimize_roof(rho, DephasedEntropy((rho.shape[0],), [0]), cfg)
    return _report_roof("c_f", res, la.rank(rho))


def c_a(state, cfg: RoofConfig | None = None) -> MeasureReport:
    rho = _matrix(state)
    res = maximize_roof(rho, DephasedEntropy((rho.shape[0],), [0]), cfg)
    return _report_roof("c_a", res, la.rank(rho))


def c_a_reg(state) -> MeasureReport:
    """Regularized coherence of assistance, S(Delta(rho))."""
    rho = _matrix(state)
    v = la.entropy_of_probs(np.clip(np.real(np.diag(rho)), 0, None))
    return MeasureReport("c_a_reg", v, "closed-form", "exact")


# ---------------------------------------------------------------- bipartite IQ

def cr_iq(state, bipartition=None) -> MeasureReport:
    rho, dims = _split(state, bipartition)
    v = la.von_neumann_entropy(la.dephase(rho, dims, [0]), check=False) - la.von_neumann_entropy(rho, check=False)
    return MeasureReport("cr_iq", max(float(v), 0.0), "closed-form", "exact")


def cmax_iq(state, bipartition=None) -> MeasureReport:
    rho, dims = _split(state, bipartition)
    sol = _cover(rho, sdp.Subspace(*dims))
    return _report_sdp("cmax_iq", sol, max(np.log2(sol.value), 0.0))


def cmin_iq(state, bipartition=None) -> MeasureReport:
    """-log2 max_i lambda_max(<i|P|i>) with P the support projector.

    IQ states are block-diagonal, so Tr(P sigma) over IQ sigma is
    maximized by putting all weight on the block of P with the largest
    eigenvalue, in its top eigenvector.
    """
    rho, dims = _split(state, bipartition)
    bl = la.blocks(la.support_projector(rho), dims)
    tops = [la.eigvalsh(bl[i, i])[-1] for i in range(dims[0])]
    best = max(tops)
    if best <= 0:
        raise InfiniteValue("support projector has no weight on any A block")
    return MeasureReport("cmin_iq", max(float(-np.log2(min(best, 1.0))), 0.0), "closed-form", "exact",
                         {"block": int(np.argmax(tops))})


def _cl1_value(rho, dims) -> float:
    bl = la.blocks(rho, dims)
    total = 0.0
    for i in range(dims[0]):
        for j in range(dims[0]):
            if i != j:
                total += la.trace_norm(bl[i, j])
    return total


def cl1_iq(state, bipartition=None) -> MeasureReport:
    rho, dims = _split(state, bipartition)
    return MeasureReport("cl1_iq", _cl1_value(rho, dims), "closed-form", "exact")


def cf_iq(state, bipartition=None, cfg: RoofConfig | None = None) -> MeasureReport:
    rho, dims = _split(state, bipartition)
    res = minimize_roof(rho, DephasedReducedEntropy(dims), cfg)
    return _report_roof("cf_iq", res, la.rank(rho))


def ca_iq(state, bipartition=None, cfg: RoofConfig | None = None) -> MeasureReport:
    rho, dims = _split(state, bipartition)
    res = maximize_roof(rho, DephasedReducedEntropy(dims), cfg)
    return _report_roof("ca_iq", res, la.rank(rho))


def _unitary_from_params(x, d):
    h = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    n = iu[0].size
    h[iu] = x[:n] + 1j * x[n:2 * n]
    h = h + h.conj().T
    h[np.diag_indices(d)] = x[2 * n:]
    return sla.expm(1j * h)


def q_l1(state, bipartition=None, cfg: RoofConfig | None = None) -> MeasureReport:
    """Minimum of cl1_iq over local bases of A (multi-start Nelder-Mead).

    Starts include the computational basis and the eigenbasis of rho_A,
    plus random unitaries; the search is over U = V0 exp(iH).
    """
    rho, dims = _split(state, bipartition)
    cfg = cfg or RoofConfig()
    dA, dB = dims
    eye_b = np.eye(dB)

    def value(u):
        big = np.kron(u.conj().T, eye_b)
        return _cl1_value(big @ rho @ big.conj().T, dims)

    _, v_a = la.eigh(la.partial_trace(rho, dims, 0))
    starts = [np.eye(dA, dtype=complex), v_a]
    n_random = max(0, min(cfg.restarts, 8) - 2)
    for k in range(n_random):
        rng = make_rng(trial_seed(cfg.seed, k))
        z = (rng.standard_normal((dA, dA)) + 1j * rng.standard_normal((dA, dA))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        starts.append(q * (np.diag(r) / np.abs(np.diag(r))))
    best, best_u = np.inf, starts[0]
    for v0 in starts:
        v_start = value(v0)
        if v_start < best:
            best, best_u = v_start, v0
        if v_start < 1e-12:
            break
        res = optimize.minimize(lambda x: value(v0 @ _unitary_from_params(x, dA)), np.zeros(dA * dA),
                                method="Nelder-Mead",
                                options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 4000 * dA})
        if res.fun < best:
            best, best_u = float(res.fun), v0 @ _unitary_from_params(res.x, dA)
    return MeasureReport("q_l1", float(best), "basis-search", "upper", {"basis": best_u.tolist()})


# ---------------------------------------------------------------- registry

SINGLE = {"c_l1": c_l1, "c_r": c_r, "c_max": c_max, "roc": roc, "c_w": c_w, "c_a_reg": c_a_reg}
SINGLE_ROOF = {"c_f": c_f, "c_a": c_a}
BIPARTITE = {"cr_iq": cr_iq, "cmax_iq": cmax_iq, "cmin_iq": cmin_iq, "cl1_iq": cl1_iq}
BIPARTITE_ROOF = {"cf_iq": cf_iq, "ca_iq": ca_iq, "q_l1": q_l1}


def measure_names() -> list[str]:
    from .entanglement import MEASURES as ENT
    return sorted([*SINGLE, *SINGLE_ROOF, *BIPARTITE, *BIPARTITE_ROOF, *ENT])


def compute(name: str, state, bipartition=None, cfg: RoofConfig | None = None) -> MeasureReport:
    """Dispatch a measure by registry name."""
    from .entanglement import MEASURES as ENT
    if name in SINGLE:
        return SINGLE[name](state)
    if name in SINGLE_ROOF:
        return SINGLE_ROOF[name](state, cfg)
    if name in BIPARTITE:
        return BIPARTITE[name](state, bipartition)
    if name in BIPARTITE_ROOF:
        return BIPARTITE_ROOF[name](state, bipartition, cfg)
    if name in ENT:
        return ENT[name](state, bipartition, cfg)
    raise UnknownMeasure(name)
