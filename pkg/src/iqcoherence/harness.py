"""Verification suites, seeded ensembles and report writers behind the CLI.

Each suite maps one inequality, identity or additivity law to a per-trial
function. A trial gets its own Philox stream seeded by
``trial_seed(seed, index)``, returns the quantities it computed and a set
of named checks, and passes when every check margin is at least
``-tolerance``. Margins are signed so that positive means "holds".

Trials may run on several threads; results are collected in trial order,
so reports are identical for any thread count.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from . import channels as ch
from . import coherence as co
from . import linalg as la
from . import qubit_formulas as qf
from . import states as st
from .convexroof import (
    Decomposition,
    DephasedEntropy,
    DephasedReducedEntropy,
    ReducedEntropy,
    RoofConfig,
    grid_oracle_rank2,
    maximize_roof,
    minimize_roof,
)
from .entanglement import conditional_entropy
from .errors import MaxIterations, RangeError

SCHEMA_VERSION = "1.0"
THREADS_ENV = "IQCOHERENCE_THREADS"

EXIT_OK = 0
EXIT_TOLERANCE = 2
EXIT_INPUT = 3
EXIT_NONCONVERGENCE = 4

DEFAULT_TOL = 1e-8
DEFAULT_ROOF_TOL = 5e-3
DEFAULT_ORACLE_TOL = 2e-3
# harness roof budget: matches the grid oracle to ~1e-4 on rank-2 states
DEFAULT_ROOF_RESTARTS = 8
DEFAULT_ROOF_STEPS = 1500
EQ3_THRESHOLD = 0.01


# ---------------------------------------------------------------- specs

@dataclass
class SuiteSpec:
    suite: str
    trials: int | None = None
    dims: tuple[int, ...] | None = None
    seed: int = 0
    tol: float = DEFAULT_TOL
    roof_tol: float = DEFAULT_ROOF_TOL
    roof_restarts: int = DEFAULT_ROOF_RESTARTS
    ensemble: str | None = None
    threads: int = 1
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.suite not in SUITES:
            raise RangeError(f"unknown suite {self.suite!r}; see list-suites")
        s = SUITES[self.suite]
        if self.trials is None:
            self.trials = s.trials
        if self.dims is None:
            self.dims = s.dims
        self.dims = tuple(int(d) for d in self.dims)
        if self.ensemble is None:
            self.ensemble = s.ensembles[0]
        if self.ensemble not in s.ensembles:
            raise RangeError(f"suite {self.suite} supports ensembles {s.ensembles}, not {self.ensemble!r}")
        if self.trials < 1:
            raise RangeError("trials must be at least 1")
        if self.roof_restarts < 1:
            raise RangeError("roof restarts must be at least 1")
        if self.format not in ("json", "csv"):
            raise RangeError(f"unknown format {self.format!r}")
        if len(self.dims) != s.arity:
            raise RangeError(f"suite {self.suite} needs {s.arity} dimensions, got {self.dims}")


@dataclass
class Context:
    spec: SuiteSpec
    rng: np.random.Generator
    trial: int

    @property
    def dims(self):
        return self.spec.dims

    def roof_cfg(self) -> RoofConfig:
        return RoofConfig(restarts=self.spec.roof_restarts, max_steps=DEFAULT_ROOF_STEPS,
                          seed=st.trial_seed(self.spec.seed, self.trial))


@dataclass
class TrialResult:
    values: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)  # label -> (margin, tolerance)

    def check(self, label: str, margin: float, tol: float):
        self.checks[label] = (float(margin), float(tol))

    def equal(self, label: str, a: float, b: float, tol: float):
        self.check(label, -abs(a - b), tol)


@dataclass(frozen=True)
class Suite:
    name: str
    fn: Callable[[Context], TrialResult]
    dims: tuple[int, ...]
    trials: int
    summary: str
    ensembles: tuple[str, ...] = ("default",)
    arity: int = 2


SUITES: dict[str, Suite] = {}


def suite(name, dims, trials, summary, ensembles=("default",)):
    def register(fn):
        SUITES[name] = Suite(name, fn, tuple(dims), trials, summary, tuple(ensembles), len(dims))
        return fn
    return register


# ---------------------------------------------------------------- helpers

def _haar(ctx, dims):
    return la.ket_to_dm(st.haar_pure_vector(math.prod(dims), ctx.rng))


def _ginibre(ctx, dims, rank=None):
    d = math.prod(dims)
    return st.ginibre(d, rank or d, ctx.rng)


def _pure_marginal_probs(psi, dims, keep):
    p = np.abs(np.asarray(psi).reshape(dims)) ** 2
    others = tuple(k for k in range(len(dims)) if k not in keep)
    return p.sum(axis=others).reshape(-1)


def _entropy(rho):
    return la.von_neumann_entropy(rho, check=False)


def _c_r(rho):
    return co.c_r(rho).value


def _roof(rho, f, ctx, sense):
    """Roof value; on rank <= 2 the better of optimizer and grid oracle."""
    fn = minimize_roof if sense == "min" else maximize_roof
    v = fn(rho, f, ctx.roof_cfg()).value
    if la.rank(rho) <= 2:
        g = grid_oracle_rank2(rho, f, 0.01, sense)
        v = min(v, g) if sense == "min" else max(v, g)
    return v


def _single_roof(rho, ctx, sense):
    """C_f / C_a of a single system; closed form for qubits."""
    if rho.shape == (2, 2):
        return qf.coherence_of_formation(rho) if sense == "min" else qf.coherence_of_assistance(rho)
    return _roof(rho, DephasedEntropy((rho.shape[0],), [0]), ctx, sense)


def _tol_for(ctx, exact: bool) -> float:
    return ctx.spec.tol if exact else ctx.spec.roof_tol


def _joint(rho1, dims1, rho2, dims2):
    """rho1 (x) rho2 reordered as A1 A2 | B1 B2."""
    j = np.kron(rho1, rho2)
    j = la.permute_subsystems(j, [dims1[0], dims1[1], dims2[0], dims2[1]], [0, 2, 1, 3])
    return la.hermitize(j), (dims1[0] * dims2[0], dims1[1] * dims2[1])


def product_decomposition(d1: Decomposition, dims1, d2: Decomposition, dims2) -> Decomposition:
    """All pairwise products of two decompositions, ordered as A1 A2 | B1 B2."""
    w = np.outer(d1.weights, d2.weights).ravel()
    psi = np.einsum("ia,jb->ijab", d1.states.reshape(len(d1.weights), -1),
                    d2.states.reshape(len(d2.weights), -1))
    psi = psi.reshape(len(w), dims1[0], dims1[1], dims2[0], dims2[1]).transpose(0, 1, 3, 2, 4)
    return Decomposition(w, psi.reshape(len(w), -1))


def formation_equality_state(rho_b) -> np.ndarray:
    """sum_i sqrt(p_i)|i>|u_i> from an optimal formation decomposition of a qubit rho_B.

    This pure state attains equality in the formation distribution bound.
    """
    w, us = qf.formation_decomposition(rho_b)
    dA = max(2, w.size)
    psi = np.zeros(dA * 2, dtype=complex)
    for i, (p, u) in enumerate(zip(w, us)):
        psi[2 * i:2 * i + 2] = np.sqrt(p) * u
    return psi


# ---------------------------------------------------------------- formation / assistance

def _formation_values(rho, dims, ctx, pure: bool):
    rho_a, rho_b = la.partial_trace(rho, dims, 0), la.partial_trace(rho, dims, 1)
    v = {"cr_a": _c_r(rho_a), "cr_b": _c_r(rho_b)}
    if pure:
        psi = la.eigh(rho)[1][:, 0]
        v["cf_ab"] = la.entropy_of_probs(np.abs(psi) ** 2)
        v["cf_iq"] = la.entropy_of_probs(_pure_marginal_probs(psi, dims, [0]))
        v["ef"] = _entropy(rho_a)
    else:
        v["cf_ab"] = _roof(rho, DephasedEntropy(dims, [0, 1]), ctx, "min")
        v["cf_iq"] = _roof(rho, DephasedReducedEntropy(dims), ctx, "min")
        v["ef"] = _roof(rho, ReducedEntropy(dims, [1]), ctx, "min")
    v["cf_a"] = _single_roof(rho_a, ctx, "min")
    v["cf_b"] = _single_roof(rho_b, ctx, "min")
    return v


@suite("thm1", (2, 2), 200, "formation distribution: C_f(AB) >= max{C_r(A)+C_f(B), C_r(B)+C_f(A)} + E_f, "
       "with the two lemmas behind it", ensembles=("pure", "rank2"))
def _formation_distribution(ctx):
    pure = ctx.spec.ensemble == "pure"
    rho = _haar(ctx, ctx.dims) if pure else _ginibre(ctx, ctx.dims, 2)
    v = _formation_values(rho, ctx.dims, ctx, pure)
    exact = pure and ctx.dims[0] == 2 and ctx.dims[1] == 2
    tol = _tol_for(ctx, exact)
    r = TrialResult(v)
    rhs = max(v["cr_a"] + v["cf_b"], v["cr_b"] + v["cf_a"]) + v["ef"]
    r.check("total_formation", v["cf_ab"] - rhs, tol)
    r.check("iq_formation_vs_entanglement", v["cf_iq"] - v["cr_a"] - v["ef"], tol)
    r.check("formation_chain", v["cf_ab"] - v["cf_iq"] - v["cf_b"], tol)
    if ctx.dims[1] == 2:
        # equality construction built on this trial's B marginal
        psi = formation_equality_state(la.partial_trace(rho, ctx.dims, 1))
        dims_eq = (psi.size // 2, 2)
        rho_eq = la.ket_to_dm(psi)
        rho_a = la.partial_trace(rho_eq, dims_eq, 0)
        rho_b = la.partial_trace(rho_eq, dims_eq, 1)
        lhs = la.entropy_of_probs(np.abs(psi) ** 2)
        rhs_eq = _c_r(rho_a) + qf.coherence_of_formation(rho_b) + _entropy(rho_a)
        r.values["equality_lhs"], r.values["equality_rhs"] = lhs, rhs_eq
        r.equal("equality_construction", lhs, rhs_eq, ctx.spec.tol)
    return r


@suite("thm2", (2, 2), 200, "assistance distribution: C_a^{A|B} <= C_a(A)+E_a, C_a(AB) <= C_a^{A|B}+C_a(B), "
       "C_a(AB) <= C_a(A)+C_a(B)+E_a", ensembles=("pure", "rank2"))
def _assistance_distribution(ctx):
    pure = ctx.spec.ensemble == "pure"
    dims = ctx.dims
    rho = _haar(ctx, dims) if pure else _ginibre(ctx, dims, 2)
    rho_a, rho_b = la.partial_trace(rho, dims, 0), la.partial_trace(rho, dims, 1)
    if pure:
        psi = la.eigh(rho)[1][:, 0]
        ca_ab = la.entropy_of_probs(np.abs(psi) ** 2)
        ca_iq = la.entropy_of_probs(_pure_marginal_probs(psi, dims, [0]))
        ea = _entropy(rho_a)
    else:
        ca_ab = _roof(rho, DephasedEntropy(dims, [0, 1]), ctx, "max")
        ca_iq = _roof(rho, DephasedReducedEntropy(dims), ctx, "max")
        ea = _roof(rho, ReducedEntropy(dims, [1]), ctx, "max")
    ca_a, ca_b = _single_roof(rho_a, ctx, "max"), _single_roof(rho_b, ctx, "max")
    tol = _tol_for(ctx, pure and dims == (2, 2))
    r = TrialResult({"ca_ab": ca_ab, "ca_iq": ca_iq, "ea": ea, "ca_a": ca_a, "ca_b": ca_b})
    r.check("iq_assistance", ca_a + ea - ca_iq, tol)
    r.check("assistance_chain", ca_iq + ca_b - ca_ab, tol)
    r.check("total_assistance", ca_a + ca_b + ea - ca_ab, tol)
    return r


# ---------------------------------------------------------------- relative entropy

def _cr_cut(rho, dims, a_parts, b_parts):
    """C_r^{A|B} of the reduction to a_parts + b_parts, A = a_parts."""
    keep = sorted(a_parts + b_parts)
    red = la.partial_trace(rho, dims, keep)
    rdims = [dims[k] for k in keep]
    order = [keep.index(k) for k in a_parts + b_parts]
    red = la.permute_subsystems(red, rdims, order)
    da = math.prod(dims[k] for k in a_parts)
    db = math.prod(dims[k] for k in b_parts)
    return co.cr_iq(red, (da, db)).value


@suite("lem1", (2, 2, 2), 300, "C_r^{A|BC} - C_r^{A|B} - C_r^{A|C} <= -S(A|BC) + S(A|B) + S(A|C)")
def _conditional_entropy_bound(ctx):
    dims = ctx.dims
    rho = _ginibre(ctx, dims)
    lhs = _cr_cut(rho, dims, [0], [1, 2]) - _cr_cut(rho, dims, [0], [1]) - _cr_cut(rho, dims, [0], [2])
    rhs = (-conditional_entropy(rho, dims, [0], [1, 2]) + conditional_entropy(rho, dims, [0], [1])
           + conditional_entropy(rho, dims, [0], [2]))
    r = TrialResult({"lhs": lhs, "rhs": rhs})
    r.check("conditional_entropy_bound", rhs - lhs, ctx.spec.tol)
    return r


@suite("prop1", (2, 2, 2), 300, "pure tripartite: C_r^{A|B} - C_r^{A|C} = S(B) - S(C)")
def _tripartite_difference(ctx):
    dims = ctx.dims
    rho = _haar(ctx, dims)
    lhs = _cr_cut(rho, dims, [0], [1]) - _cr_cut(rho, dims, [0], [2])
    rhs = _entropy(la.partial_trace(rho, dims, 1)) - _entropy(la.partial_trace(rho, dims, 2))
    r = TrialResult({"lhs": lhs, "rhs": rhs})
    r.equal("tripartite_difference", lhs, rhs, ctx.spec.tol)
    return r


@suite("eq3-violation", (2, 2), 20, "product of two bipartite factors on A = A1 A2 gives "
       "C_r^{A|BC} < C_r^{A|B} + C_r^{A|C}; trial 0 uses Bell factors, the rest Haar factors")
def _product_violation(ctx):
    da, db = ctx.dims
    if ctx.trial == 0 and (da, db) == (2, 2):
        f1 = f2 = la.ket_to_dm(st.phi_plus_vector())
        construction = "bell_x_bell"
    else:
        f1, f2 = _haar(ctx, (da, db)), _haar(ctx, (da, db))
        construction = "haar_x_haar"
    # A1 B A2 C  ->  A1 A2 B C
    rho = la.permute_subsystems(np.kron(f1, f2), [da, db, da, db], [0, 2, 1, 3])
    dims = (da, da, db, db)
    c_bc = _cr_cut(rho, dims, [0, 1], [2, 3])
    c_b = _cr_cut(rho, dims, [0, 1], [2])
    c_c = _cr_cut(rho, dims, [0, 1], [3])
    gap = c_b + c_c - c_bc
    r = TrialResult({"cr_a_bc": c_bc, "cr_a_b": c_b, "cr_a_c": c_c, "violation": gap,
                     "construction": construction})
    r.check("violation_exceeds_threshold", gap - EQ3_THRESHOLD, 0.0)
    return r


# ---------------------------------------------------------------- l1 norm

@suite("prop-l1max", (2, 2), 500, "1 + C_l1/(dA-1) <= 2^{C_max} <= 1 + C_l1")
def _l1_max_sandwich(ctx):
    rho = _ginibre(ctx, ctx.dims)
    cl1 = co.cl1_iq(rho, ctx.dims).value
    cmax = co.cmax_iq(rho, ctx.dims).value
    da = ctx.dims[0]
    r = TrialResult({"cl1_iq": cl1, "cmax_iq": cmax})
    r.check("lower", 2 ** cmax - 1 - cl1 / (da - 1), ctx.spec.tol)
    r.check("upper", 1 + cl1 - 2 ** cmax, ctx.spec.tol)
    return r


def two_block_state(rho, dA, dB):
    """Keep only blocks (i, j) with i == j or i + j == dA - 1.

    The kept pattern is a direct sum of all-ones blocks, a positive Schur
    multiplier, so the result is again a state.
    """
    mask_a = np.array([[1.0 if (i == j or i + j == dA - 1) else 0.0 for j in range(dA)] for i in range(dA)])
    return rho * np.kron(mask_a, np.ones((dB, dB)))


@suite("prop-eq-l1max", (3, 2), 300, "C_max = log2(1 + C_l1) on pure states, the rho(lambda) family and "
       "two-block states (trial kind cycles through the three)")
def _l1_max_equality(ctx):
    kind = ("pure", "rho_lambda", "two_block")[ctx.trial % 3]
    if kind == "pure":
        dims = ctx.dims
        rho = _haar(ctx, dims)
    elif kind == "rho_lambda":
        dims = (2, 2)
        rho = st.rho_lambda(float(ctx.rng.uniform())).rho
    else:
        dims = ctx.dims
        rho = two_block_state(_ginibre(ctx, dims), *dims)
    cl1 = co.cl1_iq(rho, dims).value
    cmax = co.cmax_iq(rho, dims).value
    r = TrialResult({"kind": kind, "cl1_iq": cl1, "cmax_iq": cmax})
    r.equal("max_equals_log_l1", cmax, float(np.log2(1 + cl1)), ctx.spec.tol)
    return r


@suite("prop-subl1", (2, 2), 500, "C_l1(AB) >= C_l1^{A|B} + C_l1(B)")
def _l1_split(ctx):
    rho = _ginibre(ctx, ctx.dims)
    total = co.c_l1(rho).value
    iq = co.cl1_iq(rho, ctx.dims).value
    local_b = co.c_l1(la.partial_trace(rho, ctx.dims, 1)).value
    r = TrialResult({"c_l1_ab": total, "cl1_iq": iq, "c_l1_b": local_b})
    r.check("superadditive_split", total - iq - local_b, ctx.spec.tol)
    return r


@suite("prop-purity", (2, 2), 500, "(C_l1^{A|B})^2 - C_l1(A)^2 >= 2(Tr rho_AB^2 - Tr rho_A^2)")
def _l1_purity_bound(ctx):
    rho = _ginibre(ctx, ctx.dims, int(ctx.rng.integers(1, math.prod(ctx.dims) + 1)))
    iq = co.cl1_iq(rho, ctx.dims).value
    local_a = co.c_l1(la.partial_trace(rho, ctx.dims, 0)).value
    gap = la.purity(rho) - la.purity(la.partial_trace(rho, ctx.dims, 0))
    r = TrialResult({"cl1_iq": iq, "c_l1_a": local_a, "purity_gap": gap})
    r.check("purity_gap_bound", iq ** 2 - local_a ** 2 - 2 * gap, ctx.spec.tol)
    return r


def _cl1_cut(rho, dims, a_parts, b_parts):
    keep = sorted(a_parts + b_parts)
    red = la.partial_trace(rho, dims, keep)
    rdims = [dims[k] for k in keep]
    red = la.permute_subsystems(red, rdims, [keep.index(k) for k in a_parts + b_parts])
    return co.cl1_iq(red, (math.prod(dims[k] for k in a_parts), math.prod(dims[k] for k in b_parts))).value


@suite("mono-l1", (2, 2, 2), 300, "C_l1^{AB|C} >= C_l1^{A|BC} + C_l1^{B|C} and C_l1^{AB|C} >= C_l1^{A|C} + C_l1^{B|C}")
def _mono_l1(ctx):
    dims = ctx.dims
    rho = _ginibre(ctx, dims, int(ctx.rng.integers(1, math.prod(dims) + 1)))
    ab_c = _cl1_cut(rho, dims, [0, 1], [2])
    a_bc = _cl1_cut(rho, dims, [0], [1, 2])
    b_c = _cl1_cut(rho, dims, [1], [2])
    a_c = _cl1_cut(rho, dims, [0], [2])
    r = TrialResult({"ab_c": ab_c, "a_bc": a_bc, "b_c": b_c, "a_c": a_c})
    r.check("chain", ab_c - a_bc - b_c, ctx.spec.tol)
    r.check("monogamy", ab_c - a_c - b_c, ctx.spec.tol)
    return r


@suite("mono-cf", (2, 2, 2), 100, "pure tripartite: C_f^{AB|C} = C_f^{A|BC} + sum_i p_i S(Delta_B Tr_C u_i) "
       ">= C_f^{A|BC} + C_f^{B|C}(rho_BC)")
def _mono_cf(ctx):
    dims = ctx.dims
    da, db, dc = dims
    psi = st.haar_pure_vector(da * db * dc, ctx.rng)
    lhs = la.entropy_of_probs(_pure_marginal_probs(psi, dims, [0, 1]))
    p = _pure_marginal_probs(psi, dims, [0])
    a_bc = la.entropy_of_probs(p)
    blocks = psi.reshape(da, db * dc)
    explicit = 0.0
    f_bc = DephasedReducedEntropy((db, dc))
    for i in range(da):
        if p[i] > 1e-300:
            explicit += p[i] * f_bc(blocks[i] / np.sqrt(p[i]))
    rho_bc = la.partial_trace(la.ket_to_dm(psi), dims, [1, 2])
    roof = _roof(rho_bc, f_bc, ctx, "min")
    r = TrialResult({"cf_ab_c": lhs, "cf_a_bc": a_bc, "explicit_b_c": explicit, "cf_b_c": roof})
    r.equal("pure_identity", lhs, a_bc + explicit, ctx.spec.tol)
    r.check("explicit_dominates_roof", explicit - roof, ctx.spec.roof_tol)
    r.check("monogamy", lhs - a_bc - roof, ctx.spec.roof_tol)
    return r


# ---------------------------------------------------------------- additivity

@suite("additivity-r", (2, 2), 50, "C_r^{A|B} is additive on products")
def _add_r(ctx):
    dims = ctx.dims
    r1, r2 = _ginibre(ctx, dims), _ginibre(ctx, dims)
    j, jd = _joint(r1, dims, r2, dims)
    a, b, c = co.cr_iq(r1, dims).value, co.cr_iq(r2, dims).value, co.cr_iq(j, jd).value
    r = TrialResult({"first": a, "second": b, "joint": c})
    r.equal("additive", c, a + b, ctx.spec.tol)
    return r


@suite("additivity-l1", (2, 2), 50, "1 + C_l1^{A|B} is multiplicative on products")
def _add_l1(ctx):
    dims = ctx.dims
    r1, r2 = _ginibre(ctx, dims), _ginibre(ctx, dims)
    j, jd = _joint(r1, dims, r2, dims)
    a, b, c = co.cl1_iq(r1, dims).value, co.cl1_iq(r2, dims).value, co.cl1_iq(j, jd).value
    r = TrialResult({"first": a, "second": b, "joint": c})
    r.equal("multiplicative", 1 + c, (1 + a) * (1 + b), ctx.spec.tol)
    return r


@suite("additivity-max", (2, 2), 50, "C_max^{A|B} and single-system C_max are additive on products")
def _add_max(ctx):
    dims = ctx.dims
    r1, r2 = _ginibre(ctx, dims), _ginibre(ctx, dims)
    j, jd = _joint(r1, dims, r2, dims)
    a, b, c = co.cmax_iq(r1, dims).value, co.cmax_iq(r2, dims).value, co.cmax_iq(j, jd).value
    sa, sb, sc = co.c_max(r1).value, co.c_max(r2).value, co.c_max(np.kron(r1, r2)).value
    r = TrialResult({"first": a, "second": b, "joint": c, "single_first": sa, "single_second": sb,
                     "single_joint": sc})
    r.equal("iq_additive", c, a + b, ctx.spec.tol)
    r.equal("single_additive", sc, sa + sb, ctx.spec.tol)
    return r


@suite("additivity-roc", (2, 2), 50, "1 + ROC is multiplicative on products (single system)")
def _add_roc(ctx):
    n = math.prod(ctx.dims)
    r1, r2 = _ginibre(ctx, (n,)), _ginibre(ctx, (n,))
    a, b, c = co.roc(r1).value, co.roc(r2).value, co.roc(np.kron(r1, r2)).value
    r = TrialResult({"first": a, "second": b, "joint": c})
    r.equal("multiplicative", 1 + c, (1 + a) * (1 + b), ctx.spec.tol)
    return r


@suite("additivity-w", (2, 2), 50, "1 - C_w is multiplicative on products (single system)")
def _add_w(ctx):
    n = math.prod(ctx.dims)
    r1, r2 = _ginibre(ctx, (n,)), _ginibre(ctx, (n,))
    a, b, c = co.c_w(r1).value, co.c_w(r2).value, co.c_w(np.kron(r1, r2)).value
    r = TrialResult({"first": a, "second": b, "joint": c})
    r.equal("multiplicative", 1 - c, (1 - a) * (1 - b), ctx.spec.tol)
    return r


@suite("additivity-f", (2, 2), 10, "C_f^{A|B} is additive on products of rank-2 states "
       "(joint value is a roof upper bound, factors are grid-checked)")
def _add_f(ctx):
    dims = ctx.dims
    r1, r2 = _ginibre(ctx, dims, 2), _ginibre(ctx, dims, 2)
    f = DephasedReducedEntropy(dims)
    a, b = _roof(r1, f, ctx, "min"), _roof(r2, f, ctx, "min")
    j, jd = _joint(r1, dims, r2, dims)
    fj = DephasedReducedEntropy(jd)
    search = minimize_roof(j, fj, ctx.roof_cfg()).value
    d1, d2 = (minimize_roof(x, f, ctx.roof_cfg()).best for x in (r1, r2))
    product = product_decomposition(d1, dims, d2, dims).evaluate(fj)
    c = min(search, product)
    r = TrialResult({"first": a, "second": b, "joint": c, "joint_search": search})
    r.equal("additive", c, a + b, ctx.spec.roof_tol)
    return r


# ---------------------------------------------------------------- monotonicity

def _strong_mono(ctx, measure):
    dims = ctx.dims
    rho = _ginibre(ctx, dims, int(ctx.rng.integers(1, math.prod(dims) + 1)))
    kraus = ch.random_incoherent_instrument(dims[0], ctx.rng)
    if not all(ch.is_incoherent_kraus(k) for k in kraus) or ch.completeness_defect(kraus) > 1e-12:
        raise AssertionError("sampled instrument is not an incoherent operation")
    before = measure(rho, dims).value
    after = 0.0
    for k in kraus:
        big = ch.embed(k, dims, 0)
        out = big @ rho @ big.conj().T
        p = float(np.trace(out).real)
        if p > 1e-14:
            after += p * measure(la.hermitize(out / p), dims).value
    r = TrialResult({"before": before, "average_after": after, "kraus_count": len(kraus)})
    r.check("strong_monotone", before - after, ctx.spec.tol)
    return r


@suite("strongmono-r", (2, 2), 200, "C_r^{A|B} does not increase on average under incoherent instruments on A")
def _smono_r(ctx):
    return _strong_mono(ctx, co.cr_iq)


@suite("strongmono-l1", (2, 2), 200, "C_l1^{A|B} does not increase on average under incoherent instruments on A")
def _smono_l1(ctx):
    return _strong_mono(ctx, co.cl1_iq)


@suite("cptpB-mono", (2, 2), 200, "C_r, C_max, C_min and C_l1 (A|B) do not increase under channels on B")
def _cptp_b(ctx):
    dims = ctx.dims
    rho = _ginibre(ctx, dims, int(ctx.rng.integers(1, math.prod(dims) + 1)))
    kraus = ch.random_channel(dims[1], dims[1], int(ctx.rng.integers(1, 5)), ctx.rng)
    out = la.hermitize(ch.apply_local(rho, dims, 1, kraus))
    r = TrialResult()
    for m in (co.cr_iq, co.cmax_iq, co.cmin_iq, co.cl1_iq):
        a, b = m(rho, dims).value, m(out, dims).value
        name = m.__name__
        r.values[f"{name}_before"], r.values[f"{name}_after"] = a, b
        r.check(name, a - b, ctx.spec.tol)
    return r


# ---------------------------------------------------------------- appendix norm lemma

@suite("appC-norm", (3, 4), 300, "||P||_tr <= ||U P V||_l1 for unitaries U, V, with equality at the SVD pair; "
       "matrix size alternates over the given sizes")
def _trace_norm_lemma(ctx):
    n = ctx.dims[ctx.trial % len(ctx.dims)]
    p = st.complex_gaussian(ctx.rng, (n, n))
    tn = la.trace_norm(p)
    worst = np.inf
    for _ in range(50):
        u, v = ch.haar_unitary(n, ctx.rng), ch.haar_unitary(n, ctx.rng)
        worst = min(worst, la.l1_norm(u @ p @ v) - tn)
    u, s, vh = np.linalg.svd(p)
    at_svd = la.l1_norm(u.conj().T @ p @ vh.conj().T)
    r = TrialResult({"size": n, "trace_norm": tn, "min_rotated_l1_gap": worst, "svd_l1": at_svd})
    r.check("bound", worst, ctx.spec.tol)
    r.equal("svd_attains", at_svd, tn, ctx.spec.tol)
    return r


# ---------------------------------------------------------------- running

def _run_trial(spec: SuiteSpec, k: int) -> dict:
    seed = st.trial_seed(spec.seed, k)
    ctx = Context(spec, st.make_rng(seed), k)
    res = SUITES[spec.suite].fn(ctx)
    margins = {name: m for name, (m, _) in res.checks.items()}
    ok = all(m >= -t for m, t in res.checks.values())
    worst = min(margins.values()) if margins else 0.0
    return {"trial": k, "seed": seed, "passed": bool(ok), "margin": worst,
            "values": res.values, "checks": margins}


def resolve_threads(requested: int | None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise RangeError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return max(1, int(requested or 1))


def cmd_verify(spec: SuiteSpec) -> dict:
    """Run a suite and return its report; see :func:`exit_code` for the verdict."""
    t0 = time.perf_counter()
    threads = resolve_threads(spec.threads)
    status = "complete"
    message = None
    try:
        if threads == 1:
            records = [_run_trial(spec, k) for k in range(spec.trials)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                records = list(pool.map(lambda k: _run_trial(spec, k), range(spec.trials)))
    except MaxIterations as exc:
        records, status, message = [], "nonconvergence", str(exc)
    passed = sum(r["passed"] for r in records)
    violation = max([max(0.0, -r["margin"]) for r in records], default=0.0)
    return {
        "schema_version": SCHEMA_VERSION,
        "suite": spec.suite,
        "summary": SUITES[spec.suite].summary,
        "ensemble": spec.ensemble,
        "dims": list(spec.dims),
        "seed": spec.seed,
        "trials": len(records),
        "passed": passed,
        "failed": len(records) - passed,
        "max_violation": violation,
        "tolerances": {"closed_form": spec.tol, "roof": spec.roof_tol},
        "roof_restarts": spec.roof_restarts,
        "status": status,
        "message": message,
        "wall_time_s": time.perf_counter() - t0,
        "records": records,
    }


def exit_code(report: dict) -> int:
    if report["status"] == "nonconvergence":
        return EXIT_NONCONVERGENCE
    return EXIT_OK if report["failed"] == 0 else EXIT_TOLERANCE


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def report_csv(report: dict) -> str:
    """One row per trial; columns are fixed by the first record, floats at 12 significant digits."""
    records = report["records"]
    if not records:
        return "trial,seed,passed,margin\n"
    value_keys = list(records[0]["values"])
    check_keys = list(records[0]["checks"])
    header = ["trial", "seed", "passed", "margin"] + value_keys + [f"check:{c}" for c in check_keys]
    lines = [",".join(header)]
    for r in records:
        row = [r["trial"], r["seed"], r["passed"], r["margin"]]
        row += [r["values"].get(k, "") for k in value_keys]
        row += [r["checks"].get(c, "") for c in check_keys]
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def load_config(path) -> dict:
    """A JSON document whose keys are SuiteSpec field names."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise RangeError("config must be a JSON object")
    known = {f.name for f in fields(SuiteSpec)}
    unknown = set(doc) - known
    if unknown:
        raise RangeError(f"unknown config keys: {sorted(unknown)}")
    return doc


def build_spec(flags: dict, config: dict | None = None) -> SuiteSpec:
    """Merge settings with precedence flags > config file > defaults."""
    merged = dict(config or {})
    merged.update({k: v for k, v in flags.items() if v is not None})
    if "suite" not in merged:
        raise RangeError("no suite given")
    if "dims" in merged and isinstance(merged["dims"], str):
        merged["dims"] = parse_dims(merged["dims"])
    return SuiteSpec(**merged)


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise RangeError(f"bad dimension pattern {text!r}; expected e.g. 2x2 or 2x2x2")
    if not dims or any(d < 1 for d in dims):
        raise RangeError(f"bad dimension pattern {text!r}")
    return dims


# ---------------------------------------------------------------- other commands

def cmd_measure(state_path, measure: str, bipartition: str | None = None,
                cfg: RoofConfig | None = None) -> co.MeasureReport:
    state = st.load(state_path)
    bp = co.Bipartition.parse(bipartition) if bipartition else None
    return co.compute(measure, state, bp, cfg)


def cmd_sample(spec: st.EnsembleSpec, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths, entries = [], []
    for k, state in enumerate(st.sample(spec)):
        p = out / f"state_{k:04d}.json"
        st.save(state, p)
        paths.append(p)
        entries.append({"index": k, "file": p.name, "seed": st.trial_seed(spec.seed, k)})
    manifest = {"schema_version": SCHEMA_VERSION, "kind": spec.kind, "dims": list(spec.dims),
                "count": spec.count, "seed": spec.seed, "rank": spec.rank, "states": entries}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return paths


def cmd_table(lambdas) -> list[tuple[float, float, float, float]]:
    """Rows (lambda, C_l1^{A|B}, C_max^{A|B}, log2(1 + C_l1^{A|B})) for rho(lambda)."""
    rows = []
    for lam in lambdas:
        rho = st.rho_lambda(float(lam))
        cl1 = co.cl1_iq(rho).value
        cmax = co.cmax_iq(rho).value
        rows.append((float(lam), cl1, cmax, float(np.log2(1 + cl1))))
    return rows


def table_csv(rows) -> str:
    lines = ["lambda,cl1_iq,cmax_iq,log2_1_plus_cl1"]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def list_suites() -> list[dict]:
    return [{"suite": s.name, "dims": "x".join(map(str, s.dims)), "trials": s.trials,
             "ensembles": list(s.ensembles), "summary": s.summary} for s in SUITES.values()]


__all__ = ["SuiteSpec", "SUITES", "cmd_verify", "cmd_measure", "cmd_sample", "cmd_table", "list_suites",
           "report_csv", "report_json", "exit_code", "build_spec", "load_config"]
