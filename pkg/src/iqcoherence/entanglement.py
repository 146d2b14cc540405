"""Entanglement and correlation quantities: roofs of the reduced entropy,
conditional entropy and the purity gap."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import linalg as la
from .coherence import MeasureReport, _report_roof, _split
from .convexroof import ReducedEntropy, RoofConfig, maximize_roof, minimize_roof
from .errors import DimensionMismatch
from .states import QuantumState

CorrelationReport = MeasureReport


def e_f(state, bipartition=None, cfg: RoofConfig | None = None) -> CorrelationReport:
    rho, dims = _split(state, bipartition)
    res = minimize_roof(rho, ReducedEntropy(dims, [1]), cfg)
    return _report_roof("e_f", res, la.rank(rho))


def e_a(state, bipartition=None, cfg: RoofConfig | None = None) -> CorrelationReport:
    rho, dims = _split(state, bipartition)
    res = maximize_roof(rho, ReducedEntropy(dims, [1]), cfg)
    return _report_roof("e_a", res, la.rank(rho))


def conditional_entropy(state, dims: Sequence[int] | None, x, y) -> float:
    """S(X|Y) = S(rho_XY) - S(rho_Y) for disjoint subsystem sets X, Y."""
    rho = la.as_matrix(state.rho if isinstance(state, QuantumState) else state)
    if dims is None:
        dims = state.dims
    xs = [x] if np.isscalar(x) else list(x)
    ys = [y] if np.isscalar(y) else list(y)
    if set(xs) & set(ys):
        raise DimensionMismatch("conditioning sets must be disjoint")
    s_xy = la.von_neumann_entropy(la.partial_trace(rho, dims, xs + ys), check=False)
    s_y = la.von_neumann_entropy(la.partial_trace(rho, dims, ys), check=False) if ys else 0.0
    return s_xy - s_y


def purity_gap(state, bipartition=None) -> float:
    """Tr rho_AB^2 - Tr rho_A^2."""
    rho, dims = _split(state, bipartition)
    return la.purity(rho) - la.purity(la.partial_trace(rho, dims, 0))


def _purity_gap_report(state, bipartition=None, cfg=None) -> CorrelationReport:
    return MeasureReport("purity_gap", purity_gap(state, bipartition), "closed-form", "exact")


def _cond_report(state, bipartition=None, cfg=None) -> CorrelationReport:
    rho, dims = _split(state, bipartition)
    return MeasureReport("cond_entropy_a_given_b", conditional_entropy(rho, dims, 0, 1), "closed-form", "exact")


MEASURES = {"e_f": e_f, "e_a": e_a, "purity_gap": _purity_gap_report, "cond_entropy_a_given_b": _cond_report}
