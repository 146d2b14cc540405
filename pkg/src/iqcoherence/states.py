"""Quantum states with subsystem signatures, named constructions, seeded
ensembles, and the JSON state-file format.

Random streams use numpy's Philox counter-based generator. A trial is
identified by ``(seed, index)``; :func:`trial_seed` maps that pair to the
64-bit seed of the trial's own Philox stream, so any single trial can be
replayed without generating the ones before it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, NormalizationError, NotAState, ParseError, RangeError

ENSEMBLE_KINDS = ("haar-pure", "ginibre-mixed", "random-iq", "random-incoherent", "named")


@dataclass(frozen=True, eq=False)
class QuantumState:
    rho: np.ndarray
    dims: tuple[int, ...]
    basis_labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.basis_labels:
            object.__setattr__(self, "basis_labels", ("computational",) * len(self.dims))
        rho = np.array(self.rho, dtype=complex)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def reduced(self, keep) -> "QuantumState":
        keep_list = [keep] if isinstance(keep, int) else sorted(keep)
        rho = la.partial_trace(self.rho, self.dims, keep_list)
        return QuantumState(rho, tuple(self.dims[k] for k in keep_list))


def validate(rho, dims: Sequence[int] | None = None) -> QuantumState:
    """Check the state invariants and wrap the matrix.

    Raises ``NotAState`` for non-Hermitian, non-unit-trace or indefinite
    input and ``DimensionMismatch`` when ``dims`` does not factor the size.
    """
    if isinstance(rho, QuantumState):
        dims = rho.dims if dims is None else dims
        rho = rho.rho
    rho = la.as_matrix(rho)
    if dims is None:
        dims = (rho.shape[0],)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or math.prod(dims) != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"dims {dims} do not match matrix shape {rho.shape}")
    la.check_state(rho)
    return QuantumState(rho, dims)


def pure(psi, dims: Sequence[int] | None = None) -> QuantumState:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise NormalizationError("zero vector")
    psi = psi / nrm
    return validate(la.ket_to_dm(psi), dims or (psi.size,))


def phi_plus_vector() -> np.ndarray:
    return np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)


def psi_plus_vector() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def bell_phi_plus() -> QuantumState:
    """(|00> - |11>)/sqrt(2), with a minus sign."""
    return pure(phi_plus_vector(), (2, 2))


def psi_plus() -> QuantumState:
    """(|01> - |10>)/sqrt(2)."""
    return pure(psi_plus_vector(), (2, 2))


def rho_lambda(lam: float) -> QuantumState:
    if not 0.0 <= lam <= 1.0:
        raise RangeError(f"lambda={lam} outside [0, 1]")
    rho = lam * la.ket_to_dm(phi_plus_vector()) + (1 - lam) * la.ket_to_dm(psi_plus_vector())
    return validate(rho, (2, 2))


def schmidt_pure(probs, local_states) -> QuantumState:
    """sum_i sqrt(p_i) |i>_A |u_i>_B with the u_i normalized but arbitrary."""
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
        raise NormalizationError("probabilities must be nonnegative and sum to 1")
    us = [np.asarray(u, dtype=complex).reshape(-1) for u in local_states]
    if len(us) != p.size:
        raise DimensionMismatch("one local state per probability is required")
    dB = us[0].size
    for u in us:
        if u.size != dB or abs(np.linalg.norm(u) - 1) > 1e-10:
            raise NormalizationError("local states must share a dimension and be normalized")
    dA = p.size
    psi = np.zeros(dA * dB, dtype=complex)
    for i in range(dA):
        psi[i * dB:(i + 1) * dB] = np.sqrt(p[i]) * us[i]
    return pure(psi, (dA, dB))


def maximally_coherent(d: int) -> QuantumState:
    return pure(np.ones(d), (d,))


# ---------------------------------------------------------------- sampling

def trial_seed(seed: int, index: int) -> int:
    """64-bit seed of trial ``index`` in the ensemble rooted at ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) % 2**64))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    # fill order: one (re, im) pair per entry, row-major
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2)


def haar_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = complex_gaussian(rng, (d,))
    return v / np.linalg.norm(v)


def ginibre(d: int, r: int, rng: np.random.Generator) -> np.ndarray:
    g = complex_gaussian(rng, (d, r))
    rho = g @ g.conj().T
    return la.hermitize(rho / np.trace(rho).real)


def random_iq(dA: int, dB: int, rng: np.random.Generator) -> np.ndarray:
    q = rng.dirichlet(np.ones(dA))
    rho = np.zeros((dA * dB, dA * dB), dtype=complex)
    for i in range(dA):
        rho[i * dB:(i + 1) * dB, i * dB:(i + 1) * dB] = q[i] * ginibre(dB, dB, rng)
    return rho


def random_incoherent(d: int, rng: np.random.Generator) -> np.ndarray:
    return np.diag(rng.dirichlet(np.ones(d))).astype(complex)


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    dims: tuple[int, ...]
    count: int = 1
    seed: int = 0
    rank: int | None = None
    name: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.kind not in ENSEMBLE_KINDS:
            raise RangeError(f"unknown ensemble kind {self.kind!r}")
        if self.count < 1:
            raise RangeError("count must be at least 1")
        d = math.prod(self.dims)
        if self.rank is not None and not 1 <= self.rank <= d:
            raise RangeError(f"rank {self.rank} outside [1, {d}]")
        if self.kind == "random-iq" and len(self.dims) != 2:
            raise RangeError("random-iq needs a bipartite (dA, dB) signature")


def sample_state(spec: EnsembleSpec, rng: np.random.Generator) -> QuantumState:
    d = math.prod(spec.dims)
    if spec.kind == "haar-pure":
        rho = la.ket_to_dm(haar_pure_vector(d, rng))
    elif spec.kind == "ginibre-mixed":
        rho = ginibre(d, spec.rank or d, rng)
    elif spec.kind == "random-iq":
        rho = random_iq(spec.dims[0], spec.dims[1], rng)
    elif spec.kind == "random-incoherent":
        rho = random_incoherent(d, rng)
    else:
        return named_state(spec.name or "", spec.params)
    return validate(rho, spec.dims)


def named_state(name: str, params: dict | None = None) -> QuantumState:
    params = params or {}
    if name in ("phi_plus", "bell"):
        return bell_phi_plus()
    if name == "psi_plus":
        return psi_plus()
    if name == "rho_lambda":
        return rho_lambda(float(params.get("lambda", 0.5)))
    if name == "maximally_coherent":
        return maximally_coherent(int(params.get("d", 2)))
    raise RangeError(f"unknown named state {name!r}")


def sample(spec: EnsembleSpec) -> Iterator[QuantumState]:
    """Yield ``spec.count`` states; trial ``k`` uses its own Philox stream."""
    for k in range(spec.count):
        yield sample_state(spec, make_rng(trial_seed(spec.seed, k)))


# ---------------------------------------------------------------- file format

def state_to_json(state: QuantumState) -> dict:
    m = state.rho
    return {
        "dims": list(state.dims),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def state_from_json(doc) -> QuantumState:
    try:
        dims = [int(d) for d in doc["dims"]]
        rows = doc["matrix"]
        m = np.array([[complex(float(e[0]), float(e[1])) for e in row] for row in rows], dtype=complex)
        if any(len(e) != 2 for row in rows for e in row):
            raise ValueError("entries must be [re, im] pairs")
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed state document: {exc}") from exc
    if m.ndim != 2:
        raise ParseError("matrix must be a list of equal-length rows")
    return validate(m, dims)


def save(state: QuantumState, path) -> None:
    # json writes floats with repr(), i.e. the shortest exact round-trip form
    Path(path).write_text(json.dumps(state_to_json(state)) + "\n")


def load(path) -> QuantumState:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    return state_from_json(doc)


__all__ = [
    "QuantumState", "EnsembleSpec", "validate", "pure", "bell_phi_plus", "psi_plus",
    "rho_lambda", "schmidt_pure", "maximally_coherent", "sample", "sample_state",
    "named_state", "trial_seed", "make_rng", "save", "load", "NotAState",
]
