"""Closed forms for single-qubit convex roofs of the dephased entropy.

These are standard results from the coherence literature, used where a
marginal is a qubit and an exact value is needed on the right-hand side of
an inequality. Write the Bloch vector as r = (x, y, z) and h for the binary
entropy.

* coherence of formation: h((1 + sqrt(1 - 4|rho_01|^2)) / 2), attained by
  two pure states with Bloch vectors (x, y, +-sqrt(1 - x^2 - y^2));
* coherence of assistance: S(Delta(rho)) = h((1 + z) / 2), attained by two
  pure states on the circle of height z through r (concavity of h makes
  this the maximum).
"""

from __future__ import annotations

import numpy as np

from . import linalg as la


def binary_entropy(p: float) -> float:
    return la.entropy_of_probs([p, 1 - p])


def bloch_vector(rho) -> np.ndarray:
    rho = la.as_matrix(rho)
    if rho.shape != (2, 2):
        raise ValueError("qubit formulas need a 2x2 state")
    return np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real])


def pure_from_bloch(n) -> np.ndarray:
    x, y, z = n
    theta = np.arccos(np.clip(z, -1, 1))
    phi = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def coherence_of_formation(rho) -> float:
    c = abs(la.as_matrix(rho)[0, 1])
    return binary_entropy((1 + np.sqrt(max(0.0, 1 - 4 * c * c))) / 2)


def coherence_of_assistance(rho) -> float:
    return binary_entropy(float(np.real(la.as_matrix(rho)[0, 0])))


def formation_decomposition(rho) -> tuple[np.ndarray, np.ndarray]:
    """Weights and pure states (rows) of an optimal formation decomposition."""
    x, y, z = bloch_vector(rho)
    h = np.sqrt(max(0.0, 1 - x * x - y * y))
    if h < 1e-15:
        return np.array([1.0]), pure_from_bloch((x, y, 0.0))[None, :]
    p = float(np.clip((1 + z / h) / 2, 0, 1))
    states = np.stack([pure_from_bloch((x, y, h)), pure_from_bloch((x, y, -h))])
    return np.array([p, 1 - p]), states
