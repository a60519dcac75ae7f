"""Pauli matrices and small tensor helpers."""

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# sigma_1, sigma_2, sigma_3 aliases used in the Dirac formulas
S1, S2, S3 = SX, SY, SZ


def kron(*ops):
    return reduce(np.kron, ops)


def flavor_flip(axes, nqubits):
    """sigma_x on the listed flavor qubits, identity elsewhere (qubit 0 leftmost)."""
    return kron(*[SX if q in axes else I2 for q in range(nqubits)])
