"""Shared test helpers: dense-matrix Pauli oracles built the slow way."""

import numpy as np

from magicflow import PauliString

_I = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def dense_pauli(p: PauliString) -> np.ndarray:
    """2^n x 2^n matrix of i**phase_power * X(x_mask) * Z(z_mask).

    Qubit k is bit k of the basis index, so qubit 0 sits rightmost in the
    kron chain.  Built one qubit at a time; nothing here is shared with the
    bitmask implementation.
    """
    out = np.ones((1, 1), dtype=np.complex128)
    for k in range(p.n):
        factor = _I.copy()
        if (p.x_mask >> k) & 1:
            factor = factor @ _X
        if (p.z_mask >> k) & 1:
            factor = factor @ _Z
        out = np.kron(factor, out)
    return (1j**p.phase_power) * out


def random_pauli(n: int, rng: np.random.Generator) -> PauliString:
    """Uniform phased Pauli, identity included, any of the four phases."""
    return PauliString(
        n,
        int(rng.integers(0, 1 << n)),
        int(rng.integers(0, 1 << n)),
        int(rng.integers(0, 4)),
    )
