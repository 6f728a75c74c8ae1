"""Dense statevectors and the measurement protocol acting on them.

Amplitudes live in a flat complex128 array indexed by computational basis
integers; qubit k is bit k of the index.  Everything here is O(2^n) per
operation, with Pauli application done as one gather: since
P|j> = f(j)|j XOR x>, the image array is (f * psi) re-indexed by j XOR x.

The protocol step is measure_frame: rotate by exp(-i theta_m*pi/8 * px)
and then measure pz projectively.  theta_m is a dial in [0, 1]; at 0 the
step is a plain Pauli measurement, at 1 the rotation angle is pi/8 and the
measurement pumps magic into the state.  Composing rotation and projection
keeps the two-outcome POVM complete by construction, with no separate sign
convention to get wrong.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .limits import check_cap, entropy_cap, gue_cap, state_cap
from .pauli import MeasurementFrame, PauliString

NORM_TOL = 1e-10
ZERO_PROB_TOL = 1e-12


class ZeroProbabilityError(ValueError):
    """Projection onto an outcome whose probability is numerically zero."""


@lru_cache(maxsize=32)
def _basis_indices(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.uint64)
    idx.setflags(write=False)
    return idx


@dataclass
class StateVector:
    """Normalized pure state of n qubits."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        check_cap(self.n, state_cap(), "statevector")
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise ValueError(
                f"amplitude array has shape {amps.shape}, expected ({1 << self.n},)"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 beyond {NORM_TOL}")
        self.amplitudes = amps

    @property
    def dim(self) -> int:
        return 1 << self.n

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())


@dataclass(frozen=True)
class MeasurementOutcome:
    """Projective outcome sign and its Born probability."""

    sign: int
    probability: float

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError(f"outcome sign must be +1 or -1, got {self.sign}")
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError(f"outcome probability {self.probability} outside [0, 1]")


# --- state preparation -----------------------------------------------------


def zero_state(n: int) -> StateVector:
    """|00...0>."""
    check_cap(n, state_cap(), "statevector")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def haar_state(n: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state: iid complex Gaussian amplitudes, normalized."""
    check_cap(n, state_cap(), "statevector")
    dim = 1 << n
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    amps /= np.linalg.norm(amps)
    return StateVector(n, amps)


def t_product_state(n: int) -> StateVector:
    """Product of single-qubit magic states (|0> + e^{i pi/4}|1>)/sqrt(2)."""
    check_cap(n, state_cap(), "statevector")
    one = np.array([1.0, np.exp(1j * np.pi / 4)], dtype=np.complex128) / np.sqrt(2.0)
    amps = one
    for _ in range(n - 1):
        amps = np.kron(one, amps)
    return StateVector(n, amps)


def gue_state(n: int, rng: np.random.Generator, evolution_time: float = 0.1) -> StateVector:
    """Short random-Hamiltonian quench of |00...0>.

    Draws a GUE-style Hermitian matrix, rescales its spectrum to [-2, 2],
    and applies exp(-i H t).  The default t = 0.1 leaves the state close to
    |00...0> yet with every Pauli expectation strictly inside the unit
    interval, which makes it maximally non-stabilizer by the nullity count
    while carrying little magic.
    """
    check_cap(n, gue_cap(), "dense random-Hamiltonian evolution")
    dim = 1 << n
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    ham = (raw + raw.conj().T) / 2.0
    evals, evecs = np.linalg.eigh(ham)
    evals = 2.0 * evals / np.max(np.abs(evals))
    # exp(-i H t)|0>: propagate the first column of V' through the phases.
    amps = evecs @ (np.exp(-1j * evals * evolution_time) * evecs[0, :].conj())
    amps /= np.linalg.norm(amps)
    return StateVector(n, amps)


# --- Pauli action ----------------------------------------------------------


def apply_pauli(state: StateVector, p: PauliString) -> StateVector:
    """P|psi> as a new StateVector (always norm-preserving)."""
    if p.n != state.n:
        raise ValueError(f"operator on {p.n} qubits applied to {state.n}-qubit state")
    return StateVector(state.n, _pauli_image(state.amplitudes, p))


def _pauli_image(amps: np.ndarray, p: PauliString) -> np.ndarray:
    idx = _basis_indices(p.n)
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(p.z_mask)) & 1)
    out = amps * signs
    if p.phase_power:
        out *= 1j ** p.phase_power
    if p.x_mask:
        out = out[idx ^ np.uint64(p.x_mask)]
    return out


def pauli_expectation(state: StateVector, p: PauliString) -> complex:
    """<psi|P|psi> (real up to fp noise when P is Hermitian)."""
    return complex(np.vdot(state.amplitudes, _pauli_image(state.amplitudes, p)))


def apply_pauli_rotation(state: StateVector, p: PauliString, theta_m: float) -> StateVector:
    """exp(-i theta_m*pi/8 * P)|psi> for Hermitian P."""
    _check_dial(theta_m)
    if not p.is_hermitian:
        raise ValueError(f"rotation generator must be Hermitian, got {p}")
    angle = theta_m * np.pi / 8.0
    amps = np.cos(angle) * state.amplitudes - 1j * np.sin(angle) * _pauli_image(
        state.amplitudes, p
    )
    return StateVector(state.n, amps)


def project_pauli(state: StateVector, p: PauliString, sign: int) -> tuple[StateVector, float]:
    """Apply (I + sign*P)/2 and renormalize; returns (state, outcome probability)."""
    if sign not in (1, -1):
        raise ValueError(f"projection sign must be +1 or -1, got {sign}")
    if not p.is_hermitian:
        raise ValueError(f"projection target must be Hermitian, got {p}")
    image = _pauli_image(state.amplitudes, p)
    prob = (1.0 + sign * float(np.real(np.vdot(state.amplitudes, image)))) / 2.0
    if prob <= ZERO_PROB_TOL:
        raise ZeroProbabilityError(
            f"outcome sign {sign:+d} has probability {prob:.3e}"
        )
    amps = (state.amplitudes + sign * image) / (2.0 * np.sqrt(prob))
    return StateVector(state.n, amps), prob


def branch_probabilities(
    state: StateVector, frame: MeasurementFrame, theta_m: float
) -> tuple[float, float]:
    """Both outcome probabilities of one protocol step, each from its own
    projection norm.

    Unlike measure_frame, which prices the minus branch as one minus the
    plus branch, this computes ||(I + pz)/2 psi'||^2 and ||(I - pz)/2 psi'||^2
    separately on the rotated state, so their sum is a real completeness
    check rather than an identity.
    """
    _check_dial(theta_m)
    if frame.pz.n != state.n:
        raise ValueError(f"frame on {frame.pz.n} qubits, state on {state.n}")
    angle = theta_m * np.pi / 8.0
    rotated = np.cos(angle) * state.amplitudes - 1j * np.sin(angle) * _pauli_image(
        state.amplitudes, frame.px
    )
    image = _pauli_image(rotated, frame.pz)
    p_plus = float(np.sum(np.abs((rotated + image) / 2.0) ** 2))
    p_minus = float(np.sum(np.abs((rotated - image) / 2.0) ** 2))
    return p_plus, p_minus


def measure_frame(
    state: StateVector,
    frame: MeasurementFrame,
    theta_m: float,
    rng: np.random.Generator,
) -> tuple[StateVector, MeasurementOutcome]:
    """One protocol step: rotate about frame.px, then measure frame.pz.

    The outcome is drawn by inverse CDF from a single uniform variate, so a
    trajectory is a pure function of its RNG stream.
    """
    _check_dial(theta_m)
    if frame.pz.n != state.n:
        raise ValueError(f"frame on {frame.pz.n} qubits, state on {state.n}")
    angle = theta_m * np.pi / 8.0
    rotated = np.cos(angle) * state.amplitudes - 1j * np.sin(angle) * _pauli_image(
        state.amplitudes, frame.px
    )
    image = _pauli_image(rotated, frame.pz)
    p_plus = (1.0 + float(np.real(np.vdot(rotated, image)))) / 2.0
    p_plus = min(max(p_plus, 0.0), 1.0)
    sign = 1 if rng.random() < p_plus else -1
    prob = p_plus if sign == 1 else 1.0 - p_plus
    if prob <= ZERO_PROB_TOL:
        # The sampled branch can only be this unlikely through fp rounding;
        # the other branch then carries all the weight.
        sign = -sign
        prob = 1.0 - prob
    amps = (rotated + sign * image) / (2.0 * np.sqrt(prob))
    amps /= np.linalg.norm(amps)
    return StateVector(state.n, amps), MeasurementOutcome(sign=sign, probability=prob)


def _check_dial(theta_m: float) -> None:
    if not 0.0 <= theta_m <= 1.0:
        raise ValueError(f"theta_m is a dial in [0, 1], got {theta_m}")


# --- entanglement ----------------------------------------------------------


def entanglement_entropy(state: StateVector, cut: int) -> float:
    """Von Neumann entropy (nats) of the first `cut` qubits.

    "First" means qubits 0..cut-1, i.e. the low `cut` bits of the basis
    index.  The amplitudes reshape into a (2^(n-cut), 2^cut) matrix whose
    squared singular values are the Schmidt weights across that bipartition.
    """
    check_cap(state.n, entropy_cap(), "entanglement entropy")
    if not 1 <= cut <= state.n - 1:
        raise ValueError(f"cut must split the register, got cut={cut} for n={state.n}")
    matrix = state.amplitudes.reshape(1 << (state.n - cut), 1 << cut)
    weights = np.linalg.svd(matrix, compute_uv=False) ** 2
    weights = weights[weights > 1e-15]
    return float(-np.sum(weights * np.log(weights)))
