"""Pauli spectrum, stabilizer nullity, and stabilizer Renyi entropies.

The central object is the distribution xi[P] = |<psi|P|psi>|^2 / 2^n over
all 4^n Hermitian Pauli strings, stored as a (2^n, 2^n) array indexed by
(x_mask, z_mask).  It is a probability distribution (Parseval), and every
magic diagnostic here is a functional of it:

  * nullity: n - log2(#{P : |<P>| = 1}), the number of stabilizer
    generators the state is missing;
  * stabilizer Renyi entropy M_alpha, in nats, zero exactly on stabilizer
    states and additive under tensor products.

pauli_spectrum computes all 4^n expectations in O(n 4^n): for each X-mask
a, the correlation vector v_a[y] = conj(psi[y XOR a]) psi[y] satisfies
<X(a)Z(b)> = sum_y (-1)^{b.y} v_a[y], which is one Walsh-Hadamard
transform per row.  Phases relating X(a)Z(b) to its Hermitian
representative have unit modulus, so |<P>|^2 needs no phase bookkeeping.
brute_force_spectrum is the deliberately naive O(8^n) cross-check built on
pauli_action alone; keep it that way, it guards the fast path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .limits import check_cap, spectrum_cap
from .pauli import PauliString, pauli_action
from .state import StateVector, _basis_indices

SPECTRUM_SUM_TOL = 1e-9
STABILIZER_TOL = 1e-8


class NullityResolutionError(ValueError):
    """Stabilizer count is not a power of two at the given tolerance."""


@dataclass
class PauliSpectrum:
    """Distribution xi over Pauli strings; xi[x_mask, z_mask] >= 0, sums to 1."""

    n: int
    xi: np.ndarray

    def __post_init__(self) -> None:
        dim = 1 << self.n
        if self.xi.shape != (dim, dim):
            raise ValueError(f"xi has shape {self.xi.shape}, expected ({dim}, {dim})")
        total = float(self.xi.sum())
        if abs(total - 1.0) > SPECTRUM_SUM_TOL:
            raise ValueError(f"spectrum sums to {total}, expected 1")
        if float(self.xi.min()) < -1e-12:
            raise ValueError("spectrum has a negative entry")

    @property
    def dim(self) -> int:
        return 1 << self.n

    def entry(self, p: PauliString) -> float:
        return float(self.xi[p.x_mask, p.z_mask])


@dataclass(frozen=True)
class MagicReport:
    """Nullity and SRE values extracted from one spectrum."""

    n: int
    nullity: int
    stabilizer_count: int
    sre: dict[float, float]


def _fwht_last_axis(a: np.ndarray) -> None:
    """In-place Walsh-Hadamard transform along the last axis (length 2^k)."""
    m = a.shape[-1]
    h = 1
    while h < m:
        view = a.reshape(a.shape[:-1] + (m // (2 * h), 2, h))
        x = view[..., 0, :]
        y = view[..., 1, :]
        diff = x - y
        x += y
        view[..., 1, :] = diff
        h *= 2


def pauli_spectrum(state: StateVector) -> PauliSpectrum:
    """All 4^n squared Pauli expectations of a state in O(n 4^n)."""
    check_cap(state.n, spectrum_cap(), "full Pauli spectrum")
    dim = state.dim
    amps = state.amplitudes
    idx = _basis_indices(state.n)
    xi = np.empty((dim, dim))
    # Bound the complex scratch matrix to ~32 MB regardless of n.
    rows = max(1, (1 << 21) // dim)
    for start in range(0, dim, rows):
        block = np.arange(start, min(start + rows, dim), dtype=np.uint64)
        v = np.conj(amps[idx[None, :] ^ block[:, None]]) * amps[None, :]
        _fwht_last_axis(v)
        xi[start : start + len(block)] = v.real**2 + v.imag**2
    xi /= dim
    return PauliSpectrum(state.n, xi)


def brute_force_spectrum(state: StateVector) -> PauliSpectrum:
    """O(8^n) spectrum from scalar pauli_action sums; the oracle path.

    Limited to n <= 6: anything larger is both slow and pointless, the fast
    transform is exercised against this on small systems.
    """
    if state.n > 6:
        raise ValueError(f"brute-force spectrum limited to 6 qubits, got {state.n}")
    dim = state.dim
    amps = state.amplitudes
    xi = np.empty((dim, dim))
    for x_mask in range(dim):
        for z_mask in range(dim):
            p = PauliString.hermitian(state.n, x_mask, z_mask)
            acc = 0.0 + 0.0j
            for j in range(dim):
                image, factor = pauli_action(p, j)
                acc += np.conj(amps[image]) * factor * amps[j]
            xi[x_mask, z_mask] = abs(acc) ** 2
    xi /= dim
    return PauliSpectrum(state.n, xi)


def sre(spectrum: PauliSpectrum, alpha: float) -> float:
    """Stabilizer Renyi entropy M_alpha in nats.

    M_alpha = 1/(1-alpha) * ln sum_P 2^-n |<P>|^(2 alpha); zero iff the
    state is a stabilizer state.
    """
    if alpha <= 0 or alpha == 1:
        raise ValueError(f"alpha must be positive and != 1, got {alpha}")
    dim = spectrum.dim
    moments = float(np.sum((dim * spectrum.xi) ** alpha)) / dim
    return float(np.log(moments) / (1.0 - alpha))


def nullity(spectrum: PauliSpectrum, tolerance: float = STABILIZER_TOL) -> int:
    """Stabilizer nullity: n - log2(#unsigned Paulis with |<P>|^2 = 1).

    An entry counts as a stabilizer direction when 2^n * xi > 1 - tolerance.
    The count must come out a power of two (stabilizer directions form a
    group); anything else means the tolerance sits inside the gap of a
    near-stabilizer state and is reported as an error rather than rounded.
    """
    if not 0 < tolerance < 1:
        raise ValueError(f"tolerance must lie in (0, 1), got {tolerance}")
    count = int(np.count_nonzero(spectrum.dim * spectrum.xi > 1.0 - tolerance))
    if count < 1 or count & (count - 1):
        raise NullityResolutionError(
            f"stabilizer count {count} is not a power of two at tolerance {tolerance}"
        )
    return spectrum.n - (count.bit_length() - 1)


def magic_report(
    spectrum: PauliSpectrum,
    alphas: tuple[float, ...] = (2.0,),
    tolerance: float = STABILIZER_TOL,
) -> MagicReport:
    """Bundle nullity and the requested SRE orders for one spectrum."""
    nu = nullity(spectrum, tolerance)
    return MagicReport(
        n=spectrum.n,
        nullity=nu,
        stabilizer_count=1 << (spectrum.n - nu),
        sre={alpha: sre(spectrum, alpha) for alpha in alphas},
    )


def sre_additivity_check(a: StateVector, b: StateVector, alpha: float = 2.0) -> float:
    """|M_alpha(a (x) b) - M_alpha(a) - M_alpha(b)|, which should be fp-zero."""
    product = StateVector(a.n + b.n, np.kron(a.amplitudes, b.amplitudes))
    combined = sre(pauli_spectrum(product), alpha)
    separate = sre(pauli_spectrum(a), alpha) + sre(pauli_spectrum(b), alpha)
    return abs(combined - separate)
