"""Bitmask Pauli strings and random measurement frames.

An n-qubit Pauli operator is stored as two n-bit integers plus a phase
exponent:

    P = i**phase_power * X(x_mask) * Z(z_mask)

where X(m) applies sigma^x to every qubit whose bit is set in m (and
likewise Z).  Qubit k corresponds to bit k of the computational basis
index, so applying X(x_mask) to |j> gives |j XOR x_mask> with no phase,
and Z(z_mask) contributes (-1)**popcount(z_mask & j).  A qubit with both
bits set carries X*Z = -i*Y, so the Hermitian representative of a string
with k such overlap sites has phase_power = k mod 4; adding 2 flips the
overall sign.

The x/z-mask calculus makes products and commutators cheap: masks XOR,
phases add, and two strings commute iff the symplectic overlap
popcount(x1 & z2) + popcount(z1 & x2) is even.

A MeasurementFrame bundles three pairwise-anticommuting Hermitian strings
(pz, px, py = i*px*pz).  Sampling the frame uniformly reproduces the
distribution of (U' sigma^z_1 U, U' sigma^x_1 U, U' sigma^y_1 U) over
uniformly random Clifford U without ever materialising U: the Clifford
group acts transitively on signed anticommuting pairs, so a uniform signed
pz together with a uniform signed anticommuting px is exactly that
ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PAULI_LABELS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_PHASE_LABELS = {0: "+", 1: "+i", 2: "-", 3: "-i"}


@dataclass(frozen=True)
class PauliString:
    """Phased n-qubit Pauli operator i**phase_power * X(x_mask) * Z(z_mask)."""

    n: int
    x_mask: int
    z_mask: int
    phase_power: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        full = (1 << self.n) - 1
        if not 0 <= self.x_mask <= full or not 0 <= self.z_mask <= full:
            raise ValueError(
                f"masks must fit in {self.n} bits: x={self.x_mask:#x} z={self.z_mask:#x}"
            )
        object.__setattr__(self, "phase_power", self.phase_power % 4)

    @classmethod
    def hermitian(cls, n: int, x_mask: int, z_mask: int, sign: int = 1) -> "PauliString":
        """Hermitian representative of the unsigned string (x_mask, z_mask).

        Each qubit with both mask bits set is a Y site and contributes one
        factor of i; sign=-1 adds a global minus.
        """
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        phase = (x_mask & z_mask).bit_count() + (0 if sign == 1 else 2)
        return cls(n, x_mask, z_mask, phase)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_hermitian(self) -> bool:
        # P' = (-1)**(phase_power + popcount(x&z)) P, so Hermitian iff the
        # parity of the phase matches the X/Z overlap parity.
        return (self.phase_power - (self.x_mask & self.z_mask).bit_count()) % 2 == 0

    @property
    def weight(self) -> int:
        """Number of qubits acted on non-trivially."""
        return (self.x_mask | self.z_mask).bit_count()

    def __str__(self) -> str:
        body = "".join(
            _PAULI_LABELS[(self.x_mask >> k & 1, self.z_mask >> k & 1)]
            for k in range(self.n)
        )
        # Show the phase relative to the Hermitian representative when the
        # string is a plain signed Pauli, else the raw i**p prefix.
        overlap = (self.x_mask & self.z_mask).bit_count()
        rel = (self.phase_power - overlap) % 4
        if rel in (0, 2):
            return _PHASE_LABELS[rel] + body
        return _PHASE_LABELS[rel] + "*" + body


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact operator product a*b with full phase bookkeeping.

    Commuting Z(za) past X(xb) costs (-1)**popcount(za & xb), i.e. two
    units of phase_power.
    """
    if a.n != b.n:
        raise ValueError(f"qubit counts differ: {a.n} != {b.n}")
    phase = a.phase_power + b.phase_power + 2 * (a.z_mask & b.x_mask).bit_count()
    return PauliString(a.n, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, phase % 4)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff [a, b] = 0 (phases never matter for this)."""
    if a.n != b.n:
        raise ValueError(f"qubit counts differ: {a.n} != {b.n}")
    overlap = (a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()
    return overlap % 2 == 0


def pauli_action(p: PauliString, basis_index: int) -> tuple[int, complex]:
    """Image of a computational basis state: P|j> = factor * |new_index>.

    Z acts first (diagonal sign), then X flips the index, so the factor is
    i**phase_power * (-1)**popcount(z_mask & j) and new_index = j ^ x_mask.
    """
    if not 0 <= basis_index < (1 << p.n):
        raise ValueError(f"basis index {basis_index} out of range for n={p.n}")
    factor = 1j ** p.phase_power
    if (p.z_mask & basis_index).bit_count() % 2:
        factor = -factor
    return basis_index ^ p.x_mask, complex(factor)


def sample_nonidentity_pauli(n: int, rng: np.random.Generator) -> PauliString:
    """Uniform signed non-identity Pauli: 4**n - 1 unsigned strings, fair sign."""
    code = int(rng.integers(1, 4**n))  # 1 .. 4^n-1, excludes identity
    x_mask = code & ((1 << n) - 1)
    z_mask = code >> n
    sign = 1 if rng.integers(2) == 0 else -1
    return PauliString.hermitian(n, x_mask, z_mask, sign)


@dataclass(frozen=True)
class MeasurementFrame:
    """Random single-qubit measurement axes pushed through a Clifford frame.

    Holds three Hermitian, pairwise-anticommuting Pauli strings playing the
    roles of conjugated sigma^z, sigma^x, sigma^y.  py is derived, not
    sampled: py = i*px*pz, which fixes multiply(px, pz) = -i*py exactly.
    """

    pz: PauliString
    px: PauliString
    py: PauliString

    def __post_init__(self) -> None:
        for name, p in (("pz", self.pz), ("px", self.px), ("py", self.py)):
            if p.is_identity:
                raise ValueError(f"{name} must not be the identity")
            if not p.is_hermitian:
                raise ValueError(f"{name} must be Hermitian, got {p}")
        for a, b in ((self.pz, self.px), (self.pz, self.py), (self.px, self.py)):
            if commutes(a, b):
                raise ValueError("frame operators must pairwise anticommute")
        expected_py = multiply(self.px, self.pz)
        expected_py = PauliString(
            expected_py.n, expected_py.x_mask, expected_py.z_mask,
            (expected_py.phase_power + 1) % 4,
        )
        if expected_py != self.py:
            raise ValueError("py must equal i * px * pz")

    @classmethod
    def from_pair(cls, pz: PauliString, px: PauliString) -> "MeasurementFrame":
        prod = multiply(px, pz)
        py = PauliString(prod.n, prod.x_mask, prod.z_mask, (prod.phase_power + 1) % 4)
        return cls(pz=pz, px=px, py=py)


def sample_frame(n: int, rng: np.random.Generator) -> MeasurementFrame:
    """Draw a uniform measurement frame.

    pz is a uniform signed non-identity Pauli; px is drawn the same way and
    kept once it anticommutes with pz (acceptance rate 2^(2n-1)/(4^n-1),
    slightly above 1/2, so the loop is short).
    """
    pz = sample_nonidentity_pauli(n, rng)
    while True:
        px = sample_nonidentity_pauli(n, rng)
        if not commutes(pz, px):
            return MeasurementFrame.from_pair(pz, px)


class StabilizerGroup:
    """Exact stabilizer group of a monitored state, tracked symbolically.

    Thresholding the Pauli spectrum cannot resolve the nullity once the
    rotation dial is small: a rotation about px multiplies the expectation
    of every anticommuting group member by cos(2*psi), so for dial 0.001
    the freshly broken members sit at 1 - 3e-7 while their pairwise
    products recombine to 1 - O(sin^4 psi) ~ 1 - 2e-14, underneath any
    workable floating-point tolerance.  The group itself, however, evolves
    by exact combinatorics: cos(2*psi) < 1 for any dial in (0, 1], so a
    rotation about px expels every generator anticommuting with px, and a
    projective pz measurement performs the usual symplectic update.  Signs
    never matter for the group size, so generators are stored as unsigned
    (x_mask, z_mask) pairs packed into 2n-bit integers.

    The tracked group equals the stabilizer group of the ideal statevector
    as long as the initial group is exact and the trajectory never gains an
    accidental stabilizer, which has probability zero for the random frames
    used here.  Agreement with the spectrum-threshold route at dial 0 and
    at dials large enough to separate scales is covered by tests.
    """

    def __init__(self, n: int, generators=()) -> None:
        if n < 1:
            raise ValueError(f"need at least one qubit, got n={n}")
        self.n = n
        self._gens: list[int] = []
        for g in generators:
            if g.n != n:
                raise ValueError(f"generator qubit count {g.n} != {n}")
            if g.is_identity:
                raise ValueError("identity cannot be a generator")
            vec = (g.x_mask << n) | g.z_mask
            if self._in_span(vec):
                raise ValueError(f"dependent generator {g}")
            self._gens.append(vec)

    @classmethod
    def computational(cls, n: int) -> "StabilizerGroup":
        """Full group of the all-zeros state: one Z per qubit."""
        group = cls(n)
        group._gens = [1 << k for k in range(n)]
        return group

    @property
    def nullity(self) -> int:
        return self.n - len(self._gens)

    def _anticommutes(self, vec: int, other: int) -> bool:
        mask = (1 << self.n) - 1
        x1, z1 = vec >> self.n, vec & mask
        x2, z2 = other >> self.n, other & mask
        return ((x1 & z2).bit_count() + (z1 & x2).bit_count()) % 2 == 1

    def _in_span(self, vec: int) -> bool:
        # GF(2) elimination; echelon rows have distinct leading bits, so one
        # descending pass fully reduces a vector
        echelon: list[int] = []
        for row in sorted(self._gens, reverse=True):
            for r in echelon:
                if r.bit_length() == row.bit_length():
                    row ^= r
            if row:
                echelon.append(row)
                echelon.sort(reverse=True)
        for r in echelon:
            if vec and r.bit_length() == vec.bit_length():
                vec ^= r
        return vec == 0

    def rotate(self, px: PauliString) -> None:
        """Apply a rotation about px with any nonzero dial.

        Generators anticommuting with px leave the group; their pairwise
        products survive, so one victim is folded into the others before
        being dropped.
        """
        vec = (px.x_mask << self.n) | px.z_mask
        hit = [i for i, g in enumerate(self._gens) if self._anticommutes(g, vec)]
        if not hit:
            return
        first = self._gens[hit[0]]
        for i in hit[1:]:
            self._gens[i] ^= first
        del self._gens[hit[0]]

    def measure(self, pz: PauliString) -> None:
        """Projectively measure pz and update the group.

        Anticommuting case: pz replaces one violator, the rest are repaired
        by folding; group size is unchanged.  Commuting case: pz joins the
        group unless it is already in the span (up to sign), where the
        outcome is deterministic and nothing changes.
        """
        vec = (pz.x_mask << self.n) | pz.z_mask
        hit = [i for i, g in enumerate(self._gens) if self._anticommutes(g, vec)]
        if hit:
            first = self._gens[hit[0]]
            for i in hit[1:]:
                self._gens[i] ^= first
            self._gens[hit[0]] = vec
        elif not self._in_span(vec):
            self._gens.append(vec)
