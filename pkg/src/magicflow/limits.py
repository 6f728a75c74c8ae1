"""Qubit-count guard rails for dense-statevector work.

Every entry point that allocates something exponential in the qubit number
checks one of the caps below first.  The defaults keep a laptop responsive:
a plain statevector tops out at 14 qubits (256 KiB of amplitudes), while
anything that touches the full Pauli spectrum or a dense Hamiltonian is
capped at 12 (a 4^12 table is ~134 MB).

Set the environment variable MAGICFLOW_MAX_QUBITS to lift (or lower) all
caps at once; the per-feature defaults then apply only when the variable is
unset.
"""

from __future__ import annotations

import os

ENV_CAP_VAR = "MAGICFLOW_MAX_QUBITS"

DEFAULT_STATE_CAP = 14
DEFAULT_SPECTRUM_CAP = 12
DEFAULT_GUE_CAP = 12
DEFAULT_ENTROPY_CAP = 14


class CapExceededError(ValueError):
    """Raised when a requested qubit count exceeds the active cap."""


def _env_cap() -> int | None:
    raw = os.environ.get(ENV_CAP_VAR)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_CAP_VAR} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{ENV_CAP_VAR} must be positive, got {value}")
    return value


def state_cap() -> int:
    return _env_cap() or DEFAULT_STATE_CAP


def spectrum_cap() -> int:
    return _env_cap() or DEFAULT_SPECTRUM_CAP


def gue_cap() -> int:
    return _env_cap() or DEFAULT_GUE_CAP


def entropy_cap() -> int:
    return _env_cap() or DEFAULT_ENTROPY_CAP


def check_cap(n: int, cap: int, what: str) -> None:
    """Raise CapExceededError if ``n`` qubits exceed ``cap`` for feature ``what``."""
    if n > cap:
        raise CapExceededError(
            f"{what} is capped at {cap} qubits (requested {n}); "
            f"set {ENV_CAP_VAR} to override"
        )
