"""Markov chain and closed-form predictions for nullity dynamics.

A random Pauli measurement on a state missing nu stabilizer generators
either leaves nu alone or lowers it by one; the decay branch has
probability

    Pr_z(nu -> nu-1) = 2^N (2^nu - 2^-nu) / (4^N - 1),

uniform over measured non-identity strings.  In the magic-pumping basis
(theta_m > 0) the effective step is a basis rotation that can raise nu by
one, composed with the same decay channel, giving a birth-death chain on
{0..N} whose single-step probabilities are assembled in pr_f.

The continuum picture uses y = 2^nu (whose mean obeys a closed logistic
equation solved by analytic_y) and the rescaled variable w = 2^(nu-N),
whose mean-field map w -> 2w - 3w^2 + (3/2)w^3 has the attracting fixed
point w = 1 - 1/sqrt(3) =~ 0.4226.  Iterating the stationarity condition
of the w-walk on the dyadic support {1/2, 1/4, 1/8, ...} gives the
steady-state histogram and the system-size-independent offset
<nu> - N =~ -1.46.

All probabilities here are exact dyadic ratios well inside float range up
to N ~ 26, so no special care with big integers is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

W_FIXED_POINT = 1.0 - 1.0 / math.sqrt(3.0)

# Largest N for which 4^N is exactly representable (and then some).
_MAX_MODEL_N = 26


@dataclass(frozen=True)
class ModelParams:
    """Inputs of the logistic mean solution: system size and y(0) = 2^nu0."""

    n: int
    y0: float

    def __post_init__(self) -> None:
        _check_n(self.n)
        if self.y0 <= 0:
            raise ValueError(f"y0 must be positive, got {self.y0}")

    @classmethod
    def from_initial_nullity(cls, n: int, nu0: float) -> "ModelParams":
        return cls(n=n, y0=2.0**nu0)

    @property
    def a_n(self) -> float:
        """Decay rate 2^N / (4^N - 1), the inverse of the slow timescale."""
        return 2.0**self.n / (4.0**self.n - 1.0)

    @property
    def b(self) -> float:
        return (1.0 - self.y0) / (1.0 + self.y0)


@dataclass
class NullityDistribution:
    """Probability vector over nullity values 0..n."""

    n: int
    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=np.float64)
        if rho.shape != (self.n + 1,):
            raise ValueError(f"rho has shape {rho.shape}, expected ({self.n + 1},)")
        if float(rho.min()) < -1e-15:
            raise ValueError("rho has a negative entry")
        total = float(rho.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"rho sums to {total}, expected 1")
        self.rho = rho

    @classmethod
    def point_mass(cls, n: int, nu: int) -> "NullityDistribution":
        if not 0 <= nu <= n:
            raise ValueError(f"nullity {nu} out of range for n={n}")
        rho = np.zeros(n + 1)
        rho[nu] = 1.0
        return cls(n, rho)

    def mean(self) -> float:
        return float(np.arange(self.n + 1) @ self.rho)

    def variance(self) -> float:
        nu = np.arange(self.n + 1)
        m = self.mean()
        return float((nu - m) ** 2 @ self.rho)


def _check_n(n: int) -> None:
    if not 1 <= n <= _MAX_MODEL_N:
        raise ValueError(f"system size must be in [1, {_MAX_MODEL_N}], got {n}")


def _check_nu(nu: int, n: int) -> None:
    if not 0 <= nu <= n:
        raise ValueError(f"nullity {nu} out of range for n={n}")


def pr_z_decay(nu: int, n: int) -> float:
    """Probability that a uniform Pauli measurement lowers the nullity by one."""
    _check_n(n)
    _check_nu(nu, n)
    return 2.0**n * (2.0**nu - 2.0**-nu) / (4.0**n - 1.0)


def pr_r_keep(nu: int, n: int) -> float:
    """Probability that the rotated-basis step does not raise the nullity."""
    _check_n(n)
    _check_nu(nu, n)
    return (2.0 ** (n + nu) - 1.0) / (4.0**n - 1.0)


def pr_f(nu_from: int, nu_to: int, n: int) -> float:
    """Single-step nullity transition probability in the rotated basis.

    Composition of the raise channel (rotation) with the decay channel
    (measurement): only nu_to in {nu_from - 1, nu_from, nu_from + 1} can
    come out non-zero, and the three branches sum to one exactly.
    """
    _check_n(n)
    _check_nu(nu_from, n)
    if abs(nu_to - nu_from) > 1 or not 0 <= nu_to <= n:
        return 0.0
    keep = pr_r_keep(nu_from, n)
    raise_ = 1.0 - keep
    if nu_to == nu_from - 1:
        return keep * pr_z_decay(nu_from, n)
    if nu_to == nu_from + 1:
        # raise_ is exactly zero at nu_from = n, never reached here.
        return raise_ * (1.0 - pr_z_decay(nu_from + 1, n))
    stay = keep * (1.0 - pr_z_decay(nu_from, n))
    if nu_from < n:
        stay += raise_ * pr_z_decay(nu_from + 1, n)
    return stay


def transition_matrix(n: int, magic_basis: bool) -> np.ndarray:
    """Row-stochastic (n+1)x(n+1) matrix T[from, to] of the nullity walk."""
    _check_n(n)
    t = np.zeros((n + 1, n + 1))
    for nu in range(n + 1):
        if magic_basis:
            for nu_to in (nu - 1, nu, nu + 1):
                if 0 <= nu_to <= n:
                    t[nu, nu_to] = pr_f(nu, nu_to, n)
        else:
            down = pr_z_decay(nu, n)
            if nu > 0:
                t[nu, nu - 1] = down
            t[nu, nu] = 1.0 - down
    return t


def markov_evolve(
    rho0: NullityDistribution, steps: int, magic_basis: bool = False
) -> list[NullityDistribution]:
    """Evolve the nullity distribution; returns steps+1 entries including rho0."""
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    t = transition_matrix(rho0.n, magic_basis)
    out = [rho0]
    rho = rho0.rho
    for _ in range(steps):
        rho = rho @ t
        rho = rho / rho.sum()  # kill fp drift; keeps every output stochastic
        out.append(NullityDistribution(rho0.n, rho))
    return out


# --- continuum solutions ----------------------------------------------------


def analytic_y(t, params: ModelParams):
    """Mean of y = 2^nu along the decay: y(t) = 1 - 2b / (e^(a_n t) + b).

    Accepts scalar or array t >= 0.  For y0 = 2^N >> 1 this is coth(a_n t/2)
    up to exponentially small corrections.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    growth = np.exp(np.minimum(params.a_n * t, 700.0))  # exp overflow guard
    y = 1.0 - 2.0 * params.b / (growth + params.b)
    return float(y) if y.ndim == 0 else y


def nullity_asymptotics(t, n: int):
    """Leading-order mean nullity of the decay, piecewise at t = 2^N.

    Early (t < 2^N): nu =~ N - log2(t).  Late: nu =~ (2/ln 2) e^(-t/2^N).
    Scalar or array t >= 1.
    """
    _check_n(n)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 1):
        raise ValueError("asymptotic forms need t >= 1")
    crossover = 2.0**n
    early = n - np.log2(t)
    late = (2.0 / math.log(2.0)) * np.exp(-t / crossover)
    out = np.where(t < crossover, early, late)
    return float(out) if out.ndim == 0 else out


def m2_haar(nu):
    """Mean SRE M_2 (nats) of a Haar-random factor on nu qubits: ln((3 + 2^nu)/4)."""
    nu = np.asarray(nu, dtype=np.float64)
    if np.any(nu < 0):
        raise ValueError("nullity must be non-negative")
    out = np.log((3.0 + 2.0**nu) / 4.0)
    return float(out) if out.ndim == 0 else out


# --- rescaled w = 2^(nu - N) walk -------------------------------------------


def w_ode_rhs(w: float) -> float:
    """Mean-field drift dw/dt = w - 3w^2 + (3/2)w^3; vanishes at 1 - 1/sqrt(3)."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w must lie in [0, 1], got {w}")
    return w - 3.0 * w**2 + 1.5 * w**3


def w_update_exact(moments: tuple[float, float, float]) -> float:
    """One exact step of the mean of w from its first three moments.

    E[w'] = 2 E[w] - 3 E[w^2] + (3/2) E[w^3]; only for a point mass do the
    higher moments close on the mean.
    """
    m1, m2, m3 = moments
    if not 0.0 <= m1 <= 1.0:
        raise ValueError(f"first moment must lie in [0, 1], got {m1}")
    return 2.0 * m1 - 3.0 * m2 + 1.5 * m3


def convergence_time(
    w0: float,
    epsilon: float,
    direction: str | None = None,
    simplified: bool = False,
) -> float:
    """Steps for the mean-field w to come within epsilon of the fixed point.

    direction="down" (w0 above the fixed point) integrates the linearized
    contraction only; "up" (w0 below) adds the ln(w_inf/w0) doubling phase.
    If direction is omitted it is inferred from w0.  simplified=True drops
    the O(1) ln(w_inf) corrections, the form usually quoted: down becomes
    ln(1/eps)/(sqrt(3)-1) and up becomes ln(1/w0) + ln(1/eps)/(sqrt(3)-1).
    Already-converged inputs give a negative or near-zero value; no clamping.
    """
    if not 0.0 < w0 <= 1.0:
        raise ValueError(f"w0 must lie in (0, 1], got {w0}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if direction is None:
        direction = "down" if w0 > W_FIXED_POINT else "up"
    rate = 1.0 / (math.sqrt(3.0) - 1.0)
    if direction == "down":
        if w0 <= W_FIXED_POINT:
            raise ValueError(f"direction 'down' needs w0 > {W_FIXED_POINT:.4f}")
        if simplified:
            return rate * math.log(1.0 / epsilon)
        return rate * math.log((w0 - W_FIXED_POINT) / epsilon)
    if direction == "up":
        if w0 >= W_FIXED_POINT:
            raise ValueError(f"direction 'up' needs w0 < {W_FIXED_POINT:.4f}")
        if simplified:
            return math.log(1.0 / w0) + rate * math.log(1.0 / epsilon)
        return math.log(W_FIXED_POINT / w0) + rate * math.log(
            (W_FIXED_POINT - w0) / epsilon
        )
    raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")


def _w_limit_step(w: float) -> tuple[float, float, float]:
    """(stay, halve, double) probabilities of the w-walk in the large-N limit."""
    return 3.0 * w - 3.0 * w**2, w**2, 1.0 - 3.0 * w + 2.0 * w**2


def steady_state_distribution(support_points: int = 3) -> tuple[dict[float, float], float]:
    """Stationary histogram of the w-walk on dyadic support {1/2, 1/4, ...}.

    Solves the stationarity recurrence with absorbing-zero boundary rho(1)=0
    and truncation rho(2^-(K+1)) = 0, then normalizes.  Returns the weights
    and the size-independent offset sum_w rho(w) log2(w), i.e. the model's
    prediction for <nu> - N in the steady state (=~ -1.46 already at K = 3;
    deeper support barely moves it).
    """
    if support_points < 1:
        raise ValueError(f"need at least one support point, got {support_points}")
    ws = [2.0 ** -(k + 1) for k in range(support_points + 1)]
    rho = [1.0]  # unnormalized weight at w = 1/2
    prev = 0.0  # weight at w = 1 (absorbing boundary, never occupied)
    for k in range(support_points):
        w = ws[k]
        out_rate = 1.0 - _w_limit_step(w)[0]
        halve_from_above = _w_limit_step(2.0 * w)[1]
        double_from_below = _w_limit_step(ws[k + 1])[2]
        nxt = (out_rate * rho[k] - halve_from_above * prev) / double_from_below
        prev = rho[k]
        rho.append(nxt)
    rho = rho[:support_points]
    total = sum(rho)
    weights = {w: r / total for w, r in zip(ws[:support_points], rho)}
    offset = sum(p * math.log2(w) for w, p in weights.items())
    return weights, offset
