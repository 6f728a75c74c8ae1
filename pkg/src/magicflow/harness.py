"""Trajectory ensembles: configuration, execution, and reduction.

A trajectory is a pure function of (master_seed, trajectory_index): the
pair is mixed splitmix64-style into the PCG stream seed, so ensembles are
reproducible one trajectory at a time, in any execution order, serial or
across processes.  Observables are evaluated only at checkpoint steps;
the schedule is either every step ("dense") or log-spaced ("log:K" with K
points per decade), and checkpoint 0 always records the initial state.

Reductions deliberately stay simple: per-checkpoint mean/std/stderr across
trajectories, a tail average for steady-state values (checkpoints treated
as independent, which undercounts autocorrelation; tolerances downstream
are set with that in mind), a trapezoidal time average, and derivative-free
least-squares fits of the closed-form decay shapes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .limits import check_cap, entropy_cap, gue_cap, spectrum_cap, state_cap
from .model import ModelParams
from .pauli import StabilizerGroup, sample_frame
from .spectrum import pauli_spectrum, sre
from .state import (
    StateVector,
    entanglement_entropy,
    gue_state,
    haar_state,
    measure_frame,
    t_product_state,
    zero_state,
)

INITIAL_STATES = ("haar", "t", "gue", "zero")
BASE_OBSERVABLES = ("nullity", "sre2", "entropy")

_MASK64 = (1 << 64) - 1


def mix_seed(master_seed: int, index: int) -> int:
    """splitmix64 of (master_seed, index): the per-trajectory stream seed."""
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def checkpoint_schedule(steps: int, schedule: str) -> np.ndarray:
    """Sorted checkpoint steps, always starting at 0 and ending at `steps`."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if schedule == "dense":
        return np.arange(steps + 1)
    if schedule.startswith("log:"):
        try:
            per_decade = int(schedule[4:])
        except ValueError as exc:
            raise ValueError(f"bad schedule {schedule!r}") from exc
        if per_decade < 1:
            raise ValueError(f"log schedule needs >= 1 point per decade, got {schedule!r}")
        ticks = {steps}
        i = 0
        while True:
            t = round(10.0 ** (i / per_decade))
            if t > steps:
                break
            ticks.add(int(t))
            i += 1
        return np.array([0] + sorted(ticks))
    raise ValueError(f"schedule must be 'dense' or 'log:K', got {schedule!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one ensemble; hashable and picklable."""

    n: int
    theta_m: float
    steps: int
    trajectories: int
    initial_state: str = "haar"
    master_seed: int = 0
    schedule: str = "log:20"
    observables: tuple[str, ...] = ("nullity", "sre2")
    sre_alphas: tuple[float, ...] = ()
    entropy_cut: int | None = None
    gue_time: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "sre_alphas", tuple(self.sre_alphas))
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        check_cap(self.n, state_cap(), "statevector")
        if not 0.0 <= self.theta_m <= 1.0:
            raise ValueError(f"theta_m is a dial in [0, 1], got {self.theta_m}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.trajectories < 1:
            raise ValueError(f"trajectories must be >= 1, got {self.trajectories}")
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(
                f"initial_state must be one of {INITIAL_STATES}, got {self.initial_state!r}"
            )
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in 64 bits")
        checkpoint_schedule(self.steps, self.schedule)  # validates the format
        for name in self.observables:
            if name not in BASE_OBSERVABLES:
                raise ValueError(f"unknown observable {name!r}")
        if len(set(self.observables)) != len(self.observables):
            raise ValueError("duplicate observables")
        for alpha in self.sre_alphas:
            if alpha <= 0 or alpha == 1:
                raise ValueError(f"SRE order must be positive and != 1, got {alpha}")
        if self.initial_state == "gue":
            check_cap(self.n, gue_cap(), "dense random-Hamiltonian evolution")
            if self.gue_time <= 0:
                raise ValueError(f"gue_time must be positive, got {self.gue_time}")
        if self._needs_spectrum():
            check_cap(self.n, spectrum_cap(), "full Pauli spectrum")
        if "entropy" in self.observables:
            check_cap(self.n, entropy_cap(), "entanglement entropy")
            cut = self.cut()
            if not 1 <= cut <= self.n - 1:
                raise ValueError(f"cut must split the register, got {cut} for n={self.n}")

    def _needs_spectrum(self) -> bool:
        return bool(self.sre_alphas) or "sre2" in self.observables

    def cut(self) -> int:
        return self.n // 2 if self.entropy_cut is None else self.entropy_cut

    def observable_keys(self) -> tuple[str, ...]:
        return self.observables + tuple(f"sre_{a:g}" for a in self.sre_alphas)


@dataclass
class TrajectoryRecord:
    """Checkpointed observables of a single monitored trajectory."""

    index: int
    seed: int
    steps: np.ndarray
    observables: dict[str, np.ndarray]
    outcome_signs: np.ndarray


@dataclass
class ObservableStats:
    mean: np.ndarray
    std: np.ndarray
    stderr: np.ndarray


@dataclass
class EnsembleSummary:
    config: ExperimentConfig
    steps: np.ndarray
    stats: dict[str, ObservableStats]
    records: list[TrajectoryRecord] | None = None

    @property
    def trajectories(self) -> int:
        return self.config.trajectories


def _prepare_initial(config: ExperimentConfig, rng: np.random.Generator) -> StateVector:
    if config.initial_state == "haar":
        return haar_state(config.n, rng)
    if config.initial_state == "t":
        return t_product_state(config.n)
    if config.initial_state == "gue":
        return gue_state(config.n, rng, config.gue_time)
    return zero_state(config.n)


def _evaluate_observables(
    state: StateVector, group: StabilizerGroup, config: ExperimentConfig
) -> dict[str, float]:
    values: dict[str, float] = {}
    spec = pauli_spectrum(state) if config._needs_spectrum() else None
    for key in config.observable_keys():
        if key == "nullity":
            values[key] = float(group.nullity)
        elif key == "sre2":
            values[key] = sre(spec, 2.0)
        elif key == "entropy":
            values[key] = entanglement_entropy(state, config.cut())
        elif key.startswith("sre_"):
            values[key] = sre(spec, float(key[4:]))
    return values


def run_trajectory(config: ExperimentConfig, index: int) -> TrajectoryRecord:
    """Run one monitored trajectory; deterministic in (master_seed, index).

    The nullity rides the exact symbolic group (see StabilizerGroup): the
    zero state starts with the full Z group, every other initial ensemble
    starts with the trivial group, and each protocol round applies the
    rotation update (dial > 0 only; at dial 0 the rotation is the identity)
    followed by the measurement update with the same frame the statevector
    sees.
    """
    if not 0 <= index < config.trajectories:
        raise ValueError(f"trajectory index {index} out of range")
    seed = mix_seed(config.master_seed, index)
    rng = np.random.default_rng(seed)
    state = _prepare_initial(config, rng)
    group = (
        StabilizerGroup.computational(config.n)
        if config.initial_state == "zero"
        else StabilizerGroup(config.n)
    )

    cps = checkpoint_schedule(config.steps, config.schedule)
    keys = config.observable_keys()
    series = {key: np.empty(len(cps)) for key in keys}
    signs = np.zeros(len(cps), dtype=np.int8)

    for key, value in _evaluate_observables(state, group, config).items():
        series[key][0] = value
    pos = 1
    for t in range(1, config.steps + 1):
        frame = sample_frame(config.n, rng)
        state, outcome = measure_frame(state, frame, config.theta_m, rng)
        if config.theta_m != 0.0:
            group.rotate(frame.px)
        group.measure(frame.pz)
        if t == cps[pos]:
            for key, value in _evaluate_observables(state, group, config).items():
                series[key][pos] = value
            signs[pos] = outcome.sign
            pos += 1
    return TrajectoryRecord(
        index=index, seed=seed, steps=cps, observables=series, outcome_signs=signs
    )


def _trajectory_worker(packed: tuple[ExperimentConfig, int]) -> TrajectoryRecord:
    return run_trajectory(*packed)


def run_ensemble(
    config: ExperimentConfig, workers: int = 1, keep_records: bool = False
) -> EnsembleSummary:
    """Run all trajectories and reduce to per-checkpoint statistics.

    workers > 1 fans trajectories out to a process pool; results are
    reassembled in index order, so the summary is bit-identical to a serial
    run of the same config.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    indices = range(config.trajectories)
    if workers == 1:
        records = [run_trajectory(config, i) for i in indices]
    else:
        tasks = [(config, i) for i in indices]
        chunk = max(1, config.trajectories // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trajectory_worker, tasks, chunksize=chunk))
    records.sort(key=lambda r: r.index)
    return summarize_records(config, records, keep_records)


def summarize_records(
    config: ExperimentConfig,
    records: list[TrajectoryRecord],
    keep_records: bool = False,
) -> EnsembleSummary:
    if len(records) != config.trajectories:
        raise ValueError(
            f"got {len(records)} records for {config.trajectories} trajectories"
        )
    steps = records[0].steps
    n_traj = len(records)
    stats: dict[str, ObservableStats] = {}
    for key in config.observable_keys():
        matrix = np.vstack([r.observables[key] for r in records])
        mean = matrix.mean(axis=0)
        std = matrix.std(axis=0, ddof=1) if n_traj > 1 else np.zeros(len(steps))
        stats[key] = ObservableStats(mean=mean, std=std, stderr=std / math.sqrt(n_traj))
    return EnsembleSummary(
        config=config, steps=steps, stats=stats, records=records if keep_records else None
    )


# --- reductions --------------------------------------------------------------


def steady_state_estimate(
    summary: EnsembleSummary, observable: str, tail_fraction: float = 0.25
) -> tuple[float, float]:
    """Average of the last tail_fraction of checkpoints, with naive error.

    The error combines per-checkpoint standard errors as if checkpoints were
    independent; consecutive checkpoints of the same ensemble are correlated,
    so treat it as a lower bound.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    if observable not in summary.stats:
        raise ValueError(f"summary has no observable {observable!r}")
    stat = summary.stats[observable]
    count = int(round(len(summary.steps) * tail_fraction))
    if count < 5:
        raise ValueError(
            f"tail of {count} checkpoints is too short to average (need >= 5)"
        )
    tail_mean = stat.mean[-count:]
    tail_err = stat.stderr[-count:]
    return float(tail_mean.mean()), float(np.sqrt(np.sum(tail_err**2)) / count)


def time_averaged_std(
    steps: np.ndarray, series: np.ndarray, t_min: float, t_max: float | None = None
) -> float:
    """Trapezoidal time average of a checkpoint series over [t_min, t_max]."""
    steps = np.asarray(steps, dtype=np.float64)
    series = np.asarray(series, dtype=np.float64)
    if steps.shape != series.shape:
        raise ValueError("steps and series must have matching shapes")
    if t_max is None:
        t_max = float(steps[-1])
    mask = (steps >= t_min) & (steps <= t_max)
    if int(mask.sum()) < 2:
        raise ValueError(f"window [{t_min}, {t_max}] contains fewer than two checkpoints")
    t = steps[mask]
    return float(np.trapezoid(series[mask], t) / (t[-1] - t[0]))


# --- least-squares fits -------------------------------------------------------

FIT_MODELS = ("nullity_fit", "m2_nu_fit", "gen_fit")


@dataclass(frozen=True)
class FitResult:
    model_id: str
    params: dict[str, float]
    residual: float
    evaluations: int
    converged: bool


def _decay_y(t: np.ndarray, a_f: float, y0_f: float) -> np.ndarray:
    b = (1.0 - y0_f) / (1.0 + y0_f)
    growth = np.exp(np.minimum(a_f * t, 700.0))
    return 1.0 - 2.0 * b / (growth + b)


def fit_model_curve(model_id: str, params: dict[str, float], t) -> np.ndarray:
    """Evaluate a fit model at times t for the given parameter dict."""
    t = np.asarray(t, dtype=np.float64)
    y = _decay_y(t, params["a_f"], params["y0_f"])
    if model_id == "nullity_fit":
        return np.log2(y)
    if model_id == "m2_nu_fit":
        return np.log((y + 3.0) / 4.0)
    if model_id == "gen_fit":
        return np.log((y * 2.0 ** params["c"] + 3.0) / 4.0)
    raise ValueError(f"model_id must be one of {FIT_MODELS}, got {model_id!r}")


def default_fit_guess(model_id: str, n: int) -> dict[str, float]:
    """Natural starting point: the model's own decay rate and y(0) for size n."""
    if model_id not in FIT_MODELS:
        raise ValueError(f"model_id must be one of {FIT_MODELS}, got {model_id!r}")
    guess = {"a_f": ModelParams(n=n, y0=1.0).a_n, "y0_f": 2.0**n}
    if model_id == "gen_fit":
        guess["c"] = 0.0
    return guess


def fit_least_squares(
    model_id: str,
    t,
    values,
    initial_guess: dict[str, float],
    max_evals: int = 100_000,
    tolerance: float = 1e-10,
) -> FitResult:
    """Nelder-Mead least squares of a decay-shape model.

    Simplex descent with the standard reflection/expansion/contraction/
    shrink coefficients (1, 2, 1/2, 1/2); stops when the simplex spread
    drops below `tolerance` or after `max_evals` evaluations, in which case
    the result is flagged unconverged but still returned.  a_f and y0_f are
    searched in log space so positivity never needs constraints.
    """
    t = np.asarray(t, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if t.size == 0 or t.shape != values.shape:
        raise ValueError("need matching, non-empty t and value arrays")
    if model_id not in FIT_MODELS:
        raise ValueError(f"model_id must be one of {FIT_MODELS}, got {model_id!r}")
    names = ["a_f", "y0_f"] + (["c"] if model_id == "gen_fit" else [])
    missing = [k for k in names if k not in initial_guess]
    if missing:
        raise ValueError(f"initial guess is missing {missing}")

    def unpack(x: np.ndarray) -> dict[str, float]:
        params = {"a_f": math.exp(x[0]), "y0_f": math.exp(x[1])}
        if model_id == "gen_fit":
            params["c"] = float(x[2])
        return params

    def objective(x: np.ndarray) -> float:
        resid = fit_model_curve(model_id, unpack(x), t) - values
        return float(resid @ resid)

    x0 = [math.log(initial_guess["a_f"]), math.log(initial_guess["y0_f"])]
    if model_id == "gen_fit":
        x0.append(initial_guess["c"])
    result = minimize(
        objective,
        np.asarray(x0),
        method="Nelder-Mead",
        options={"xatol": tolerance, "fatol": tolerance, "maxfev": max_evals},
    )
    return FitResult(
        model_id=model_id,
        params=unpack(result.x),
        residual=float(result.fun),
        evaluations=int(result.nfev),
        converged=bool(result.success),
    )


# --- rare events --------------------------------------------------------------


@dataclass(frozen=True)
class RareEvent:
    """A positive SRE jump between consecutive checkpoints of one trajectory."""

    trajectory_index: int
    step_from: int
    step_to: int
    jump: float
    nullity_change: float | None


def rare_event_scan(
    records: list[TrajectoryRecord],
    observable: str = "sre2",
    min_jump: float = 1e-9,
) -> list[RareEvent]:
    """Collect every increase of `observable` between consecutive checkpoints.

    Purely diagnostic: measurements should only remove magic on average, so
    upward jumps mark trajectories worth a second look.  Records the
    coincident nullity change when the records carry a nullity series.
    """
    if min_jump <= 0:
        raise ValueError(f"min_jump must be positive, got {min_jump}")
    events: list[RareEvent] = []
    for record in records:
        if observable not in record.observables:
            raise ValueError(f"record {record.index} has no {observable!r} series")
        series = record.observables[observable]
        nulls = record.observables.get("nullity")
        jumps = np.diff(series)
        for k in np.nonzero(jumps > min_jump)[0]:
            events.append(
                RareEvent(
                    trajectory_index=record.index,
                    step_from=int(record.steps[k]),
                    step_to=int(record.steps[k + 1]),
                    jump=float(jumps[k]),
                    nullity_change=float(nulls[k + 1] - nulls[k]) if nulls is not None else None,
                )
            )
    return events
