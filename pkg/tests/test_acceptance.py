"""Acceptance gate: one numbered test per release criterion.

Run with ``pytest -v tests/test_acceptance.py``; each test name is the
criterion's pass/fail line.  The heavy ensembles live in module fixtures so
criteria can share them; the whole file takes roughly eight minutes on one
core.  Criterion 10 documents a known failure, see its docstring.
"""

import math
import time

import numpy as np
import pytest

from magicflow import (
    ExperimentConfig,
    ModelParams,
    NullityDistribution,
    analytic_y,
    branch_probabilities,
    brute_force_spectrum,
    default_fit_guess,
    fit_least_squares,
    haar_state,
    m2_haar,
    markov_evolve,
    pauli_spectrum,
    run_ensemble,
    sample_frame,
    sre,
    sre_additivity_check,
    steady_state_estimate,
    transition_matrix,
)

LN2 = math.log(2.0)


def random_state(n, rng):
    amp = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    from magicflow import StateVector

    return StateVector(n=n, amplitudes=amp / np.linalg.norm(amp))


# --- shared ensembles ---------------------------------------------------------


@pytest.fixture(scope="module")
def decay_run():
    """Measurement-only decay at n = 6, Haar start, full observable set.

    Feeds criteria 4, 6, 12 and 14.  640 steps is ten times 2^6, far past
    the decay knee, so nearly every trajectory reaches nullity zero.
    """
    config = ExperimentConfig(
        n=6, theta_m=0.0, steps=640, trajectories=1000, initial_state="haar",
        master_seed=11, schedule="log:20",
        observables=("nullity", "sre2", "entropy"),
    )
    return config, run_ensemble(config, keep_records=True)


@pytest.fixture(scope="module")
def steady_runs():
    """Full-protocol runs at two sizes and three dials; feeds criteria 7, 8."""
    out = {}
    for n in (6, 8):
        for k, theta in enumerate((0.001, 0.5, 1.0)):
            config = ExperimentConfig(
                n=n, theta_m=theta, steps=200, trajectories=500,
                initial_state="haar", master_seed=700 + 10 * n + k,
                schedule="log:20", observables=("nullity",),
            )
            out[(n, theta)] = run_ensemble(config, keep_records=True)
    return out


@pytest.fixture(scope="module")
def convergence_runs():
    """Short dense-checkpoint runs at full dial from both sides; criterion 9."""
    runs = {}
    for n in (4, 6, 8):
        for start, seed in (("zero", 31 + n), ("haar", 35 + n)):
            config = ExperimentConfig(
                n=n, theta_m=1.0, steps=20, trajectories=1000,
                initial_state=start, master_seed=seed, schedule="dense",
                observables=("nullity",),
            )
            runs[(start, n)] = run_ensemble(config)
    return runs


@pytest.fixture(scope="module")
def onset_runs():
    """Small-dial steady states at n = 8; criterion 10.  The dominant cost
    here is the 0.05 dial, whose relaxation time forces 6000 steps."""
    steps = {0.05: 6000, 0.1: 3000, 0.2: 2000}
    out = {}
    for k, theta in enumerate(sorted(steps)):
        config = ExperimentConfig(
            n=8, theta_m=theta, steps=steps[theta], trajectories=200,
            initial_state="zero", master_seed=1000 + k, schedule="log:20",
            observables=("sre2",),
        )
        out[theta] = run_ensemble(config)
    return out


@pytest.fixture(scope="module")
def deep_dial_run():
    """Full-dial steady state at n = 8; criterion 11."""
    config = ExperimentConfig(
        n=8, theta_m=1.0, steps=400, trajectories=300, initial_state="zero",
        master_seed=1100, schedule="log:20", observables=("sre2",),
    )
    return run_ensemble(config)


def chain_moments(n, checkpoints):
    dists = markov_evolve(NullityDistribution.point_mass(n, n), int(checkpoints[-1]))
    mean = np.array([dists[int(t)].mean() for t in checkpoints])
    std = np.array([math.sqrt(dists[int(t)].variance()) for t in checkpoints])
    return mean, std


# --- criteria -----------------------------------------------------------------


def test_criterion_01_spectrum_oracle_equivalence():
    """Butterfly-transform spectra match the dense matrix-element route."""
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for n in (2, 3, 4):
        for _ in range(50):
            state = random_state(n, rng)
            fast = pauli_spectrum(state)
            slow = brute_force_spectrum(state)
            worst = max(worst, float(np.max(np.abs(fast.xi - slow.xi))))
    assert worst < 1e-10
    assert time.perf_counter() - t0 < 10.0


def test_criterion_02_pvm_completeness():
    """Separately computed outcome probabilities sum to one."""
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        state = haar_state(n, rng)
        frame = sample_frame(n, rng)
        theta = float(rng.uniform(0.0, 1.0))
        p_plus, p_minus = branch_probabilities(state, frame, theta)
        worst = max(worst, abs(p_plus + p_minus - 1.0))
    assert worst < 1e-12
    assert time.perf_counter() - t0 < 5.0


def test_criterion_03_first_measurement_law():
    """From a generic state the first measurement removes exactly one unit
    of nullity, with probability one, at both tested sizes."""
    for n in (4, 6):
        config = ExperimentConfig(
            n=n, theta_m=0.0, steps=1, trajectories=500, initial_state="haar",
            master_seed=300 + n, schedule="dense", observables=("nullity",),
        )
        summary = run_ensemble(config, keep_records=True)
        after = np.array([r.observables["nullity"][1] for r in summary.records])
        assert np.all(after == n - 1)


def test_criterion_04_markov_chain_agreement(decay_run):
    """Ensemble-mean nullity sits on the decay chain at every checkpoint.

    The tolerance band is three chain-predicted standard errors; where the
    chain variance is exactly zero (the start, and step one where decay is
    certain) the simulation must agree exactly.
    """
    config, summary = decay_run
    mean_chain, std_chain = chain_moments(config.n, summary.steps)
    mean_sim = summary.stats["nullity"].mean
    band = 3.0 * std_chain / math.sqrt(config.trajectories)
    for i in range(len(summary.steps)):
        if std_chain[i] == 0.0:
            assert mean_sim[i] == mean_chain[i]
        else:
            assert abs(mean_sim[i] - mean_chain[i]) <= band[i]


def test_criterion_05_rescaled_collapse():
    """Chain decay curves at n = 6, 8, 10 collapse onto one function of
    tau = A_N (t+1) within 3% through the middle of the decay."""
    grid = np.linspace(0.2, 1.5, 40)
    curves = {}
    for n in (6, 8, 10):
        steps = 10 * 2**n
        dists = markov_evolve(NullityDistribution.point_mass(n, n), steps)
        mean = np.array([d.mean() for d in dists])
        tau = ModelParams(n=n, y0=1.0).a_n * (np.arange(steps + 1) + 1.0)
        curves[n] = np.interp(grid, tau, mean)
    worst = 0.0
    for a in (6, 8):
        for b in (8, 10):
            if a == b:
                continue
            rel = np.abs(curves[a] - curves[b]) / np.maximum(curves[a], curves[b])
            worst = max(worst, float(rel.max()))
    assert worst < 0.03


def test_criterion_06_haar_sre_map(decay_run):
    """Generic states carry the closed-form SRE, and the decay ensemble
    stays on the nullity-resolved version of that curve.

    Part two compares the measured mean SRE at each checkpoint against the
    map applied trajectory-by-trajectory to the exact nullities, which
    respects the curvature of the map across the ensemble spread.
    """
    rng = np.random.default_rng(601)
    for n in (4, 6):
        values = [sre(pauli_spectrum(haar_state(n, rng)), 2.0) for _ in range(200)]
        assert np.mean(values) == pytest.approx(m2_haar(n), rel=0.03)

    config, summary = decay_run
    nu = np.array([r.observables["nullity"] for r in summary.records])
    m2 = np.array([r.observables["sre2"] for r in summary.records])
    mask = nu.mean(axis=0) >= 1.0
    predicted = m2_haar(nu).mean(axis=0)[mask]
    measured = m2.mean(axis=0)[mask]
    rel = np.abs(measured - predicted) / predicted
    assert float(rel.max()) < 0.03


def test_criterion_07_steady_state_nullity(steady_runs):
    """Tail nullity settles 1.46 units below the qubit count, independent
    of the dial over three decades."""
    estimates = {}
    for (n, theta), summary in steady_runs.items():
        est, _ = steady_state_estimate(summary, "nullity")
        estimates[(n, theta)] = est
        assert abs(est - (n - 1.46)) <= 0.1
    for n in (6, 8):
        values = [estimates[(n, theta)] for theta in (0.001, 0.5, 1.0)]
        assert max(values) - min(values) <= 0.1


def test_criterion_08_steady_state_distribution(steady_runs):
    """Pooled tail histogram of N - nu concentrates on offsets 1, 2, 3 with
    the stationary weights of the dyadic walk."""
    offsets = []
    for (n, _), summary in steady_runs.items():
        count = int(round(len(summary.steps) * 0.25))
        for record in summary.records:
            tail = record.observables["nullity"][-count:]
            offsets.extend(n - tail)
    offsets = np.array(offsets)
    assert np.all(offsets >= 1.0)
    total = len(offsets)
    for offset, weight in ((1, 0.578), (2, 0.385), (3, 0.037)):
        assert abs(np.sum(offsets == offset) / total - weight) <= 0.05
    assert np.sum(offsets >= 4) / total <= 0.01


def test_criterion_09_convergence_time_scaling(convergence_runs):
    """Climb time from a stabilizer start grows linearly with qubit count at
    a slope near ln 2 per qubit; descent from a generic start does not grow.

    Checkpoints are integer steps, so the crossing times are discrete; the
    slope window of 50% around ln 2 absorbs that quantization.
    """
    up_crossings = []
    for n in (4, 6, 8):
        mean = convergence_runs[("zero", n)].stats["nullity"].mean
        threshold = n - 1.46 - 0.25
        assert np.any(mean > threshold)
        up_crossings.append(int(np.argmax(mean > threshold)))
    assert up_crossings == sorted(up_crossings)
    slope = np.polyfit([4, 6, 8], up_crossings, 1)[0]
    assert 0.5 * LN2 <= slope <= 1.5 * LN2

    down_crossings = []
    for n in (4, 6, 8):
        mean = convergence_runs[("haar", n)].stats["nullity"].mean
        threshold = n - 1.46 + 0.25
        assert np.any(mean < threshold)
        down_crossings.append(int(np.argmax(mean < threshold)))
    assert max(down_crossings) - min(down_crossings) <= 1


def test_criterion_10_quadratic_sre_onset(onset_runs):
    """Steady SRE should grow as the dial squared, so halving the dial
    should cut it by a factor of four, within 20%.

    Known red.  At n = 8 the pinned dials 0.05 to 0.2 already sit past the
    quadratic window: measured ratios land near 2.7 and 2.1.  Halving the
    dial from 0.025 to 0.0125 does give a ratio of about 4.2 (run
    ``magicflow reproduce --fig fig6``), so the scaling law holds, but only
    at dials smaller than the ones fixed here.
    """
    est = {theta: steady_state_estimate(summary, "sre2")[0]
           for theta, summary in onset_runs.items()}
    for small, large in ((0.05, 0.1), (0.1, 0.2)):
        ratio = est[large] / est[small]
        assert 3.2 <= ratio <= 4.8


def test_criterion_11_reduced_haar_proximity(deep_dial_run):
    """Full-dial steady SRE at n = 8 matches the generic-state value for
    two fewer qubits within 5%."""
    est, _ = steady_state_estimate(deep_dial_run, "sre2")
    target = m2_haar(6)
    assert abs(est - target) / target <= 0.05


def test_criterion_12_entanglement_quantization(decay_run):
    """Once nullity hits zero every half-cut entropy is an integer number
    of bits to machine precision."""
    _, summary = decay_run
    final_nu = np.array([r.observables["nullity"][-1] for r in summary.records])
    decayed = np.flatnonzero(final_nu == 0.0)
    assert len(decayed) >= 0.9 * len(summary.records)
    for i in decayed:
        s = summary.records[i].observables["entropy"][-1]
        assert abs(s - round(s / LN2) * LN2) <= 1e-6


def test_criterion_13_fit_recovery():
    """The simplex fit recovers the decay rate within 5% and the initial
    dimension within a factor of two from 1% noisy synthetic data."""
    n = 8
    rng = np.random.default_rng(5)
    params = ModelParams.from_initial_nullity(n, n)
    t = np.unique(np.round(np.logspace(0.0, math.log10(10.0 * 2**n), 40)))
    y = analytic_y(t, params) * (1.0 + 0.01 * rng.standard_normal(len(t)))
    fit = fit_least_squares("nullity_fit", t, np.log2(y),
                            default_fit_guess("nullity_fit", n))
    assert fit.converged
    assert abs(fit.params["a_f"] - params.a_n) / params.a_n <= 0.05
    assert 0.5 <= fit.params["y0_f"] / 2.0**n <= 2.0


def test_criterion_14_property_suite(decay_run):
    """Structural invariants: SRE additivity, the nullity bound on SRE,
    stochastic transition matrices, and parallel/serial determinism."""
    rng = np.random.default_rng(1400)
    for n_a, n_b in ((2, 3), (3, 3)):
        diff = sre_additivity_check(haar_state(n_a, rng), haar_state(n_b, rng))
        assert diff < 1e-8

    _, summary = decay_run
    for record in summary.records:
        bound = record.observables["nullity"] * LN2 + 1e-9
        assert np.all(record.observables["sre2"] <= bound)

    for n in (4, 9, 12):
        for magic_basis in (False, True):
            t = transition_matrix(n, magic_basis)
            assert float(np.max(np.abs(t.sum(axis=1) - 1.0))) < 1e-12

    config = ExperimentConfig(n=4, theta_m=0.7, steps=30, trajectories=8,
                              master_seed=9, schedule="log:10")
    serial = run_ensemble(config)
    parallel = run_ensemble(config, workers=2)
    for key in serial.stats:
        assert np.array_equal(serial.stats[key].mean, parallel.stats[key].mean)
        assert np.array_equal(serial.stats[key].stderr, parallel.stats[key].stderr)
