"""Command-line entry point.

Four subcommands: `simulate` runs a trajectory ensemble and writes JSON,
CSV, and optional figures; `model` evaluates the analytic layer on a grid;
`reproduce` runs packaged desk-scale presets that regenerate the standard
figures; `selftest` runs the built-in consistency suites.

Output files are deterministic for a given flag set: the JSON summary is
key-sorted, the CSV tables carry no timestamps, and every file embeds the
config that produced it.  The only non-reproducible field is the wall-time
entry in the JSON provenance block.

Exit codes: 0 success, 1 usage or validation error, 2 qubit-cap violation,
3 selftest failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .harness import (
    ExperimentConfig,
    default_fit_guess,
    fit_least_squares,
    fit_model_curve,
    run_ensemble,
    steady_state_estimate,
)
from .limits import CapExceededError
from .model import (
    ModelParams,
    NullityDistribution,
    analytic_y,
    m2_haar,
    markov_evolve,
    nullity_asymptotics,
    steady_state_distribution,
)
from .pauli import sample_frame
from .spectrum import brute_force_spectrum, pauli_spectrum, sre, sre_additivity_check
from .state import branch_probabilities, haar_state, t_product_state

FIGURE_IDS = (
    "fig1", "fig2", "fig3a", "fig3b", "fig3c", "fig4", "fig5", "fig6", "app_fits",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; this CLI reserves 2 for cap violations
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _config_dict(config: ExperimentConfig) -> dict:
    return {
        "n": config.n,
        "theta_m": config.theta_m,
        "steps": config.steps,
        "trajectories": config.trajectories,
        "initial_state": config.initial_state,
        "master_seed": config.master_seed,
        "schedule": config.schedule,
        "observables": list(config.observables),
        "sre_alphas": list(config.sre_alphas),
        "entropy_cut": config.entropy_cut,
        "gue_time": config.gue_time,
    }


def _write_csv(path, config_obj, columns, rows):
    """Plot-ready table with the config embedded as a leading comment."""
    with open(path, "w") as fh:
        fh.write(f"# config: {json.dumps(config_obj, sort_keys=True)}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _parse_observables(text: str) -> tuple[tuple[str, ...], tuple[float, ...]]:
    base: list[str] = []
    alphas: list[float] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token.startswith("sre_") and token != "sre_2":
            try:
                alphas.append(float(token[4:]))
            except ValueError:
                raise ValueError(f"bad SRE order in observable token {token!r}")
        else:
            base.append("sre2" if token == "sre_2" else token)
    return tuple(base), tuple(alphas)


# --- simulate -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    observables, alphas = _parse_observables(args.observables)
    config = ExperimentConfig(
        n=args.n,
        theta_m=args.theta,
        steps=args.steps,
        trajectories=args.traj,
        initial_state=args.initial,
        master_seed=args.seed,
        schedule=args.schedule,
        observables=observables,
        sre_alphas=alphas,
        entropy_cut=args.cut,
    )
    t0 = time.perf_counter()
    summary = run_ensemble(config, workers=args.workers)
    wall = time.perf_counter() - t0

    bundle = {
        "config": _config_dict(config),
        "checkpoints": {"step": summary.steps.tolist()},
        "provenance": {
            "master_seed": config.master_seed,
            "version": __version__,
            "wall_time_s": round(wall, 6),
        },
    }
    for key, stat in summary.stats.items():
        bundle["checkpoints"][key] = {
            "mean": stat.mean.tolist(),
            "std": stat.std.tolist(),
            "stderr": stat.stderr.tolist(),
        }
    text = json.dumps(bundle, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        stem = args.out.rsplit(".", 1)[0]
        rows = []
        for key, stat in summary.stats.items():
            for i, step in enumerate(summary.steps):
                rows.append((key, int(step), float(stat.mean[i]),
                             float(stat.std[i]), float(stat.stderr[i])))
        _write_csv(f"{stem}.csv", bundle["config"],
                   ("observable", "step", "mean", "std", "stderr"), rows)
        print(f"wrote {args.out} and {stem}.csv")
    else:
        print(text)

    if args.plot:
        from . import plotting

        stem = (args.out.rsplit(".", 1)[0].rsplit("/", 1)[-1]) if args.out else "run"
        logx = config.schedule.startswith("log")
        for key, stat in summary.stats.items():
            path = f"{args.plot}/{stem}_{key}.svg"
            plotting.series_plot(
                path, summary.steps, {key: (stat.mean, stat.stderr)},
                ylabel=key, logx=logx, config=bundle["config"],
            )
            print(f"wrote {path}")
    return 0


# --- model --------------------------------------------------------------------


def cmd_model(args) -> int:
    n = args.n
    rows: list[tuple] = []
    meta = {"n": n, "mode": None, "steps": args.steps}
    if args.magic_basis:
        meta["mode"] = "magic-basis"
        steps = args.steps or max(200, 30 * n)
        rhos = markov_evolve(NullityDistribution.point_mass(n, 0), steps, magic_basis=True)
        means = [r.mean() for r in rhos]
        for t, m in enumerate(means):
            rows.append((t, m))
        tail = means[-max(5, len(means) // 4):]
        print(f"tail mean nu: {np.mean(tail):.4f}  (steps {steps}, n {n})")
        columns = ("t", "mean_nu")
    elif args.chain:
        meta["mode"] = "chain"
        steps = args.steps or 10 * 2**n
        rhos = markov_evolve(NullityDistribution.point_mass(n, n), steps)
        for t, r in enumerate(rhos):
            rows.append((t, r.mean()))
        print(f"nu(0) = {rows[0][1]:g}, nu({steps}) = {rows[-1][1]:.3e}")
        columns = ("t", "mean_nu")
    elif args.analytic:
        meta["mode"] = "analytic"
        steps = args.steps or 10 * 2**n
        params = ModelParams.from_initial_nullity(n, n)
        t = np.arange(steps + 1, dtype=np.float64)
        y = analytic_y(t, params)
        nu = np.log2(y)
        for i in range(t.size):
            rows.append((int(t[i]), float(y[i]), float(nu[i])))
        print(f"nu(0) = {nu[0]:g}, nu({steps}) = {nu[-1]:.3e}")
        columns = ("t", "y", "nu")
    elif args.asymptotics:
        meta["mode"] = "asymptotics"
        steps = args.steps or 10 * 2**n
        t = np.unique(np.round(np.logspace(0, np.log10(steps), 200)).astype(int))
        nu = nullity_asymptotics(t.astype(float), n)
        for i in range(t.size):
            rows.append((int(t[i]), float(nu[i])))
        print(f"asymptotic nu at t={int(t[0])}: {nu[0]:.4f}, at t={int(t[-1])}: {nu[-1]:.3e}")
        columns = ("t", "nu")
    else:
        meta["mode"] = "steady"
        weights, offset = steady_state_distribution()
        for w, p in sorted(weights.items(), reverse=True):
            rows.append((w, p))
        print(f"steady offset: {offset:.4f}  (tail mean nu = N {offset:+.4f})")
        columns = ("w", "weight")
    if args.out:
        _write_csv(args.out, meta, columns, rows)
        print(f"wrote {args.out}")
    return 0


# --- reproduce ----------------------------------------------------------------


def _run(config: ExperimentConfig, keep=False):
    return run_ensemble(config, keep_records=keep)


def _fig1(outdir: str):
    """A few single decay trajectories on top of the ensemble mean."""
    from . import plotting

    singles_cfg = ExperimentConfig(
        n=6, theta_m=0.0, steps=250, trajectories=3, initial_state="haar",
        master_seed=401, schedule="dense", observables=("nullity", "sre2"),
    )
    singles = _run(singles_cfg, keep=True)
    mean_cfg = ExperimentConfig(
        n=6, theta_m=0.0, steps=640, trajectories=300, initial_state="haar",
        master_seed=402, schedule="log:20", observables=("nullity", "sre2"),
    )
    mean = _run(mean_cfg)

    rows = []
    for rec in singles.records:
        for i, t in enumerate(rec.steps):
            rows.append(("single", rec.index, int(t),
                         float(rec.observables["nullity"][i]),
                         float(rec.observables["sre2"][i])))
    for i, t in enumerate(mean.steps):
        rows.append(("mean", -1, int(t),
                     float(mean.stats["nullity"].mean[i]),
                     float(mean.stats["sre2"].mean[i])))
    csv_path = f"{outdir}/fig1.csv"
    _write_csv(csv_path, _config_dict(mean_cfg),
               ("kind", "trajectory", "step", "nullity", "sre2"), rows)
    svg_path = f"{outdir}/fig1.svg"
    plotting.staircase_plot(
        svg_path,
        [(r.steps, r.observables["nullity"]) for r in singles.records],
        mean=(mean.steps, mean.stats["nullity"].mean),
        ylabel="nullity", title="measurement-only decay, n=6",
        config=_config_dict(mean_cfg),
    )
    return [csv_path, svg_path], "single trajectories decay in unit steps; the mean is smooth"


def _fig2(outdir: str):
    """Decay collapse: chain curves and simulation on rescaled time."""
    from . import plotting

    rows = []
    series = {}
    points = {}
    for n in (4, 6, 8):
        params = ModelParams.from_initial_nullity(n, n)
        steps = 10 * 2**n
        rhos = markov_evolve(NullityDistribution.point_mass(n, n), steps)
        chain = np.array([r.mean() for r in rhos])
        tau = params.a_n * (np.arange(steps + 1) + 1.0)
        keep = chain > 1e-4
        series[f"chain n={n}"] = (tau[keep], chain[keep], None)
        for t in np.flatnonzero(keep):
            rows.append(("chain", n, int(t), float(tau[t]), float(chain[t]), None))
        cfg = ExperimentConfig(
            n=n, theta_m=0.0, steps=steps, trajectories=150, initial_state="haar",
            master_seed=410 + n, schedule="log:20", observables=("nullity",),
        )
        summary = _run(cfg)
        sim = summary.stats["nullity"]
        sim_tau = params.a_n * (summary.steps + 1.0)
        keep = sim.mean > 0
        points[f"sim n={n}"] = (sim_tau[keep], sim.mean[keep], sim.stderr[keep])
        for i in np.flatnonzero(keep):
            rows.append(("sim", n, int(summary.steps[i]), float(sim_tau[i]),
                         float(sim.mean[i]), float(sim.stderr[i])))
    csv_path = f"{outdir}/fig2.csv"
    _write_csv(csv_path, {"figure": "fig2", "n": [4, 6, 8]},
               ("source", "n", "t", "tau", "mean_nu", "stderr"), rows)
    svg_path = f"{outdir}/fig2.svg"
    plotting.scatter_plot(
        svg_path, points, xlabel="tau = A_N (t+1)", ylabel="mean nullity",
        logy=True, guides=[(s[0], s[1], lab) for lab, s in series.items()],
        title="decay collapse on rescaled time", config={"figure": "fig2"},
    )
    return [csv_path, svg_path], "curves for n=4,6,8 land on one exponential tail"


def _fig3(outdir: str, initial: str, fig_id: str):
    """SRE decay for one initial ensemble, with its decay-shape fit."""
    from . import plotting

    cfg = ExperimentConfig(
        n=6, theta_m=0.0, steps=640, trajectories=300, initial_state=initial,
        master_seed=420, schedule="log:20", observables=("nullity", "sre2"),
    )
    summary = _run(cfg)
    m2 = summary.stats["sre2"]
    model_id = "m2_nu_fit" if initial == "haar" else "gen_fit"
    mask = summary.steps >= 1
    fit = fit_least_squares(
        model_id, summary.steps[mask].astype(float), m2.mean[mask],
        default_fit_guess(model_id, 6),
    )
    curve = fit_model_curve(model_id, fit.params, summary.steps[mask].astype(float))
    pos = np.cumsum(mask) - 1  # index into curve for masked checkpoints
    rows = [
        (int(summary.steps[i]), float(m2.mean[i]), float(m2.stderr[i]),
         float(curve[pos[i]]) if mask[i] else None)
        for i in range(len(summary.steps))
    ]
    csv_path = f"{outdir}/{fig_id}.csv"
    _write_csv(csv_path, _config_dict(cfg), ("t", "mean_sre2", "stderr", "fit"), rows)
    svg_path = f"{outdir}/{fig_id}.svg"
    plotting.series_plot(
        svg_path, summary.steps,
        {f"{initial} start": (m2.mean, m2.stderr)},
        ylabel="mean SRE", logx=True,
        guides=[(summary.steps[mask], curve, f"{model_id} fit")],
        title=f"SRE decay, n=6, {initial} start", config=_config_dict(cfg),
    )
    pieces = ", ".join(f"{k}={v:.4g}" for k, v in fit.params.items())
    return [csv_path, svg_path], f"{model_id}: {pieces} (residual {fit.residual:.2e})"


def _fig4(outdir: str):
    """Both nullity branches at full dial meeting at the steady band."""
    from . import plotting

    _, offset = steady_state_distribution()
    n = 8
    level = n + offset
    rows = []
    series = {}
    for start, seed in (("zero", 430), ("haar", 431)):
        cfg = ExperimentConfig(
            n=n, theta_m=1.0, steps=40, trajectories=500, initial_state=start,
            master_seed=seed, schedule="dense", observables=("nullity",),
        )
        summary = _run(cfg)
        nu0 = 0 if start == "zero" else n
        rhos = markov_evolve(NullityDistribution.point_mass(n, nu0), 40, magic_basis=True)
        chain = np.array([r.mean() for r in rhos])
        stat = summary.stats["nullity"]
        series[f"{start} start"] = (stat.mean, stat.stderr)
        series[f"chain from {nu0}"] = (summary.steps, chain, None)
        for i, t in enumerate(summary.steps):
            rows.append((start, int(t), float(stat.mean[i]), float(stat.stderr[i]),
                         float(chain[i])))
    csv_path = f"{outdir}/fig4.csv"
    _write_csv(csv_path, {"figure": "fig4", "n": n, "theta_m": 1.0},
               ("branch", "t", "sim_mean", "sim_stderr", "chain"), rows)
    svg_path = f"{outdir}/fig4.svg"
    plotting.series_plot(
        svg_path, np.arange(41), series, ylabel="mean nullity",
        hlines=[(level, f"N {offset:+.2f}")],
        title=f"nullity branches, n={n}, full dial", config={"figure": "fig4"},
    )
    return [csv_path, svg_path], f"both branches settle at {level:.2f}"


def _fig5(outdir: str):
    """SRE relaxation at several dial settings."""
    from . import plotting

    n = 6
    rows = []
    series = {}
    for theta in (0.1, 0.5, 1.0):
        cfg = ExperimentConfig(
            n=n, theta_m=theta, steps=600, trajectories=200, initial_state="zero",
            master_seed=440, schedule="log:20", observables=("sre2",),
        )
        summary = _run(cfg)
        stat = summary.stats["sre2"]
        series[f"theta {theta:g}"] = (summary.steps, stat.mean, stat.stderr)
        for i, t in enumerate(summary.steps):
            rows.append((theta, int(t), float(stat.mean[i]), float(stat.stderr[i])))
    csv_path = f"{outdir}/fig5.csv"
    _write_csv(csv_path, {"figure": "fig5", "n": n},
               ("theta_m", "t", "mean_sre2", "stderr"), rows)
    svg_path = f"{outdir}/fig5.svg"
    plotting.series_plot(
        svg_path, None, series, ylabel="mean SRE", logx=True,
        hlines=[(m2_haar(n - 2), "Haar, N-2 qubits")],
        title=f"SRE pumping at n={n}", config={"figure": "fig5"},
    )
    return [csv_path, svg_path], "steady SRE grows with the dial toward the Haar(N-2) level"


def _fig6(outdir: str):
    """Steady-state magic density against the dial, with the small-angle guide."""
    from . import plotting

    n = 6
    thetas = (0.0125, 0.025, 0.05, 0.1, 0.2, 0.5, 1.0)
    rows = []
    ests = []
    errs = []
    for theta in thetas:
        steps = int(min(8000, max(600, 4.0 / theta**2)))
        cfg = ExperimentConfig(
            n=n, theta_m=theta, steps=steps, trajectories=150, initial_state="zero",
            master_seed=450, schedule="log:10", observables=("sre2",),
        )
        summary = _run(cfg)
        est, err = steady_state_estimate(summary, "sre2")
        ests.append(est)
        errs.append(err)
        rows.append((theta, steps, float(est), float(err), float(est / n)))
        print(f"  theta {theta:g}: steady SRE {est:.4f} +- {err:.4f}")
    csv_path = f"{outdir}/fig6.csv"
    _write_csv(csv_path, {"figure": "fig6", "n": n, "trajectories": 150},
               ("theta_m", "steps", "sre2_ss", "err", "m2_density"), rows)
    guide_x = np.array(thetas[:5])
    guide_y = ests[0] * (guide_x / thetas[0]) ** 2
    svg_path = f"{outdir}/fig6.svg"
    plotting.scatter_plot(
        svg_path, {"steady SRE": (np.array(thetas), np.array(ests), np.array(errs))},
        xlabel="dial theta_m", ylabel="steady-state SRE", logx=True, logy=True,
        guides=[(guide_x, guide_y, "quadratic guide")],
        title=f"steady magic vs dial, n={n}", config={"figure": "fig6"},
    )
    ratio = ests[1] / ests[0]
    return [csv_path, svg_path], f"smallest-dial ratio {ratio:.2f} vs 4 expected for quadratic scaling"


def _app_fits(outdir: str):
    """Fit recovery on synthetic decay data with multiplicative noise."""
    from . import plotting

    n = 8
    params = ModelParams.from_initial_nullity(n, n)
    t = np.unique(np.round(np.logspace(0, np.log10(10 * 2**n), 40))).astype(float)
    rng = np.random.default_rng(409)
    y_true = analytic_y(t, params)
    y_noisy = y_true * (1.0 + 0.01 * rng.standard_normal(t.size))
    fit = fit_least_squares("nullity_fit", t, np.log2(y_noisy),
                            default_fit_guess("nullity_fit", n))
    curve = fit_model_curve("nullity_fit", fit.params, t)
    rows = [(float(t[i]), float(np.log2(y_true[i])), float(np.log2(y_noisy[i])),
             float(curve[i])) for i in range(t.size)]
    csv_path = f"{outdir}/app_fits.csv"
    _write_csv(csv_path, {"figure": "app_fits", "n": n, "noise": 0.01},
               ("t", "nu_true", "nu_noisy", "nu_fit"), rows)
    svg_path = f"{outdir}/app_fits.svg"
    plotting.series_plot(
        svg_path, t,
        {"noisy data": (np.log2(y_noisy),), "true curve": (np.log2(y_true),)},
        ylabel="nullity", logx=True,
        guides=[(t, curve, "fit")],
        title="decay-shape fit on synthetic data", config={"figure": "app_fits"},
    )
    a_err = abs(fit.params["a_f"] - params.a_n) / params.a_n
    return [csv_path, svg_path], (
        f"a_f {fit.params['a_f']:.4e} vs A_N {params.a_n:.4e} ({100*a_err:.2f}% off), "
        f"y0_f/2^N = {fit.params['y0_f']/2**n:.3f}"
    )


def cmd_reproduce(args) -> int:
    handlers = {
        "fig1": _fig1,
        "fig2": _fig2,
        "fig3a": lambda d: _fig3(d, "haar", "fig3a"),
        "fig3b": lambda d: _fig3(d, "t", "fig3b"),
        "fig3c": lambda d: _fig3(d, "gue", "fig3c"),
        "fig4": _fig4,
        "fig5": _fig5,
        "fig6": _fig6,
        "app_fits": _app_fits,
    }
    files, headline = handlers[args.fig](args.outdir)
    for path in files:
        print(f"wrote {path}")
    print(headline)
    return 0


# --- selftest -------------------------------------------------------------------


def _suite_spectrum_oracle(tol: float):
    worst = 0.0
    rng = np.random.default_rng(1)
    for n in (2, 3, 4):
        for _ in range(4):
            state = haar_state(n, rng)
            fast = pauli_spectrum(state).xi
            slow = brute_force_spectrum(state).xi
            worst = max(worst, float(np.max(np.abs(fast - slow))))
    return worst <= tol, f"max |fast - brute| = {worst:.2e} (tol {tol:g})"


def _suite_pvm_completeness(tol: float):
    worst = 0.0
    rng = np.random.default_rng(2)
    for _ in range(60):
        n = int(rng.integers(2, 6))
        state = haar_state(n, rng)
        frame = sample_frame(n, rng)
        theta = float(rng.uniform(0.0, 1.0))
        p_plus, p_minus = branch_probabilities(state, frame, theta)
        worst = max(worst, abs(p_plus + p_minus - 1.0))
    return worst <= tol, f"max |p+ + p- - 1| = {worst:.2e} (tol {tol:g})"


def _suite_stochastic_model(tol: float):
    from .model import transition_matrix

    worst = 0.0
    for n in (2, 4, 8, 12):
        for magic in (False, True):
            t = transition_matrix(n, magic)
            worst = max(worst, float(np.max(np.abs(t.sum(axis=1) - 1.0))))
            if np.min(t) < 0:
                return False, f"negative transition entry at n={n}"
    return worst <= tol, f"max row-sum deviation = {worst:.2e} (tol {tol:g})"


def _suite_sre_additivity(tol: float):
    rng = np.random.default_rng(3)
    worst = 0.0
    for na, nb in ((2, 2), (2, 3), (3, 2)):
        gap = sre_additivity_check(haar_state(na, rng), haar_state(nb, rng))
        worst = max(worst, gap)
    gap = sre_additivity_check(t_product_state(2), t_product_state(3))
    worst = max(worst, gap)
    return worst <= tol, f"max additivity gap = {worst:.2e} (tol {tol:g})"


def _suite_determinism(corrupted: bool):
    cfg = ExperimentConfig(
        n=4, theta_m=0.5, steps=25, trajectories=10, initial_state="haar",
        master_seed=99, schedule="log:10", observables=("nullity", "sre2"),
    )
    first = run_ensemble(cfg)
    second_cfg = cfg if not corrupted else ExperimentConfig(
        n=4, theta_m=0.5, steps=25, trajectories=10, initial_state="haar",
        master_seed=100, schedule="log:10", observables=("nullity", "sre2"),
    )
    second = run_ensemble(second_cfg)
    parallel = run_ensemble(cfg, workers=2)
    for key in first.stats:
        if not np.array_equal(first.stats[key].mean, second.stats[key].mean):
            return False, f"serial reruns differ on {key!r}"
        if not np.array_equal(first.stats[key].mean, parallel.stats[key].mean):
            return False, f"parallel run differs on {key!r}"
    return True, "serial rerun and 2-worker run are bit-identical"


def cmd_selftest(args) -> int:
    tols = {
        "spectrum_oracle": 1e-10,
        "pvm_completeness": 1e-12,
        "stochastic_model": 1e-12,
        "sre_additivity": 1e-8,
    }
    if args.corrupt and args.corrupt in tols:
        tols[args.corrupt] = -1.0  # test hook: impossible tolerance
    suites = [
        ("spectrum_oracle", lambda: _suite_spectrum_oracle(tols["spectrum_oracle"])),
        ("pvm_completeness", lambda: _suite_pvm_completeness(tols["pvm_completeness"])),
        ("stochastic_model", lambda: _suite_stochastic_model(tols["stochastic_model"])),
        ("sre_additivity", lambda: _suite_sre_additivity(tols["sre_additivity"])),
        ("determinism", lambda: _suite_determinism(args.corrupt == "determinism")),
    ]
    failures = 0
    for name, run in suites:
        t0 = time.perf_counter()
        ok, detail = run()
        dt = time.perf_counter() - t0
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"{name:<18} {status}  {detail}  ({dt:.1f}s)")
    if failures:
        print(f"{failures} suite(s) failed")
        return 3
    print("all suites passed")
    return 0


# --- entry point ----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="magicflow", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a trajectory ensemble")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--theta", type=float, required=True)
    sim.add_argument("--steps", type=int, default=100)
    sim.add_argument("--traj", type=int, default=100)
    sim.add_argument("--initial", choices=("haar", "t", "gue", "zero"), default="haar")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--schedule", default="log:20", metavar="dense|log:K")
    sim.add_argument("--observables", default="nullity,sre2",
                     help="comma list from nullity, sre2, entropy, sre_<alpha>")
    sim.add_argument("--cut", type=int, default=None,
                     help="entropy bipartition size (default n//2)")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", default=None, help="JSON output path (CSV written beside it)")
    sim.add_argument("--plot", default=None, metavar="DIR", help="also render SVG plots")
    sim.set_defaults(func=cmd_simulate)

    model = sub.add_parser("model", help="evaluate the analytic layer")
    model.add_argument("--n", type=int, required=True)
    mode = model.add_mutually_exclusive_group(required=True)
    mode.add_argument("--chain", action="store_true", help="measurement-only decay chain")
    mode.add_argument("--magic-basis", action="store_true", help="full-dial steady-state chain")
    mode.add_argument("--analytic", action="store_true", help="closed-form decay solution")
    mode.add_argument("--asymptotics", action="store_true", help="piecewise decay asymptotics")
    mode.add_argument("--steady", action="store_true", help="steady-state weights")
    model.add_argument("--steps", type=int, default=None)
    model.add_argument("--out", default=None, help="CSV output path")
    model.set_defaults(func=cmd_model)

    rep = sub.add_parser("reproduce", help="run a packaged figure preset")
    rep.add_argument("--fig", choices=FIGURE_IDS, required=True)
    rep.add_argument("--outdir", default=".")
    rep.set_defaults(func=cmd_reproduce)

    selftest = sub.add_parser("selftest", help="run the built-in consistency suites")
    selftest.add_argument("--corrupt", default=None, metavar="SUITE",
                          help="test hook: break the named suite's tolerance")
    selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
