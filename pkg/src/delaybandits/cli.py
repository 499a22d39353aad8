"""Command-line front end: seeded experiment runs, sweeps, verification
suites, and scaling analysis.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.

Result CSVs are UTF-8 with a header row, '.' decimal separator, LF line
endings, and columns
seed,T,K,d,m,tau,learner,adversary,policy_regret,pseudo_regret,
realized_total,switch_count,wall_time_ms in that order, sorted by
(T, seed).  Every run's master seed is derived from (seed base, repetition
index), so growing a sweep never reshuffles existing rows, and
wall_time_ms is the only column that varies between identical invocations.

A config file (flag ``--config``) holds flat ``key=value`` lines using the
long flag names; values given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import adversaries as adv
from . import analysis
from . import core
from . import learners as lrn
from .seeding import LEARNER_STREAM, run_seed, substream

CSV_COLUMNS = (
    "seed", "T", "K", "d", "m", "tau", "learner", "adversary",
    "policy_regret", "pseudo_regret", "realized_total", "switch_count",
    "wall_time_ms",
)

ADVERSARIES = ("constant", "iid", "paritytrap", "gapwalk")
DELAYS = ("none", "parity", "statemachine", "lastslot")
LEARNERS = ("uniform", "exp3", "wrapper-exp3")
SUITES = ("splits", "thm1", "lowerbound", "walk", "kl", "wrapper")

DEFAULT_SWEEP_HORIZONS = tuple(2 ** k for k in range(10, 17))

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# experiment specification


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce a batch of runs."""

    adversary: str = "gapwalk"
    delay: str = "statemachine"
    learner: str = "wrapper-exp3"
    horizons: tuple = (4096,)
    arm_count: int = 2
    delay_span: int = 0     # 0: implied by the delay kind
    memory_bound: int = 0
    batch_size: int = 0     # 0: automatic
    gap: float = 0.0        # 0: default schedule
    sigma: float = 0.0      # 0: default schedule
    repetitions: int = 1
    seed_base: int = 0
    out: str = "results.csv"
    workers: int = 1

    def validate(self) -> None:
        if self.adversary not in ADVERSARIES:
            raise UsageError(f"unknown adversary {self.adversary!r}; choose from {ADVERSARIES}")
        if self.delay not in DELAYS:
            raise UsageError(f"unknown delay {self.delay!r}; choose from {DELAYS}")
        if self.learner not in LEARNERS:
            raise UsageError(f"unknown learner {self.learner!r}; choose from {LEARNERS}")
        if not self.horizons:
            raise UsageError("need at least one horizon (--T)")
        if any(t < 1 for t in self.horizons):
            raise UsageError("horizons must be >= 1")
        if len(set(self.horizons)) != len(self.horizons):
            raise UsageError("horizons must be distinct")
        if self.arm_count < 2:
            raise UsageError("--K must be >= 2")
        if self.repetitions < 1:
            raise UsageError("--seeds must be >= 1")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if self.batch_size < 0 or self.delay_span < 0 or self.memory_bound < 0:
            raise UsageError("--tau, --d and --m must be >= 0")
        if self.gap < 0 or self.gap > 0.125:
            raise UsageError("--epsilon must lie in [0, 1/8] (0 = automatic)")
        if self.sigma < 0:
            raise UsageError("--sigma must be >= 0 (0 = automatic)")
        if self.adversary == "paritytrap" and self.arm_count != 2:
            raise UsageError("the parity trap is two-armed; use --K 2")
        if self.delay == "statemachine" and self.adversary != "gapwalk":
            raise UsageError("--delay statemachine requires --adversary gapwalk")
        if self.delay == "parity" and self.adversary != "paritytrap":
            raise UsageError("--delay parity requires --adversary paritytrap")
        if self.adversary == "gapwalk" and (self.gap == 0.0 or self.sigma == 0.0):
            if any(t < 3 for t in self.horizons):
                raise UsageError("gapwalk default schedules need T >= 3")


def _build_run(spec: ExperimentSpec, horizon: int, master_seed: int):
    """Instantiate (config, learner, loss, delay, tau) for one run."""
    k = spec.arm_count
    if spec.adversary == "constant":
        loss = adv.ConstantLoss(0.5)
    elif spec.adversary == "iid":
        loss = adv.TableLoss.from_seed(k, horizon, master_seed)
    elif spec.adversary == "paritytrap":
        loss = adv.ParityTrapLoss.from_seed(master_seed)
    else:
        gap, sigma = spec.gap, spec.sigma
        if gap == 0.0 or sigma == 0.0:
            auto_gap, auto_sigma = adv.gap_walk_defaults(k, horizon)
            gap = gap or auto_gap
            sigma = sigma or auto_sigma
        loss = adv.GapWalkLoss.from_seed(k, horizon, gap, sigma, master_seed)

    if spec.delay == "none":
        delay = adv.NoDelay()
    elif spec.delay == "parity":
        delay = adv.ParityDelay()
    elif spec.delay == "statemachine":
        delay = adv.DelayStateMachine(loss)
    else:
        delay = adv.LastSlotDelay(spec.delay_span if spec.delay_span >= 2 else 2)

    rng = substream(master_seed, LEARNER_STREAM)
    if spec.learner == "uniform":
        tau = 1
        learner = lrn.UniformRandomLearner(k, rng)
    elif spec.learner == "exp3":
        tau = 1
        learner = lrn.Exp3Learner(k, horizon, rng)
    else:
        tau = spec.batch_size or lrn.choose_tau(horizon, k, 0, spec.memory_bound)
        inner = lrn.Exp3Learner(k, max(horizon // tau, 1), rng)
        learner = lrn.MiniBatchWrapper(inner, tau, horizon)

    config = core.GameConfig(
        horizon=horizon,
        action_space=core.Discrete(k),
        delay_span=delay.delay_span,
        memory_bound=spec.memory_bound,
        master_seed=master_seed,
    )
    return config, learner, loss, delay, tau


def _count_switches(actions) -> int:
    prev = actions[0]
    n = 0
    for a in actions[1:]:
        if a != prev:
            n += 1
            prev = a
    return n


def run_one(spec: ExperimentSpec, horizon: int, repetition: int) -> dict:
    """Execute one seeded run and return its result row."""
    master = run_seed(spec.seed_base, repetition)
    config, learner, loss, delay, tau = _build_run(spec, horizon, master)
    t0 = time.perf_counter()
    transcript = core.run_game(config, learner, loss, delay)
    report = core.policy_regret(transcript, loss)
    wall_ms = (time.perf_counter() - t0) * 1e3
    return {
        "seed": master,
        "T": horizon,
        "K": spec.arm_count,
        "d": config.delay_span,
        "m": spec.memory_bound,
        "tau": tau,
        "learner": spec.learner,
        "adversary": f"{spec.adversary}+{spec.delay}",
        "policy_regret": report.policy_regret,
        "pseudo_regret": report.pseudo_regret,
        "realized_total": report.realized_total,
        "switch_count": _count_switches(transcript.actions),
        "wall_time_ms": wall_ms,
    }


def _run_one_star(job) -> dict:
    spec, horizon, repetition = job
    return run_one(spec, horizon, repetition)


def execute_spec(spec: ExperimentSpec) -> list:
    """All runs of a spec, sorted by (T, seed); parallel when asked."""
    jobs = [(spec, t, r) for t in spec.horizons for r in range(spec.repetitions)]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_run_one_star, jobs, chunksize=1))
    else:
        rows = [_run_one_star(j) for j in jobs]
    rows.sort(key=lambda r: (r["T"], r["seed"]))
    return rows


def write_rows(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in CSV_COLUMNS])


def _format_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def read_rows(path: str) -> list:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# verification suites


def _check(lines, ok: bool, label: str) -> bool:
    lines.append(f"[{'pass' if ok else 'FAIL'}] {label}")
    return ok


def _suite_splits() -> tuple:
    """Split validity and buffer conservation on randomized runs."""
    lines, ok = [], True
    horizon = 512
    for d in (1, 2, 4):
        spec_seed = 1000 + d
        loss = adv.TableLoss.from_seed(3, horizon, spec_seed)
        delay = adv.SeededSplitDelay(d, horizon, spec_seed)
        config = core.GameConfig(horizon, core.Discrete(3), d, 0, spec_seed)
        learner = lrn.UniformRandomLearner(3, substream(spec_seed, LEARNER_STREAM))
        tr = core.run_game(config, learner, loss, delay)
        recon_ok = True
        for t in range(1, horizon + 1):
            due = math.fsum(
                tr.splits[t - 1 - s].components[s]
                for s in range(d)
                if t - s >= 1
            )
            if abs(due - tr.observed[t - 1]) > 1e-9:
                recon_ok = False
                break
        ok &= _check(lines, recon_ok, f"d={d}: observed losses reconstruct from scheduled components")
        gap = math.fsum(tr.true_losses) - math.fsum(tr.observed)
        ok &= _check(lines, -1e-9 <= gap <= d - 1 + 1e-9,
                     f"d={d}: unobserved mass {gap:.6f} within [0, {d - 1}]")
    bad = core.LossSplit(1, (0.4, 0.4), 0.5)
    try:
        core.validate_split(bad, 2)
        ok &= _check(lines, False, "overfull split rejected")
    except core.SplitError:
        ok &= _check(lines, True, "overfull split rejected")
    return ok, lines


def _forced_observation_ok(transcript) -> bool:
    for t, obs in enumerate(transcript.observed, start=1):
        if obs != (0.0 if t & 1 else 1.0):
            return False
    return True


def _suite_parity_trap() -> tuple:
    """The parity trap leaks nothing: observations are forced."""
    lines, ok = [], True
    horizon = 10_000
    for best in (0, 1):
        loss = adv.ParityTrapLoss(best)
        forced = True
        for rep in range(100):
            seed = run_seed(77, rep)
            config = core.GameConfig(horizon, core.Discrete(2), 2, 1, seed)
            learner = lrn.UniformRandomLearner(2, substream(seed, LEARNER_STREAM))
            tr = core.run_game(config, learner, loss, adv.ParityDelay())
            if not _forced_observation_ok(tr):
                forced = False
                break
        ok &= _check(lines, forced,
                     f"hidden arm {best}: 100 random policies observe 0,1,0,1,... at T={horizon}")
    t_small = 8
    exhaustive = True
    for best in (0, 1):
        loss = adv.ParityTrapLoss(best)
        for code in range(2 ** t_small):
            actions = [(code >> i) & 1 for i in range(t_small)]
            config = core.GameConfig(t_small, core.Discrete(2), 2, 1, 0)
            tr = core.run_game(config, lrn.ScriptedLearner(actions), loss, adv.ParityDelay())
            if not _forced_observation_ok(tr):
                exhaustive = False
    ok &= _check(lines, exhaustive,
                 f"all {2 ** t_small} deterministic action sequences at T={t_small} observe the same stream")
    return ok, lines


def _suite_lowerbound() -> tuple:
    """Carry, masking, and switch-budget invariants of the walk adversary."""
    lines, ok = [], True
    horizon = 2 ** 14
    k = 2
    gap, sigma = adv.gap_walk_defaults(k, horizon)
    carries_ok = masked_ok = switches_ok = True
    saw_hidden = saw_none = False
    for rep in range(10):
        master = run_seed(31, rep)
        loss = adv.GapWalkLoss.from_seed(k, horizon, gap, sigma, master)
        delay = adv.DelayStateMachine(loss)
        config = core.GameConfig(horizon, core.Discrete(k), 2, 0, master)
        learner = lrn.UniformRandomLearner(k, substream(master, LEARNER_STREAM))
        tr = core.run_game(config, learner, loss, delay)
        for t, (step, obs) in enumerate(zip(tr.delay_diagnostics, tr.observed), start=1):
            if not 0.0 <= step.carry <= 0.25 + 1e-12:
                carries_ok = False
            if abs(obs - loss.masked_baseline(t, step.low)) > 1e-12:
                masked_ok = False
        if loss.best_arm is None:
            saw_none = True
            if delay.switch_count != 0:
                switches_ok = False
        else:
            saw_hidden = True
            pulls = sum(1 for a in tr.actions if a == loss.best_arm)
            if delay.switch_count > adv.switch_bound(gap, pulls):
                switches_ok = False
    ok &= _check(lines, carries_ok, "carry stays within [0, 1/4]")
    ok &= _check(lines, masked_ok, "observed loss equals the masked walk baseline, every round")
    ok &= _check(lines, switches_ok and saw_hidden and saw_none,
                 "switch counts within budget (hidden arm) and zero (no hidden arm)")
    return ok, lines


def _brute_force_width(rule, horizon: int) -> int:
    best = 0
    for t in range(1, horizon + 1):
        cut = sum(1 for s in range(1, horizon + 1) if rule(s) <= t < s)
        best = max(best, cut)
    return best


def _suite_walk() -> tuple:
    """Width and drift certificates for the multi-scale walk."""
    lines, ok = [], True
    enum_ok = all(
        adv.width(adv.MULTISCALE, t) == _brute_force_width(adv.walk_parent, t)
        for t in range(1, 65)
    )
    ok &= _check(lines, enum_ok, "width matches exhaustive enumeration for T <= 64")
    bound_ok = all(
        adv.width(adv.MULTISCALE, 2 ** p) <= p + 1 for p in range(4, 17)
    )
    ok &= _check(lines, bound_ok, "width <= floor(log2 T) + 1 for T = 2^4 .. 2^16")
    horizon, sigma, delta = 2 ** 12, 0.05, 0.1
    walks = adv.walk_value_matrix(sigma, horizon, 1000, master_seed=99)
    thr = adv.drift_threshold(sigma, horizon, delta)
    frac = float((np.abs(walks[:, 1:]).max(axis=1) > thr).mean())
    ok &= _check(lines, frac <= delta + 0.03,
                 f"drift threshold exceeded by {frac:.3f} of 1000 walks (budget {delta + 0.03:.2f})")
    return ok, lines


def _suite_kl() -> tuple:
    """Censored-KL bound sweep and wide-window agreement."""
    lines, ok = [], True
    mus = (0.6, 0.7, 0.8, 0.9)
    sigmas = (0.01, 0.05, 0.1, 0.5)
    bound_ok, combos = True, 0
    for mp in mus:
        for mq in mus:
            for s in sigmas:
                p = analysis.CensoredGaussian(mp, s)
                q = analysis.CensoredGaussian(mq, s)
                if analysis.censored_kl(p, q) > analysis.gaussian_kl(mp, mq, s) + 1e-9:
                    bound_ok = False
                combos += 1
    ok &= _check(lines, bound_ok, f"censored KL <= Gaussian KL across {combos} combinations")
    s = 0.02
    mp, mq = 0.6, 0.64
    wide = 10 * s
    p = analysis.CensoredGaussian(mp, s, mp - wide, mp + wide)
    q = analysis.CensoredGaussian(mq, s, mp - wide, mp + wide)
    err = abs(analysis.censored_kl(p, q) - analysis.gaussian_kl(mp, mq, s))
    ok &= _check(lines, err < 1e-6, f"window at +-10 sigma reproduces Gaussian KL (err {err:.2e})")
    mass_err = abs(analysis.CensoredGaussian(0.7, 0.05).total_mass() - 1.0)
    ok &= _check(lines, mass_err < 1e-9, f"censored measure has unit mass (err {mass_err:.2e})")
    return ok, lines


def _suite_wrapper() -> tuple:
    """Wrapper reduction identity and batch accounting."""
    lines, ok = [], True
    horizon, k = 2048, 3
    master = run_seed(13, 0)
    loss = adv.TableLoss.from_seed(k, horizon, master)
    config = core.GameConfig(horizon, core.Discrete(k), 1, 0, master)
    raw = core.run_game(
        config, lrn.Exp3Learner(k, horizon, substream(master, LEARNER_STREAM)),
        loss, adv.NoDelay(),
    )
    wrapped = core.run_game(
        config,
        lrn.MiniBatchWrapper(
            lrn.Exp3Learner(k, horizon, substream(master, LEARNER_STREAM)), 1, horizon
        ),
        loss, adv.NoDelay(),
    )
    ok &= _check(lines, raw.actions == wrapped.actions and raw.observed == wrapped.observed,
                 "batch size 1 wrapper reproduces the raw learner exactly")
    audits_ok = True
    for d, tau in ((2, 8), (4, 8), (3, 16)):
        seed = run_seed(13, d * 100 + tau)
        loss = adv.TableLoss.from_seed(k, horizon, seed)
        delay = adv.LastSlotDelay(d)
        config = core.GameConfig(horizon, core.Discrete(k), d, 0, seed)
        inner = lrn.Exp3Learner(k, horizon // tau, substream(seed, LEARNER_STREAM))
        tr = core.run_game(config, lrn.MiniBatchWrapper(inner, tau, horizon), loss, delay)
        if not analysis.audit_delay_accounting(tr, tau).passed:
            audits_ok = False
    ok &= _check(lines, audits_ok, "batch accounting holds under worst-case full delay")
    ok &= _check(lines, lrn.choose_tau(10 ** 6, 8) == 50 and lrn.choose_tau(8, 8, 5) == 6,
                 "automatic batch size honors its floors")
    return ok, lines


_SUITE_FUNCS = {
    "splits": _suite_splits,
    "thm1": _suite_parity_trap,
    "lowerbound": _suite_lowerbound,
    "walk": _suite_walk,
    "kl": _suite_kl,
    "wrapper": _suite_wrapper,
}


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    spec = _spec_from_args(args)
    if len(spec.horizons) != 1:
        raise UsageError("run takes exactly one --T; use sweep for grids")
    rows = execute_spec(spec)
    write_rows(spec.out, rows)
    print(f"wrote {len(rows)} rows to {spec.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec_from_args(args, sweep=True)
    rows = execute_spec(spec)
    write_rows(spec.out, rows)
    print(f"wrote {len(rows)} rows to {spec.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.suite or list(SUITES)
    for name in names:
        if name not in _SUITE_FUNCS:
            raise UsageError(f"unknown suite {name!r}; choose from {SUITES}")
    all_ok = True
    for name in names:
        ok, lines = _SUITE_FUNCS[name]()
        all_ok &= ok
        print(f"suite {name}: {'ok' if ok else 'FAILED'}")
        for line in lines:
            print(f"  {line}")
    return EXIT_OK if all_ok else EXIT_VERIFY


def cmd_analyze(args) -> int:
    rows = read_rows(args.csv)
    if not rows:
        raise UsageError(f"no data rows in {args.csv}")
    metric = args.metric
    for needed in ("T", metric):
        if needed not in rows[0]:
            raise UsageError(f"column {needed!r} missing from {args.csv}")
    groups: dict = {}
    for row in rows:
        groups.setdefault(int(row["T"]), []).append(float(row[metric]))
    points = [(t, float(np.mean(vs))) for t, vs in sorted(groups.items())]
    try:
        fit = analysis.fit_exponent(points)
    except ValueError as e:
        raise UsageError(str(e))
    payload = {
        "metric": metric,
        "alpha": fit.exponent,
        "multiplier": fit.multiplier,
        "r_squared": fit.r_squared,
        "points": [[t, v] for t, v in fit.points],
    }
    if args.bootstrap > 0:
        rng = np.random.default_rng(0)
        alphas = []
        for _ in range(args.bootstrap):
            resampled = []
            for t, vs in sorted(groups.items()):
                picks = rng.integers(0, len(vs), size=len(vs))
                resampled.append((t, float(np.mean([vs[i] for i in picks]))))
            try:
                alphas.append(analysis.fit_exponent(resampled).exponent)
            except ValueError:
                continue  # a resample can be all-zero; skip it
        if alphas:
            payload["alpha_ci_90"] = [
                float(np.percentile(alphas, 5)),
                float(np.percentile(alphas, 95)),
            ]
    print(json.dumps(payload))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_run_flags(p) -> None:
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--adversary", default=None, choices=ADVERSARIES)
    p.add_argument("--delay", default=None, choices=DELAYS)
    p.add_argument("--learner", default=None, choices=LEARNERS)
    p.add_argument("--T", type=int, action="append", default=None,
                   help="horizon; repeatable")
    p.add_argument("--K", type=int, default=None, help="number of arms")
    p.add_argument("--d", type=int, default=None, help="delay span (0 = implied)")
    p.add_argument("--m", type=int, default=None, help="loss memory bound")
    p.add_argument("--tau", type=int, default=None, help="batch size (0 = automatic)")
    p.add_argument("--epsilon", type=float, default=None, help="hidden-arm gap (0 = automatic)")
    p.add_argument("--sigma", type=float, default=None, help="walk noise scale (0 = automatic)")
    p.add_argument("--seeds", type=int, default=None, help="repetitions per horizon")
    p.add_argument("--seed-base", type=int, default=None, dest="seed_base")
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--workers", type=int, default=None)


_CONFIG_KEYS = {
    "adversary": str, "delay": str, "learner": str, "T": str, "K": int,
    "d": int, "m": int, "tau": int, "epsilon": float, "sigma": float,
    "seeds": int, "seed-base": int, "seed_base": int, "out": str,
    "workers": int,
}


def _load_config(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[key.replace("-", "_")] = _CONFIG_KEYS[key](value)
    return values


def _spec_from_args(args, sweep: bool = False) -> ExperimentSpec:
    cfg = _load_config(args.config) if args.config else {}

    def pick(flag, key, default):
        if flag is not None:
            return flag
        if key in cfg:
            return cfg[key]
        return default

    horizons = args.T
    if horizons is None and "T" in cfg:
        horizons = [int(x) for x in str(cfg["T"]).split(",") if x.strip()]
    if horizons is None:
        horizons = list(DEFAULT_SWEEP_HORIZONS) if sweep else [4096]

    spec = ExperimentSpec(
        adversary=pick(args.adversary, "adversary", "gapwalk"),
        delay=pick(args.delay, "delay", "statemachine"),
        learner=pick(args.learner, "learner", "wrapper-exp3"),
        horizons=tuple(horizons),
        arm_count=pick(args.K, "K", 2),
        delay_span=pick(args.d, "d", 0),
        memory_bound=pick(args.m, "m", 0),
        batch_size=pick(args.tau, "tau", 0),
        gap=pick(args.epsilon, "epsilon", 0.0),
        sigma=pick(args.sigma, "sigma", 0.0),
        repetitions=pick(args.seeds, "seeds", 50 if sweep else 1),
        seed_base=pick(args.seed_base, "seed_base", 0),
        out=pick(args.out, "out", "results.csv"),
        workers=pick(args.workers, "workers", 1),
    )
    spec.validate()
    return spec


def build_parser() -> _Parser:
    parser = _Parser(prog="delaybandits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run one horizon and write a result CSV")
    _add_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a horizon grid and write a result CSV")
    _add_run_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run verification suites")
    p_verify.add_argument("suite", nargs="*",
                          help=f"suites to run; default all of {SUITES}")
    p_verify.set_defaults(func=cmd_verify)

    p_an = sub.add_parser("analyze", help="fit a scaling exponent to a result CSV")
    p_an.add_argument("csv", help="result CSV produced by run or sweep")
    p_an.add_argument("--metric", default="policy_regret")
    p_an.add_argument("--bootstrap", type=int, default=0,
                      help="bootstrap resamples for a confidence interval")
    p_an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
