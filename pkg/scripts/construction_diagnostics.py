#!/usr/bin/env python3
"""Inspect the lower-bound construction on a single seed.

Prints three diagnostic blocks:

  walk      parent-rule widths at powers of two, the drift threshold,
            and the realized walk range
  machine   one full game against the state-machine delay: switch count
            vs the analytic budget, carry range, masked-baseline residual
  info      per-round censored-Gaussian KL between the two observation
            bands and the resulting total-variation budget

Useful when retuning gap/sigma or auditing a suspicious sweep row.
"""

import argparse
import sys

import numpy as np

from delaybandits import (
    CensoredGaussian,
    DelayStateMachine,
    Discrete,
    GameConfig,
    GapWalkLoss,
    MultiScaleWalk,
    UniformRandomLearner,
    censored_kl,
    drift_threshold,
    gap_walk_defaults,
    observation_tv_bound,
    pinsker_tv,
    run_game,
    switch_bound,
    walk_parent,
    width,
)
from delaybandits.seeding import LEARNER_STREAM, substream


def walk_block(args):
    print("== walk ==")
    print(f"  {'T':>8}  {'width':>5}  {'log2(T)+1':>9}")
    for p in range(0, args.log2_T + 1, 2):
        t = 2 ** p
        print(f"  {t:>8}  {width(walk_parent, t):>5}  {p + 1:>9}")
    T = 2 ** args.log2_T
    gap, sigma = gap_walk_defaults(args.K, T)
    thr = drift_threshold(sigma, T, args.delta)
    walk = MultiScaleWalk(sigma, T, master_seed=args.seed)
    values = walk.values()
    print(f"  sigma={sigma:.6f}  drift threshold(delta={args.delta})={thr:.4f}")
    print(f"  realized range [{values.min():+.4f}, {values.max():+.4f}]"
          f"  max|W|={np.abs(values).max():.4f}")


def machine_block(args):
    print("== machine ==")
    T = 2 ** args.log2_T
    gap, sigma = gap_walk_defaults(args.K, T)
    loss = GapWalkLoss.from_seed(args.K, T, gap, sigma, args.seed)
    machine = DelayStateMachine(loss)
    learner = UniformRandomLearner(args.K, substream(args.seed, LEARNER_STREAM))
    config = GameConfig(horizon=T, action_space=Discrete(args.K),
                        delay_span=2, master_seed=args.seed)
    tr = run_game(config, learner, loss, machine)

    lows = [step.low for step in tr.delay_diagnostics]
    carries = [step.carry for step in tr.delay_diagnostics]
    switches = sum(1 for a, b in zip(lows, lows[1:]) if a != b)
    if lows and lows[0]:
        switches += 1  # the start counts as leaving the high state
    print(f"  T={T}  gap={gap:.3e}  hidden arm={loss.best_arm}")
    if loss.best_arm is None:
        print(f"  switches={switches} (no hidden arm: must be 0)")
    else:
        pulls = sum(1 for a in tr.actions if a == loss.best_arm)
        bound = switch_bound(gap, pulls)
        print(f"  hidden-arm pulls={pulls}")
        print(f"  switches={switches}  budget={bound:.2f}")
    print(f"  carry range [{min(carries):.6f}, {max(carries):.6f}] (cap 0.25)")
    resid = max(
        abs(obs - loss.masked_baseline(t, low))
        for t, (obs, low) in enumerate(zip(tr.observed, lows), start=1)
    )
    print(f"  max |observed - masked baseline| = {resid:.3e}")


def info_block(args):
    print("== info ==")
    T = 2 ** args.log2_T
    gap, sigma = gap_walk_defaults(args.K, T)
    # both observation bands sit near 3/4, one shifted down by the gap
    p = CensoredGaussian(0.75, sigma)
    q = CensoredGaussian(0.75 - gap, sigma)
    kl = censored_kl(p, q)
    print(f"  per-round censored KL = {kl:.3e}  (gaussian (gap/sigma)^2/2 "
          f"= {(gap / sigma) ** 2 / 2:.3e})")
    print(f"  per-round Pinsker TV  = {pinsker_tv(kl):.3e}")
    w = width(walk_parent, T)
    tv = observation_tv_bound(gap, sigma, w, T / args.K)
    print(f"  stream TV budget at uniform play (width={w}) = {tv:.4f}")
    eps_T = switch_bound(gap, T / args.K)
    print(f"  switch budget at uniform play = {eps_T:.2f}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--log2-T", type=int, default=12, dest="log2_T")
    ap.add_argument("--K", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--delta", type=float, default=0.1,
                    help="drift threshold tail probability")
    args = ap.parse_args(argv)
    if args.log2_T < 2:
        ap.error("--log2-T must be >= 2")

    walk_block(args)
    machine_block(args)
    info_block(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
