"""Independent oracles used by the test suite.

Everything here is deliberately written from first principles, in a
different style from the package code, so that agreement between the two
routes actually means something.  Slow is fine; these run at small sizes.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm


def brute_force_width(parent_rule, horizon: int) -> int:
    """Literal maximum, over cut times in [1, horizon], of the number of
    rounds whose parent falls at or before the cut while the round itself
    lies strictly after it."""
    best = 0
    for cut in range(1, horizon + 1):
        n = 0
        for s in range(1, horizon + 1):
            if parent_rule(s) <= cut < s:
                n += 1
        best = max(best, n)
    return best


def naive_constant_regret(loss_adversary, actions, comparators):
    """Policy regret by replaying each constant action sequence in full."""
    horizon = len(actions)
    realized = sum(loss_adversary.loss(t, list(actions[:t])) for t in range(1, horizon + 1))
    totals = []
    for y in comparators:
        hist = [y] * horizon
        totals.append(sum(loss_adversary.loss(t, hist) for t in range(1, horizon + 1)))
    return realized - min(totals)


def naive_one_swap_regret(loss_adversary, actions, comparators):
    """Pseudo regret: swap only the current round's action, keep the
    realized prefix, sum per comparator, subtract the best."""
    horizon = len(actions)
    realized = sum(loss_adversary.loss(t, list(actions[:t])) for t in range(1, horizon + 1))
    totals = []
    for y in comparators:
        total = 0.0
        for t in range(1, horizon + 1):
            hist = list(actions[:t])
            hist[t - 1] = y
            total += loss_adversary.loss(t, hist)
        totals.append(total)
    return realized - min(totals)


def replay_state_machine(loss, actions):
    """Re-derive the carry machine's trajectory from scratch.

    Returns a list of (low, carry, immediate, held) tuples, one per round.
    Only the loss object's public values (gap, best_arm, masked_baseline,
    loss) are consulted; no incremental state is shared with the package
    implementation.
    """
    rows = []
    low = False
    carry = 0.0
    for t in range(1, len(actions) + 1):
        played = loss.loss(t, list(actions[:t]))
        if loss.best_arm is None:
            rows.append((False, 0.0, played, 0.0))
            continue
        if low:
            if carry > 0.25 - loss.gap:
                low = False
        else:
            if carry < loss.gap:
                low = True
        immediate = loss.masked_baseline(t, low) - carry
        held = played - immediate
        carry = held
        rows.append((low, carry, immediate, held))
    return rows


def closed_form_censored_kl(mu_p, mu_q, sigma, lower, upper) -> float:
    """Censored-Gaussian KL via Gaussian moment identities.

    Continuous piece: the log ratio is linear in x, so the integral reduces
    to the window mass and the first truncated moment.  Atom pieces use the
    exact tail probabilities.
    """
    if mu_p == mu_q:
        return 0.0

    def window_mass(mu):
        return norm.cdf(upper, mu, sigma) - norm.cdf(lower, mu, sigma)

    def window_first_moment(mu):
        # integral of x * pdf over the window
        z = window_mass(mu)
        return mu * z + sigma ** 2 * (norm.pdf(lower, mu, sigma) - norm.pdf(upper, mu, sigma))

    zp = window_mass(mu_p)
    cont = (mu_p - mu_q) / (2 * sigma ** 2) * (
        2 * window_first_moment(mu_p) - (mu_p + mu_q) * zp
    )
    return cont + _atom_terms(mu_p, mu_q, sigma, lower, upper)


def _atom_terms(mu_p, mu_q, sigma, lower, upper) -> float:
    # log-space: the atoms underflow to double-precision zero long before
    # they are mathematically zero
    total = 0.0
    for p_log, q_log in (
        (norm.logcdf(lower, mu_p, sigma), norm.logcdf(lower, mu_q, sigma)),
        (norm.logsf(upper, mu_p, sigma), norm.logsf(upper, mu_q, sigma)),
    ):
        if p_log == -math.inf:
            continue
        if q_log == -math.inf:
            return math.inf
        total += math.exp(p_log) * (p_log - q_log)
    return total


def simpson_censored_kl(mu_p, mu_q, sigma, lower, upper, n=8193) -> float:
    """Censored-Gaussian KL with the continuous piece on a Simpson grid."""
    xs = np.linspace(lower, upper, n)
    p = norm.pdf(xs, mu_p, sigma)
    q = norm.pdf(xs, mu_q, sigma)
    ratio = ((xs - mu_q) ** 2 - (xs - mu_p) ** 2) / (2 * sigma ** 2)
    integrand = p * ratio
    h = (upper - lower) / (n - 1)
    weights = np.ones(n)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    total = float(h / 3 * np.dot(weights, integrand))
    return total + _atom_terms(mu_p, mu_q, sigma, lower, upper)


def exhaustive_action_sequences(horizon: int, arm_count: int = 2):
    """Yield every deterministic action sequence of the given length."""
    for code in range(arm_count ** horizon):
        seq, c = [], code
        for _ in range(horizon):
            seq.append(c % arm_count)
            c //= arm_count
        yield seq


def observed_stream(transcript):
    return list(transcript.observed)
