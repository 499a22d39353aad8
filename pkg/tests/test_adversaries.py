"""Loss and delay constructions: dyadic walk, masking machine, parity trap."""

import math
from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import util
from delaybandits import adversaries as adv
from delaybandits import core
from delaybandits import learners as lrn
from delaybandits.seeding import LEARNER_STREAM, run_seed, substream


# ---------------------------------------------------------------------------
# parent rule and width


def test_parent_rule_values():
    assert adv.walk_parent(1) == 0
    assert adv.walk_parent(2) == 0
    assert adv.walk_parent(3) == 2
    assert adv.walk_parent(4) == 0
    assert adv.walk_parent(12) == 8
    assert adv.walk_parent(2 ** 20) == 0


def test_dyadic_valuation():
    assert [adv.dyadic_valuation(t) for t in range(1, 9)] == [0, 1, 0, 2, 0, 1, 0, 3]


@given(st.integers(min_value=1, max_value=2 ** 20))
def test_parent_is_proper_and_chains_to_zero(t):
    p = adv.walk_parent(t)
    assert 0 <= p < t
    hops = 0
    while t:
        t = adv.walk_parent(t)
        hops += 1
        assert hops <= 21  # at most bit_length steps


def test_width_frozen_values():
    assert adv.width(adv.MULTISCALE, 1) == 0
    assert adv.width(adv.MULTISCALE, 8) == 3


def test_width_matches_brute_force():
    for horizon in range(1, 65):
        assert adv.width(adv.MULTISCALE, horizon) == util.brute_force_width(
            adv.walk_parent, horizon
        )


def test_width_log_bound():
    for p in range(0, 13):
        horizon = 2 ** p
        assert adv.width(adv.MULTISCALE, horizon) <= p + 1


def test_width_accepts_plain_callables():
    assert adv.width(lambda s: s - 1, 10) == 1  # chain rule: one round in flight


def test_width_rejects_improper_rules():
    with pytest.raises(ValueError):
        adv.width(lambda s: s, 4)
    with pytest.raises(ValueError):
        adv.width(lambda s: -1, 4)


# ---------------------------------------------------------------------------
# the walk


def test_walk_recurrence_with_explicit_increments():
    xi = [0.5, -0.25, 1.0, 2.0, -0.125, 0.0, 3.0, -1.0]
    w = adv.MultiScaleWalk(1.0, 8, increments=xi)
    assert w.value(0) == 0.0
    assert w.value(1) == 0.5            # parent 0
    assert w.value(2) == -0.25          # parent 0
    assert w.value(3) == -0.25 + 1.0    # parent 2
    assert w.value(4) == 2.0            # parent 0
    assert w.value(5) == 2.0 + -0.125   # parent 4
    assert w.value(6) == 2.0 + 0.0      # parent 4
    assert w.value(7) == 2.0 + 0.0 + 3.0  # parent 6
    assert w.value(8) == -1.0           # parent 0


def test_walk_query_order_is_irrelevant():
    a = adv.MultiScaleWalk(0.3, 100, master_seed=42)
    b = adv.MultiScaleWalk(0.3, 100, master_seed=42)
    mid = a.value(57)
    assert b.values()[57] == mid
    assert a.value(57) == mid  # memoized re-query
    assert np.array_equal(a.values(), b.values())


def test_walk_values_are_read_only():
    w = adv.MultiScaleWalk(0.1, 10, master_seed=1)
    with pytest.raises(ValueError):
        w.values()[3] = 99.0


def test_walk_rejects_bad_args():
    with pytest.raises(ValueError):
        adv.MultiScaleWalk(-0.1, 10)
    with pytest.raises(ValueError):
        adv.MultiScaleWalk(0.1, 0)
    with pytest.raises(ValueError):
        adv.MultiScaleWalk(0.1, 4, increments=[0.0, 0.0])
    w = adv.MultiScaleWalk(0.1, 4, master_seed=0)
    with pytest.raises(ValueError):
        w.value(5)
    with pytest.raises(ValueError):
        w.increment(0)


def test_walk_matrix_rows_follow_recurrence():
    m = adv.walk_value_matrix(0.2, 32, 8, master_seed=7)
    assert m.shape == (8, 33)
    assert np.all(m[:, 0] == 0.0)
    # recompute row-wise from the same stream the function uses
    raw = substream(7, 2).normal(0.0, 0.2, (8, 32))
    for t in range(1, 33):
        assert np.allclose(m[:, t], m[:, t - (t & -t)] + raw[:, t - 1], atol=0)


def test_drift_threshold_formula_and_validation():
    got = adv.drift_threshold(0.05, 1024, 0.1)
    want = 0.05 * math.sqrt(2 * (math.log(1024) + 1) * math.log(1024 / 0.1))
    assert got == pytest.approx(want, rel=1e-15)
    for bad in [(0, 10, 0.1), (0.1, 0, 0.1), (0.1, 10, 0.0), (0.1, 10, 1.0)]:
        with pytest.raises(ValueError):
            adv.drift_threshold(*bad)


def test_drift_exceedance_small_monte_carlo():
    horizon, sigma, delta = 1024, 0.05, 0.1
    walks = adv.walk_value_matrix(sigma, horizon, 500, master_seed=11)
    thr = adv.drift_threshold(sigma, horizon, delta)
    frac = float((np.abs(walks[:, 1:]).max(axis=1) > thr).mean())
    assert frac <= delta + 0.03


# ---------------------------------------------------------------------------
# defaults


def _decimal_defaults(arm_count, horizon):
    # 50-digit arithmetic; cube roots via exp(ln(x) / 3)
    getcontext().prec = 50
    k, t = Decimal(arm_count), Decimal(horizon)
    ln_t = t.ln()
    gap = (k.ln() / 3).exp() / (64 * ln_t * (ln_t / 3).exp())
    sigma = 1 / (16 * Decimal(2).sqrt() * ln_t)
    return min(Decimal(1) / 8, gap), sigma


def test_gap_walk_defaults_match_high_precision_oracle():
    for k, t in [(2, 100), (2, 2 ** 16), (8, 10 ** 6), (5, 3)]:
        gap, sigma = adv.gap_walk_defaults(k, t)
        dgap, dsigma = _decimal_defaults(k, t)
        assert gap == pytest.approx(float(dgap), rel=1e-12)
        assert sigma == pytest.approx(float(dsigma), rel=1e-12)
        assert 0 < gap <= 0.125


def test_gap_walk_defaults_validation():
    with pytest.raises(ValueError):
        adv.gap_walk_defaults(1, 100)
    with pytest.raises(ValueError):
        adv.gap_walk_defaults(2, 2)


# ---------------------------------------------------------------------------
# gap walk loss


def zero_walk(horizon):
    return adv.MultiScaleWalk(0.0, horizon, increments=[0.0] * horizon)


def test_gap_walk_loss_hand_values():
    # flat walk, gap 0.1: hidden arm 0.65, every other arm 0.75
    loss = adv.GapWalkLoss(zero_walk(4), 3, best_arm=1, gap=0.1)
    assert loss.arm_loss(2, 1) == pytest.approx(0.65, abs=1e-15)
    assert loss.arm_loss(2, 0) == pytest.approx(0.75, abs=1e-15)
    assert loss.arm_loss(2, 2) == pytest.approx(0.75, abs=1e-15)
    assert loss.loss(2, [0, 1]) == pytest.approx(0.65, abs=1e-15)


def test_gap_walk_loss_truncates_both_ends():
    up = adv.MultiScaleWalk(0.0, 2, increments=[5.0, -5.0])
    loss = adv.GapWalkLoss(up, 2, best_arm=0, gap=0.1)
    assert loss.arm_loss(1, 0) == 1.0 and loss.arm_loss(1, 1) == 1.0
    assert loss.arm_loss(2, 0) == 0.5 and loss.arm_loss(2, 1) == 0.5


def test_gap_walk_loss_no_hidden_arm():
    loss = adv.GapWalkLoss(zero_walk(4), 2, best_arm=None, gap=0.05)
    assert loss.arm_loss(1, 0) == loss.arm_loss(1, 1) == 0.75


def test_gap_walk_loss_validation():
    with pytest.raises(ValueError):
        adv.GapWalkLoss(zero_walk(2), 2, best_arm=2, gap=0.1)
    with pytest.raises(ValueError):
        adv.GapWalkLoss(zero_walk(2), 2, best_arm=0, gap=0.0)
    with pytest.raises(ValueError):
        adv.GapWalkLoss(zero_walk(2), 2, best_arm=0, gap=0.2)


def test_gap_walk_from_seed_covers_all_hidden_arms():
    seen = set()
    for rep in range(200):
        loss = adv.GapWalkLoss.from_seed(2, 8, 0.05, 0.01, run_seed(0, rep))
        seen.add(loss.best_arm)
    assert seen == {None, 0, 1}


def test_switch_bound_values_and_validation():
    assert adv.switch_bound(0.1, 10) == pytest.approx(8 * 0.1 * 10 / (1 - 0.8), rel=1e-15)
    with pytest.raises(ValueError):
        adv.switch_bound(0.125, 10)
    with pytest.raises(ValueError):
        adv.switch_bound(0.05, -1)


# ---------------------------------------------------------------------------
# masking delay machine


def run_masked(loss, actions):
    dsm = adv.DelayStateMachine(loss)
    cfg = core.GameConfig(len(actions), core.Discrete(loss.arm_count), 2, 0, 0)
    tr = core.run_game(cfg, lrn.ScriptedLearner(actions), loss, dsm)
    return tr, dsm


def test_machine_first_round_switches_low_and_counts():
    loss = adv.GapWalkLoss(zero_walk(4), 2, best_arm=0, gap=0.05)
    tr, dsm = run_masked(loss, [1, 0, 0, 0])
    step1 = tr.delay_diagnostics[0]
    assert step1.low is True
    assert dsm.switch_count >= 1
    # played the non-hidden arm: immediate is the low baseline, the extra
    # gap is held over
    assert tr.splits[0].components == pytest.approx((0.70, 0.05), abs=1e-12)
    assert tr.observed[0] == pytest.approx(0.70, abs=1e-12)


def test_machine_worked_example_two_rounds():
    loss = adv.GapWalkLoss(zero_walk(4), 2, best_arm=0, gap=0.05)
    tr, _ = run_masked(loss, [1, 0, 1, 1])
    # round 2 plays the hidden arm in the low state: observed stays at the
    # low baseline and the carry is unchanged
    assert tr.observed[1] == pytest.approx(0.70, abs=1e-12)
    assert tr.delay_diagnostics[1].carry == pytest.approx(0.05, abs=1e-12)


def test_machine_observed_equals_masked_baseline_always():
    for rep in range(15):
        master = run_seed(21, rep)
        loss = adv.GapWalkLoss.from_seed(2, 300, 0.05, 0.02, master)
        learner = lrn.UniformRandomLearner(2, substream(master, LEARNER_STREAM))
        dsm = adv.DelayStateMachine(loss)
        cfg = core.GameConfig(300, core.Discrete(2), 2, 0, master)
        tr = core.run_game(cfg, learner, loss, dsm)
        for t, (step, obs) in enumerate(zip(tr.delay_diagnostics, tr.observed), start=1):
            assert abs(obs - loss.masked_baseline(t, step.low)) <= 1e-12
            assert 0.0 <= step.carry <= 0.25 + 1e-12


def test_machine_matches_replay_oracle():
    for rep in range(15):
        master = run_seed(22, rep)
        loss = adv.GapWalkLoss.from_seed(2, 200, 0.06, 0.03, master)
        learner = lrn.UniformRandomLearner(2, substream(master, LEARNER_STREAM))
        dsm = adv.DelayStateMachine(loss)
        cfg = core.GameConfig(200, core.Discrete(2), 2, 0, master)
        tr = core.run_game(cfg, learner, loss, dsm)
        rows = util.replay_state_machine(loss, tr.actions)
        for (low, carry, imm, held), step, split in zip(
            rows, tr.delay_diagnostics, tr.splits
        ):
            assert low == step.low
            assert carry == pytest.approx(step.carry, abs=1e-15)
            assert split.components == pytest.approx((imm, held), abs=1e-15)


def test_machine_without_hidden_arm_never_moves():
    loss = adv.GapWalkLoss(zero_walk(50), 2, best_arm=None, gap=0.05)
    tr, dsm = run_masked(loss, [0, 1] * 25)
    assert dsm.switch_count == 0
    assert all(not s.low and s.carry == 0.0 for s in tr.delay_diagnostics)
    assert all(sp.components[1] == 0.0 for sp in tr.splits)
    assert tr.observed == tr.true_losses


def test_machine_switch_budget_under_uniform_play():
    for rep in range(10):
        master = run_seed(23, rep)
        loss = adv.GapWalkLoss.from_seed(2, 512, 0.05, 0.01, master)
        if loss.best_arm is None:
            continue
        learner = lrn.UniformRandomLearner(2, substream(master, LEARNER_STREAM))
        dsm = adv.DelayStateMachine(loss)
        cfg = core.GameConfig(512, core.Discrete(2), 2, 0, master)
        tr = core.run_game(cfg, learner, loss, dsm)
        pulls = sum(1 for a in tr.actions if a == loss.best_arm)
        assert dsm.switch_count <= adv.switch_bound(loss.gap, pulls)


def test_machine_starving_policy_freezes_after_two_switches():
    # never pulling the hidden arm: one drop at round 1, one climb once the
    # carry has been funded, then the carry pins just below the exit level
    loss = adv.GapWalkLoss(zero_walk(400), 2, best_arm=0, gap=0.05)
    tr, dsm = run_masked(loss, [1] * 400)
    assert dsm.switch_count == 2
    final = tr.delay_diagnostics[-1]
    assert final.low is False
    assert final.carry == pytest.approx(0.25, abs=0.05)


def test_machine_per_arm_record_optional():
    loss = adv.GapWalkLoss(zero_walk(4), 2, best_arm=0, gap=0.05)
    tr, _ = run_masked(loss, [0, 1, 0, 1])
    assert all(sp.per_arm is None for sp in tr.splits)
    dsm = adv.DelayStateMachine(loss, record_per_arm=True)
    cfg = core.GameConfig(4, core.Discrete(2), 2, 0, 0)
    tr2 = core.run_game(cfg, lrn.ScriptedLearner([0, 1, 0, 1]), loss, dsm)
    for t, sp in enumerate(tr2.splits, start=1):
        assert len(sp.per_arm) == 2
        for arm, (imm, held) in enumerate(sp.per_arm):
            assert imm == pytest.approx(sp.components[0], abs=1e-15)
            assert imm + held == pytest.approx(loss.arm_loss(t, arm), abs=1e-12)


def test_machine_held_components_track_the_carry_bands():
    # low state: the hidden arm's held piece equals the previous carry and
    # the other arm overshoots by at most the gap; mirrored in high state
    T, K = 400, 2
    gap, sigma = adv.gap_walk_defaults(K, T)
    checked = 0
    for rep in range(10):
        seed = run_seed(21, rep)
        loss = adv.GapWalkLoss.from_seed(K, T, gap, sigma, seed)
        if loss.best_arm is None:
            continue
        dsm = adv.DelayStateMachine(loss, record_per_arm=True)
        learner = lrn.UniformRandomLearner(K, substream(seed, LEARNER_STREAM))
        cfg = core.GameConfig(T, core.Discrete(K), 2, 0, seed)
        tr = core.run_game(cfg, learner, loss, dsm)
        prev = 0.0
        z = loss.best_arm
        for sp, step in zip(tr.splits, tr.delay_diagnostics):
            held_z = sp.per_arm[z][1]
            held_other = sp.per_arm[1 - z][1]
            if step.low:
                assert held_z == pytest.approx(prev, abs=1e-12)
                assert prev - 1e-12 <= held_other <= prev + gap + 1e-12
            else:
                assert held_other == pytest.approx(prev, abs=1e-12)
                assert prev - gap - 1e-12 <= held_z <= prev + 1e-12
            prev = step.carry
        checked += 1
    assert checked >= 5


# ---------------------------------------------------------------------------
# parity trap


def test_parity_trap_loss_table():
    loss = adv.ParityTrapLoss(0)
    assert loss.loss(1, [0]) == 0.0
    assert loss.loss(1, [1]) == 1.0
    assert loss.loss(2, [0, 0]) == 1.0
    assert loss.loss(2, [0, 1]) == 1.0  # even rounds ignore the current arm
    assert loss.loss(2, [1, 0]) == 0.0
    assert loss.loss(3, [1, 0, 0]) == 0.0


def test_parity_trap_pairs_always_cost_one():
    loss = adv.ParityTrapLoss(1)
    for seq in util.exhaustive_action_sequences(6):
        total = sum(loss.loss(t, seq) for t in range(1, 7))
        assert total == 3.0


def test_parity_split_and_delay():
    assert adv.parity_split(1, 0.7) == (0.0, 0.7)
    assert adv.parity_split(2, 0.7) == (0.7, 0.0)
    d = adv.ParityDelay()
    assert d.delay_span == 2
    sp = d.split(3, [0, 0, 0], 1.0)
    assert sp.components == (0.0, 1.0)


def test_parity_trap_from_seed_covers_both_arms():
    seen = {adv.ParityTrapLoss.from_seed(run_seed(1, rep)).best_arm for rep in range(50)}
    assert seen == {0, 1}


def test_parity_trap_rejects_other_arms():
    with pytest.raises(ValueError):
        adv.ParityTrapLoss(2)


# ---------------------------------------------------------------------------
# utility adversaries


def test_table_loss_reads_cells_and_reproduces():
    a = adv.TableLoss.from_seed(3, 20, 123)
    b = adv.TableLoss.from_seed(3, 20, 123)
    assert np.array_equal(a.table, b.table)
    assert a.loss(5, [0, 0, 0, 0, 2]) == a.table[4][2]


def test_lagged_loss_values():
    loss = adv.LaggedLoss(lag=2)
    assert loss.loss(1, [0]) == 0.5
    assert loss.loss(2, [0, 1]) == 0.5
    assert loss.loss(3, [0, 1, 1]) == 0.25
    assert loss.loss(3, [1, 0, 0]) == 0.75


def test_no_delay_is_identity():
    seed = run_seed(6, 0)
    loss = adv.TableLoss.from_seed(2, 50, seed)
    cfg = core.GameConfig(50, core.Discrete(2), 1, 0, seed)
    tr = core.run_game(
        cfg, lrn.UniformRandomLearner(2, substream(seed, LEARNER_STREAM)), loss, adv.NoDelay()
    )
    assert tr.observed == tr.true_losses


@pytest.mark.parametrize("d", [2, 3, 6])
def test_last_slot_delay_shifts_by_full_span(d):
    seed = run_seed(7, d)
    loss = adv.TableLoss.from_seed(2, 40, seed)
    cfg = core.GameConfig(40, core.Discrete(2), d, 0, seed)
    tr = core.run_game(
        cfg, lrn.UniformRandomLearner(2, substream(seed, LEARNER_STREAM)),
        loss, adv.LastSlotDelay(d),
    )
    for t in range(1, 41):
        want = tr.true_losses[t - d] if t >= d else 0.0
        assert tr.observed[t - 1] == pytest.approx(want, abs=1e-12)


def test_last_slot_delay_needs_real_span():
    with pytest.raises(ValueError):
        adv.LastSlotDelay(1)


def test_seeded_split_delay_rows_are_valid_and_reproducible():
    a = adv.SeededSplitDelay(4, 30, master_seed=5)
    b = adv.SeededSplitDelay(4, 30, master_seed=5)
    for t in range(1, 31):
        sp = a.split(t, [0] * t, 0.8)
        assert len(sp.components) == 4
        assert all(c > 0 for c in sp.components)
        assert math.fsum(sp.components) == pytest.approx(0.8, abs=1e-12)
        assert sp.components == b.split(t, [0] * t, 0.8).components


def test_constant_loss_validation():
    with pytest.raises(ValueError):
        adv.ConstantLoss(1.5)
