"""Round-based bandit game with composite anonymous delayed feedback.

Protocol per round t = 1..T:

1. the learner picks an action from past observations only,
2. the loss adversary fixes a loss in [0, 1] that may depend on the whole
   action history,
3. the delay adversary splits that loss into d nonnegative components, the
   s-th of which surfaces s rounds later,
4. the learner observes one aggregate number: the sum of every component
   due this round, with no attribution to the rounds that produced it.

The learner never sees per-round losses, only the anonymous aggregates.
Regret is accounted against the true losses by counterfactual replay, which
is why adversaries must realize all randomness from counter-style seed
streams (see :mod:`delaybandits.seeding`): a replayed history re-reads the
same random values the live run used.

Loss adversaries are called as ``loss(t, actions)`` where ``actions`` is a
sequence with at least t entries whose first t entries are the history
a_1..a_t.  Implementations must index ``actions[t-1]``, ``actions[t-2]``,
... rather than relying on ``len(actions)``; the replay routines exploit
this by swapping single entries of a shared buffer instead of copying
prefixes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np

#: absolute tolerance for split bookkeeping: components summing to the loss,
#: negative rounding noise, observed-loss reconstruction
SPLIT_ATOL = 1e-12


class SimulationError(Exception):
    """Base class for violations of the game protocol."""


class ActionError(SimulationError):
    """Learner produced an action outside the action space."""


class SplitError(SimulationError):
    """Delay adversary produced an invalid loss split."""


class LossRangeError(SimulationError):
    """Loss adversary produced a value outside [0, 1]."""


class ReplayError(SimulationError):
    """Counterfactual replay did not reproduce the realized run."""


# ---------------------------------------------------------------------------
# action spaces


@dataclass(frozen=True)
class Discrete:
    """Finite action set {0, ..., arm_count - 1}."""

    arm_count: int

    def __post_init__(self):
        if self.arm_count < 2:
            raise ValueError(f"need at least 2 arms, got {self.arm_count}")

    def contains(self, action) -> bool:
        return isinstance(action, (int, np.integer)) and 0 <= action < self.arm_count

    def comparators(self) -> list:
        return list(range(self.arm_count))

    def sample(self, rng: np.random.Generator):
        return int(rng.integers(self.arm_count))


@dataclass(frozen=True)
class ConvexBall:
    """Euclidean ball of given radius; regret is measured against a finite
    grid of comparator points inside the ball."""

    dimension: int
    radius: float
    comparator_grid: tuple = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not self.comparator_grid:
            raise ValueError("comparator_grid must not be empty")
        grid = tuple(tuple(float(x) for x in p) for p in self.comparator_grid)
        for p in grid:
            if len(p) != self.dimension:
                raise ValueError(f"comparator point {p} has wrong dimension")
            if math.sqrt(sum(x * x for x in p)) > self.radius + 1e-9:
                raise ValueError(f"comparator point {p} lies outside the ball")
        object.__setattr__(self, "comparator_grid", grid)

    def contains(self, action) -> bool:
        v = np.asarray(action, dtype=float)
        if v.shape != (self.dimension,):
            return False
        return float(np.linalg.norm(v)) <= self.radius + 1e-9

    def comparators(self) -> list:
        return list(self.comparator_grid)

    def sample(self, rng: np.random.Generator):
        # uniform direction, radius scaled for uniform volume
        v = rng.normal(size=self.dimension)
        n = np.linalg.norm(v)
        if n == 0.0:
            return np.zeros(self.dimension)
        r = self.radius * rng.random() ** (1.0 / self.dimension)
        return v * (r / n)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GameConfig:
    """Immutable description of one simulated game."""

    horizon: int
    action_space: object
    delay_span: int = 1
    memory_bound: int = 0
    master_seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.delay_span < 1:
            raise ValueError("delay_span must be >= 1")
        if self.memory_bound < 0:
            raise ValueError("memory_bound must be >= 0")


# ---------------------------------------------------------------------------
# loss splits and the feedback buffer


@dataclass(slots=True)
class LossSplit:
    """Decomposition of one round's loss into delayed components.

    ``components[s]`` surfaces at round ``t + s``.  ``per_arm`` optionally
    records the component table for every action (diagnostics only; the
    game itself needs the chosen action's components).
    """

    t: int
    components: tuple
    loss_value: float
    per_arm: Optional[tuple] = None


def validate_split(split: LossSplit, delay_span: int) -> LossSplit:
    """Check a split against the declared loss and clamp rounding noise.

    Components in [-SPLIT_ATOL, 0) are snapped to 0.0; anything more
    negative, any component exceeding the loss, a wrong component count, or
    a sum off by more than SPLIT_ATOL raises :class:`SplitError`.
    """
    comps = split.components
    if len(comps) != delay_span:
        raise SplitError(
            f"round {split.t}: expected {delay_span} components, got {len(comps)}"
        )
    lv = split.loss_value
    clamped = None
    for i, c in enumerate(comps):
        if c < 0.0:
            if c < -SPLIT_ATOL:
                raise SplitError(f"round {split.t}: component {i} is negative ({c!r})")
            if clamped is None:
                clamped = list(comps)
            clamped[i] = 0.0
        elif c > lv + SPLIT_ATOL:
            raise SplitError(
                f"round {split.t}: component {i} ({c!r}) exceeds loss {lv!r}"
            )
    if clamped is not None:
        split.components = comps = tuple(clamped)
    total = comps[0] if len(comps) == 1 else math.fsum(comps)
    if abs(total - lv) > SPLIT_ATOL:
        raise SplitError(
            f"round {split.t}: components sum to {total!r}, loss is {lv!r}"
        )
    return split


@dataclass(slots=True, frozen=True)
class FeedbackBuffer:
    """Pending delayed mass. ``pending[k]`` surfaces k rounds from now."""

    delay_span: int
    pending: tuple

    @classmethod
    def empty(cls, delay_span: int) -> "FeedbackBuffer":
        return cls(delay_span, (0.0,) * (delay_span - 1))


def observe_aggregate(buffer: FeedbackBuffer, split: LossSplit) -> float:
    """Observed loss for the round whose split is ``split``.

    The immediate component surfaces now, on top of whatever older rounds
    scheduled for this round.  Reads the buffer; does not advance it.
    """
    pend = buffer.pending
    return split.components[0] + (pend[0] if pend else 0.0)


def push_split(buffer: FeedbackBuffer, split: LossSplit) -> FeedbackBuffer:
    """Schedule the delayed components of ``split`` and advance one round."""
    d = buffer.delay_span
    if len(split.components) != d:
        raise SplitError(
            f"round {split.t}: split width {len(split.components)} != buffer span {d}"
        )
    if d == 1:
        return buffer
    pend = buffer.pending
    comps = split.components
    # drop the slot consumed this round, shift, add the new schedule
    new = tuple(
        (pend[k + 1] if k + 1 < d - 1 else 0.0) + comps[k + 1] for k in range(d - 1)
    )
    return FeedbackBuffer(d, new)


# ---------------------------------------------------------------------------
# transcripts


@dataclass(frozen=True)
class Transcript:
    """Complete record of one run; immutable once the run finishes."""

    config: GameConfig
    actions: tuple
    true_losses: tuple
    splits: tuple
    observed: tuple
    delay_diagnostics: tuple

    @property
    def horizon(self) -> int:
        return self.config.horizon

    @property
    def realized_total(self) -> float:
        return math.fsum(self.true_losses)


# ---------------------------------------------------------------------------
# pluggable components


class Learner(Protocol):
    def act(self, t: int):
        """Action for round t, computed from past observations only."""

    def observe(self, t: int, action, observed: float) -> None:
        """Receive the aggregate observation for round t."""


class LossAdversary(Protocol):
    def loss(self, t: int, actions: Sequence) -> float:
        """True loss of round t given the action history prefix."""


class DelayAdversary(Protocol):
    delay_span: int

    def split(self, t: int, actions: Sequence, loss_value: float) -> LossSplit:
        """Split round t's realized loss into delayed components."""


# ---------------------------------------------------------------------------
# the game loop


def run_game(config: GameConfig, learner, loss_adversary, delay_adversary) -> Transcript:
    """Play the full game and return its transcript.

    Enforces per round: the action lies in the action space, the loss lies
    in [0, 1], the split is valid for the configured delay span, and the
    learner only hears about round t after acting in round t.

    Parameters
    ----------
    config : GameConfig
    learner : object with ``act(t)`` and ``observe(t, action, observed)``
    loss_adversary : object with ``loss(t, actions)``
    delay_adversary : object with ``split(t, actions, loss_value)``

    Returns
    -------
    Transcript
    """
    space = config.action_space
    d = config.delay_span
    if getattr(delay_adversary, "delay_span", d) != d:
        raise SplitError(
            f"delay adversary span {delay_adversary.delay_span} != config {d}"
        )
    contains = space.contains
    loss_fn = loss_adversary.loss
    split_fn = delay_adversary.split
    act = learner.act
    observe = learner.observe
    info_fn = getattr(delay_adversary, "round_info", None)

    actions: list = []
    true_losses: list = []
    splits: list = []
    observed_seq: list = []
    diags: list = []
    append_action = actions.append
    buffer = FeedbackBuffer.empty(d)

    for t in range(1, config.horizon + 1):
        a = act(t)
        if not contains(a):
            raise ActionError(f"round {t}: action {a!r} outside the action space")
        append_action(a)
        lv = loss_fn(t, actions)
        if not 0.0 <= lv <= 1.0:
            raise LossRangeError(f"round {t}: loss {lv!r} outside [0, 1]")
        split = validate_split(split_fn(t, actions, lv), d)
        obs = observe_aggregate(buffer, split)
        buffer = push_split(buffer, split)
        observe(t, a, obs)
        true_losses.append(lv)
        splits.append(split)
        observed_seq.append(obs)
        diags.append(info_fn() if info_fn is not None else None)

    return Transcript(
        config=config,
        actions=tuple(actions),
        true_losses=tuple(true_losses),
        splits=tuple(splits),
        observed=tuple(observed_seq),
        delay_diagnostics=tuple(diags),
    )


# ---------------------------------------------------------------------------
# regret accounting


@dataclass(frozen=True)
class RegretReport:
    """Regret of one transcript against a comparator set.

    ``policy_regret`` replays each comparator as a constant action sequence
    through the loss adversary.  ``pseudo_regret`` replays one-step
    deviations that keep the realized prefix.  Comparator keys are ints for
    discrete spaces and tuples of floats for ball spaces.
    """

    realized_total: float
    comparator_totals: dict
    policy_regret: float
    pseudo_regret: float
    best_comparator: object


def _comparator_key(y):
    if isinstance(y, (int, np.integer)):
        return int(y)
    return tuple(float(x) for x in y)


def _best(totals: Sequence[float]) -> int:
    # ties go to the lowest comparator index
    best_i = 0
    best_v = totals[0]
    for i in range(1, len(totals)):
        if totals[i] < best_v:
            best_i, best_v = i, totals[i]
    return best_i


def _replay_realized(transcript: Transcript, loss_adversary) -> None:
    """Re-evaluate the realized history; any drift means the adversary is
    not replay-deterministic and every counterfactual would be garbage."""
    actions = list(transcript.actions)
    losses = transcript.true_losses
    loss_fn = loss_adversary.loss
    for t in range(1, len(actions) + 1):
        if loss_fn(t, actions) != losses[t - 1]:
            raise ReplayError(
                f"round {t}: replayed loss {loss_fn(t, actions)!r} != recorded "
                f"{losses[t - 1]!r}; adversary randomness is not replay-stable"
            )


def policy_regret(transcript: Transcript, loss_adversary, comparators=None) -> RegretReport:
    """Regret against constant action sequences, replayed through the
    adversary.

    For each comparator y the entire game is re-run on the history
    (y, y, ..., y), loss by loss.  Requires a replay-deterministic
    adversary; the realized history is replayed first and must reproduce
    the recorded losses exactly.
    """
    if comparators is None:
        comparators = transcript.config.action_space.comparators()
    comparators = list(comparators)
    if not comparators:
        raise ValueError("need at least one comparator")
    _replay_realized(transcript, loss_adversary)

    T = transcript.horizon
    loss_fn = loss_adversary.loss
    totals = []
    for y in comparators:
        hist = [y] * T
        vals = [loss_fn(t, hist) for t in range(1, T + 1)]
        totals.append(math.fsum(vals))
    realized = transcript.realized_total
    b = _best(totals)
    return RegretReport(
        realized_total=realized,
        comparator_totals={_comparator_key(y): v for y, v in zip(comparators, totals)},
        policy_regret=realized - totals[b],
        pseudo_regret=pseudo_regret(transcript, loss_adversary, comparators),
        best_comparator=comparators[b],
    )


def pseudo_regret(transcript: Transcript, loss_adversary, comparators=None) -> float:
    """Regret against one-step deviations from the realized history.

    The comparator total for y sums l_t over histories that keep the
    realized prefix a_1..a_{t-1} and swap only the round-t action for y.
    For oblivious (memoryless) adversaries this equals standard external
    regret.  Ties in the minimum go to the lowest comparator index.
    """
    if comparators is None:
        comparators = transcript.config.action_space.comparators()
    comparators = list(comparators)
    if not comparators:
        raise ValueError("need at least one comparator")

    T = transcript.horizon
    loss_fn = loss_adversary.loss
    realized_actions = list(transcript.actions)
    totals = []
    for y in comparators:
        hist = list(realized_actions)
        vals = []
        for t in range(1, T + 1):
            saved = hist[t - 1]
            hist[t - 1] = y
            vals.append(loss_fn(t, hist))
            hist[t - 1] = saved
        totals.append(math.fsum(vals))
    return transcript.realized_total - totals[_best(totals)]


# ---------------------------------------------------------------------------
# bounded-memory probe


@dataclass(frozen=True)
class MemoryCheckResult:
    """Outcome of a randomized bounded-memory probe.

    ``witness`` is None on success, otherwise a tuple
    (t, history, perturbed_history, loss, perturbed_loss) exhibiting a
    dependence on actions older than the claimed window.
    """

    passed: bool
    trials: int
    witness: Optional[tuple] = None


def check_bounded_memory(
    loss_adversary,
    memory_bound: int,
    *,
    action_space,
    horizon: int,
    trials: int = 200,
    rng: Optional[np.random.Generator] = None,
) -> MemoryCheckResult:
    """Probe whether l_t depends only on the last ``memory_bound`` + 1 actions.

    Samples random histories, rewrites entries strictly older than the
    claimed window, and compares losses.  A probe can only ever disprove
    the bound; passing means no witness was found in ``trials`` attempts.
    memory_bound = 0 probes obliviousness.
    """
    if memory_bound < 0:
        raise ValueError("memory_bound must be >= 0")
    if rng is None:
        rng = np.random.default_rng()
    window = memory_bound + 1
    if horizon <= window:
        # nothing older than the window can exist; trivially consistent
        return MemoryCheckResult(passed=True, trials=0)

    loss_fn = loss_adversary.loss
    done = 0
    while done < trials:
        t = int(rng.integers(window + 1, horizon + 1))
        hist = [action_space.sample(rng) for _ in range(t)]
        base = loss_fn(t, hist)
        perturbed = list(hist)
        cut = t - window  # indices 0..cut-1 are outside the window
        changed = False
        for i in range(cut):
            if rng.random() < 0.5:
                a = action_space.sample(rng)
                if not _same_action(a, perturbed[i]):
                    perturbed[i] = a
                    changed = True
        if not changed:
            i = int(rng.integers(cut))
            perturbed[i] = _resample_different(action_space, perturbed[i], rng)
        other = loss_fn(t, perturbed)
        if other != base:
            return MemoryCheckResult(
                passed=False,
                trials=done + 1,
                witness=(t, tuple(hist), tuple(perturbed), base, other),
            )
        done += 1
    return MemoryCheckResult(passed=True, trials=done)


def _same_action(a, b) -> bool:
    if isinstance(a, (int, np.integer)):
        return a == b
    return bool(np.array_equal(np.asarray(a), np.asarray(b)))


def _resample_different(space, current, rng):
    for _ in range(64):
        a = space.sample(rng)
        if not _same_action(a, current):
            return a
    raise ValueError("could not sample a distinct action; space too small?")
