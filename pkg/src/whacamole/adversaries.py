"""Adversary games that build an instance while watching an online algorithm.

Each game records the steps it issued, so the result carries a regular
:class:`~whacamole.model.Instance` that can be replayed and scored offline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algorithms import NoDistribution, OnlineAlgorithm
from .analysis import LBSequence
from .model import (
    DECREMENTAL_QUEUE,
    DECREMENTAL_SET,
    DYNAMIC_QUEUE,
    DYNAMIC_SET,
    Insert,
    Instance,
    Item,
    Run,
    Schedule,
    StepOps,
    derive_rng,
    gain,
    ratio,
)
from .offline import optimal_gain_matching


class BadDistribution(ValueError):
    pass


@dataclass(frozen=True)
class GameResult:
    alg_gain: float
    adv_gain: float
    instance: Instance | None
    alg_schedule: Schedule | None
    adv_schedule: Schedule | None
    info: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return ratio(self.adv_gain, self.alg_gain)

    @property
    def transcript(self) -> list[tuple[int, StepOps, str | None, str | None]]:
        if self.instance is None:
            return []
        n = len(self.instance.steps)
        alg = self.alg_schedule.padded(n)
        adv = self.adv_schedule.padded(n)
        return [(t, ops, alg[t], adv[t]) for t, ops in enumerate(self.instance.steps)]

    def replay_gains(self) -> tuple[float, float]:
        return gain(self.instance, self.alg_schedule), gain(self.instance, self.adv_schedule)

    def to_dict(self) -> dict:
        return {
            "alg_gain": self.alg_gain,
            "adv_gain": self.adv_gain,
            "ratio": self.ratio,
            "info": self.info,
            "instance": None if self.instance is None else self.instance.to_dict(),
            "alg_picks": None if self.alg_schedule is None else list(self.alg_schedule.picks),
            "adv_picks": None if self.adv_schedule is None else list(self.adv_schedule.picks),
        }


class _Game:
    """Online run plus the list of issued steps."""

    def __init__(self, flavor: str, alg: OnlineAlgorithm, rng=None):
        self.flavor = flavor
        self.run = Run(flavor, alg, rng)
        self.steps: list[StepOps] = []

    def step(self, inserts=(), deletes=()) -> str | None:
        ops = StepOps(tuple(inserts), tuple(deletes))
        self.steps.append(ops)
        return self.run.step(ops)

    @property
    def active(self) -> list[str]:
        return list(self.run.state.order)

    def finish(self, **info) -> GameResult:
        """Score the adversary with the offline optimum of the instance it built."""
        inst = Instance(self.flavor, tuple(self.steps))
        opt, sched = optimal_gain_matching(inst)
        return GameResult(self.run.gain, opt, inst, self.run.schedule(), sched, info)


def _chain(items, after=None) -> list[Insert]:
    out = []
    for item_id, w in items:
        out.append(Insert(Item(item_id, float(w)), after))
        after = item_id
    return out


# --------------------------------------------------------------------------
# deterministic lower bounds


def lb_two_item_set_game(alg: OnlineAlgorithm) -> GameResult:
    g = _Game(DYNAMIC_SET, alg)
    first = g.step(_chain([("a", 1), ("b", 1)]))
    kept = first or "a"
    other = "b" if kept == "a" else "a"
    g.step(deletes=[other])
    return g.finish(first_pick=first)


def lb_phi_queue_game(alg: OnlineAlgorithm) -> GameResult:
    phi = (1 + math.sqrt(5)) / 2
    g = _Game(DECREMENTAL_QUEUE, alg)
    first = g.step(_chain([("a", 1.0), ("b", phi)]))
    if first == "b":
        g.step(deletes=["a"])
    else:
        g.step(deletes=["a", "b"])
    return g.finish(first_pick=first)


def _z_id(index: int) -> str:
    return "one" if index == 0 else f"z{index}"


def lb_decremental_queue_game(alg: OnlineAlgorithm, seq: LBSequence) -> GameResult:
    n = seq.n
    weights = {0: 1.0, **seq.z}
    order = [_z_id(i) for i in seq.queue_order()]
    g = _Game(DECREMENTAL_QUEUE, alg)
    pick = g.step(_chain((_z_id(i), weights[i]) for i in seq.queue_order()))

    def delete_through(item_id):
        active = g.active
        return active[: active.index(item_id) + 1]

    def cleanup(steps):
        for _ in range(steps):
            g.step()

    for i in range(1, n):
        even, odd = _z_id(2 * i), _z_id(2 * i - 1)
        if pick == odd:
            # case (iii): drop the even item in front and go on
            pick = g.step(deletes=[even])
            continue
        if pick == "one":
            # case (ii): A is left holding i items, the adversary takes them all
            g.step(deletes=delete_through(odd))
            cleanup(i)
            return g.finish(case="ii", step=i)
        # case (i), or any lighter pick
        g.step(deletes=g.active)
        return g.finish(case="i", step=i, deviated=pick != even)
    last = _z_id(2 * n)
    if pick == "one":
        g.step(deletes=[last])
        cleanup(n)
        return g.finish(case="ii", step=n)
    g.step(deletes=g.active)
    return g.finish(case="i", step=n, deviated=pick != last)


# --------------------------------------------------------------------------
# memoryless deterministic algorithms on queues

EXPLICIT_ROUNDS_MAX = 2000


def memoryless_weights(n: int) -> list[float]:
    return [1 + i / n for i in range(n + 1)]


def closed_form_ratio(n: int, T: int, k: int) -> float:
    """T(w_{k-1}+w_k) over T*w_k + 2(n+1): a lower estimate of the game ratio."""
    return T * (2 + (2 * k - 1) / n) / (T * (1 + k / n) + 2 * (n + 1))


def _probe_index(alg: OnlineAlgorithm, n: int) -> int:
    w = memoryless_weights(n)
    g = _Game(DYNAMIC_QUEUE, alg)
    pick = g.step(_chain((f"x{i}", w[i]) for i in range(n + 1)))
    if pick is None:
        raise ValueError(f"{alg.name} passes on a nonempty pending set")
    return int(pick[1:])


def lb_memoryless_queue_game(
    alg: OnlineAlgorithm, n: int, T: int, explicit: bool | None = None
) -> GameResult:
    """Keep A's pending set equal to x_0 < ... < x_n with w = 1 + i/n for T rounds.

    When A takes x_k (k >= 1) the adversary takes x_{k-1}, replaces x_0..x_{k-1},
    and adds a fresh x_k; the collected copies of x_k stay in the list for the
    adversary's clean-up. For large T the gains come from per-round accounting,
    after a short explicit run confirms A keeps picking the same index.
    """
    if n < 1 or T < 1:
        raise ValueError("need n >= 1 and T >= 1")
    k = _probe_index(alg, n)
    if explicit is None:
        explicit = T <= EXPLICIT_ROUNDS_MAX
    if explicit:
        return _memoryless_explicit(alg, n, T, k)
    check = _memoryless_explicit(alg, n, min(T, 64), k)
    info = {"k": k, "explicit": False, "memoryless_violation": check.info["memoryless_violation"]}
    if info["memoryless_violation"]:
        return GameResult(check.alg_gain, check.adv_gain, None, None, None, info)
    w = memoryless_weights(n)
    if k == 0:
        return GameResult(float(T), 2.0 * T, None, None, None, info)
    adv = math.fsum([T * (w[k - 1] + w[k])] + w[: k - 1] + w[k + 1 :])
    alg_gain = math.fsum([T * w[k]] + w[:k] + w[k + 1 :])
    return GameResult(alg_gain, adv, None, None, None, info)


def _memoryless_explicit(alg: OnlineAlgorithm, n: int, T: int, k: int) -> GameResult:
    w = memoryless_weights(n)
    g = _Game(DYNAMIC_QUEUE, alg)
    adv: list[str | None] = []
    violation = False
    rounds = 0

    def ids(r, idx):
        return [(f"x{i}r{r}", w[i]) for i in idx]

    if k == 0:
        prev: list[str] = []
        for r in range(T):
            batch = ids(r, range(n + 1))
            pick = g.step(_chain(batch, prev[-1] if prev else None), prev)
            adv.append(batch[-1][0])
            prev = [b[0] for b in batch]
            rounds += 1
            if pick != batch[0][0]:
                violation = True
                break
        g.step(deletes=prev)
        adv.append(None)
    else:
        batch = ids(0, range(n + 1))
        pick = g.step(_chain(batch))
        front = [b[0] for b in batch[:k]]
        tail_k = batch[k][0]
        adv.append(front[-1])
        rounds = 1
        violation = pick != tail_k
        while rounds < T and not violation:
            fresh = ids(rounds, range(k))
            new_k = f"x{k}r{rounds}"
            inserts = _chain(fresh, front[-1]) + [Insert(Item(new_k, w[k]), tail_k)]
            pick = g.step(inserts, front)
            front = [f[0] for f in fresh]
            tail_k = new_k
            adv.append(front[-1])
            rounds += 1
            violation = pick != tail_k
        # clean-up: no events, adversary takes whatever it has not collected
        taken = set(adv)
        rest = [i for i in g.active if i not in taken]
        for item_id in rest:
            g.step()
            adv.append(item_id)
    inst = Instance(DYNAMIC_QUEUE, tuple(g.steps))
    adv_sched = Schedule(tuple(adv))
    info = {"k": k, "explicit": True, "rounds": rounds, "memoryless_violation": violation}
    return GameResult(g.run.gain, gain(inst, adv_sched), inst, g.run.schedule(), adv_sched, info)


# --------------------------------------------------------------------------
# randomized lower bounds


@dataclass(frozen=True)
class ExpectedGameResult:
    alg_mean: float
    alg_stderr: float
    adv_mean: float
    adv_stderr: float
    trials: int
    exact_ratio: float | None = None

    @property
    def ratio(self) -> float:
        return ratio(self.adv_mean, self.alg_mean)


def _mean_stderr(xs: np.ndarray) -> tuple[float, float]:
    if len(xs) < 2:
        return float(xs.mean()), 0.0
    return float(xs.mean()), float(xs.std(ddof=1) / math.sqrt(len(xs)))


def lb_adaptive_set_game(alg: OnlineAlgorithm, n: int, trials: int, seed: int) -> ExpectedGameResult:
    """n unit items; the adversary takes one the algorithm picks with probability at most 1/n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    items = [(f"i{j:04d}", 1.0) for j in range(n)]
    probe = Run(DYNAMIC_SET, alg)
    probe.apply(StepOps(tuple(_chain(items))))
    dist = alg.distribution(probe.view())
    target = next(i for i, _ in items if dist.get(i, 0.0) <= 1 / n)
    alg_g = np.empty(trials)
    adv_g = np.empty(trials)
    for trial in range(trials):
        run = Run(DYNAMIC_SET, alg, derive_rng(seed, trial) if alg.randomized else None)
        b = run.step(StepOps(tuple(_chain(items))))
        if b == target:
            adv_g[trial] = 1.0
        else:
            # keep one item the adversary has not taken; A already has b
            keep = b if b is not None else next(i for i, _ in items if i != target)
            run.step(StepOps((), tuple(i for i, _ in items if i != keep)))
            adv_g[trial] = 2.0
        alg_g[trial] = run.gain
    q_target = dist.get(target, 0.0)
    exact = ratio(1 + (1 - q_target), sum(dist.values()))
    am, ase = _mean_stderr(alg_g)
    dm, dse = _mean_stderr(adv_g)
    return ExpectedGameResult(am, ase, dm, dse, trials, exact)


def require_distribution(alg: OnlineAlgorithm) -> None:
    probe = Run(DYNAMIC_SET, alg)
    probe.apply(StepOps(tuple(_chain([("p", 1.0)]))))
    alg.distribution(probe.view())  # raises NoDistribution when unsupported


def lb_randomized_queue_pressure(q, n: int) -> tuple[int, object]:
    """Best item index against a memoryless algorithm that collects x_j with probability q_j.

    Items have weights a^0..a^n with a = 1 + 1/n. Works in exact rationals when
    q is given as Fractions, in floats otherwise.
    """
    q = list(q)
    if len(q) != n + 1:
        raise BadDistribution(f"expected {n + 1} probabilities, got {len(q)}")
    exact = all(isinstance(x, (Fraction, int)) for x in q)
    if any(x < 0 for x in q):
        raise BadDistribution("negative probability")
    total = sum(q) if exact else math.fsum(q)
    if abs(total - 1) > 1e-12:
        raise BadDistribution(f"probabilities sum to {total}")
    a = 1 + Fraction(1, n) if exact else 1 + 1 / n
    powers = [a**j for j in range(n + 1)]
    terms = [qj * p for qj, p in zip(q, powers)]
    if exact:
        denom = sum(terms)
        tails = [sum(terms[k + 1 :]) for k in range(n + 1)]
    else:
        denom = math.fsum(terms)
        tails = [math.fsum(terms[k + 1 :]) for k in range(n + 1)]
    ratios = [(powers[k] + tails[k]) / denom for k in range(n + 1)]
    best = max(range(n + 1), key=lambda k: (ratios[k], -k))
    return best, ratios[best]


def yao_uniform_process(alg: OnlineAlgorithm, n: int, trials: int, seed: int) -> ExpectedGameResult:
    """n unit items; each step a uniformly random active item is taken and deleted after the step."""
    if n < 1:
        raise ValueError("n must be positive")
    items = tuple(Insert(Item(f"u{j:03d}", 1.0), f"u{j - 1:03d}" if j else None) for j in range(n))
    ids = [ins.item.id for ins in items]
    gains = np.empty(trials)
    for trial in range(trials):
        order = derive_rng(seed, trial, 0).permutation(n)
        rng = derive_rng(seed, trial, 1) if alg.randomized else None
        run = Run(DECREMENTAL_SET, alg, rng)
        run.step(StepOps(items))
        for t in range(1, n):
            run.step(StepOps((), (ids[order[t - 1]],)))
        gains[trial] = run.gain
    m, se = _mean_stderr(gains)
    return ExpectedGameResult(m, se, float(n), 0.0, trials)


__all__ = [
    "BadDistribution",
    "ExpectedGameResult",
    "GameResult",
    "NoDistribution",
    "closed_form_ratio",
    "lb_adaptive_set_game",
    "lb_decremental_queue_game",
    "lb_memoryless_queue_game",
    "lb_phi_queue_game",
    "lb_randomized_queue_pressure",
    "lb_two_item_set_game",
    "memoryless_weights",
    "yao_uniform_process",
]
