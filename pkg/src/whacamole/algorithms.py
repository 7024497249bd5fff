"""Online collection algorithms.

Every algorithm sees a :class:`~whacamole.model.View` once per step and returns
the id of a pending item, or ``None`` to pass. Stateful algorithms keep their
state on the instance and must be ``reset()`` before a new run.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

from .model import (
    DECREMENTAL_QUEUE,
    FIFO_QUEUE,
    QUEUE_FLAVORS,
    View,
    WrongFlavor,
)

PHI = (1 + math.sqrt(5)) / 2


class NoDistribution(Exception):
    """The algorithm cannot report its pick probabilities."""


class NoEligiblePick(Exception):
    """No pending item meets the threshold; the input broke a precondition."""


class OnlineAlgorithm:
    name = "abstract"
    randomized = False
    memoryless = False

    def reset(self) -> None:
        pass

    def pick(self, view: View, rng) -> str | None:
        raise NotImplementedError

    def distribution(self, view: View) -> dict[str, float]:
        """Probability of each pending item being picked in this state.

        Deterministic algorithms answer with a point mass, computed on a copy
        so the probe leaves the real state untouched.
        """
        if self.randomized:
            raise NoDistribution(self.name)
        choice = copy.deepcopy(self).pick(view, None)
        return {} if choice is None else {choice: 1.0}

    def __repr__(self):
        return f"{type(self).__name__}()"


class Greedy(OnlineAlgorithm):
    name = "greedy"
    memoryless = True

    def pick(self, view, rng):
        return view.heaviest()


class UniRand(OnlineAlgorithm):
    name = "unirand"
    randomized = True
    memoryless = True

    def pick(self, view, rng):
        cands = view.pending_in_order()
        if not cands:
            return None
        return cands[int(rng.integers(len(cands)))]

    def distribution(self, view):
        cands = view.pending_in_order()
        return {c: 1.0 / len(cands) for c in cands}


class FirstPending(OnlineAlgorithm):
    """Always collects the earliest pending item."""

    name = "first-pending"
    memoryless = True

    def pick(self, view, rng):
        pending = view.pending
        for i in view.order:
            if i in pending:
                return i
        return None


class LastPending(OnlineAlgorithm):
    """Always collects the latest pending item."""

    name = "last-pending"
    memoryless = True

    def pick(self, view, rng):
        pending = view.pending
        for i in reversed(view.order):
            if i in pending:
                return i
        return None


@dataclass(frozen=True)
class DecQueEFHParams:
    beta: float = (math.sqrt(13) + 1) / 8
    xi: float = (math.sqrt(13) + 1) / 6

    def __post_init__(self):
        if not 0 < self.beta < self.xi <= 1:
            raise ValueError(f"need 0 < beta < xi <= 1, got beta={self.beta}, xi={self.xi}")


DECQUE_RATIO = 2 * (math.sqrt(13) - 1) / 3


class DecQueEFH(OnlineAlgorithm):
    """Stage machine E -> F -> H for decremental queues.

    A stage fixes ``h``, the heaviest pending item at its first step, then
    collects the earliest item of weight at least beta*w_h, then the earliest
    of weight at least xi*w_h, then h itself. Whenever h stops being pending
    the next stage starts within the same step.
    """

    name = "decque-efh"

    def __init__(self, params: DecQueEFHParams | None = None):
        self.params = params or DecQueEFHParams()
        self.reset()

    def reset(self):
        self.phase = "E"
        self.stage_heavy: str | None = None

    def pick(self, view, rng):
        if view.flavor != DECREMENTAL_QUEUE:
            raise WrongFlavor(f"{self.name} runs on decremental queues, not {view.flavor}")
        h = self.stage_heavy
        alive = h is not None and h in view.pending
        if self.phase == "H" and alive:
            self.phase = "E"
            return h
        if self.phase == "F" and alive:
            factor = self.params.xi
            self.phase = "H"
        else:
            h = self.stage_heavy = view.heaviest()
            if h is None:
                # empty step behaves like collecting a weight-0 filler
                self.phase = "E"
                return None
            factor = self.params.beta
            self.phase = "F"
        choice = view.earliest_at_least(factor * view.weight[h])
        assert choice is not None, "h itself always meets the threshold"
        return choice

    def __repr__(self):
        return f"DecQueEFH({self.params})"


@dataclass(frozen=True)
class FIFOQueEHParams:
    alpha: float = 3 / 4
    beta: float = 2 / 3

    def __post_init__(self):
        if not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise ValueError(f"need 0 < alpha, beta < 1, got {self}")


class FIFOQueEH(OnlineAlgorithm):
    """Tracks the previous heavy item h' and keeps collecting it unless a much heavier item arrived."""

    name = "fifoque-eh"

    def __init__(self, params: FIFOQueEHParams | None = None):
        self.params = params or FIFOQueEHParams()
        self.reset()

    def reset(self):
        self.prev_heavy: str | None = None  # None stands for the virtual weight-0 item

    def pick(self, view, rng):
        if view.flavor not in (FIFO_QUEUE, DECREMENTAL_QUEUE):
            raise WrongFlavor(f"{self.name} runs on FIFO queues, not {view.flavor}")
        h = view.heaviest()
        if h is None:
            self.prev_heavy = None
            return None
        hp = self.prev_heavy
        w = view.weight
        if hp is None or hp not in view.pending or self.params.alpha * w[h] >= w[hp]:
            choice = view.earliest_at_least(self.params.beta * w[h])
            assert choice is not None
            self.prev_heavy = h
            return choice
        self.prev_heavy = view.heaviest(exclude=hp)
        return hp

    def __repr__(self):
        return f"FIFOQueEH({self.params})"


class MarkAndPick(OnlineAlgorithm):
    """phi-competitive for queues whose weights never decrease along the list.

    h ranges over items the algorithm has observed at a decision time, collected
    or deleted ones included; an item inserted and deleted between two picks is
    never observed. Even so the marking rule can leave no pending item above
    w_h/phi. By default that raises NoEligiblePick; with ``on_stuck="heaviest"``
    the algorithm still marks h but collects the heaviest pending item, and
    counts the step in ``stuck_steps``.
    """

    name = "mark-and-pick"

    def __init__(self, on_stuck: str = "raise"):
        if on_stuck not in ("raise", "heaviest"):
            raise ValueError(f"on_stuck must be 'raise' or 'heaviest', got {on_stuck!r}")
        self.on_stuck = on_stuck
        self.reset()

    def reset(self):
        self.marked: set[str] = set()
        self.observed: set[str] = set()
        self.stuck_steps = 0

    def pick(self, view, rng):
        if view.flavor not in QUEUE_FLAVORS:
            raise WrongFlavor(f"{self.name} runs on queues, not {view.flavor}")
        self.observed.update(view.order)
        if not view.pending:
            return None
        w = view.weight
        h = max((i for i in self.observed if i not in self.marked), key=lambda i: (w[i], i))
        choice = view.earliest_at_least(w[h] / PHI)
        if choice is None:
            if self.on_stuck == "raise":
                raise NoEligiblePick(f"step {view.step}: nothing pending reaches w({h})/phi = {w[h] / PHI}")
            self.stuck_steps += 1
            choice = view.heaviest()
        self.marked.add(h)
        return choice

    def __repr__(self):
        return f"MarkAndPick(on_stuck={self.on_stuck!r})"


class RMix(OnlineAlgorithm):
    """Random exponential threshold: earliest pending e with w_e >= exp(-x) * w_h, x ~ U[0, 1)."""

    name = "rmix"
    randomized = True
    memoryless = True

    def pick(self, view, rng):
        h = view.heaviest()
        if h is None:
            return None
        x = rng.random()
        return view.earliest_at_least(math.exp(-x) * view.weight[h])

    def distribution(self, view):
        h = view.heaviest()
        if h is None:
            return {}
        wh = view.weight[h]
        probs: dict[str, float] = {}
        covered = 1.0  # x in [start, covered) already claimed by earlier items
        for i in view.pending_in_order():
            wi = view.weight[i]
            if wh == 0:
                start = 0.0
            elif wi == 0:
                continue
            else:
                start = math.log(wh / wi)
            if start < covered:
                probs[i] = covered - max(start, 0.0)
                covered = max(start, 0.0)
            if covered <= 0.0:
                break
        return probs


ALGORITHMS = {
    cls.name: cls
    for cls in (Greedy, UniRand, DecQueEFH, FIFOQueEH, MarkAndPick, RMix, FirstPending, LastPending)
}


def make_algorithm(name: str, **params) -> OnlineAlgorithm:
    try:
        cls = ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
    if cls is DecQueEFH:
        return DecQueEFH(DecQueEFHParams(**params)) if params else DecQueEFH()
    if cls is FIFOQueEH:
        return FIFOQueEH(FIFOQueEHParams(**params)) if params else FIFOQueEH()
    if cls is MarkAndPick:
        return MarkAndPick(**params)
    if params:
        raise ValueError(f"{name} takes no parameters")
    return cls()
