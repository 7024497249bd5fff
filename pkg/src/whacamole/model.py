"""Instances, schedules and the online simulation loop.

An instance is a list of steps. Each step has a pre-phase (insertions, then
deletions) followed by a single collection. Items live in a list whose order
only matters for queue flavors; sets keep the list purely for bookkeeping.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Iterator

import numpy as np

if TYPE_CHECKING:
    from .algorithms import OnlineAlgorithm

DYNAMIC_SET = "dynamic_set"
DECREMENTAL_SET = "decremental_set"
DYNAMIC_QUEUE = "dynamic_queue"
FIFO_QUEUE = "fifo_queue"
DECREMENTAL_QUEUE = "decremental_queue"

FLAVORS = (DYNAMIC_SET, DECREMENTAL_SET, DYNAMIC_QUEUE, FIFO_QUEUE, DECREMENTAL_QUEUE)
QUEUE_FLAVORS = frozenset({DYNAMIC_QUEUE, FIFO_QUEUE, DECREMENTAL_QUEUE})
DECREMENTAL_FLAVORS = frozenset({DECREMENTAL_SET, DECREMENTAL_QUEUE})


class InstanceError(Exception):
    pass


class MalformedInstance(InstanceError):
    pass


class InvalidPick(InstanceError):
    pass


class WrongFlavor(InstanceError):
    pass


@dataclass(frozen=True)
class Item:
    id: str
    weight: float

    def __post_init__(self):
        if not self.weight >= 0:
            raise MalformedInstance(f"item {self.id!r} has negative or NaN weight {self.weight}")


@dataclass(frozen=True)
class Insert:
    item: Item
    after: str | None = None  # predecessor id; None puts the item at the front


@dataclass(frozen=True)
class StepOps:
    inserts: tuple[Insert, ...] = ()
    deletes: tuple[str, ...] = ()


EMPTY_STEP = StepOps()


@dataclass(frozen=True)
class Instance:
    flavor: str
    steps: tuple[StepOps, ...] = ()

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise MalformedInstance(f"unknown flavor {self.flavor!r}")
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def is_queue(self) -> bool:
        return self.flavor in QUEUE_FLAVORS

    @cached_property
    def items(self) -> dict[str, Item]:
        catalog: dict[str, Item] = {}
        for ops in self.steps:
            for ins in ops.inserts:
                if ins.item.id in catalog:
                    raise MalformedInstance(f"duplicate item id {ins.item.id!r}")
                catalog[ins.item.id] = ins.item
        return catalog

    @cached_property
    def trace(self) -> "Trace":
        """Validated replay, computed once; raises MalformedInstance on a bad event sequence."""
        return replay(self)

    def weight(self, item_id: str) -> float:
        return self.items[item_id].weight

    def to_dict(self) -> dict:
        return {
            "flavor": self.flavor,
            "steps": [
                {
                    "insert": [
                        {"id": i.item.id, "weight": i.item.weight, "after": i.after}
                        for i in ops.inserts
                    ],
                    "delete": list(ops.deletes),
                }
                for ops in self.steps
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        try:
            steps = tuple(
                StepOps(
                    inserts=tuple(
                        Insert(Item(str(e["id"]), float(e["weight"])), e.get("after"))
                        for e in s.get("insert", [])
                    ),
                    deletes=tuple(str(d) for d in s.get("delete", [])),
                )
                for s in data["steps"]
            )
            return cls(data["flavor"], steps)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInstance(f"bad instance document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Schedule:
    picks: tuple[str | None, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "picks", tuple(self.picks))

    def padded(self, length: int) -> tuple[str | None, ...]:
        if len(self.picks) > length:
            raise InvalidPick(f"schedule has {len(self.picks)} picks for {length} steps")
        return self.picks + (None,) * (length - len(self.picks))

    def to_json(self) -> str:
        return json.dumps({"picks": list(self.picks)}, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        return cls(tuple(json.loads(text)["picks"]))


@dataclass(frozen=True)
class FlavorReport:
    is_decremental: bool
    prefix_deletes_only: bool
    fifo_insertions: bool
    nondecreasing_weights: bool


class ListState:
    """Active items in list order, with incremental validation of each step."""

    def __init__(self, flavor: str):
        self.flavor = flavor
        self.order: list[str] = []
        self.weight: dict[str, float] = {}
        self.active: set[str] = set()
        self.seen: list[str] = []
        self.step = -1
        # structural facts accumulated over the whole run
        self.is_decremental = True
        self.prefix_deletes_only = True
        self.fifo_insertions = True
        self.nondecreasing = True

    def apply(self, ops: StepOps) -> None:
        self.step += 1
        if not (ops.inserts or ops.deletes):
            return
        flavor = self.flavor
        order = self.order
        for ins in ops.inserts:
            item = ins.item
            if item.id in self.weight:
                raise MalformedInstance(f"duplicate item id {item.id!r}")
            if ins.after is None:
                pos = 0
            else:
                if ins.after not in self.active:
                    raise MalformedInstance(
                        f"step {self.step}: anchor {ins.after!r} of {item.id!r} is not active"
                    )
                pos = order.index(ins.after) + 1
            if pos != len(order):
                self.fifo_insertions = False
                if flavor == FIFO_QUEUE:
                    raise MalformedInstance(f"step {self.step}: FIFO insertion of {item.id!r} not at tail")
            if self.step > 0:
                self.is_decremental = False
                if flavor in DECREMENTAL_FLAVORS:
                    raise MalformedInstance(f"step {self.step}: insertion into a decremental instance")
            order.insert(pos, item.id)
            self.weight[item.id] = item.weight
            self.active.add(item.id)
            self.seen.append(item.id)
        # weights must be sorted whenever items coexist, including the moment
        # between this step's insertions and its deletions
        if self.nondecreasing and ops.inserts:
            w = self.weight
            for a, b in zip(order, order[1:]):
                if w[a] > w[b]:
                    self.nondecreasing = False
                    break
        if ops.deletes:
            doomed = set(ops.deletes)
            if len(doomed) != len(ops.deletes):
                raise MalformedInstance(f"step {self.step}: repeated id in delete list")
            for d in doomed:
                if d not in self.active:
                    raise MalformedInstance(f"step {self.step}: delete of inactive or unknown id {d!r}")
            k = len(doomed)
            if not doomed.issuperset(order[:k]):
                self.prefix_deletes_only = False
                if flavor in QUEUE_FLAVORS:
                    raise MalformedInstance(f"step {self.step}: queue delete is not a prefix")
                self.order = order = [i for i in order if i not in doomed]
            else:
                del order[:k]
            self.active -= doomed

    def report(self) -> FlavorReport:
        return FlavorReport(
            self.is_decremental, self.prefix_deletes_only, self.fifo_insertions, self.nondecreasing
        )


@dataclass(frozen=True)
class Trace:
    """Result of replaying an instance once: validity facts, list snapshots, activity spans."""

    report: FlavorReport
    snapshots: tuple[tuple[str, ...], ...]  # active list after each step's pre-phase
    intervals: dict[str, tuple[int, int]]  # (first, last) active step; first > last if never active
    weights: dict[str, float]


def replay(instance: Instance) -> Trace:
    state = ListState(instance.flavor)
    last = len(instance.steps) - 1
    born: dict[str, int] = {}
    died: dict[str, int] = {}
    snaps = []
    for t, ops in enumerate(instance.steps):
        state.apply(ops)
        for ins in ops.inserts:
            born[ins.item.id] = t
        for d in ops.deletes:
            died[d] = t - 1
        snaps.append(tuple(state.order))
    spans = {i: (born[i], died.get(i, last)) for i in born}
    return Trace(state.report(), tuple(snaps), spans, state.weight)


def validate_instance(instance: Instance) -> FlavorReport:
    return instance.trace.report


def snapshots(instance: Instance) -> tuple[tuple[str, ...], ...]:
    return instance.trace.snapshots


def active_intervals(instance: Instance) -> dict[str, tuple[int, int]]:
    return instance.trace.intervals


def gain(instance: Instance, schedule: Schedule) -> float:
    picks = schedule.padded(len(instance.steps))
    trace = instance.trace
    taken: set[str] = set()
    collected = []
    for t, p in enumerate(picks):
        if p is None:
            continue
        span = trace.intervals.get(p)
        if span is None or not span[0] <= t <= span[1]:
            raise InvalidPick(f"step {t}: {p!r} is not active")
        if p in taken:
            raise InvalidPick(f"step {t}: {p!r} collected twice")
        taken.add(p)
        collected.append(trace.weights[p])
    return math.fsum(collected)


class View:
    """What an online algorithm may observe at one step.

    The containers are shared with the running simulation; algorithms must
    treat them as read-only.
    """

    __slots__ = ("flavor", "step", "order", "weight", "pending", "seen")

    def __init__(self, flavor, step, order, weight, pending, seen):
        self.flavor = flavor
        self.step = step
        self.order = order
        self.weight = weight
        self.pending = pending
        self.seen = seen

    def pending_in_order(self) -> list[str]:
        pending = self.pending
        return [i for i in self.order if i in pending]

    def heaviest(self, exclude: str | None = None) -> str | None:
        w = self.weight
        best = None
        best_key = None
        for i in self.pending:
            if i == exclude:
                continue
            key = (w[i], i)
            if best_key is None or key > best_key:
                best, best_key = i, key
        return best

    def earliest_at_least(self, threshold: float) -> str | None:
        pending = self.pending
        w = self.weight
        for i in self.order:
            if i in pending and w[i] >= threshold:
                return i
        return None


def weight_key(view: View, item_id: str) -> tuple[float, str]:
    return (view.weight[item_id], item_id)


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for (seed, keys...); distinct keys give independent streams."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(keys))
    return np.random.Generator(np.random.Philox(ss))


class Run:
    """One online algorithm driven step by step; usable by games that build instances on the fly."""

    def __init__(self, flavor: str, alg: "OnlineAlgorithm", rng: np.random.Generator | None = None):
        self.state = ListState(flavor)
        self.alg = alg
        self.rng = rng
        self.pending: set[str] = set()
        self.picks: list[str | None] = []
        self.collected: list[float] = []
        alg.reset()

    def view(self) -> View:
        s = self.state
        return View(s.flavor, s.step, s.order, s.weight, self.pending, s.seen)

    def apply(self, ops: StepOps) -> None:
        self.state.apply(ops)
        for ins in ops.inserts:
            self.pending.add(ins.item.id)
        if ops.deletes:
            self.pending.difference_update(ops.deletes)

    def collect(self) -> str | None:
        p = self.alg.pick(self.view(), self.rng)
        if p is not None:
            if p not in self.pending:
                raise InvalidPick(
                    f"step {self.state.step}: {self.alg.name} picked {p!r}, which is not pending"
                )
            self.pending.discard(p)
            self.collected.append(self.state.weight[p])
        self.picks.append(p)
        return p

    def step(self, ops: StepOps) -> str | None:
        self.apply(ops)
        return self.collect()

    @property
    def gain(self) -> float:
        return math.fsum(self.collected)

    def schedule(self) -> Schedule:
        return Schedule(tuple(self.picks))


def simulate(
    instance: Instance, alg: "OnlineAlgorithm", seed: int = 0, stream: tuple[int, ...] = ()
) -> tuple[Schedule, float]:
    """Run alg over the instance; randomized algorithms draw from the (seed, *stream) generator."""
    rng = derive_rng(seed, *stream) if alg.randomized else None
    trace = instance.trace  # validates once; the loop below only replays it
    flavor = instance.flavor
    alg.reset()
    weight: dict[str, float] = {}
    pending: set[str] = set()
    seen: list[str] = []
    picks: list[str | None] = []
    collected: list[float] = []
    for t, (ops, order) in enumerate(zip(instance.steps, trace.snapshots)):
        for ins in ops.inserts:
            i = ins.item.id
            weight[i] = ins.item.weight
            pending.add(i)
            seen.append(i)
        if ops.deletes:
            pending.difference_update(ops.deletes)
        p = alg.pick(View(flavor, t, order, weight, pending, seen), rng)
        if p is not None:
            if p not in pending:
                raise InvalidPick(f"step {t}: {alg.name} picked {p!r}, which is not pending")
            pending.discard(p)
            collected.append(weight[p])
        picks.append(p)
    return Schedule(tuple(picks)), math.fsum(collected)


def check_eef(instance: Instance, schedule: Schedule) -> bool:
    """True iff no item is collected after a later-in-queue item that was picked while it was active.

    Compared at the pick time of the later item: if b is collected at step t and
    a precedes b in the list at t, then a is not collected after t.
    """
    if not instance.is_queue:
        raise WrongFlavor(f"EEF is defined for queues, not {instance.flavor}")
    picks = schedule.padded(len(instance.steps))
    when = {p: t for t, p in enumerate(picks) if p is not None}
    for t, order in enumerate(snapshots(instance)):
        b = picks[t]
        if b is None:
            continue
        for a in order:
            if a == b:
                break
            if when.get(a, -1) > t:
                return False
    return True


def canonicalize_eef(instance: Instance, schedule: Schedule) -> Schedule:
    if not instance.is_queue:
        raise WrongFlavor(f"EEF is defined for queues, not {instance.flavor}")
    gain(instance, schedule)  # validates
    picks = list(schedule.padded(len(instance.steps)))
    when = {p: t for t, p in enumerate(picks) if p is not None}
    for t, order in enumerate(snapshots(instance)):
        b = picks[t]
        if b is None:
            continue
        for a in order:
            if a == b:
                break
            t2 = when.get(a, -1)
            if t2 > t:
                # a is the front-most later pick ahead of b; prefix deletion keeps b alive at t2
                picks[t], picks[t2] = a, b
                when[a], when[b] = t, t2
                break
    return Schedule(tuple(picks[: len(schedule.picks)]))


def ratio(opt_gain: float, alg_gain: float) -> float:
    if alg_gain > 0:
        return opt_gain / alg_gain
    return 1.0 if opt_gain == 0 else math.inf


def make_instance(flavor: str, steps: Iterable[StepOps]) -> Instance:
    return Instance(flavor, tuple(steps))


def static_instance(
    flavor: str,
    items: Iterable[tuple[str, float]],
    lifetimes: Iterable[int] | None = None,
    n_steps: int | None = None,
) -> Instance:
    """All items arrive before step 0 in the given order; an item with lifetime L is active for steps 0..L-1.

    Lifetimes default to "never deleted"; n_steps defaults to the longest lifetime.
    """
    pairs = [(i, float(w)) for i, w in items]
    life = list(lifetimes) if lifetimes is not None else None
    if n_steps is None:
        n_steps = max(life) if life else len(pairs)
    if life is None:
        life = [n_steps] * len(pairs)
    inserts = []
    prev = None
    for item_id, w in pairs:
        inserts.append(Insert(Item(item_id, w), prev))
        prev = item_id
    dels: list[list[str]] = [[] for _ in range(n_steps)]
    for (item_id, _), lt in zip(pairs, life):
        if lt < 1:
            raise MalformedInstance(f"lifetime of {item_id!r} must be at least 1")
        if lt < n_steps:
            dels[lt].append(item_id)
    steps = [StepOps(tuple(inserts) if t == 0 else (), tuple(dels[t])) for t in range(n_steps)]
    return Instance(flavor, tuple(steps))
