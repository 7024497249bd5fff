import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whacamole.algorithms import FirstPending, Greedy, UniRand
from whacamole.harness import random_instance, span_instance
from whacamole.model import (
    DECREMENTAL_QUEUE,
    DYNAMIC_QUEUE,
    DYNAMIC_SET,
    FIFO_QUEUE,
    Insert,
    Instance,
    InvalidPick,
    Item,
    MalformedInstance,
    Schedule,
    StepOps,
    WrongFlavor,
    active_intervals,
    canonicalize_eef,
    check_eef,
    gain,
    simulate,
    static_instance,
    validate_instance,
)


def queue(*weights, flavor=DYNAMIC_QUEUE, steps=1):
    return static_instance(flavor, [(f"q{i}", w) for i, w in enumerate(weights)], n_steps=steps)


class TestValidate:
    def test_single_item_all_flags(self):
        rep = validate_instance(queue(1.0))
        assert rep.is_decremental and rep.prefix_deletes_only and rep.fifo_insertions
        assert rep.nondecreasing_weights

    def test_sorted_queue_is_nondecreasing(self):
        assert validate_instance(queue(1.0, 2.0, 3.0)).nondecreasing_weights
        assert not validate_instance(queue(2.0, 1.0)).nondecreasing_weights

    def test_middle_delete_rejected_for_queues(self):
        inst = static_instance(DYNAMIC_QUEUE, [("a", 1), ("b", 2), ("c", 3)], [3, 1, 3])
        with pytest.raises(MalformedInstance):
            validate_instance(inst)

    def test_middle_delete_fine_for_sets(self):
        inst = static_instance(DYNAMIC_SET, [("a", 1), ("b", 2), ("c", 3)], [3, 1, 3])
        assert not validate_instance(inst).prefix_deletes_only

    def test_duplicate_id(self):
        steps = [StepOps((Insert(Item("a", 1.0)),)), StepOps((Insert(Item("a", 2.0)),))]
        with pytest.raises(MalformedInstance):
            validate_instance(Instance(DYNAMIC_SET, steps))

    def test_unknown_delete(self):
        with pytest.raises(MalformedInstance):
            validate_instance(Instance(DYNAMIC_SET, [StepOps((), ("ghost",))]))

    def test_fifo_must_append(self):
        steps = [StepOps((Insert(Item("a", 1.0)), Insert(Item("b", 1.0), None)))]
        with pytest.raises(MalformedInstance):
            validate_instance(Instance(FIFO_QUEUE, steps))

    def test_decremental_rejects_late_insert(self):
        steps = [StepOps((Insert(Item("a", 1.0)),)), StepOps((Insert(Item("b", 1.0), "a"),))]
        with pytest.raises(MalformedInstance):
            validate_instance(Instance(DECREMENTAL_QUEUE, steps))

    def test_negative_weight(self):
        with pytest.raises(MalformedInstance):
            Item("a", -1.0)

    def test_unknown_flavor(self):
        with pytest.raises(MalformedInstance):
            Instance("heap", ())

    def test_nondecreasing_checked_per_step(self):
        # b is lighter than a but a is gone before b shows up
        inst = Instance(
            DYNAMIC_QUEUE,
            [StepOps((Insert(Item("a", 2.0)),)), StepOps((), ("a",)), StepOps((Insert(Item("b", 1.0)),))],
        )
        assert validate_instance(inst).nondecreasing_weights

    def test_nondecreasing_checked_before_deletions(self):
        # a and b coexist between b's insertion and a's deletion
        inst = Instance(
            DYNAMIC_QUEUE,
            [StepOps((Insert(Item("a", 2.0)),)), StepOps((Insert(Item("b", 1.0), "a"),), ("a",))],
        )
        assert not validate_instance(inst).nondecreasing_weights


class TestGain:
    def test_all_pass(self):
        assert gain(queue(1.0, 2.0, steps=2), Schedule((None, None))) == 0

    def test_two_picks(self):
        inst = static_instance(DYNAMIC_SET, [("a", 1), ("b", 1)])
        assert gain(inst, Schedule(("a", "b"))) == 2

    def test_pick_after_delete(self):
        inst = static_instance(DYNAMIC_SET, [("a", 1), ("b", 1)], [1, 2])
        with pytest.raises(InvalidPick):
            gain(inst, Schedule(("b", "a")))

    def test_pick_twice(self):
        inst = static_instance(DYNAMIC_SET, [("a", 1)], n_steps=2)
        with pytest.raises(InvalidPick):
            gain(inst, Schedule(("a", "a")))

    def test_schedule_too_long(self):
        with pytest.raises(InvalidPick):
            gain(queue(1.0), Schedule(("q0", None)))


class TestSimulate:
    def test_greedy_takes_heavier(self):
        inst = static_instance(DYNAMIC_SET, [("a", 1), ("b", 2)], n_steps=1)
        sched, g = simulate(inst, Greedy())
        assert sched.picks == ("b",) and g == 2

    def test_zero_steps(self):
        assert simulate(Instance(DYNAMIC_SET, ()), Greedy())[1] == 0

    def test_unirand_reproducible(self):
        inst = random_instance(DYNAMIC_SET, 8, 8, "uniform", seed=3)
        assert simulate(inst, UniRand(), seed=11) == simulate(inst, UniRand(), seed=11)

    def test_bad_algorithm_is_caught(self):
        class Cheater(Greedy):
            def pick(self, view, rng):
                return "nope"

        with pytest.raises(InvalidPick):
            simulate(queue(1.0), Cheater())


class TestJson:
    def test_round_trip(self):
        inst = random_instance(DYNAMIC_QUEUE, 6, 6, "uniform", seed=1)
        again = Instance.from_json(inst.to_json())
        assert again == inst
        assert again.to_json() == inst.to_json()

    def test_document_shape(self):
        doc = queue(1.5).to_dict()
        assert doc == {"flavor": DYNAMIC_QUEUE, "steps": [{"insert": [{"id": "q0", "weight": 1.5, "after": None}], "delete": []}]}

    def test_schedule_round_trip(self):
        s = Schedule(("a", None, "b"))
        assert Schedule.from_json(s.to_json()) == s

    def test_bad_document(self):
        with pytest.raises(MalformedInstance):
            Instance.from_dict({"steps": []})


class TestEEF:
    def test_in_order(self):
        inst = queue(1.0, 2.0, steps=2)
        assert check_eef(inst, Schedule(("q0", "q1")))

    def test_reverse_order(self):
        inst = queue(1.0, 2.0, steps=2)
        assert not check_eef(inst, Schedule(("q1", "q0")))

    def test_single_pick(self):
        assert check_eef(queue(1.0, 2.0, steps=2), Schedule(("q1", None)))

    def test_sets_rejected(self):
        inst = static_instance(DYNAMIC_SET, [("a", 1)])
        with pytest.raises(WrongFlavor):
            check_eef(inst, Schedule(("a",)))
        with pytest.raises(WrongFlavor):
            canonicalize_eef(inst, Schedule(("a",)))

    def test_fixed_point(self):
        inst = queue(1.0, 2.0, 3.0, steps=3)
        s = Schedule(("q0", "q2", "q1"))
        s = canonicalize_eef(inst, s)
        assert canonicalize_eef(inst, s) == s

    def test_swap(self):
        inst = queue(1.0, 2.0, steps=2)
        out = canonicalize_eef(inst, Schedule(("q1", "q0")))
        assert out.picks == ("q0", "q1")

    def test_pick_time_rule(self):
        # b alone at step 0; a inserted in front of b at step 1; both gone afterwards
        steps = [
            StepOps((Insert(Item("b", 1.0)),)),
            StepOps((Insert(Item("a", 1.0)),)),
            StepOps((), ("a", "b")),
        ]
        inst = Instance(DYNAMIC_QUEUE, steps)
        assert check_eef(inst, Schedule(("b", "a", None)))


def _all_schedules(inst):
    spans = active_intervals(inst)
    n = len(inst.steps)
    options = [[None] + [i for i, (s, e) in spans.items() if s <= t <= e] for t in range(n)]
    for picks in itertools.product(*options):
        taken = [p for p in picks if p is not None]
        if len(taken) == len(set(taken)):
            yield Schedule(picks)


def test_canonicalize_exhaustive_small_queues():
    """Every schedule of every decremental queue with <= 4 items and <= 4 steps (weights only relabel)."""
    total = 0
    for n in range(1, 5):
        for life in itertools.combinations_with_replacement(range(1, 5), n):
            inst = static_instance(DECREMENTAL_QUEUE, [(f"i{j}", j + 1) for j in range(n)], life, 4)
            for s in _all_schedules(inst):
                out = canonicalize_eef(inst, s)
                assert gain(inst, out) == gain(inst, s)
                assert {p for p in out.picks if p} == {p for p in s.picks if p}
                assert check_eef(inst, out)
                total += 1
    assert total > 1000


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 5), steps=st.integers(1, 5))
def test_canonicalize_random_dynamic_queues(seed, n, steps):
    inst = random_instance(DYNAMIC_QUEUE, n, steps, "uniform", seed)
    for s in itertools.islice(_all_schedules(inst), 200):
        out = canonicalize_eef(inst, s)
        assert gain(inst, out) == gain(inst, s)
        assert check_eef(inst, out)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6), flavor=st.sampled_from([DYNAMIC_SET, DYNAMIC_QUEUE, FIFO_QUEUE, DECREMENTAL_QUEUE]))
def test_simulated_picks_are_valid(seed, flavor):
    inst = random_instance(flavor, 7, 7, "uniform", seed)
    for alg in (Greedy(), FirstPending(), UniRand()):
        sched, g = simulate(inst, alg, seed)
        assert gain(inst, sched) == g


def test_span_instance_keeps_order():
    inst = span_instance(DYNAMIC_QUEUE, [1, 2, 3], [(0, 1), (1, 2), (1, 2)], 3)
    assert inst.trace.snapshots[1] == ("i0", "i1", "i2")
