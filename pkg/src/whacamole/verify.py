"""Desk-scale checks of every claimed bound, each returning a verdict instead of raising.

Every check takes a ``quick`` flag. Quick runs shrink the families and trial
counts so the whole table takes seconds; full runs use the acceptance sizes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import adversaries as adv
from . import analysis as an
from .algorithms import (
    DECQUE_RATIO,
    PHI,
    DecQueEFH,
    DecQueEFHParams,
    FIFOQueEH,
    FIFOQueEHParams,
    FirstPending,
    Greedy,
    LastPending,
    MarkAndPick,
    UniRand,
)
from .harness import (
    decremental_queue_family,
    dynamic_set_family,
    fifo_queue_family,
    named_instance,
    random_instance,
    scan_family,
)
from .model import DECREMENTAL_QUEUE, DYNAMIC_QUEUE, FIFO_QUEUE, Instance, Schedule, derive_rng, ratio, simulate
from .offline import availability_graph, optimal_gain_matching

E_RATIO = math.e / (math.e - 1)
TOL = 1e-9


@dataclass(frozen=True)
class Check:
    criterion: int
    claim: str
    measured: str
    bound: str
    passed: bool
    seconds: float = 0.0

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"[{self.verdict}] {self.criterion:>2}  {self.claim}: measured {self.measured}; bound {self.bound}"


def battery():
    """Deterministic algorithms every lower-bound game is played against."""
    return [Greedy(), DecQueEFH(), FIFOQueEH(), MarkAndPick(), FirstPending(), LastPending()]


def greedy_matching(instance: Instance, canonical: bool = True) -> tuple[float, Schedule]:
    """Heaviest item first, into its earliest free step. Not optimal; kept to show the oracle check bites."""
    g = availability_graph(instance)
    picks: list[str | None] = [None] * g.n_steps
    total = []
    for i in sorted(range(len(g.items)), key=lambda i: -g.weights[i]):
        for t in g.edges[i]:
            if picks[t] is None:
                picks[t] = g.items[i]
                total.append(g.weights[i])
                break
    return math.fsum(total), Schedule(tuple(picks))


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        check = fn(*args, **kwargs)
        return Check(**{**check.__dict__, "seconds": time.perf_counter() - t0})

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _random_worst(flavor, alg_factory, count, seed, nondecreasing=False, max_n=8, max_steps=8):
    alg = alg_factory()
    worst = 0.0
    for k in range(count):
        rng = derive_rng(seed, k, 1)
        n = int(rng.integers(1, max_n + 1))
        steps = int(rng.integers(1, max_steps + 1))
        inst = random_instance(flavor, n, steps, "uniform", seed, nondecreasing, stream=(k,))
        opt = optimal_gain_matching(inst, canonical=False)[0]
        worst = max(worst, ratio(opt, simulate(inst, alg)[1]))
    return worst


# --------------------------------------------------------------------------


@_timed
def check_greedy_sets(quick: bool = False, opt_fn=None) -> Check:
    fam = dynamic_set_family(3 if quick else 4, 3 if quick else 4, (1, 2, 3))
    scan = scan_family(fam, Greedy, opt_fn=opt_fn)
    game = adv.lb_two_item_set_game(Greedy())
    ok = scan.worst_ratio <= 2 and game.ratio == 2
    return Check(1, "Greedy on dynamic sets", f"worst {scan.worst_ratio:.6g} over {scan.count}, game {game.ratio}", "<= 2, game = 2", ok)


@_timed
def check_phi_game(quick: bool = False) -> Check:
    rs = [adv.lb_phi_queue_game(a).ratio for a in battery()]
    return Check(2, "phi queue lower bound", f"min {min(rs):.12f}", f">= {PHI - 1e-12:.12f}", min(rs) >= PHI - 1e-12)


@_timed
def check_lb_constants(quick: bool = False) -> Check:
    s3 = an.solve_lb_sequence(3)
    s5 = an.solve_lb_sequence(5)
    rs = [an.solve_lb_sequence(n).R for n in range(3, 13)]
    games = [adv.lb_decremental_queue_game(a, s3).ratio for a in battery()]
    ok = (
        1.6328 <= s3.R <= 1.6330
        and 0.6123 <= s3.z[2] <= 0.6124
        and 1.6360 <= s5.R <= 1.6375
        and all(a <= b for a, b in zip(rs, rs[1:]))
        and rs[-1] < 1.6379
        and min(games) >= 1.6329 - 1e-6
    )
    measured = f"R3={s3.R:.6f} z2={s3.z[2]:.6f} R5={s5.R:.6f} R12={rs[-1]:.7f} game min={min(games):.6f}"
    return Check(3, "decremental queue LB constants", measured, "R3~1.6329, R5~1.6367, R12<1.6379", ok)


@_timed
def check_decque(quick: bool = False, params: DecQueEFHParams | None = None, family_scan=None) -> Check:
    factory = (lambda: DecQueEFH(params)) if params else DecQueEFH
    if family_scan is None:
        fam = decremental_queue_family(*((4, 4) if quick else (6, 6)))
        family_scan = scan_family(fam, factory)
    rand = _random_worst(DECREMENTAL_QUEUE, factory, 2000 if quick else 100_000, seed=4)
    worst = max(family_scan.worst_ratio, rand)
    ok = worst <= DECQUE_RATIO + TOL
    return Check(4, "DecQueEFH upper bound", f"exhaustive {family_scan.worst_ratio:.6f} ({family_scan.count}), random {rand:.6f}", f"<= {DECQUE_RATIO:.6f}", ok)


@_timed
def check_fifo(quick: bool = False, params: FIFOQueEHParams | None = None) -> Check:
    factory = (lambda: FIFOQueEH(params)) if params else FIFOQueEH
    fam = fifo_queue_family(*((3, 4) if quick else (4, 5)))
    scan = scan_family(fam, factory)
    rand = _random_worst(FIFO_QUEUE, factory, 2000 if quick else 100_000, seed=5)
    eps = 1e-3
    tight = []
    for name in ("fifo_tight_1", "fifo_tight_2"):
        inst = named_instance(name, eps)
        tight.append(ratio(optimal_gain_matching(inst)[0], simulate(inst, factory())[1]))
    worst = max(scan.worst_ratio, rand)
    ok = worst <= 1.8 + TOL and min(tight) >= 1.8 - 5 * eps
    measured = f"exhaustive {scan.worst_ratio:.6f} ({scan.count}), random {rand:.6f}, tight {tight[0]:.5f}/{tight[1]:.5f}"
    return Check(5, "FIFOQueEH 1.8 and tightness", measured, "<= 1.8; tight >= 1.795", ok)


@_timed
def check_mark_and_pick(quick: bool = False) -> Check:
    """Runs the fallback variant: the literal marking rule can get stuck on valid input (see MarkAndPick)."""
    count = 2000 if quick else 100_000
    stuck = 0
    worst = 0.0
    for k in range(count):
        rng = derive_rng(6, k, 1)
        inst = random_instance(
            DYNAMIC_QUEUE, int(rng.integers(1, 9)), int(rng.integers(1, 9)), "uniform", 6, True, stream=(k,)
        )
        alg = MarkAndPick(on_stuck="heaviest")
        g = simulate(inst, alg)[1]
        stuck += alg.stuck_steps > 0
        worst = max(worst, ratio(optimal_gain_matching(inst, canonical=False)[0], g))
    measured = f"worst {worst:.9f} over {count}, fallback used on {stuck}"
    return Check(6, "MarkAndPick on nondecreasing queues", measured, f"<= {PHI:.9f}", worst <= PHI + TOL)


@_timed
def check_uniform(quick: bool = False) -> Check:
    table = an.e_table(50)
    bounds_ok = an.check_e_bounds(table)
    e30 = table[30, 30]
    res = adv.yao_uniform_process(UniRand(), 30, 2000 if quick else 100_000, seed=7)
    z = abs(res.alg_mean - float(e30)) / res.alg_stderr
    upper = all(Fraction(n) / table[n, n] < E_RATIO for n in range(1, 51))
    lower = all(table[n, n] / n >= 1 - (1 - Fraction(1, n)) ** n for n in range(1, 51))
    ok = bounds_ok and z <= 3 and upper and lower
    measured = f"bounds {bounds_ok}, UniRand mean {res.alg_mean:.4f} vs E30={float(e30):.4f} ({z:.2f} sigma)"
    return Check(7, "uniform decremental randomized", measured, "within 3 sigma; n/E < e/(e-1)", ok)


@_timed
def check_strategies(quick: bool = False) -> Check:
    rep = an.verify_strategy_lemmas(4 if quick else 5)
    table = an.e_table(8)
    same = all(an.expected_gain("td" * a, a, a) == table[a, a] for a in range(1, 9))
    return Check(8, "strategy lemmas", f"{sum(rep.checked.values())} checks, {len(rep.counterexamples)} counterexamples, (td)^a exact {same}", "0 counterexamples", rep.ok and same)


@_timed
def check_dominance(quick: bool = False) -> Check:
    rep = an.verify_dominance(range(1, 5 if quick else 7))
    measured = f"{rep.pairs} pairs, {len(rep.disagreements)} disagreements, {len(rep.update_violations)} update violations"
    return Check(9, "dominance characterizations", measured, "0", rep.ok)


@_timed
def check_rand_queue(quick: bool = False) -> Check:
    ns = list(range(1, 65)) + [100, 1000, 10**4, 10**5, 10**6]
    bounds = [an.randomized_queue_bound(n) for n in ns]
    sums_ok = all(abs(math.fsum(float(v) for v in b.v) - 1) <= 1e-12 for b in bounds)
    rs = [float(b.R) for b in bounds]
    monotone = all(a <= b for a, b in zip(rs, rs[1:]))
    exact1 = an.randomized_queue_bound(1).R == Fraction(4, 3)
    limit = abs(rs[-1] - E_RATIO)
    rng = derive_rng(10)
    r20 = float(an.randomized_queue_bound(20).R)
    worst = math.inf
    for _ in range(100 if quick else 1000):
        q = rng.dirichlet(np.ones(21))
        q = q / math.fsum(q)
        worst = min(worst, adv.lb_randomized_queue_pressure(q.tolist(), 20)[1])
    ok = sums_ok and monotone and exact1 and limit < 1e-5 and worst >= r20 - 1e-12
    measured = f"sum ok {sums_ok}, monotone {monotone}, |R(1e6)-e/(e-1)|={limit:.2e}, min pressure {worst:.6f} vs R(20)={r20:.6f}"
    return Check(10, "randomized queue bound", measured, "see criterion", ok)


@_timed
def check_oracle(quick: bool = False, opt_fn: Callable | None = None, families=None) -> Check:
    if families is None:
        families = [
            dynamic_set_family(*((3, 3) if quick else (4, 4))),
            decremental_queue_family(*((4, 4) if quick else (6, 6))),
        ]
    checked = bad = 0
    for fam in families:
        scan = scan_family(fam, None, opt_fn=opt_fn, check_oracle=True)
        checked += scan.oracle_checked
        bad += scan.oracle_mismatches
    return Check(11, "matching equals brute force", f"{bad} mismatches in {checked}", "0", bad == 0 and checked > 0)


@_timed
def check_memoryless(quick: bool = False) -> Check:
    n, T = (100, 10**6)
    res = adv.lb_memoryless_queue_game(Greedy(), n, T)
    closed = adv.closed_form_ratio(n, T, res.info["k"])
    small = adv.lb_memoryless_queue_game(Greedy(), 10, 50)
    small_acc = adv.lb_memoryless_queue_game(Greedy(), 10, 50, explicit=False)
    ok = abs(res.ratio - 2) < 1e-2 and res.ratio >= closed and abs(res.ratio - closed) < 1e-3
    ok = ok and small.ratio == small_acc.ratio
    return Check(12, "memoryless queue LB", f"ratio {res.ratio:.6f}, closed form {closed:.6f}", "|ratio-2| < 1e-2", ok)


CHECKS = [
    check_greedy_sets,
    check_phi_game,
    check_lb_constants,
    check_decque,
    check_fifo,
    check_mark_and_pick,
    check_uniform,
    check_strategies,
    check_dominance,
    check_rand_queue,
    check_oracle,
    check_memoryless,
]


def verify_all(quick: bool = True, only=None, echo: Callable[[str], None] | None = print, **overrides) -> list[Check]:
    """Run every check; keyword overrides go to the checks that accept them (e.g. params=, opt_fn=)."""
    out = []
    for fn in CHECKS:
        name = fn.__name__
        if only and name not in only:
            continue
        kwargs = {}
        if name == "check_decque" and "decque_params" in overrides:
            kwargs["params"] = overrides["decque_params"]
        if name == "check_fifo" and "fifo_params" in overrides:
            kwargs["params"] = overrides["fifo_params"]
        if name in ("check_oracle", "check_greedy_sets") and "opt_fn" in overrides:
            kwargs["opt_fn"] = overrides["opt_fn"]
        check = fn(quick=quick, **kwargs)
        out.append(check)
        if echo:
            echo(check.line())
    return out
