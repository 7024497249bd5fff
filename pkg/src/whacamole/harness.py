"""Instance generators, exhaustive families and the experiment runner."""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .algorithms import PHI, FIFOQueEHParams, make_algorithm
from .model import (
    DECREMENTAL_FLAVORS,
    DECREMENTAL_QUEUE,
    DYNAMIC_QUEUE,
    DYNAMIC_SET,
    FIFO_QUEUE,
    FLAVORS,
    QUEUE_FLAVORS,
    Insert,
    Instance,
    Item,
    StepOps,
    derive_rng,
    ratio,
    simulate,
)
from .offline import bruteforce_table, optimal_gain_matching

EXHAUSTIVE_MAX = 8


class BadConfig(ValueError):
    pass


class UnknownName(KeyError):
    pass


# --------------------------------------------------------------------------
# building blocks


def _span_layout(spans, n_steps: int, ids):
    """Per-step (index, anchor) insertions and per-step deletions for items given in queue order.

    Every item goes right behind the nearest earlier item still in the list
    when it arrives (insertions precede that step's deletions), so the list
    keeps the given order.
    """
    inserts: list[list[tuple[int, str | None]]] = [[] for _ in range(n_steps)]
    deletes: list[list[str]] = [[] for _ in range(n_steps)]
    for j, (start, end) in enumerate(spans):
        anchor = None
        for k in range(j - 1, -1, -1):
            if spans[k][0] <= start <= spans[k][1] + 1:
                anchor = ids[k]
                break
        inserts[start].append((j, anchor))
        if end + 1 < n_steps:
            deletes[end + 1].append(ids[j])
    return inserts, [tuple(d) for d in deletes]


def _from_layout(flavor, weights, ids, layout) -> Instance:
    inserts, deletes = layout
    return Instance(
        flavor,
        tuple(
            StepOps(tuple(Insert(Item(ids[j], float(weights[j])), a) for j, a in ins), dels)
            for ins, dels in zip(inserts, deletes)
        ),
    )


def span_instance(flavor: str, weights, spans, n_steps: int, ids=None) -> Instance:
    """Instance from items listed in queue order, each active on steps start..end inclusive."""
    ids = list(ids) if ids is not None else [f"i{j}" for j in range(len(weights))]
    return _from_layout(flavor, weights, ids, _span_layout(spans, n_steps, ids))


def _draw_weight(rng: np.random.Generator, dist) -> float:
    if isinstance(dist, (list, tuple)):
        return float(dist[int(rng.integers(len(dist)))])
    if dist == "uniform":
        return float(1.0 - rng.random())  # (0, 1]
    if dist == "integer":
        return float(rng.integers(1, 11))
    if dist == "exponential":
        return float(rng.exponential())
    raise BadConfig(f"unknown weight distribution {dist!r}")


def random_instance(
    flavor: str,
    n: int,
    steps: int,
    weight_dist="uniform",
    seed: int = 0,
    nondecreasing: bool = False,
    stream: tuple[int, ...] = (),
) -> Instance:
    """Random instance of the given flavor; the same arguments always give the same instance."""
    if flavor not in FLAVORS:
        raise BadConfig(f"unknown flavor {flavor!r}")
    if n < 1 or steps < 1:
        raise BadConfig("n and steps must be at least 1")
    rng = derive_rng(seed, *stream)
    is_queue = flavor in QUEUE_FLAVORS
    if flavor in DECREMENTAL_FLAVORS:
        arrivals = [0] * n
    else:
        arrivals = sorted([0] + [int(x) for x in rng.integers(0, steps, n - 1)])
    weights = [_draw_weight(rng, weight_dist) for _ in range(n)]
    if nondecreasing and flavor in (FIFO_QUEUE, DECREMENTAL_QUEUE):
        weights.sort()
    order: list[str] = []
    wmap: dict[str, float] = {}
    out: list[StepOps] = []
    nxt = 0
    for t in range(steps):
        ins = []
        while nxt < n and arrivals[nxt] == t:
            item_id = f"i{nxt}"
            w = weights[nxt]
            if flavor in (FIFO_QUEUE, DECREMENTAL_QUEUE):
                pos = len(order)
            elif nondecreasing and is_queue:
                lo = sum(1 for x in order if wmap[x] < w)
                hi = sum(1 for x in order if wmap[x] <= w)
                pos = int(rng.integers(lo, hi + 1))
            else:
                pos = int(rng.integers(len(order) + 1))
            ins.append(Insert(Item(item_id, w), order[pos - 1] if pos else None))
            order.insert(pos, item_id)
            wmap[item_id] = w
            nxt += 1
        dels: list[str] = []
        if t > 0 and order:
            if is_queue:
                if rng.random() < 0.5:
                    k = int(rng.integers(1, len(order) + 1))
                    dels = order[:k]
            else:
                dels = [x for x in order if rng.random() < 0.3]
        order = [x for x in order if x not in dels]
        out.append(StepOps(tuple(ins), tuple(dels)))
    return Instance(flavor, tuple(out))


# --------------------------------------------------------------------------
# named instances


def named_instance(name: str, epsilon: float = 1e-3, beta: float | None = None) -> Instance:
    b = FIFOQueEHParams().beta if beta is None else beta
    q = DECREMENTAL_QUEUE
    if name == "fifo_tight_1":
        return span_instance(
            FIFO_QUEUE, [b - epsilon, b - epsilon, b, 1.0], [(0, 0), (0, 1), (0, 3), (0, 3)], 4, "abcd"
        )
    if name == "fifo_tight_2":
        return span_instance(
            FIFO_QUEUE, [b, 1 - epsilon, 1 - epsilon, 1.0], [(0, 1), (0, 1), (0, 1), (0, 2)], 3, "abcd"
        )
    if name == "set_two_item":
        # what the adversary leaves an algorithm that took a first
        return span_instance(DYNAMIC_SET, [1.0, 1.0], [(0, 1), (0, 0)], 2, "ab")
    if name == "queue_phi":
        return span_instance(q, [1.0, PHI], [(0, 0), (0, 1)], 2, "ab")
    raise UnknownName(name)


NAMED_INSTANCES = ("fifo_tight_1", "fifo_tight_2", "set_two_item", "queue_phi")


# --------------------------------------------------------------------------
# exhaustive families
#
# A family is a list of patterns. A pattern fixes everything except the
# weights, so the brute-force optimum can be tabulated for all weight rows at
# once.


@dataclass(frozen=True)
class Pattern:
    flavor: str
    spans: tuple[tuple[int, int], ...]
    n_steps: int
    weight_rows: np.ndarray

    def instances(self) -> Iterator[Instance]:
        ids = [f"i{j}" for j in range(len(self.spans))]
        layout = _span_layout(self.spans, self.n_steps, ids)
        for row in self.weight_rows.tolist():
            yield _from_layout(self.flavor, row, ids, layout)

    def edges(self):
        return tuple(range(s, e + 1) for s, e in self.spans)

    @property
    def size(self) -> int:
        return len(self.weight_rows)


def _weight_rows(n: int, grid, equal_runs=()) -> np.ndarray:
    """All weight vectors over grid; inside each run of interchangeable items, weights are nondecreasing."""
    rows = []
    for w in itertools.product(grid, repeat=n):
        if all(w[i] <= w[i + 1] for i in equal_runs):
            rows.append(w)
    return np.array(rows, dtype=float).reshape(len(rows), n)


def _check_bounds(items, steps):
    if items > EXHAUSTIVE_MAX or steps > EXHAUSTIVE_MAX:
        raise BadConfig(f"exhaustive bounds capped at {EXHAUSTIVE_MAX} items and steps")


def dynamic_set_family(max_items: int = 4, max_steps: int = 4, grid=(1, 2, 3)) -> list[Pattern]:
    """Every multiset of (weight, active interval) with intervals inside max_steps steps."""
    _check_bounds(max_items, max_steps)
    intervals = [(s, e) for s in range(max_steps) for e in range(s, max_steps)]
    out = []
    for n in range(1, max_items + 1):
        for spans in itertools.combinations_with_replacement(intervals, n):
            same = tuple(i for i in range(n - 1) if spans[i] == spans[i + 1])
            out.append(Pattern(DYNAMIC_SET, spans, max_steps, _weight_rows(n, grid, same)))
    return out


def decremental_queue_family(
    max_items: int = 6, max_steps: int = 6, grid=(0.25, 0.5, 0.75, 1.0)
) -> list[Pattern]:
    """All items present at step 0; lifetimes nondecreasing along the queue."""
    _check_bounds(max_items, max_steps)
    out = []
    for n in range(1, max_items + 1):
        rows = _weight_rows(n, grid)
        for life in itertools.combinations_with_replacement(range(1, max_steps + 1), n):
            spans = tuple((0, lt - 1) for lt in life)
            out.append(Pattern(DECREMENTAL_QUEUE, spans, max_steps, rows))
    return out


def fifo_queue_family(max_items: int = 4, max_steps: int = 5, grid=(0.25, 0.5, 0.75, 1.0)) -> list[Pattern]:
    """Tail insertions and prefix deletions: arrivals and departures both nondecreasing along the queue."""
    _check_bounds(max_items, max_steps)
    out = []
    for n in range(1, max_items + 1):
        rows = _weight_rows(n, grid)
        for arr in itertools.combinations_with_replacement(range(max_steps), n):
            for dep in itertools.combinations_with_replacement(range(max_steps), n):
                if all(a <= d for a, d in zip(arr, dep)):
                    out.append(Pattern(FIFO_QUEUE, tuple(zip(arr, dep)), max_steps, rows))
    return out


FAMILIES = {
    "dynamic_set": dynamic_set_family,
    "decremental_queue": decremental_queue_family,
    "fifo_queue": fifo_queue_family,
}


@dataclass
class FamilyScan:
    count: int = 0
    worst_ratio: float = 0.0
    worst_instance: Instance | None = None
    oracle_checked: int = 0
    oracle_mismatches: int = 0
    first_mismatch: Instance | None = None


def scan_family(
    patterns: list[Pattern],
    alg_factory: Callable | None = None,
    opt_fn: Callable | None = None,
    check_oracle: bool = False,
) -> FamilyScan:
    """Worst OPT/ALG ratio over a family, optionally comparing opt_fn with brute force on every instance."""
    scan = FamilyScan()
    if opt_fn is None:
        opt_fn = lambda inst: optimal_gain_matching(inst, canonical=False)  # noqa: E731
    alg = alg_factory() if alg_factory is not None else None
    for pat in patterns:
        brute = bruteforce_table(pat.edges(), pat.n_steps, pat.weight_rows) if check_oracle else None
        for j, inst in enumerate(pat.instances()):
            opt = opt_fn(inst)[0]
            scan.count += 1
            if brute is not None:
                scan.oracle_checked += 1
                if opt != brute[j]:
                    scan.oracle_mismatches += 1
                    if scan.first_mismatch is None:
                        scan.first_mismatch = inst
            if alg is not None:
                r = ratio(opt, simulate(inst, alg)[1])
                if r > scan.worst_ratio:
                    scan.worst_ratio, scan.worst_instance = r, inst
    return scan


# --------------------------------------------------------------------------
# experiments

CSV_COLUMNS = (
    "instance_id",
    "flavor",
    "algorithm",
    "seed",
    "trials",
    "alg_gain",
    "alg_stderr",
    "opt_gain",
    "ratio",
)


@dataclass
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)
    ceiling: float | None = None

    def build(self):
        return make_algorithm(self.name, **self.params)


@dataclass
class ExperimentConfig:
    flavor: str
    algorithms: list[AlgorithmSpec]
    generator: dict
    seed: int = 0
    trials: int = 100
    out: str | None = None
    jobs: int = 1
    tolerance: float = 1e-9

    @classmethod
    def from_dict(cls, data: dict, seed: int | None = None) -> "ExperimentConfig":
        try:
            algs = [
                AlgorithmSpec(a) if isinstance(a, str) else AlgorithmSpec(a["name"], a.get("params", {}), a.get("ceiling"))
                for a in data["algorithms"]
            ]
            cfg = cls(
                flavor=data.get("flavor", ""),
                algorithms=algs,
                generator=dict(data["generator"]),
                seed=int(data["seed"]) if "seed" in data else (seed if seed is not None else 0),
                trials=int(data.get("trials", 100)),
                out=data.get("out"),
                jobs=int(data.get("jobs", 1)),
                tolerance=float(data.get("tolerance", 1e-9)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BadConfig(f"bad experiment config: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        kind = self.generator.get("kind")
        if kind not in ("random", "exhaustive", "named"):
            raise BadConfig(f"generator kind must be random, exhaustive or named, got {kind!r}")
        if kind != "named" and self.flavor not in FLAVORS:
            raise BadConfig(f"unknown flavor {self.flavor!r}")
        if kind == "random" and "seed" not in self.generator:
            raise BadConfig("random generator needs a seed")
        if kind == "exhaustive":
            _check_bounds(self.generator.get("max_items", 4), self.generator.get("max_steps", 4))
        if not self.algorithms:
            raise BadConfig("no algorithms configured")
        for a in self.algorithms:
            try:
                a.build()
            except (ValueError, TypeError) as exc:
                raise BadConfig(str(exc)) from exc
        if self.trials < 1:
            raise BadConfig("trials must be positive")


def config_instances(cfg: ExperimentConfig) -> list[tuple[str, Instance]]:
    g = cfg.generator
    kind = g["kind"]
    if kind == "named":
        eps = float(g.get("epsilon", 1e-3))
        try:
            return [(name, named_instance(name, eps)) for name in g["names"]]
        except UnknownName as exc:
            raise BadConfig(f"unknown named instance {exc}") from None
    if kind == "random":
        out = []
        for k in range(int(g.get("count", 1))):
            inst = random_instance(
                cfg.flavor,
                int(g["n"]),
                int(g["steps"]),
                g.get("weight_dist", "uniform"),
                int(g["seed"]),
                bool(g.get("nondecreasing", False)),
                stream=(k,),
            )
            out.append((f"random-{g['seed']}-{k}", inst))
        return out
    family = FAMILIES.get(cfg.flavor)
    if family is None:
        raise BadConfig(f"no exhaustive family for {cfg.flavor}")
    kwargs = {k: g[k] for k in ("max_items", "max_steps", "grid") if k in g}
    out = []
    for p, pat in enumerate(family(**kwargs)):
        for j, inst in enumerate(pat.instances()):
            out.append((f"exh-{p}-{j}", inst))
    return out


def _row(args) -> list[dict]:
    inst_id, inst_json, specs, seed, trials = args
    inst = Instance.from_json(inst_json)
    opt = optimal_gain_matching(inst)[0]
    rows = []
    for spec in specs:
        alg = spec.build()
        n = trials if alg.randomized else 1
        gains = np.array([simulate(inst, alg, seed, (t,))[1] for t in range(n)])
        mean = math.fsum(gains) / n
        stderr = float(gains.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        rows.append(
            {
                "instance_id": inst_id,
                "flavor": inst.flavor,
                "algorithm": spec.name,
                "seed": seed,
                "trials": n,
                "alg_gain": mean,
                "alg_stderr": stderr,
                "opt_gain": opt,
                "ratio": ratio(opt, mean),
            }
        )
    return rows


@dataclass
class RatioReport:
    rows: list[dict]
    worst: dict[str, float]
    violations: list[dict]
    config: dict

    @property
    def passed(self) -> bool:
        return not self.violations

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "report.csv"
        with csv_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(self.rows)
        json_path = out / "report.json"
        json_path.write_text(
            json.dumps(
                {"config": self.config, "worst": self.worst, "violations": self.violations, "rows": self.rows},
                indent=1,
            ),
            encoding="utf-8",
        )
        return csv_path, json_path


def run_experiment(cfg: ExperimentConfig) -> RatioReport:
    cfg.validate()
    work = [
        (inst_id, inst.to_json(), cfg.algorithms, cfg.seed, cfg.trials)
        for inst_id, inst in config_instances(cfg)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_row, work, chunksize=64))
    else:
        chunks = [_row(w) for w in work]
    rows = sorted((r for c in chunks for r in c), key=lambda r: (r["instance_id"], r["algorithm"]))
    worst: dict[str, float] = {}
    for r in rows:
        worst[r["algorithm"]] = max(worst.get(r["algorithm"], 0.0), r["ratio"])
    violations = []
    for spec in cfg.algorithms:
        if spec.ceiling is not None and worst.get(spec.name, 0.0) > spec.ceiling + cfg.tolerance:
            violations.append({"algorithm": spec.name, "worst": worst[spec.name], "ceiling": spec.ceiling})
    config = asdict(cfg)
    report = RatioReport(rows, worst, violations, config)
    if cfg.out:
        report.write(cfg.out)
    return report

