"""Command line: ``whacamole run|game|analyze|verify|gen``.

Exit codes: 0 pass, 1 a ratio ceiling or check failed, 2 bad config or input.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

from . import adversaries as adv
from . import analysis as an
from .algorithms import ALGORITHMS, make_algorithm
from .harness import NAMED_INSTANCES, BadConfig, ExperimentConfig, UnknownName, named_instance, random_instance, run_experiment
from .model import FLAVORS, InstanceError
from .verify import verify_all

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

GAMES = ("two-item-set", "phi-queue", "decremental-queue", "memoryless-queue", "adaptive-set", "yao-uniform")


def _default_seed() -> int:
    raw = os.environ.get("WHACAMOLE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise BadConfig(f"WHACAMOLE_SEED must be an integer, got {raw!r}") from None


def _jsonable(x):
    if isinstance(x, Fraction):
        return {"num": x.numerator, "den": x.denominator, "float": float(x)}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _emit(obj, out: str | None) -> None:
    text = json.dumps(_jsonable(obj), indent=1)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_run(args) -> int:
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.out:
        data["out"] = args.out
    if args.jobs:
        data["jobs"] = args.jobs
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = ExperimentConfig.from_dict(data, seed=_default_seed())
    report = run_experiment(cfg)
    for name, worst in sorted(report.worst.items()):
        print(f"{name}: worst ratio {worst:.9g} over {sum(r['algorithm'] == name for r in report.rows)} rows")
    for v in report.violations:
        print(f"VIOLATION {v['algorithm']}: {v['worst']:.9g} > {v['ceiling']}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_game(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    alg = make_algorithm(args.algorithm)
    name = args.adversary
    if name == "two-item-set":
        res = adv.lb_two_item_set_game(alg).to_dict()
    elif name == "phi-queue":
        res = adv.lb_phi_queue_game(alg).to_dict()
    elif name == "decremental-queue":
        res = adv.lb_decremental_queue_game(alg, an.solve_lb_sequence(args.n)).to_dict()
    elif name == "memoryless-queue":
        res = adv.lb_memoryless_queue_game(alg, args.n, args.T).to_dict()
    elif name == "adaptive-set":
        r = adv.lb_adaptive_set_game(alg, args.n, args.trials, seed)
        res = {**asdict(r), "ratio": r.ratio}
    else:
        r = adv.yao_uniform_process(alg, args.n, args.trials, seed)
        res = {**asdict(r), "ratio": r.ratio}
    print(f"{name} vs {alg.name}: ratio {res['ratio']:.9g}")
    if args.out:
        _emit(res, args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    what = args.what
    if what == "e_table":
        table = an.e_table(args.n)
        if args.csv:
            with open(args.csv, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["a", "p", "E"])
                for a, p, v in table.entries():
                    w.writerow([a, p, float(v)])
        _emit({"a_max": table.a_max, "rows": table.rows, "bounds_hold": an.check_e_bounds(table)}, args.out)
    elif what == "lb_sequence":
        seq = an.solve_lb_sequence(args.n)
        _emit(
            {"n": seq.n, "R": seq.R, "z": seq.z, "residual": seq.residual, "ordered": seq.ordered,
             "inequalities_hold": an.check_lb_inequalities(seq)},
            args.out,
        )
    else:
        b = an.randomized_queue_bound(args.n)
        _emit({"a": b.a, "M": b.M, "R": b.R, "v": b.v}, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify_all(quick=not args.full)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VIOLATION


def cmd_gen(args) -> int:
    if args.named:
        inst = named_instance(args.named, args.epsilon)
    else:
        seed = args.seed if args.seed is not None else _default_seed()
        inst = random_instance(args.flavor, args.n, args.steps, args.weight_dist, seed, args.nondecreasing)
    text = inst.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="whacamole", description="online collection from dynamic sets and queues")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--seed", type=int)
    run.add_argument("--jobs", type=int)
    run.set_defaults(func=cmd_run)

    game = sub.add_parser("game", help="play a lower-bound adversary")
    game.add_argument("--adversary", choices=GAMES, required=True)
    game.add_argument("--algorithm", choices=sorted(ALGORITHMS), required=True)
    game.add_argument("--n", type=int, default=3)
    game.add_argument("--T", type=int, default=1000)
    game.add_argument("--trials", type=int, default=10_000)
    game.add_argument("--seed", type=int)
    game.add_argument("--out")
    game.set_defaults(func=cmd_game)

    ana = sub.add_parser("analyze", help="exact tables and constants")
    ana.add_argument("what", choices=("e_table", "lb_sequence", "rand_queue_bound"))
    ana.add_argument("--n", type=int, default=10)
    ana.add_argument("--out")
    ana.add_argument("--csv")
    ana.set_defaults(func=cmd_analyze)

    ver = sub.add_parser("verify", help="check every claimed bound")
    ver.add_argument("--full", action="store_true", help="acceptance-size families (minutes)")
    ver.add_argument("--seed", type=int)
    ver.set_defaults(func=cmd_verify)

    gen = sub.add_parser("gen", help="write an instance as JSON")
    gen.add_argument("--flavor", choices=FLAVORS, default="dynamic_queue")
    gen.add_argument("--n", type=int, default=6)
    gen.add_argument("--steps", type=int, default=6)
    gen.add_argument("--weight-dist", default="uniform", choices=("uniform", "integer", "exponential"))
    gen.add_argument("--nondecreasing", action="store_true")
    gen.add_argument("--named", choices=NAMED_INSTANCES)
    gen.add_argument("--epsilon", type=float, default=1e-3)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BadConfig, UnknownName, InstanceError, OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
