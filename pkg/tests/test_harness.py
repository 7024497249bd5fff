import csv
import json

import pytest

from whacamole.harness import (
    NAMED_INSTANCES,
    BadConfig,
    ExperimentConfig,
    UnknownName,
    decremental_queue_family,
    dynamic_set_family,
    fifo_queue_family,
    named_instance,
    random_instance,
    run_experiment,
    scan_family,
    span_instance,
)
from whacamole.algorithms import PHI, Greedy
from whacamole.model import DECREMENTAL_QUEUE, DYNAMIC_QUEUE, DYNAMIC_SET, FIFO_QUEUE, FLAVORS, MalformedInstance, validate_instance


def _weights(inst):
    return [i.weight for i in inst.items.values()]


class TestRandom:
    @pytest.mark.parametrize("flavor", FLAVORS)
    def test_deterministic(self, flavor):
        a = random_instance(flavor, 6, 6, "uniform", 42).to_json()
        assert a == random_instance(flavor, 6, 6, "uniform", 42).to_json()

    def test_decremental_flags(self):
        rep = validate_instance(random_instance(DECREMENTAL_QUEUE, 6, 6, "uniform", 1))
        assert rep.is_decremental and rep.prefix_deletes_only

    def test_fifo_flag(self):
        assert validate_instance(random_instance(FIFO_QUEUE, 6, 6, "uniform", 1)).fifo_insertions

    @pytest.mark.parametrize("seed", range(30))
    def test_nondecreasing_dynamic_queue(self, seed):
        inst = random_instance(DYNAMIC_QUEUE, 8, 8, "uniform", seed, nondecreasing=True)
        assert validate_instance(inst).nondecreasing_weights

    @pytest.mark.parametrize("dist", ["uniform", "integer", "exponential", [1, 2]])
    def test_weight_dists(self, dist):
        inst = random_instance(DYNAMIC_SET, 5, 3, dist, 0)
        assert all(w > 0 for w in _weights(inst))

    def test_bad(self):
        with pytest.raises(BadConfig):
            random_instance("heap", 3, 3, "uniform", 0)
        with pytest.raises(BadConfig):
            random_instance(DYNAMIC_SET, 0, 3, "uniform", 0)
        with pytest.raises(BadConfig):
            random_instance(DYNAMIC_SET, 3, 3, "cauchy", 0)


class TestNamed:
    def test_fifo_tight_1(self):
        w = _weights(named_instance("fifo_tight_1", 1e-3))
        assert w == pytest.approx([2 / 3 - 1e-3, 2 / 3 - 1e-3, 2 / 3, 1])

    def test_fifo_tight_2(self):
        w = _weights(named_instance("fifo_tight_2", 1e-3))
        assert w == pytest.approx([2 / 3, 1 - 1e-3, 1 - 1e-3, 1])

    def test_queue_phi(self):
        assert _weights(named_instance("queue_phi")) == pytest.approx([1, PHI])

    def test_all_valid(self):
        for name in NAMED_INSTANCES:
            validate_instance(named_instance(name))

    def test_unknown(self):
        with pytest.raises(UnknownName):
            named_instance("fifo_tight_3")


class TestFamilies:
    def test_sizes(self):
        assert sum(p.size for p in dynamic_set_family(4, 4)) == 46_375
        assert sum(p.size for p in decremental_queue_family(6, 6)) == 2_186_600
        assert sum(p.size for p in fifo_queue_family(4, 5)) == 484_684

    def test_instances_valid(self):
        for fam in (dynamic_set_family(2, 3), decremental_queue_family(3, 3), fifo_queue_family(3, 3)):
            for pat in fam:
                for inst in pat.instances():
                    validate_instance(inst)

    def test_cap(self):
        with pytest.raises(BadConfig):
            dynamic_set_family(9, 4)

    def test_scan(self):
        scan = scan_family(dynamic_set_family(3, 3), Greedy, check_oracle=True)
        assert scan.count == scan.oracle_checked and scan.oracle_mismatches == 0
        assert 1 <= scan.worst_ratio <= 2


def test_span_instance_queue_prefix_rule():
    validate_instance(span_instance(DYNAMIC_QUEUE, [1, 2], [(0, 0), (0, 1)], 2))
    with pytest.raises(MalformedInstance):
        validate_instance(span_instance(DYNAMIC_QUEUE, [1, 2], [(0, 1), (0, 0)], 2))


def _config(tmp_path, **over):
    data = {
        "flavor": DYNAMIC_SET,
        "algorithms": [{"name": "greedy", "ceiling": 2.0}, "unirand"],
        "generator": {"kind": "exhaustive", "max_items": 3, "max_steps": 3, "grid": [1, 2]},
        "seed": 5,
        "trials": 8,
        "out": str(tmp_path / "out"),
    }
    data.update(over)
    return data


class TestExperiment:
    def test_report(self, tmp_path):
        rep = run_experiment(ExperimentConfig.from_dict(_config(tmp_path)))
        assert rep.passed and rep.worst["greedy"] <= 2
        with open(tmp_path / "out" / "report.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == [
            "instance_id", "flavor", "algorithm", "seed", "trials", "alg_gain", "alg_stderr", "opt_gain", "ratio"
        ]
        for r in rows:
            if float(r["alg_gain"]) > 0:
                assert float(r["ratio"]) == pytest.approx(float(r["opt_gain"]) / float(r["alg_gain"]))
        doc = json.loads((tmp_path / "out" / "report.json").read_text())
        assert doc["worst"]["greedy"] == rep.worst["greedy"]

    def test_reproducible(self, tmp_path):
        a = run_experiment(ExperimentConfig.from_dict(_config(tmp_path)))
        b = run_experiment(ExperimentConfig.from_dict(_config(tmp_path)))
        assert a.rows == b.rows

    def test_parallel_matches_serial(self, tmp_path):
        a = run_experiment(ExperimentConfig.from_dict(_config(tmp_path, out=None)))
        b = run_experiment(ExperimentConfig.from_dict(_config(tmp_path, out=None, jobs=2)))
        assert a.rows == b.rows

    def test_ceiling_violation(self, tmp_path):
        cfg = _config(tmp_path, algorithms=[{"name": "greedy", "ceiling": 1.2}])
        rep = run_experiment(ExperimentConfig.from_dict(cfg))
        assert not rep.passed and rep.violations[0]["algorithm"] == "greedy"

    def test_named_fifo(self, tmp_path):
        cfg = _config(
            tmp_path,
            flavor=FIFO_QUEUE,
            algorithms=["fifoque-eh"],
            generator={"kind": "named", "names": ["fifo_tight_1"], "epsilon": 1e-3},
        )
        rep = run_experiment(ExperimentConfig.from_dict(cfg))
        assert rep.worst["fifoque-eh"] >= 1.8 - 5e-3

    def test_random_needs_seed(self, tmp_path):
        with pytest.raises(BadConfig):
            ExperimentConfig.from_dict(_config(tmp_path, generator={"kind": "random", "n": 3, "steps": 3}))

    @pytest.mark.parametrize(
        "over",
        [
            {"flavor": "heap"},
            {"algorithms": []},
            {"algorithms": ["oracle"]},
            {"generator": {"kind": "exhaustive", "max_items": 9}},
            {"generator": {"kind": "magic"}},
            {"trials": 0},
        ],
    )
    def test_bad_configs(self, tmp_path, over):
        with pytest.raises(BadConfig):
            ExperimentConfig.from_dict(_config(tmp_path, **over))
