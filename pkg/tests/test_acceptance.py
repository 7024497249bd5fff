"""Acceptance criteria 1-12 at full size. Each test records one summary line (see conftest)."""

import time

import pytest

from whacamole import verify
from whacamole.algorithms import DecQueEFH
from whacamole.harness import decremental_queue_family, dynamic_set_family, scan_family


@pytest.fixture(scope="session")
def decque_scan():
    """One pass over the decremental family: DecQueEFH ratios and the brute-force oracle together."""
    t0 = time.perf_counter()
    scan = scan_family(decremental_queue_family(6, 6), DecQueEFH, check_oracle=True)
    return scan, time.perf_counter() - t0


def _record(criterion, check, extra_ok=True, note=""):
    measured = check.measured + (f"; {note}" if note else "") + f" [{check.seconds:.1f}s]"
    criterion(check.criterion, check.claim, measured, check.passed and extra_ok)
    assert check.passed, check.line()
    assert extra_ok, note


def test_criterion_01_greedy_sets(criterion):
    c = verify.check_greedy_sets()
    _record(criterion, c, c.seconds < 60, f"runtime {c.seconds:.1f}s < 60s")


def test_criterion_02_phi_game(criterion):
    _record(criterion, verify.check_phi_game())


def test_criterion_03_lb_constants(criterion):
    _record(criterion, verify.check_lb_constants())


def test_criterion_04_decque(criterion, decque_scan):
    scan, scan_seconds = decque_scan
    c = verify.check_decque(family_scan=scan)
    total = scan_seconds + c.seconds
    _record(criterion, c, total < 300, f"runtime {total:.1f}s < 300s")


def test_criterion_05_fifo(criterion):
    _record(criterion, verify.check_fifo())


def test_criterion_06_mark_and_pick(criterion):
    _record(criterion, verify.check_mark_and_pick())


def test_criterion_07_uniform(criterion):
    _record(criterion, verify.check_uniform())


def test_criterion_08_strategies(criterion):
    _record(criterion, verify.check_strategies())


def test_criterion_09_dominance(criterion):
    c = verify.check_dominance()
    _record(criterion, c, c.seconds < 120, f"runtime {c.seconds:.1f}s < 120s")


def test_criterion_10_rand_queue(criterion):
    _record(criterion, verify.check_rand_queue())


def test_criterion_11_oracle(criterion, decque_scan):
    scan, _ = decque_scan
    c = verify.check_oracle(families=[dynamic_set_family(4, 4)])
    bad = scan.oracle_mismatches
    note = f"decremental family: {bad} mismatches in {scan.oracle_checked}"
    _record(criterion, c, bad == 0 and scan.oracle_checked == scan.count, note)


def test_criterion_12_memoryless(criterion):
    _record(criterion, verify.check_memoryless())
