"""Exact analysis of the uniform decremental game, set dominance, and lower-bound constants."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

STRATEGY_MAX_ACTIVE = 12


class Infeasible(ValueError):
    pass


class TooLarge(ValueError):
    pass


class NoSolution(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# E_{a,p}: expected number of items an always-collecting player gets when a
# items are active and p of them are pending, against take-and-delete.


class ETable:
    def __init__(self, rows: list[list[Fraction]]):
        self.rows = rows

    @property
    def a_max(self) -> int:
        return len(self.rows) - 1

    def __getitem__(self, ap: tuple[int, int]) -> Fraction:
        a, p = ap
        return self.rows[a][p]

    def entries(self):
        for a, row in enumerate(self.rows):
            for p, v in enumerate(row):
                yield a, p, v


def e_table(a_max: int) -> ETable:
    if a_max < 1:
        raise ValueError("a_max must be at least 1")
    rows: list[list[Fraction]] = [[Fraction(0)]]
    for a in range(1, a_max + 1):
        row = [Fraction(0), Fraction(1)]
        prev = rows[a - 1]
        for p in range(2, a + 1):
            row.append(Fraction(a - p + 1, a) * prev[p - 1] + Fraction(p - 1, a) * prev[p - 2] + 1)
        rows.append(row)
    return ETable(rows)


def e_lower_bound(a: int, p: int) -> Fraction:
    """a * (1 - (1 - 1/a)^p), exactly."""
    if a == 0:
        return Fraction(0)
    return a * (1 - (1 - Fraction(1, a)) ** p)


def e_upper_bound_interval(a: int, p: int):
    """(a+1)(1 - e^{-p/a}) + 1 as an outward-rounded interval."""
    iv = mpmath.iv
    return (a + 1) * (1 - iv.exp(-iv.mpf(p) / a)) + 1


def _mpf_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(man) * (Fraction(2) ** exp)


def e_bound_violations(table: ETable) -> list[tuple[int, int, str]]:
    bad = []
    for a, p, v in table.entries():
        if a == 0:
            continue
        if v < e_lower_bound(a, p):
            bad.append((a, p, "lower"))
        if v > _mpf_to_fraction(e_upper_bound_interval(a, p).a):
            bad.append((a, p, "upper"))
    return bad


def check_e_bounds(table: ETable) -> bool:
    return not e_bound_violations(table)


# --------------------------------------------------------------------------
# Adversary strategies over {t, d}


def is_feasible(word: str, a: int) -> bool:
    if set(word) - {"t", "d"}:
        return False
    if word.count("d") != a:
        return False
    balance = 0
    for ch in reversed(word):
        balance += 1 if ch == "d" else -1
        if balance < 0:
            return False
    return True


def expected_gain(word: str, a: int, p: int) -> Fraction:
    """Exact expected collections of a uniformly random collector against the word."""
    if a > STRATEGY_MAX_ACTIVE:
        raise TooLarge(f"a={a} exceeds the state-space guard {STRATEGY_MAX_ACTIVE}")
    if not 0 <= p <= a or not is_feasible(word, a):
        raise Infeasible(f"{word!r} is not a feasible strategy for (a={a}, p={p})")
    dist = {p: Fraction(1)}
    total = Fraction(0)
    active = a
    for ch in word:
        nxt: dict[int, Fraction] = {}
        if ch == "t":
            for q, pr in dist.items():
                if q > 0:
                    total += pr
                    nxt[q - 1] = nxt.get(q - 1, 0) + pr
                else:
                    nxt[0] = nxt.get(0, 0) + pr
        else:
            for q, pr in dist.items():
                hit = Fraction(q, active)
                if q > 0:
                    nxt[q - 1] = nxt.get(q - 1, 0) + pr * hit
                if hit != 1:
                    nxt[q] = nxt.get(q, 0) + pr * (1 - hit)
            active -= 1
        dist = nxt
    return total


def feasible_words(a: int):
    """Every feasible word for a active items, shortest first."""
    for k in range(a + 1):
        for t_pos in itertools.combinations(range(a + k), k):
            chars = ["d"] * (a + k)
            for i in t_pos:
                chars[i] = "t"
            word = "".join(chars)
            if is_feasible(word, a):
                yield word


@dataclass
class LemmaReport:
    checked: dict[str, int] = field(default_factory=lambda: {"monotone": 0, "td_inversion": 0, "k_strategy": 0})
    counterexamples: list[tuple] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def verify_strategy_lemmas(a_max: int) -> LemmaReport:
    if a_max > 6:
        raise TooLarge("exhaustive lemma check is capped at a_max = 6")
    rep = LemmaReport()
    natural = {k: expected_gain("td" * k, k, k) for k in range(a_max + 1)}
    for a in range(a_max + 1):
        words = list(feasible_words(a))
        values = {w: [expected_gain(w, a, p) for p in range(a + 1)] for w in words}
        for w, vals in values.items():
            for p in range(a):
                rep.checked["monotone"] += 1
                if vals[p + 1] < vals[p]:
                    rep.counterexamples.append(("monotone", w, a, p))
            for i in range(len(w) - 1):
                if w[i : i + 2] != "td":
                    continue
                swapped = w[:i] + "dt" + w[i + 2 :]
                if swapped not in values:
                    continue
                for p in range(a + 1):
                    rep.checked["td_inversion"] += 1
                    if vals[p] < values[swapped][p]:
                        rep.counterexamples.append(("td_inversion", w, a, p))
            k = w.count("t")
            rep.checked["k_strategy"] += 1
            if vals[a] < natural[k]:
                rep.counterexamples.append(("k_strategy", w, a, a))
    return rep


# --------------------------------------------------------------------------
# Set dominance


def sharp(u: float, values) -> int:
    return sum(1 for t in values if t >= u)


def dominates(x, y, scale: float = 1) -> bool:
    """X dominates scale*Y: Y is empty, or max X >= scale*max Y and the remainders dominate."""
    xs = set(x)
    ys = set(y)
    while ys:
        if not xs:
            return False
        mx, my = max(xs), max(ys)
        if mx < scale * my:
            return False
        xs.discard(mx)
        ys.discard(my)
    return True


def dominates_injection(x, y, scale: float = 1) -> bool:
    """Is there an injection f: Y -> X with f(y) >= scale*y?  Kuhn's augmenting paths."""
    xs, ys = list(x), list(y)
    owner: dict[int, int] = {}

    def augment(j: int, seen: set[int]) -> bool:
        for i, xv in enumerate(xs):
            if xv >= scale * ys[j] and i not in seen:
                seen.add(i)
                if i not in owner or augment(owner[i], seen):
                    owner[i] = j
                    return True
        return False

    return all(augment(j, set()) for j in range(len(ys)))


def dominates_counting(x, y, scale: float = 1) -> bool:
    """sharp_u(X) >= sharp_u(scale*Y) for every threshold u (only the values of scale*Y matter)."""
    sy = [scale * v for v in y]
    return all(sharp(u, x) >= sharp(u, sy) for u in sy)


def subsets(universe) -> list[frozenset]:
    u = sorted(universe)
    return [frozenset(c) for r in range(len(u) + 1) for c in itertools.combinations(u, r)]


@dataclass
class DominanceReport:
    pairs: int = 0
    disagreements: list = field(default_factory=list)
    update_checks: dict = field(default_factory=lambda: {"i": 0, "ii": 0, "iii": 0})
    update_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements and not self.update_violations


def verify_dominance(universe=range(1, 7)) -> DominanceReport:
    """All ordered subset pairs: the three characterizations agree, and the update rules keep dominance.

    The insertion rule is checked for every y in Z - Y and every new x in Z - X
    with x >= max{z in Z - X : z <= y} (no constraint when that set is empty).
    """
    z = frozenset(universe)
    subs = subsets(z)
    rep = DominanceReport()
    for x in subs:
        for y in subs:
            rep.pairs += 1
            d = dominates(x, y)
            if d != dominates_injection(x, y) or d != dominates_counting(x, y):
                rep.disagreements.append((sorted(x), sorted(y)))
            if not d or not y:
                continue
            rep.update_checks["i"] += 1
            if not dominates(x - {min(x)}, y - {min(y)}):
                rep.update_violations.append(("i", sorted(x), sorted(y), None, None))
            for v in x & y:
                rep.update_checks["ii"] += 1
                if not dominates(x - {v}, y - {v}):
                    rep.update_violations.append(("ii", sorted(x), sorted(y), v, None))
            free = z - x
            for new_y in z - y:
                below = [v for v in free if v <= new_y]
                floor = max(below) if below else -math.inf
                for new_x in free:
                    if new_x < floor:
                        continue
                    rep.update_checks["iii"] += 1
                    if not dominates(x | {new_x}, y | {new_y}):
                        rep.update_violations.append(("iii", sorted(x), sorted(y), new_x, new_y))
    return rep


# --------------------------------------------------------------------------
# Deterministic decremental-queue lower bound


@dataclass(frozen=True)
class LBSequence:
    n: int
    z: dict[int, float]  # keys 1..2n-2 and 2n
    R: float
    residual: float

    @property
    def indices(self) -> list[int]:
        return sorted(self.z)

    def queue_order(self) -> list[int]:
        """Indices in list order: evens ascending, then odds descending; 0 stands for the weight-1 item."""
        n = self.n
        evens = list(range(2, 2 * n - 1, 2)) + [2 * n]
        odds = list(range(2 * n - 3, 0, -2))
        return evens + odds + [0]

    @property
    def ordered(self) -> bool:
        vals = [1.0] + [self.z[i] for i in self.indices] + [0.0]
        return all(a > b for a, b in zip(vals, vals[1:]))


def _odd(z: dict[int, float], i: int, n: int) -> float:
    # there is no item 2n-1; its role in the sums is played by z_{2n}
    return z[2 * n] if i == 2 * n - 1 else z[i]


def _lb_forward(R: float, n: int) -> tuple[dict[int, float], float]:
    z: dict[int, float] = {}
    gap = 0.0
    for j in range(n):
        odd_sum = math.fsum(z[2 * i - 1] for i in range(1, j + 1))
        z[2 * j + 2] = (1 + math.fsum(z[i] for i in range(1, j + 1))) / R - odd_sum
        candidate = R * (1 + odd_sum) - 1 - math.fsum(z[i] for i in range(1, 2 * j + 1))
        if j < n - 1:
            z[2 * j + 1] = candidate
        else:
            gap = candidate - z[2 * n]
    return z, gap


def solve_lb_sequence(n: int, lo: float = 1.6, hi: float = 1.7) -> LBSequence:
    """Equalize all 2n constraints and bisect on R; the other unknowns follow by substitution.

    Only the closing constraint (z_{2n} from both families) is left open, and
    its gap changes sign exactly once on the bracket.
    """
    if not 2 <= n <= 12:
        raise ValueError("n must be in 2..12")
    g_lo = _lb_forward(lo, n)[1]
    g_hi = _lb_forward(hi, n)[1]
    if g_lo * g_hi > 0:
        raise NoSolution(f"no sign change of the closing constraint on [{lo}, {hi}] for n={n}")
    while True:
        mid = (lo + hi) / 2
        if mid <= lo or mid >= hi:
            break
        g_mid = _lb_forward(mid, n)[1]
        if g_mid == 0:
            lo = hi = mid
            break
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    R = min((lo, hi), key=lambda r: abs(_lb_forward(r, n)[1]))
    z, _ = _lb_forward(R, n)
    seq = LBSequence(n, z, R, 0.0)
    return LBSequence(n, z, R, max_lb_residual(seq))


def lb_constraints(seq: LBSequence) -> list[tuple[str, int, float, float]]:
    """Both families of constraints as (kind, j, lhs, rhs) with lhs <= rhs required."""
    n, z, R = seq.n, seq.z, seq.R
    out = []
    for j in range(n):
        odd_sum = math.fsum(z[2 * i - 1] for i in range(1, j + 1))
        out.append(("odd", j, R * (1 + odd_sum), 1 + math.fsum(_odd(z, i, n) for i in range(1, 2 * j + 2))))
        out.append(("even", j, R * (z[2 * j + 2] + odd_sum), 1 + math.fsum(z[i] for i in range(1, j + 1))))
    return out


def max_lb_residual(seq: LBSequence) -> float:
    return max(abs(l - r) for _, _, l, r in lb_constraints(seq))


def check_lb_inequalities(seq: LBSequence, slack: float = 1e-9) -> bool:
    if not seq.ordered:
        return False
    return all(lhs <= rhs + slack for _, _, lhs, rhs in lb_constraints(seq))


def quintic_root() -> float:
    """Real root of x^5 + x^4 + 5x^3 - x^2 - 1 (the n = 3 case, x = z_2)."""
    roots = np.roots([1, 1, 5, -1, 0, -1])
    real = [r.real for r in roots if abs(r.imag) < 1e-12]
    assert len(real) == 1
    return float(mpmath.findroot(lambda x: x**5 + x**4 + 5 * x**3 - x**2 - 1, real[0]))


# --------------------------------------------------------------------------
# Memoryless randomized queue lower bound


@dataclass(frozen=True)
class RandQueueBound:
    a: object
    M: object
    R: object
    v: list


def randomized_queue_bound(n: int, exact: bool | None = None) -> RandQueueBound:
    """Adversary mixture for items a^0..a^n with a = 1 + 1/n.

    Exact rationals by default for small n; floats beyond that.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if exact is None:
        exact = n <= 64
    if exact:
        a = 1 + Fraction(1, n)
        top = a ** (n + 1)
        M = top - n * (a - 1)
        v = [a ** (n - k) * (a - 1) / M for k in range(n)] + [(a - n * (a - 1)) / M]
        return RandQueueBound(a, M, top / M, v)
    step = 1 / n  # a - 1, kept separate so n*(a-1) does not lose digits
    a = 1 + step
    log_a = math.log1p(step)
    top = math.exp((n + 1) * log_a)
    M = top - n * step
    k = np.arange(n)
    v = np.exp((n - k) * log_a) * step / M
    v = [float(x) for x in v] + [(a - n * step) / M]
    return RandQueueBound(a, M, top / M, v)
