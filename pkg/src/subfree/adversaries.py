"""Adaptive hardness streams that certify per-round ratio ceilings.

Each driver owns its objective and matroid, emits the next element as a
function of the algorithm's visible feasible set, and keeps an exact
closed-form optimum for the arrived prefix, so a run certifies
min over rounds of f(S) / OPT(prefix) without any brute force.

Families:

* ``UniformHardnessDriver`` - interval-coverage phases against a k-uniform
  constraint: each phase floods 2k thin geometric-weight intervals, then
  offers the union of exactly the intervals the algorithm kept (worthless
  to it, one cheap quota slot for the optimum).
* ``PartitionMonotoneDriver`` - capacity-1 parts; phase i offers the item
  once in the contested part and once in a private part, with weights from
  sum_{j<=i+1} a_j = alpha * a_i, driven until the recurrence
  a_{i+2} - alpha a_{i+1} + alpha a_i = 0 goes negative.
* ``PartitionGeneralDriver`` - the two-copy variant whose weights follow
  b_{i+1} - (alpha^2 - alpha + 1) b_i + alpha^2 b_{i-1} = 0; the driver
  terminates early whenever the algorithm's visible choices allow it.

Weight recurrences run in exact rational arithmetic: the sign of the first
negative term decides termination, and the designed ratio equalities must
survive thousands of additions untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from .matroid import PartitionMatroid, UniformMatroid
from .objective import IntervalCoverage, WeightedCoverage
from .tracker import InvariantViolation, OnlineState

ALPHA_INF = 3.14619  # only used for range warnings
PHASE_CAP = 400


@dataclass
class Stop:
    reason: str
    ratio: Optional[Fraction] = None
    opt: Optional[Fraction] = None
    algorithm_value: Optional[Fraction] = None


@dataclass
class AdversaryOutcome:
    stop: Stop
    min_ratio: object
    min_round: int
    rounds: List[dict] = field(default_factory=list)


class AdversaryDriver:
    """Stateful emitter; call ``next_element`` with the current visible set."""

    objective = None
    matroid = None
    range_warning: Optional[str] = None

    def next_element(self, visible: frozenset):
        raise NotImplementedError

    def current_opt(self):
        raise NotImplementedError

    def _stop(self, reason: str, visible: frozenset) -> Stop:
        opt = self.current_opt()
        val = self.objective.value(visible)
        ratio = None if opt <= 0 else Fraction(val) / Fraction(opt)
        self.terminated = Stop(reason, ratio=ratio, opt=opt, algorithm_value=val)
        return self.terminated


def monotone_weight_sequence(alpha: Fraction, cap: int = PHASE_CAP) -> List[Fraction]:
    """a_1, a_2, ... up to and including the first negative term."""
    alpha = Fraction(alpha)
    seq = [Fraction(1)]
    total = Fraction(1)
    for _ in range(cap):
        nxt = alpha * seq[-1] - total
        seq.append(nxt)
        if nxt < 0:
            break
        total += nxt
    return seq


def general_weight_sequences(alpha: Fraction, cap: int = PHASE_CAP):
    """(a_i, b_i) pairs up to and including the first nonpositive b."""
    alpha = Fraction(alpha)
    a = [Fraction(1)]
    b: List[Fraction] = []
    sum_a, sum_b = Fraction(1), Fraction(0)
    for _ in range(cap):
        bi = alpha * (a[-1] + sum_b) - (sum_a + a[-1] + sum_b)
        b.append(bi)
        if bi <= 0:
            break
        sum_b += bi
        a.append(a[-1] + alpha * bi)
        sum_a += a[-1]
    return a, b


class PartitionMonotoneDriver(AdversaryDriver):
    """Contested part 0 plus one private part per phase, capacity 1 each."""

    def __init__(self, alpha, phase_cap: int = PHASE_CAP):
        self.alpha = Fraction(alpha)
        if not 1 <= self.alpha < 4:
            self.range_warning = f"alpha={alpha} outside [1, 4); no forced-failure guarantee"
        self.weights = monotone_weight_sequence(self.alpha, phase_cap)
        # phases run while the weight stays nonnegative
        self.n_phases = len(self.weights) - 1 if self.weights[-1] < 0 else len(self.weights)
        self.terminated: Optional[Stop] = None
        items = {f"x{i}": self.weights[i - 1] for i in range(1, self.n_phases + 1)}
        covers = {}
        part_of = {}
        for i in range(1, self.n_phases + 1):
            for part in ("0", str(i)):
                el = f"x{i}|{part}"
                covers[el] = {f"x{i}"}
                part_of[el] = part
        capacity = {str(p): 1 for p in range(self.n_phases + 1)}
        self.objective = WeightedCoverage(items, covers)
        self.matroid = PartitionMatroid(part_of, capacity)
        self.i = 1
        self.stage = "emit_contested"
        self._opt = Fraction(0)

    def current_opt(self):
        return self._opt

    def next_element(self, visible: frozenset):
        if self.terminated:
            raise RuntimeError("driver already terminated")
        if self.stage == "emit_contested":
            self._opt += self.weights[self.i - 1]
            self.stage = "check_contested"
            return f"x{self.i}|0"
        if self.stage == "check_contested":
            if f"x{self.i}|0" not in visible:
                return self._stop("declined-contested", visible)
            self.stage = "advance"
            return f"x{self.i}|{self.i}"
        if self.stage == "advance":
            if self.i == self.n_phases:
                reason = (
                    "next-weight-negative" if self.weights[-1] < 0 else "phase-cap"
                )
                return self._stop(reason, visible)
            self.i += 1
            self._opt += self.weights[self.i - 1]
            self.stage = "check_contested"
            return f"x{self.i}|0"
        raise AssertionError(self.stage)


class PartitionGeneralDriver(AdversaryDriver):
    """Two same-weight copies in part 0, then pair/echo parts 2i-1 and 2i."""

    def __init__(self, alpha, phase_cap: int = PHASE_CAP):
        self.alpha = Fraction(alpha)
        if not 1 <= self.alpha or self.alpha * self.alpha - 3 * self.alpha + 1 >= 0:
            self.range_warning = (
                f"alpha={alpha} outside [1, (3+sqrt(5))/2); no forced-failure guarantee"
            )
        self.a, self.b = general_weight_sequences(self.alpha, phase_cap)
        self.terminated: Optional[Stop] = None
        items: Dict[str, Fraction] = {}
        covers: Dict[str, set] = {}
        part_of: Dict[str, str] = {}

        def register(item: str, weight, parts):
            items[item] = weight
            for p in parts:
                el = f"{item}|{p}"
                covers[el] = {item}
                part_of[el] = str(p)

        for i in range(1, len(self.a) + 1):
            ai = self.a[i - 1]
            register(f"x{i}a", ai, [0, 2 * i - 1, 2 * i])
            register(f"x{i}b", ai, [0, 2 * i - 1, 2 * i])
        for i in range(1, len(self.b) + 1):
            if self.b[i - 1] > 0:
                register(f"y{i}", self.b[i - 1], [2 * i - 1, 2 * i])
        capacity = {str(p): 1 for p in range(2 * len(self.a) + 1)}
        self.objective = WeightedCoverage(items, covers)
        self.matroid = PartitionMatroid(part_of, capacity)
        self.i = 1
        self.stage = "emit_copy_a"
        self._base = Fraction(0)  # sum over finished phases of a_j + b_j
        self._opt = Fraction(0)
        self.chosen: Dict[int, str] = {}

    def current_opt(self):
        return self._opt

    def _b(self, i: int) -> Optional[Fraction]:
        return self.b[i - 1] if i <= len(self.b) else None

    def next_element(self, visible: frozenset):
        if self.terminated:
            raise RuntimeError("driver already terminated")
        i = self.i
        ai = self.a[i - 1]
        if self.stage == "emit_copy_a":
            self._opt = self._base + ai
            self.stage = "emit_copy_b"
            return f"x{i}a|0"
        if self.stage == "emit_copy_b":
            self.stage = "check_copies"
            return f"x{i}b|0"
        if self.stage == "check_copies":
            held = [c for c in ("a", "b") if f"x{i}{c}|0" in visible]
            if not held:
                return self._stop("declined-contested", visible)
            self.chosen[i] = held[0]
            bi = self._b(i)
            if bi is None:
                return self._stop("phase-cap", visible)
            if bi <= 0:
                self.stage = "stop_after_echo"
                self._opt = self._base + 2 * ai
                return f"x{i}{held[0]}|{2 * i - 1}"
            self.stage = "emit_pair_item"
            self._opt = self._base + ai + bi
            return f"y{i}|{2 * i - 1}"
        if self.stage == "emit_pair_item":
            self.stage = "check_pair"
            self._opt = self._base + ai + max(ai, self._b(i))
            return f"x{i}{self.chosen[i]}|{2 * i - 1}"
        if self.stage == "check_pair":
            pair_part = str(2 * i - 1)
            holder = None
            for c in (f"y{i}|{pair_part}", f"x{i}{self.chosen[i]}|{pair_part}"):
                if c in visible:
                    holder = c
            self._opt = self._base + 2 * ai + self._b(i)
            if holder == f"y{i}|{pair_part}":
                self.stage = "advance"
                return f"y{i}|{2 * i}"
            self.stage = "stop_after_echo"
            return f"x{i}{self.chosen[i]}|{2 * i}"
        if self.stage == "stop_after_echo":
            return self._stop("forced-ratio", visible)
        if self.stage == "advance":
            if i + 1 > len(self.a):
                return self._stop("phase-cap", visible)
            self._base += ai + self._b(i)
            self.i += 1
            self.stage = "emit_copy_a"
            return self.next_element(visible)
        raise AssertionError(self.stage)


class UniformHardnessDriver(AdversaryDriver):
    """Phases of 2k thin intervals plus the union of whatever was kept."""

    def __init__(self, alpha, epsilon, delta, k: int):
        self.alpha = Fraction(alpha)
        self.epsilon = Fraction(epsilon)
        self.delta = Fraction(delta)
        self.k = k
        if not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            raise ValueError("epsilon and delta must lie in (0, 1)")
        if not 1 <= self.alpha or float(self.alpha) >= ALPHA_INF:
            self.range_warning = (
                f"alpha={alpha} outside [1, {ALPHA_INF}); no forced-failure guarantee"
            )
        self.phases = int(self.delta * self.k)
        if self.phases < 1:
            raise ValueError("delta * k must be at least 1 (no phases otherwise)")
        self.objective = IntervalCoverage(self.epsilon, {})
        self.matroid = UniformMatroid(k)
        self.terminated: Optional[Stop] = None
        self.i = 1
        self.j = 0  # intervals emitted in the current phase
        self.union_pending = False
        self.union_taken: List[str] = []
        self.kept_value = Fraction(0)  # sum over finished phases of x_j w_j
        self._opt = Fraction(0)
        self.x: List[Fraction] = []

    def cell_id(self, i: int, j: int) -> str:
        return f"p{i}.s{j}"

    def cell_weight(self, i: int) -> Fraction:
        # value of one phase-i interval: 2 * (1/2k) * (1-eps)^-i
        return self.objective.cell_weight(i) / self.k

    def current_opt(self):
        return self._opt

    def _raise_opt(self, candidate: Fraction) -> None:
        if candidate > self._opt:
            self._opt = candidate

    def next_element(self, visible: frozenset):
        if self.terminated:
            raise RuntimeError("driver already terminated")
        i = self.i
        if self.union_pending:
            union_id = f"p{i}.union"
            if union_id in visible:
                self.union_taken.append(union_id)
            self.union_pending = False
            if i == self.phases:
                return self._stop("phases-exhausted", visible)
            self.i += 1
            self.j = 0
            return self.next_element(visible)
        if self.j < 2 * self.k:
            self.j += 1
            lo = Fraction(i - 1) + Fraction(self.j - 1, 2 * self.k)
            hi = Fraction(i - 1) + Fraction(self.j, 2 * self.k)
            el = self.cell_id(i, self.j)
            self.objective.register(el, [(lo, hi)])
            fresh = min(self.j, self.k - (i - 1))
            self._raise_opt(self.kept_value + fresh * self.cell_weight(i))
            return el
        # end of step (a): form the union of the kept intervals
        kept = [
            self.cell_id(i, j)
            for j in range(1, 2 * self.k + 1)
            if self.cell_id(i, j) in visible
        ]
        self.x.append(Fraction(len(kept), self.k))
        if not kept:
            if i == self.phases:
                return self._stop("phases-exhausted", visible)
            self.i += 1
            self.j = 0
            return self.next_element(visible)
        union_id = f"p{i}.union"
        intervals = [iv for c in kept for iv in self.objective.covers[c]]
        self.objective.register(union_id, intervals)
        self.kept_value += len(kept) * self.cell_weight(i)
        self._raise_opt(self.kept_value + (self.k - i) * self.cell_weight(i))
        self.union_pending = True
        return union_id


def run_adversary(
    driver: AdversaryDriver,
    step: Callable[[OnlineState, str], object],
    state: Optional[OnlineState] = None,
    record_rounds: bool = True,
) -> AdversaryOutcome:
    """Drive an online step rule against an adaptive stream.

    The algorithm's state must stay independent; a violation is reported as
    an algorithm bug.  Returns the full per-round log, the minimum ratio
    over rounds, and the driver's termination report.
    """
    state = state or OnlineState(driver.objective, driver.matroid)
    rounds: List[dict] = []
    min_ratio = None
    min_round = -1
    n = 0
    while True:
        nxt = driver.next_element(frozenset(state.feasible))
        if isinstance(nxt, Stop):
            stop = nxt
            break
        step(state, nxt)
        if not driver.matroid.is_independent(state.feasible):
            raise InvariantViolation("algorithm bug: infeasible set after round")
        n += 1
        opt = driver.current_opt()
        f_s = state.f_S()
        ratio = None if opt <= 0 else f_s / opt
        if ratio is not None and (min_ratio is None or ratio < min_ratio):
            min_ratio, min_round = ratio, n
        if record_rounds:
            rounds.append(
                {"round": n, "element": nxt, "f_S": f_s, "opt": opt, "ratio": ratio}
            )
    return AdversaryOutcome(stop=stop, min_ratio=min_ratio, min_round=min_round, rounds=rounds)


def make_driver(family: str, alpha, *, epsilon=None, delta=None, k=None,
                phase_cap: int = PHASE_CAP) -> AdversaryDriver:
    if family == "partition-monotone":
        return PartitionMonotoneDriver(alpha, phase_cap)
    if family == "partition-general":
        return PartitionGeneralDriver(alpha, phase_cap)
    if family == "uniform":
        if epsilon is None or delta is None or k is None:
            raise ValueError("the uniform family needs epsilon, delta and k")
        return UniformHardnessDriver(alpha, epsilon, delta, k)
    raise ValueError(f"unknown adversary family {family!r}")
