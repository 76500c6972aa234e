"""Online step rules over tracker state, plus the threshold constants.

Each deterministic rule comes as a pure ``propose_*`` (what would happen)
and a ``step_*`` that commits the proposal; the bipartite composition needs
the split, and everything else goes through the same pair so that a
committed step always runs the runtime law checks:

* accepted swaps strictly increase the objective;
* the capacity rule's threshold quantity never decreases;
* a replacement's arrival weight clears the documented factor over the
  replaced weight.

Violations raise ``InvariantViolation`` rather than degrade silently.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .matroid import UniformMatroid
from .objective import Objective, ThinnedObjective, sampled_value_p
from .tracker import InvariantViolation, OnlineState

ALPHA_RESIDUAL = 1e-10
CHECK_TOL = 1e-9


@dataclass(frozen=True)
class AlphaConstant:
    """Root of the capacity-rule fixed point for a given k and blow-up rho."""

    k: float  # positive integer or math.inf
    rho: int
    value: float

    @property
    def ratio(self) -> float:
        return 1.0 / self.value


def _fixed_point_gap(a: float, k: float, rho: int) -> float:
    if math.isinf(k):
        return math.exp(a - rho - 1) - a
    power = rho * k + 1
    return (1.0 + (a - rho - 1) / power) ** power - a


def solve_alpha(k, rho: int = 1) -> AlphaConstant:
    """Bisect the threshold constant to residual below 1e-10.

    For rho=1 the root lives in (3, 4) and finite k must be at least 4; for
    rho=3 the root is the one at least rho+1, bracketed by (rho+1, 8).
    """
    if rho not in (1, 3):
        raise ValueError("rho must be 1 or 3")
    k = float("inf") if k in ("inf", "infinity") else k
    if not math.isinf(k):
        if int(k) != k or k < 1:
            raise ValueError("k must be a positive integer or infinity")
        k = int(k)
        if rho == 1 and k < 4:
            raise ValueError("the capacity rule needs k >= 4 when rho=1")
    lo, hi = (3.0, 4.0) if rho == 1 else (float(rho + 1), 8.0)
    glo, ghi = _fixed_point_gap(lo, k, rho), _fixed_point_gap(hi, k, rho)
    if not glo < 0 < ghi:
        raise ValueError(f"no sign change on ({lo}, {hi}) for k={k}, rho={rho}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _fixed_point_gap(mid, k, rho) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    root = 0.5 * (lo + hi)
    if abs(_fixed_point_gap(root, k, rho)) >= ALPHA_RESIDUAL:
        raise ValueError(f"bisection residual too large for k={k}, rho={rho}")
    return AlphaConstant(k=k, rho=rho, value=root)


@dataclass
class Decision:
    element: str
    accepted: bool
    evicted: Optional[str] = None
    w_u: object = 0
    w_evicted: object = 0

    @property
    def gain(self):
        return self.w_u - self.w_evicted


def _approx_gt(a, b, slack=CHECK_TOL):
    return a > b - slack * (1 + abs(b))


def _commit(st: OnlineState, d: Decision, *, strict_monotone: bool) -> None:
    f_before = st.f_S()
    st.accept(d.element, evict=d.evicted)
    st.rounds += 1
    if strict_monotone and not _approx_gt(st.f_S(), f_before, 1e-12):
        raise InvariantViolation(
            f"objective did not strictly increase: {f_before} -> {st.f_S()}"
        )


# -- capacity rule for k-uniform constraints ---------------------------------


def propose_k_uniform(st: OnlineState, u: str, alpha: AlphaConstant) -> Decision:
    """Accept iff w(u) clears (alpha * w_S(S) - w(A)) / k; evict the member
    of minimal current weight when the set is full."""
    matroid = st.matroid
    if not isinstance(matroid, UniformMatroid):
        raise ValueError("the capacity rule needs a uniform matroid")
    if not st.objective.monotone:
        raise ValueError("the capacity rule needs a monotone objective")
    if matroid.k < 4 or alpha.rho != 1 or alpha.k != matroid.k:
        raise ValueError(
            f"constant solved for k={alpha.k}, rho={alpha.rho} does not fit k={matroid.k}"
        )
    k = matroid.k
    w_u = st.w_arrival(u)
    threshold = (alpha.value * st.w_S_total() - st.w_A_total()) / k
    if not w_u > threshold:
        return Decision(u, False, w_u=w_u)
    if len(st.feasible) == k:
        worst = st.min_member()
        return Decision(u, True, evicted=worst, w_u=w_u, w_evicted=st.w_S(worst))
    return Decision(u, True, w_u=w_u)


def step_k_uniform(st: OnlineState, u: str, alpha: AlphaConstant) -> Decision:
    d = propose_k_uniform(st, u, alpha)
    if d.accepted:
        if d.evicted is not None:
            bound = alpha.value / (alpha.value - 1) * d.w_evicted
            if not _approx_gt(d.w_u, bound):
                raise InvariantViolation(
                    f"replacement bound failed: w(u)={d.w_u} vs {bound}"
                )
        _commit(st, d, strict_monotone=True)
    _check_threshold_monotone(st, alpha.value * st.w_S_total() - st.w_A_total())
    return d


def _check_threshold_monotone(st: OnlineState, current, key: str = "threshold_last") -> None:
    last = st.notes.get(key)
    if last is not None and not _approx_gt(current, last):
        raise InvariantViolation(f"threshold quantity decreased: {last} -> {current}")
    st.notes[key] = current


# -- exchange rule for general matroids ---------------------------------------


def propose_general_matroid(st: OnlineState, u: str, c=2) -> Decision:
    """Free slots take any positive-weight arrival; otherwise the cheapest
    exchange candidate is replaced when w(u) >= c times its current weight."""
    if not c > 1:
        raise ValueError("the exchange rule needs c > 1")
    if not st.objective.monotone:
        raise ValueError("the exchange rule needs a monotone objective")
    w_u = st.w_arrival(u)
    if st.matroid.is_independent(st.feasible | {u}):
        return Decision(u, w_u > 0, w_u=w_u)
    swap = st.matroid.exchange_set(st.feasible, u)
    if not swap:
        return Decision(u, False, w_u=w_u)
    worst = st.min_member(swap)
    w_worst = st.w_S(worst)
    if w_u >= c * w_worst:
        return Decision(u, True, evicted=worst, w_u=w_u, w_evicted=w_worst)
    return Decision(u, False, w_u=w_u)


def step_general_matroid(st: OnlineState, u: str, c=2) -> Decision:
    d = propose_general_matroid(st, u, c)
    if d.accepted:
        _commit(st, d, strict_monotone=True)
    history_cap = c / (c - 1) * st.w_arrival_over_S()
    if not _approx_gt(history_cap, st.w_A_total()):
        raise InvariantViolation(
            f"history bound failed: w(A)={st.w_A_total()} vs {history_cap}"
        )
    return d


# -- best-singleton fallback ---------------------------------------------------


def propose_best_singleton(st: OnlineState, u: str) -> Decision:
    """Keep the single most valuable element seen; ties keep the incumbent."""
    w_u = st.w_arrival(u)
    value_u = st.objective.value(frozenset({u}))
    if not st.feasible:
        return Decision(u, value_u > st.f_empty, w_u=w_u)
    (incumbent,) = st.feasible
    if value_u > st.objective.value(frozenset({incumbent})):
        return Decision(u, True, evicted=incumbent, w_u=w_u, w_evicted=st.w_S(incumbent))
    return Decision(u, False, w_u=w_u)


def step_best_singleton(st: OnlineState, u: str) -> Decision:
    d = propose_best_singleton(st, u)
    if d.accepted:
        _commit(st, d, strict_monotone=True)
    return d


def dispatch_uniform(k: int):
    """Small capacities fall back to the best singleton (ratio 1/k beats
    1/alpha_k for k <= 3); larger ones run the capacity rule."""
    if k <= 3:
        return step_best_singleton, 1.0 / k
    alpha = solve_alpha(k)
    return (lambda st, u: step_k_uniform(st, u, alpha)), alpha.ratio


# -- bipartite composition ------------------------------------------------------


@dataclass
class Agent:
    """One offline node: its own state plus the step rule it runs."""

    state: OnlineState
    propose: Callable[[OnlineState, str], Decision]
    commit: Callable[[OnlineState, str], Decision]

    @classmethod
    def k_uniform(cls, state: OnlineState, alpha: AlphaConstant) -> "Agent":
        return cls(
            state,
            propose=lambda st, u: propose_k_uniform(st, u, alpha),
            commit=lambda st, u: step_k_uniform(st, u, alpha),
        )

    @classmethod
    def general(cls, state: OnlineState, c=2) -> "Agent":
        return cls(
            state,
            propose=lambda st, u: propose_general_matroid(st, u, c),
            commit=lambda st, u: step_general_matroid(st, u, c),
        )


def step_bipartite(agents: Sequence[Agent], u: str) -> Tuple[Optional[int], Optional[Decision]]:
    """Ask every agent what it would do, then commit only the winner.

    The winner maximizes the proposal gain w(u) - w_S(evicted); ties go to
    the lowest agent index.  Returns (agent index, committed decision), or
    (None, None) when nobody proposes.
    """
    best_idx = None
    best_gain = None
    for idx, agent in enumerate(agents):
        d = agent.propose(agent.state, u)
        if d.accepted and (best_gain is None or d.gain > best_gain):
            best_idx, best_gain = idx, d.gain
    if best_idx is None:
        return None, None
    winner = agents[best_idx]
    return best_idx, winner.commit(winner.state, u)


# -- randomized rules for non-monotone objectives --------------------------------


class NonmonotoneGeneralRun:
    """Exchange rule driven by the half-thinned objective.

    The auxiliary set S follows the deterministic exchange rule evaluated on
    g = half-thinned f with a single value function (arrival weights only);
    the feasible output keeps each accepted element with an independent fair
    coin, and evictions from S evict from the output too.
    """

    def __init__(self, objective: Objective, matroid, seed: int = 0,
                 coin: Optional[Callable[[], int]] = None, c=2):
        self.f = objective
        self.g = ThinnedObjective(objective, 0.5)
        self.state = OnlineState(self.g, matroid)
        self.c = c
        self._rng = random.Random(seed)
        self.coin = coin or (lambda: self._rng.getrandbits(1))
        self.kept: set = set()

    def step(self, u: str) -> Decision:
        w_u = self.state.w_arrival(u)
        if w_u <= 0:
            return Decision(u, False, w_u=w_u)
        d = self._propose_single_w(u, w_u)
        if d.accepted:
            self.state.accept(d.element, evict=d.evicted)
            self.state.rounds += 1
            if d.evicted is not None:
                self.kept.discard(d.evicted)
            if self.coin():
                self.kept.add(u)
        return d

    def _propose_single_w(self, u: str, w_u) -> Decision:
        st = self.state
        if st.matroid.is_independent(st.feasible | {u}):
            return Decision(u, True, w_u=w_u)
        swap = st.matroid.exchange_set(st.feasible, u)
        if not swap:
            return Decision(u, False, w_u=w_u)
        worst = min(swap, key=lambda v: (st.arrival_w[v], st.acc_index[v]))
        w_worst = st.arrival_w[worst]
        if w_u >= self.c * w_worst:
            return Decision(u, True, evicted=worst, w_u=w_u, w_evicted=w_worst)
        return Decision(u, False, w_u=w_u)

    def feasible_set(self) -> frozenset:
        return frozenset(self.kept)

    def expected_feasible_value(self):
        """E over the coins of f(kept set), exactly: the half-thinning of S."""
        return sampled_value_p(self.f, frozenset(self.state.feasible), 0.5)


class NonmonotoneUniformRun:
    """Capacity rule with a race-blown auxiliary set and slot sampling.

    The auxiliary set holds up to rho*k elements of a k-uniform instance,
    weighted by the (1/rho)-thinned objective with a single value function.
    Slots are grouped into k blocks of rho; the feasible output reads one
    uniformly pre-sampled slot per block.
    """

    def __init__(self, objective: Objective, k: int, seed: int = 0, rho: int = 3):
        if rho != 3:
            raise ValueError("the blown-up capacity rule is tuned for rho=3")
        self.f = objective
        self.k = k
        self.rho = rho
        self.alpha = solve_alpha(k, rho=rho)
        self.g = ThinnedObjective(objective, 1.0 / rho)
        self.state = OnlineState(self.g, UniformMatroid(rho * k))
        self.slot_of: dict = {}
        self._free: List[int] = list(range(rho * k - 1, -1, -1))  # pop() yields lowest
        rng = random.Random(seed)
        self.block_choice = [rng.randrange(rho) for _ in range(k)]

    def step(self, u: str) -> Decision:
        st = self.state
        w_u = st.w_arrival(u)
        cap = self.rho * self.k
        threshold = (self.alpha.value * st.w_arrival_over_S() - self.rho * st.w_A_total()) / cap
        if not w_u > threshold:
            return Decision(u, False, w_u=w_u)
        evicted = None
        if len(st.feasible) == cap:
            evicted = min(st.feasible, key=lambda v: (st.arrival_w[v], st.acc_index[v]))
            w_evicted = st.arrival_w[evicted]
            bound = self.alpha.value / (self.alpha.value - self.rho) * w_evicted
            if not _approx_gt(w_u, bound):
                raise InvariantViolation(
                    f"replacement bound failed: w(u)={w_u} vs {bound}"
                )
            d = Decision(u, True, evicted=evicted, w_u=w_u, w_evicted=w_evicted)
        else:
            d = Decision(u, True, w_u=w_u)
        slot = self.slot_of.pop(evicted) if evicted is not None else self._free.pop()
        st.accept(u, evict=evicted)
        st.rounds += 1
        self.slot_of[u] = slot
        _check_threshold_monotone(
            st, self.alpha.value * st.w_arrival_over_S() - self.rho * st.w_A_total()
        )
        return d

    def _selected_slots(self, choice: Sequence[int]) -> set:
        return {block * self.rho + c for block, c in enumerate(choice)}

    def feasible_set(self, choice: Optional[Sequence[int]] = None) -> frozenset:
        chosen = self._selected_slots(self.block_choice if choice is None else choice)
        return frozenset(u for u, slot in self.slot_of.items() if slot in chosen)

    def expected_feasible_value(self):
        """E over all rho^k block choices of f(selected occupants)."""
        total = 0.0
        count = self.rho**self.k
        choice = [0] * self.k
        for idx in range(count):
            rem = idx
            for b in range(self.k):
                choice[b] = rem % self.rho
                rem //= self.rho
            total += self.f.value(self.feasible_set(choice))
        return total / count
