"""Bookkeeping for one online run: feasible set, history, and weights.

Three weights drive every algorithm here:

* arrival weight  w(u)   - marginal of u against everything accepted before
                           it arrived (the history prefix A(u));
* current weight  w_S(u) - marginal of u against A(u) intersected with the
                           present feasible set, nondecreasing over time;
* frozen weight   what(u) - the last current weight of u, captured at the
                           moment it was evicted.

Current weights are cached per member and refreshed lazily: evicting v can
only move w_S(u) for members accepted after v whose marginal actually
depends on v (the objective's ``interacts`` answers that).  The refresh
asserts the no-decrease law, and the cached sum makes
f(S) = f(empty) + sum of current weights available in O(1).
"""

from __future__ import annotations

from typing import Dict, FrozenSet, List, Optional

from .matroid import Matroid
from .objective import Objective

WS_MONOTONE_TOL = 1e-9


class TrackerError(ValueError):
    """Illegal transition: duplicate acceptance, bad evict, infeasible set."""


class InvariantViolation(AssertionError):
    """A lemma-level runtime invariant failed; indicates a bug upstream."""


class OnlineState:
    def __init__(self, objective: Objective, matroid: Matroid):
        self.objective = objective
        self.matroid = matroid
        self.history: List[str] = []
        self.acc_index: Dict[str, int] = {}
        self.arrival_w: Dict[str, object] = {}
        self.feasible: set = set()
        self.frozen_w: Dict[str, object] = {}
        self.f_empty = objective.value(frozenset())
        self._ws: Dict[str, object] = {}
        self._w_A_sum = 0
        self._w_S_sum = 0
        self._acc = objective.accumulator()
        self.rounds = 0
        self.notes: Dict[str, object] = {}  # scratch for per-run monitors

    # -- weight queries -------------------------------------------------

    def w_arrival(self, u: str):
        """Marginal of a new-arriving u against the full history."""
        if u in self.acc_index:
            raise TrackerError(f"element {u!r} was already accepted")
        return self._acc.marginal(u)

    def _prefix_in_S(self, u: str) -> FrozenSet[str]:
        i = self.acc_index[u]
        return frozenset(v for v in self.feasible if self.acc_index[v] < i)

    def w_S(self, u: str):
        if u in self._ws:
            return self._ws[u]
        if u not in self.acc_index:
            raise TrackerError(f"element {u!r} is unknown to the history")
        return self.objective.marginal(u, self._prefix_in_S(u))

    def w_S_total(self):
        return self._w_S_sum

    def w_A_total(self):
        return self._w_A_sum

    def w_arrival_over_S(self):
        """Sum of arrival weights of the current members."""
        # acceptance order, so float accumulation ignores set iteration order
        return sum(
            self.arrival_w[v]
            for v in sorted(self.feasible, key=self.acc_index.__getitem__)
        )

    def f_S(self):
        return self.f_empty + self._w_S_sum

    def hat_w(self, u: str):
        """Frozen weight for evicted elements, current weight for members."""
        if u in self.feasible:
            return self._ws[u]
        if u in self.frozen_w:
            return self.frozen_w[u]
        raise TrackerError(f"element {u!r} was never accepted")

    def min_member(self, candidates=None):
        """Member with minimal current weight; earliest acceptance on ties."""
        pool = self.feasible if candidates is None else candidates
        return min(pool, key=lambda v: (self._ws[v], self.acc_index[v]), default=None)

    # -- the single mutation --------------------------------------------

    def accept(self, u: str, evict: Optional[str] = None) -> None:
        if u in self.acc_index:
            raise TrackerError(f"element {u!r} was already accepted")
        if evict is not None and evict not in self.feasible:
            raise TrackerError(f"evict target {evict!r} is not in the feasible set")
        target = set(self.feasible)
        if evict is not None:
            target.discard(evict)
        target.add(u)
        if not self.matroid.is_independent(target):
            raise TrackerError(f"accepting {u!r} (evicting {evict!r}) violates independence")

        if evict is not None:
            w_out = self._ws.pop(evict)
            self.frozen_w[evict] = w_out
            self.feasible.remove(evict)
            self._w_S_sum -= w_out
            self._refresh_after_eviction(evict)

        w_u = self._acc.marginal(u)
        self.acc_index[u] = len(self.history)
        self.history.append(u)
        self.arrival_w[u] = w_u
        self._w_A_sum += w_u
        self._acc.add(u)
        self.feasible.add(u)
        ws_u = self.objective.marginal(u, self._prefix_in_S(u))
        self._ws[u] = ws_u
        self._w_S_sum += ws_u

    def _refresh_after_eviction(self, gone: str) -> None:
        cutoff = self.acc_index[gone]
        for v in sorted(self.feasible, key=self.acc_index.__getitem__):
            if self.acc_index[v] > cutoff and self.objective.interacts(v, gone):
                old = self._ws[v]
                new = self.objective.marginal(v, self._prefix_in_S(v))
                if new < old - WS_MONOTONE_TOL * (1 + abs(old)):
                    raise InvariantViolation(
                        f"current weight of {v!r} decreased: {old} -> {new}"
                    )
                self._ws[v] = new
                self._w_S_sum += new - old
