"""Instance I/O, experiment runner, constants table, and verification suites.

Subcommands:

* ``run``        - replay an instance file through a chosen step rule,
                   optionally checking the rule's guaranteed ratio against
                   the brute-force optimum of every arrival prefix.
* ``constants``  - print the threshold constants and implied ratios.
* ``adversary``  - drive a hardness family against a step rule and report
                   the certified minimum per-round ratio.
* ``verify``     - randomized property suites (tracker and threshold laws,
                   rounding domination, sampling domination).

Reports are JSON lines with sorted keys and round-trip float formatting, so
byte-identical reruns with the same seed diff clean.  Exit codes: 0 ok,
2 malformed instance, 3 invariant or ratio violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import statistics
import sys
import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .adversaries import make_driver, run_adversary
from .algorithms import (
    Agent,
    NonmonotoneGeneralRun,
    NonmonotoneUniformRun,
    dispatch_uniform,
    solve_alpha,
    step_best_singleton,
    step_bipartite,
    step_general_matroid,
    step_k_uniform,
)
from .fractional import FractionalState
from .matroid import ExplicitMatroid, Matroid, MatroidError, PartitionMatroid, UniformMatroid
from .objective import (
    ExplicitTable,
    IntervalCoverage,
    Linear,
    Objective,
    ObjectiveError,
    WeightedCoverage,
    subset_key,
)
from .oracle import (
    brute_force_opt,
    check_ckp_domination,
    check_f_vs_fhat,
    greedy_optimality_gap,
    prefix_optima,
    random_instance,
    random_submodular_table,
)
from .tracker import InvariantViolation, OnlineState

EXIT_OK = 0
EXIT_INSTANCE = 2
EXIT_VIOLATION = 3

RATIO_TOL = 1e-9


class InstanceError(ValueError):
    """The instance file cannot be parsed or fails validation."""


# -- canonical JSON -------------------------------------------------------------


def _num_to_json(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def _num_from_json(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(", ", ": "))


def to_jsonable(x):
    """Recursive float/str coercion for report payloads."""
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, frozenset):
        return sorted(x)
    if isinstance(x, dict):
        return {k: to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    return x


# -- objective / matroid serialization -------------------------------------------


def objective_to_json(f: Objective) -> dict:
    if isinstance(f, WeightedCoverage):
        return {
            "kind": "weighted_coverage",
            "universe_weight": {k: _num_to_json(v) for k, v in sorted(f.universe_weight.items())},
            "covers": {el: sorted(items) for el, items in sorted(f.covers.items())},
        }
    if isinstance(f, Linear):
        return {"kind": "linear", "weight": {k: _num_to_json(v) for k, v in sorted(f.weight.items())}}
    if isinstance(f, IntervalCoverage):
        return {
            "kind": "interval_coverage",
            "epsilon": _num_to_json(f.epsilon),
            "covers": {
                el: [[_num_to_json(lo), _num_to_json(hi)] for lo, hi in ivs]
                for el, ivs in sorted(f.covers.items())
            },
        }
    if isinstance(f, ExplicitTable):
        return {
            "kind": "explicit_table",
            "ground": list(f.ground),
            "value": {subset_key(s): _num_to_json(v) for s, v in sorted(
                f._table.items(), key=lambda kv: subset_key(kv[0])
            )},
        }
    raise InstanceError(f"cannot serialize objective {type(f).__name__}")


def objective_from_json(spec: dict) -> Objective:
    try:
        kind = spec["kind"]
        if kind == "weighted_coverage":
            return WeightedCoverage(
                {k: _num_from_json(v) for k, v in spec["universe_weight"].items()},
                {el: frozenset(items) for el, items in spec["covers"].items()},
            )
        if kind == "linear":
            return Linear({k: _num_from_json(v) for k, v in spec["weight"].items()})
        if kind == "interval_coverage":
            return IntervalCoverage(
                Fraction(spec["epsilon"]),
                {
                    el: [(Fraction(lo), Fraction(hi)) for lo, hi in ivs]
                    for el, ivs in spec["covers"].items()
                },
            )
        if kind == "explicit_table":
            return ExplicitTable(
                spec["ground"], {k: _num_from_json(v) for k, v in spec["value"].items()}
            )
        raise InstanceError(f"unknown objective kind {kind!r}")
    except (KeyError, TypeError, ValueError, ObjectiveError) as exc:
        raise InstanceError(f"bad objective spec: {exc}") from exc


def matroid_to_json(m: Matroid) -> dict:
    if isinstance(m, UniformMatroid):
        return {"kind": "uniform", "k": m.k}
    if isinstance(m, PartitionMatroid):
        return {
            "kind": "partition",
            "part_of": dict(sorted(m.part_of.items())),
            "capacity": dict(sorted(m.capacity.items())),
        }
    if isinstance(m, ExplicitMatroid):
        return {
            "kind": "explicit",
            "ground": sorted(m.ground),
            "maximal_sets": sorted(sorted(s) for s in m.maximal_sets),
        }
    raise InstanceError(f"cannot serialize matroid {type(m).__name__}")


def matroid_from_json(spec: dict) -> Matroid:
    try:
        kind = spec["kind"]
        if kind == "uniform":
            return UniformMatroid(spec["k"])
        if kind == "partition":
            return PartitionMatroid(spec["part_of"], spec["capacity"])
        if kind == "explicit":
            return ExplicitMatroid(spec["ground"], [frozenset(s) for s in spec["maximal_sets"]])
        raise InstanceError(f"unknown matroid kind {kind!r}")
    except (KeyError, TypeError, ValueError, MatroidError) as exc:
        raise InstanceError(f"bad matroid spec: {exc}") from exc


class Instance:
    """One stream: objective + matroid + arrival order (or agent list)."""

    def __init__(self, arrival_order, objective=None, matroid=None, agents=None,
                 metadata=None):
        self.arrival_order = list(arrival_order)
        self.objective = objective
        self.matroid = matroid
        self.agents = agents or []
        self.metadata = metadata or {}
        self._validate()

    def _validate(self):
        if len(set(self.arrival_order)) != len(self.arrival_order):
            raise InstanceError("arrival_order has duplicate ids")
        sinks = self.agents or [(self.objective, self.matroid)]
        for f, m in sinks:
            if f is None or m is None:
                raise InstanceError("instance needs an objective and a matroid")
            unresolved = set(self.arrival_order) - f.elements()
            if unresolved:
                raise InstanceError(f"arrivals not in objective: {sorted(unresolved)}")
            if isinstance(m, PartitionMatroid):
                for u in self.arrival_order:
                    try:
                        m.part(u)
                    except MatroidError as exc:
                        raise InstanceError(str(exc)) from exc

    def to_json(self) -> dict:
        doc: Dict[str, object] = {"arrival_order": self.arrival_order,
                                  "metadata": self.metadata}
        if self.agents:
            doc["agents"] = [
                {"objective": objective_to_json(f), "matroid": matroid_to_json(m)}
                for f, m in self.agents
            ]
        else:
            doc["objective"] = objective_to_json(self.objective)
            doc["matroid"] = matroid_to_json(self.matroid)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Instance":
        try:
            if "agents" in doc:
                agents = [
                    (objective_from_json(a["objective"]), matroid_from_json(a["matroid"]))
                    for a in doc["agents"]
                ]
                return cls(doc["arrival_order"], agents=agents, metadata=doc.get("metadata"))
            return cls(
                doc["arrival_order"],
                objective=objective_from_json(doc["objective"]),
                matroid=matroid_from_json(doc["matroid"]),
                metadata=doc.get("metadata"),
            )
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"bad instance document: {exc}") from exc

    def dumps(self) -> str:
        return canonical_dumps(self.to_json()) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Instance":
        try:
            return cls.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InstanceError(f"invalid JSON: {exc}") from exc

    @classmethod
    def load(cls, path: str) -> "Instance":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())


# -- runners ----------------------------------------------------------------------


def _round_record(i, element, decision, f_s, opt=None):
    rec = {
        "record": "round",
        "round": i,
        "element": element,
        "decision": "accept" if decision and decision.accepted else "reject",
        "evicted": decision.evicted if decision else None,
        "f_S": to_jsonable(f_s),
    }
    if opt is not None:
        rec["opt_prefix"] = to_jsonable(opt)
        rec["ratio"] = to_jsonable(f_s / opt) if opt > 0 else None
    return rec


def _assert_ratio(f_s, opt, ratio, what):
    if opt > 0 and f_s < ratio * opt - RATIO_TOL * (1 + abs(opt)):
        raise InvariantViolation(
            f"{what}: value {float(f_s)} below {ratio} * {float(opt)}"
        )


def run_deterministic(instance: Instance, step: Callable, guarantee: Optional[float],
                      check: bool) -> Tuple[List[dict], dict]:
    state = OnlineState(instance.objective, instance.matroid)
    opts = (
        prefix_optima(instance.objective, instance.matroid, instance.arrival_order)
        if check or len(instance.arrival_order) <= 20
        else [None] * len(instance.arrival_order)
    )
    records = []
    for i, u in enumerate(instance.arrival_order):
        d = step(state, u)
        f_s = state.f_S()
        records.append(_round_record(i + 1, u, d, f_s, opts[i]))
        if check and guarantee is not None and opts[i] is not None:
            _assert_ratio(f_s, opts[i], guarantee, "per-round ratio")
    opt = opts[-1] if instance.arrival_order and opts[-1] is not None else None
    final = {
        "record": "final",
        "f_S": to_jsonable(state.f_S()),
        "opt": to_jsonable(opt),
        "ratio": to_jsonable(state.f_S() / opt) if opt else None,
        "selected": sorted(state.feasible),
    }
    return records, final


def run_fractional(instance: Instance, delta, seed: int, trials: int,
                   check: bool) -> Tuple[List[dict], dict]:
    if not isinstance(instance.matroid, PartitionMatroid):
        raise InstanceError("partition-frac needs a partition matroid")
    state = FractionalState(instance.objective, instance.matroid, delta=delta, seed=seed)
    alpha = state.alpha
    opts = prefix_optima(instance.objective, instance.matroid, instance.arrival_order)
    records = []
    for i, u in enumerate(instance.arrival_order):
        state.step(u)
        fhat = state.soft_value_live()
        rec = {
            "record": "round", "round": i + 1, "element": u,
            "soft_value": to_jsonable(fhat), "opt_prefix": to_jsonable(opts[i]),
        }
        records.append(rec)
        if check:
            max_w = max(state._max_unit_w.values(), default=0.0)
            slack = alpha * float(state.delta) * max_w * len(state.parts)
            _assert_ratio(fhat + slack, opts[i], 1 / 3.15, "fractional per-round ratio")
    with ThreadPoolExecutor(max_workers=min(8, max(1, trials))) as pool:
        rounded = list(
            pool.map(
                lambda t: instance.objective.value(state.round_with_seed(seed + 1 + t)),
                range(trials),
            )
        )
    final = {
        "record": "final",
        "soft_value": to_jsonable(state.soft_value_live()),
        "opt": to_jsonable(opts[-1]) if instance.arrival_order else None,
        "rounded_mean": to_jsonable(statistics.fmean(rounded)) if rounded else None,
        "rounded_once": sorted(state.round_online()),
    }
    return records, final


def run_nonmono(instance: Instance, kind: str, seed: int, trials: int,
                check: bool) -> Tuple[List[dict], dict]:
    def make(run_seed: int):
        if kind == "nonmono-general":
            return NonmonotoneGeneralRun(instance.objective, instance.matroid, seed=run_seed)
        if not isinstance(instance.matroid, UniformMatroid):
            raise InstanceError("nonmono-uniform needs a uniform matroid")
        return NonmonotoneUniformRun(instance.objective, instance.matroid.k, seed=run_seed)

    def one_trial(t: int):
        run = make(seed + t)
        for u in instance.arrival_order:
            run.step(u)
        return instance.objective.value(run.feasible_set())

    run = make(seed)
    opts = prefix_optima(instance.objective, instance.matroid, instance.arrival_order)
    if kind == "nonmono-general":
        guarantee = 1.0 / 16.0
    else:
        guarantee = run.alpha.ratio * (1 - 1 / run.rho)
    records = []
    for i, u in enumerate(instance.arrival_order):
        d = run.step(u)
        expected = run.expected_feasible_value()
        rec = _round_record(i + 1, u, d, run.state.f_S(), opts[i])
        rec["expected_f"] = to_jsonable(expected)
        records.append(rec)
        if check:
            _assert_ratio(expected, opts[i], guarantee, "expected per-round ratio")
    with ThreadPoolExecutor(max_workers=min(8, max(1, trials))) as pool:
        finals = list(pool.map(one_trial, range(trials)))
    final = {
        "record": "final",
        "expected_f": to_jsonable(run.expected_feasible_value()),
        "trial_mean_f": to_jsonable(statistics.fmean(finals)) if finals else None,
        "opt": to_jsonable(opts[-1]) if instance.arrival_order else None,
        "selected_once": sorted(run.feasible_set()),
    }
    return records, final


def best_assignment_value(agents, arrived: List[str]):
    """Brute-force optimal assignment of arrivals to agents (or to nobody)."""
    n = len(arrived)
    if n > 12:
        raise InstanceError("assignment optimum limited to 12 arrivals")
    index = {u: i for i, u in enumerate(arrived)}

    def best_table(f, m):
        # best independent-subset value inside every subset mask
        vals = [None] * (1 << n)
        for s in m.enumerate_independent_sets(frozenset(arrived)):
            mask = sum(1 << index[u] for u in s)
            v = f.value(s)
            if vals[mask] is None or v > vals[mask]:
                vals[mask] = v
        out = [f.value(frozenset())] * (1 << n)
        for mask in range(1 << n):
            if vals[mask] is not None and vals[mask] > out[mask]:
                out[mask] = vals[mask]
            for b in range(n):
                if mask >> b & 1:
                    prev = out[mask ^ (1 << b)]
                    if prev > out[mask]:
                        out[mask] = prev
        return out

    tables = [best_table(f, m) for f, m in agents]
    full = (1 << n) - 1
    best = [tables[0][m] for m in range(1 << n)]
    for table in tables[1:]:
        nxt = [None] * (1 << n)
        for mask in range(1 << n):
            sub = mask
            acc = None
            while True:
                cand = best[mask ^ sub] + table[sub]
                if acc is None or cand > acc:
                    acc = cand
                if sub == 0:
                    break
                sub = (sub - 1) & mask
            nxt[mask] = acc
        best = nxt
    return best[full]


def run_bipartite(instance: Instance, check: bool, c=2) -> Tuple[List[dict], dict]:
    if not instance.agents:
        raise InstanceError("bipartite needs an agents list in the instance")
    agents = []
    worst_alpha = 0.0
    for f, m in instance.agents:
        state = OnlineState(f, m)
        if isinstance(m, UniformMatroid) and m.k >= 4:
            alpha = solve_alpha(m.k)
            agents.append(Agent.k_uniform(state, alpha))
            worst_alpha = max(worst_alpha, alpha.value)
        else:
            agents.append(Agent.general(state, c))
            worst_alpha = max(worst_alpha, float(c) / (float(c) - 1) + float(c))
    guarantee = 1.0 / (worst_alpha + 1.0)
    records = []
    arrived: List[str] = []
    for i, u in enumerate(instance.arrival_order):
        idx, d = step_bipartite(agents, u)
        arrived.append(u)
        total = sum(a.state.f_S() for a in agents)
        opt = best_assignment_value(instance.agents, arrived) if check else None
        rec = {
            "record": "round", "round": i + 1, "element": u,
            "assigned_to": idx, "evicted": d.evicted if d else None,
            "total_f": to_jsonable(total),
        }
        if opt is not None:
            rec["opt_prefix"] = to_jsonable(opt)
            _assert_ratio(total, opt, guarantee, "assignment per-round ratio")
        records.append(rec)
    total = sum(a.state.f_S() for a in agents)
    opt = best_assignment_value(instance.agents, arrived) if arrived else None
    final = {
        "record": "final",
        "total_f": to_jsonable(total),
        "opt": to_jsonable(opt),
        "ratio": to_jsonable(total / opt) if opt else None,
        "per_agent": [sorted(a.state.feasible) for a in agents],
    }
    return records, final


# -- subcommands -------------------------------------------------------------------


def _default_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("SUBFREE_SEED", "0"))


def cmd_run(args, out) -> int:
    instance = Instance.load(args.instance)
    seed = _default_seed(args)
    check = args.check_every_round
    alg = args.alg
    try:
        return _cmd_run_inner(instance, args, seed, check, alg, out)
    except InvariantViolation:
        reproducer = {"alg": alg, "seed": seed, "instance": instance.to_json()}
        print(f"reproducer: {canonical_dumps(reproducer)}", file=sys.stderr)
        raise


def _cmd_run_inner(instance, args, seed, check, alg, out) -> int:
    params: Dict[str, object] = {}
    if alg == "k-uniform":
        if not isinstance(instance.matroid, UniformMatroid):
            raise InstanceError("k-uniform needs a uniform matroid")
        k = instance.matroid.k
        if args.k is not None and args.k != k:
            raise InstanceError(f"--k {args.k} does not match the instance (k={k})")
        step, guarantee = dispatch_uniform(k)
        params = {"k": k, "routed": "best-singleton" if k <= 3 else "capacity-rule"}
        records, final = run_deterministic(instance, step, guarantee, check)
    elif alg == "general":
        c = Fraction(str(args.c))
        step = lambda st, u: step_general_matroid(st, u, c)
        records, final = run_deterministic(instance, step, 0.25, check)
        params = {"c": float(c)}
    elif alg == "best-singleton":
        guarantee = (
            1.0 / instance.matroid.k if isinstance(instance.matroid, UniformMatroid) else None
        )
        records, final = run_deterministic(instance, step_best_singleton, guarantee, check)
    elif alg == "partition-frac":
        records, final = run_fractional(
            instance, Fraction(str(args.delta)), seed, args.trials, check
        )
        params = {"delta": args.delta}
    elif alg in ("nonmono-general", "nonmono-uniform"):
        records, final = run_nonmono(instance, alg, seed, args.trials, check)
        params = {"trials": args.trials}
    elif alg == "bipartite":
        records, final = run_bipartite(instance, check)
    else:
        raise InstanceError(f"unknown algorithm {alg!r}")
    final.update({"alg": alg, "params": params, "seed": seed})
    for rec in records:
        out.write(canonical_dumps(rec) + "\n")
    out.write(canonical_dumps(final) + "\n")
    return EXIT_OK


def cmd_constants(args, out) -> int:
    ks = []
    for tok in args.k.split(","):
        tok = tok.strip()
        ks.append("inf" if tok in ("inf", "infinity") else int(tok))
    rho = args.rho
    for k in ks:
        a = solve_alpha(k, rho=rho)
        line = f"k={k} rho={rho} alpha={a.value:.6f} ratio={a.ratio:.6f}"
        if rho == 3:
            line += f" thinned_ratio={a.ratio * (1 - 1 / rho):.6f}"
        out.write(line + "\n")
    return EXIT_OK


def _adversary_step(args):
    if args.alg == "general":
        return lambda st, u: step_general_matroid(st, u)
    if args.alg == "best-singleton":
        return step_best_singleton
    if args.alg == "k-uniform":
        if args.k is None:
            raise InstanceError("--alg k-uniform needs --k")
        alpha = solve_alpha(args.k)
        return lambda st, u: step_k_uniform(st, u, alpha)
    raise InstanceError(f"unsupported adversary algorithm {args.alg!r}")


def cmd_adversary(args, out) -> int:
    alpha = Fraction(str(args.alpha))
    kwargs = {}
    if args.family == "uniform":
        if args.k is None:
            raise InstanceError("the uniform family needs --k")
        kwargs = {
            "epsilon": Fraction(str(args.eps)), "delta": Fraction(str(args.delta)),
            "k": args.k,
        }
    driver = make_driver(args.family, alpha, **kwargs)
    if driver.range_warning:
        print(f"warning: {driver.range_warning}", file=sys.stderr)
    step = _adversary_step(args)
    outcome = run_adversary(driver, step, record_rounds=not args.quiet)
    for rec in outcome.rounds:
        out.write(canonical_dumps(to_jsonable(rec)) + "\n")
    final = {
        "record": "final",
        "family": args.family,
        "alpha": float(alpha),
        "alg": args.alg,
        "stop_reason": outcome.stop.reason,
        "stop_ratio": to_jsonable(outcome.stop.ratio),
        "min_ratio": to_jsonable(outcome.min_ratio),
        "min_round": outcome.min_round,
    }
    out.write(canonical_dumps(final) + "\n")
    return EXIT_OK


def _verify_lemmas(rng: random.Random, cases: int, out) -> int:
    from .matroid import UniformMatroid as _U

    failures = 0
    for case in range(cases):
        f, m, order = random_instance(rng, rng.randint(5, 9))
        inst = Instance(order, objective=f, matroid=m)
        try:
            run_deterministic(inst, lambda st, u: step_general_matroid(st, u), 0.25, True)
            st = OnlineState(f, m)
            for u in order:
                step_general_matroid(st, u)
            gap = greedy_optimality_gap(st)
            if gap > 1e-9:
                raise InvariantViolation(f"greedy optimality gap {gap}")
            ku = rng.randint(4, 6)
            inst_u = Instance(order, objective=f, matroid=_U(ku))
            alpha = solve_alpha(ku)
            run_deterministic(
                inst_u, lambda st, u: step_k_uniform(st, u, alpha), alpha.ratio, True
            )
        except InvariantViolation as exc:
            failures += 1
            out.write(canonical_dumps({
                "record": "violation", "suite": "lemmas", "case": case,
                "error": str(exc), "instance": inst.to_json(),
            }) + "\n")
    out.write(canonical_dumps({
        "record": "suite", "suite": "lemmas", "cases": cases, "failures": failures,
    }) + "\n")
    return failures


def _verify_sampling(rng: random.Random, cases: int, out) -> int:
    failures = 0
    for case in range(cases):
        n = rng.randint(2, 8)
        g = random_submodular_table(rng, n, monotone=rng.random() < 0.5)
        for k in range(n + 1):
            ok, witness = check_ckp_domination(g, n, k)
            if not ok:
                failures += 1
                out.write(canonical_dumps({
                    "record": "violation", "suite": "sampling", "case": case,
                    "k": k, "witness": witness,
                    "table": objective_to_json(g),
                }) + "\n")
    out.write(canonical_dumps({
        "record": "suite", "suite": "sampling", "cases": cases, "failures": failures,
    }) + "\n")
    return failures


def _verify_rounding(rng: random.Random, cases: int, out) -> int:
    failures = 0
    for case in range(cases):
        f, m, order = random_instance(rng, rng.randint(4, 6), matroid_kind="partition")
        st = FractionalState(f, m, delta=Fraction(1, 25), seed=case)
        for u in order:
            st.step(u)
        target = st.soft_value_live()
        n = 2000
        vals = [f.value(st.round_with_seed(s)) for s in range(n)]
        mean = statistics.fmean(vals)
        sigma = statistics.pstdev(vals) / math.sqrt(n) if n else 0.0
        ok = mean >= target - 3 * sigma - 1e-9
        opt_set, _ = brute_force_opt(f, m, f.elements())
        ok2, slack = check_f_vs_fhat(f, opt_set, st.history_masses())
        if not (ok and ok2):
            failures += 1
            out.write(canonical_dumps({
                "record": "violation", "suite": "rounding", "case": case,
                "mean": mean, "target": to_jsonable(target), "sigma": sigma,
                "fhat_slack": to_jsonable(slack),
            }) + "\n")
    out.write(canonical_dumps({
        "record": "suite", "suite": "rounding", "cases": cases, "failures": failures,
    }) + "\n")
    return failures


def cmd_verify(args, out) -> int:
    seed = _default_seed(args)
    failures = 0
    suites = ("lemmas", "rounding", "sampling") if args.suite == "all" else (args.suite,)
    for suite in suites:
        rng = random.Random(seed)
        if suite == "lemmas":
            failures += _verify_lemmas(rng, args.cases, out)
        elif suite == "sampling":
            failures += _verify_sampling(rng, args.cases, out)
        elif suite == "rounding":
            failures += _verify_rounding(rng, min(args.cases, 40), out)
        else:
            raise InstanceError(f"unknown suite {suite!r}")
    return EXIT_OK if failures == 0 else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subfree")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay an instance through a step rule")
    run.add_argument("--alg", required=True, choices=[
        "k-uniform", "general", "partition-frac", "bipartite",
        "nonmono-general", "nonmono-uniform", "best-singleton",
    ])
    run.add_argument("--instance", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--k", type=int, default=None)
    run.add_argument("--c", default="2")
    run.add_argument("--delta", default="0.02")
    run.add_argument("--check-every-round", action="store_true")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--out", default=None)

    cons = sub.add_parser("constants", help="threshold constants table")
    cons.add_argument("--k", default="4,5,6,7,8,inf")
    cons.add_argument("--rho", type=int, default=1, choices=[1, 3])

    adv = sub.add_parser("adversary", help="drive a hardness family")
    adv.add_argument("--family", required=True,
                     choices=["uniform", "partition-monotone", "partition-general"])
    adv.add_argument("--alpha", required=True)
    adv.add_argument("--eps", default="0.05")
    adv.add_argument("--delta", default="0.2")
    adv.add_argument("--k", type=int, default=None)
    adv.add_argument("--alg", default="general",
                     choices=["general", "k-uniform", "best-singleton"])
    adv.add_argument("--seed", type=int, default=None)
    adv.add_argument("--quiet", action="store_true")

    ver = sub.add_parser("verify", help="randomized property suites")
    ver.add_argument("--suite", default="all",
                     choices=["lemmas", "rounding", "sampling", "all"])
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--cases", type=int, default=200,
                     help="cases per suite (the rounding suite caps at 40)")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    close = None
    if getattr(args, "out", None):
        close = out = open(args.out, "w", encoding="utf-8")
    try:
        if args.command == "run":
            return cmd_run(args, out)
        if args.command == "constants":
            return cmd_constants(args, out)
        if args.command == "adversary":
            return cmd_adversary(args, out)
        if args.command == "verify":
            return cmd_verify(args, out)
        raise InstanceError(f"unknown command {args.command!r}")
    except (ValueError, OSError) as exc:
        # library errors (instance, matroid, objective, tracker) all derive
        # from ValueError; InvariantViolation does not and maps to 3 below
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSTANCE
    except InvariantViolation as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    finally:
        if close:
            close.close()


if __name__ == "__main__":
    sys.exit(main())
