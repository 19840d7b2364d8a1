"""Exact references: brute-force optima, exhaustive curvature, online sweeps.

Enumeration caps default to 10**6 bases and 8! arrival orders; the
``SUBMATROID_CAP`` environment variable overrides both.
"""
from __future__ import annotations

import itertools
import math
import os
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .analysis import (
    HALF_BOUND,
    analyze_greedy,
    analyze_online,
    analyze_partition,
    clamp_curvature,
    curvature_bound,
    partition_curvature,
)
from .core import (
    EXHAUSTIVE_LIMIT,
    TOL,
    Matroid,
    PartitionInstance,
    TabularValuation,
    Valuation,
    from_mask,
)
from .errors import InputError, PreconditionError, ResourceCapError
from .greedy import GreedyTrace, TiePolicy, run_greedy, run_greedy_m, run_greedy_on
from .instances import Chain, chain_for

DEFAULT_BASIS_CAP = 10**6
DEFAULT_PERMUTATION_CAP = math.factorial(8)
ALGORITHMS = ("greedy", "greedy-m", "greedy-on")


def enumeration_cap(default: int) -> int:
    env = os.environ.get("SUBMATROID_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"SUBMATROID_CAP must be an integer, got {env!r}") from None
    return default


@dataclass(frozen=True)
class OptimumCertificate:
    optimum_set: frozenset[int]
    optimum_value: float
    enumerated_count: int
    method: str = "enumeration"


def iter_bases(M: Matroid) -> Iterator[frozenset[int]]:
    """Bases in lexicographic order, pruning dependent prefixes."""
    K, n = M.rank, M.n

    def extend(start: int, current: frozenset[int], size: int):
        if size == K:
            yield current
            return
        for e in range(start, n - (K - size) + 1):
            S = current | {e}
            if M.is_independent(S):
                yield from extend(e + 1, S, size + 1)

    yield from extend(0, frozenset(), 0)


def brute_force_optimum(Z: Valuation, M: Matroid, cap: int | None = None) -> OptimumCertificate:
    """Best basis by enumeration; ties keep the lexicographically first basis."""
    cap = enumeration_cap(DEFAULT_BASIS_CAP) if cap is None else cap
    best, best_value, count = None, -math.inf, 0
    for B in iter_bases(M):
        count += 1
        if count > cap:
            raise ResourceCapError(f"basis enumeration exceeded the cap of {cap}", count, cap)
        v = Z.value(B)
        if v > best_value:
            best, best_value = B, v
    if best is None:
        raise PreconditionError("matroid has no basis")
    return OptimumCertificate(best, best_value, count)


def brute_force_assignment(instance: PartitionInstance, cap: int | None = None) -> OptimumCertificate:
    """Best allocation over all m**n assignments, scored user by user."""
    cap = enumeration_cap(DEFAULT_BASIS_CAP) if cap is None else cap
    m, n = instance.m, instance.n
    if m**n > cap:
        raise ResourceCapError(f"{m}**{n} assignments exceed the cap of {cap}", m**n, cap)
    best, best_value, count = None, -math.inf, 0
    for assignment in itertools.product(range(m), repeat=n):
        count += 1
        held = [frozenset(r for r in range(n) if assignment[r] == u) for u in range(m)]
        v = sum(Z.value(S) for Z, S in zip(instance.users, held))
        if v > best_value:
            best, best_value = assignment, v
    return OptimumCertificate(instance.allocation_set(best), best_value, count, "assignments")


def brute_force_curvature(Z: Valuation, limit: int = EXHAUSTIVE_LIMIT) -> float:
    """Curvature minimising the gain ratio over every set, not just ``N - {j}``."""
    n = Z.n
    if n > limit:
        raise ResourceCapError(f"exhaustive curvature needs n <= {limit}, got {n}", n, limit)
    if isinstance(Z, TabularValuation):
        v = Z.array
    else:
        v = np.array([Z.value(from_mask(mask)) for mask in range(1 << n)])
    masks = np.arange(1 << n)
    worst = None
    for j in range(n):
        bit = 1 << j
        first = v[bit] - v[0]
        if first <= 0:
            continue
        base = masks[(masks & bit) == 0]
        ratio = float(np.min((v[base | bit] - v[base]) / first))
        worst = ratio if worst is None else min(worst, ratio)
    if worst is None:
        return 0.0
    return clamp_curvature(1.0 - worst)


def chain_optimum(chain: Chain) -> OptimumCertificate:
    """Exact optimum of a chain-structured valuation by dynamic programming."""
    stages = chain.options
    score = {o: chain.term(0, None, o) for o in stages[0]}
    back: list[dict] = []
    count = len(score)
    for i in range(1, len(stages)):
        new, arg = {}, {}
        for o in stages[i]:
            best_prev, best = None, -math.inf
            for p, s in score.items():
                t = s + chain.term(i, p, o)
                count += 1
                if t > best:
                    best_prev, best = p, t
            new[o], arg[o] = best, best_prev
        score = new
        back.append(arg)
    last = max(score, key=lambda o: score[o])
    choice = [last]
    for arg in reversed(back):
        choice.append(arg[choice[-1]])
    choice.reverse()
    S = chain.realize(choice)
    return OptimumCertificate(S, chain.valuation.value(S), count, "chain")


def exact_optimum(instance, cap: int | None = None) -> OptimumCertificate:
    """Chain program for the tight families, basis enumeration otherwise."""
    chain = chain_for(instance)
    if chain is not None:
        return chain_optimum(chain)
    return brute_force_optimum(instance.valuation, instance.matroid, cap)


def _ratio(value: float, optimum: float) -> float:
    return 1.0 if optimum == 0 else value / optimum


@dataclass(frozen=True)
class CompetitiveRatio:
    worst_sigma: tuple[int, ...]
    worst_ratio: float
    permutations: int
    exhaustive: bool
    seed: int | None = None


def arrival_orders(n: int, sample: int | None = None, seed: int | None = None, cap: int | None = None):
    """Every permutation of ``range(n)``, or ``sample`` seeded random ones."""
    if sample is None:
        cap = enumeration_cap(DEFAULT_PERMUTATION_CAP) if cap is None else cap
        total = math.factorial(n)
        if n > 8 or total > cap:
            raise ResourceCapError(f"{total} arrival orders exceed the exhaustive limit (n <= 8, cap {cap})", total, cap)
        return itertools.permutations(range(n))
    if seed is None:
        raise InputError("sampled arrival orders need an explicit seed")
    rng = random.Random(seed)

    def draw():
        for _ in range(sample):
            sigma = list(range(n))
            rng.shuffle(sigma)
            yield tuple(sigma)

    return draw()


def exhaustive_competitive_ratio(
    instance: PartitionInstance,
    sample: int | None = None,
    seed: int | None = None,
    optimum: OptimumCertificate | None = None,
    tol: float = TOL,
) -> CompetitiveRatio:
    """Worst online-greedy ratio over arrival orders (all of them unless sampled).

    A sampled result only bounds the true worst case from above.
    """
    opt = optimum if optimum is not None else exact_optimum(instance)
    _, per_user = partition_curvature(instance, tol)
    worst_sigma, worst, count = None, math.inf, 0
    for sigma in arrival_orders(instance.n, sample, seed):
        count += 1
        r = _ratio(run_greedy_on(instance, sigma, tol, per_user).final_value, opt.optimum_value)
        if r < worst:
            worst_sigma, worst = sigma, r
    return CompetitiveRatio(worst_sigma, worst, count, sample is None, seed)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    ratio: float
    bound: float
    slack: float
    passed: bool


@dataclass
class VerificationRecord:
    algorithm: str
    optimum: OptimumCertificate
    greedy_value: float
    measured_ratio: float
    checks: list[BoundCheck]
    runs: int = 1
    worst_sigma: tuple[int, ...] | None = None
    exhaustive: bool = True
    seed: int | None = None
    traces: list[GreedyTrace] = field(default_factory=list, repr=False)
    reports: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _check(name: str, ratio: float, bound: float, tol: float) -> BoundCheck:
    slack = ratio - bound
    return BoundCheck(name, ratio, bound, slack, slack >= -tol)


def verify_guarantee(
    instance,
    algorithm: str,
    tie_policy: TiePolicy = TiePolicy(),
    tol: float = TOL,
    sample: int | None = None,
    seed: int | None = None,
    arrival: Sequence[int] | None = None,
    all_permutations: bool = True,
    optimum: OptimumCertificate | None = None,
) -> VerificationRecord:
    """Run ``algorithm``, compute its exact optimum and check every applicable bound.

    For greedy-on the sweep covers all arrival orders (or a seeded sample, or
    the single ``arrival`` order when ``all_permutations`` is off).
    """
    if algorithm not in ALGORITHMS:
        raise InputError(f"unknown algorithm {algorithm!r}")
    partition = isinstance(instance, PartitionInstance)
    if algorithm != "greedy" and not partition:
        raise InputError(f"{algorithm} needs a partition instance")
    opt = optimum if optimum is not None else exact_optimum(instance)
    Z, M = instance.valuation, instance.matroid

    if algorithm == "greedy":
        trace = run_greedy(Z, M, tie_policy, tol)
        report = analyze_greedy(trace, Z, M, omega=opt.optimum_set, tol=tol)
        ratio = _ratio(trace.final_value, opt.optimum_value)
        checks = [_check(k, ratio, b, tol) for k, b in report.bounds().items()]
        return VerificationRecord(algorithm, opt, trace.final_value, ratio, checks, traces=[trace], reports=[report])

    c, per_user = partition_curvature(instance, tol)
    if algorithm == "greedy-m":
        trace = run_greedy_m(instance, tol, per_user)
        report = analyze_partition(trace, instance, per_user, tol)
        ratio = _ratio(trace.final_value, opt.optimum_value)
        checks = [_check(k, ratio, b, tol) for k, b in report.bounds().items()]
        return VerificationRecord(algorithm, opt, trace.final_value, ratio, checks, traces=[trace], reports=[report])

    if all_permutations or sample is not None:
        orders = arrival_orders(instance.n, sample, seed)
    else:
        orders = [tuple(arrival) if arrival is not None else tuple(range(instance.n))]
    worst_ratio, worst_sigma, worst_value = math.inf, None, None
    tightest = None
    runs = 0
    traces, reports = [], []
    for sigma in orders:
        runs += 1
        trace = run_greedy_on(instance, sigma, tol, per_user)
        report = analyze_online(trace, instance, per_user, tol)
        ratio = _ratio(trace.final_value, opt.optimum_value)
        online = _check("online", ratio, report.online_bound, tol)
        if tightest is None or online.slack < tightest.slack:
            tightest = online
        if ratio < worst_ratio:
            worst_ratio, worst_sigma, worst_value = ratio, sigma, trace.final_value
        if runs == 1:
            traces.append(trace)
            reports.append(report)
    checks = [
        _check("half", worst_ratio, HALF_BOUND, tol),
        _check("curvature", worst_ratio, curvature_bound(c), tol),
        tightest,
    ]
    return VerificationRecord(
        algorithm, opt, worst_value, worst_ratio, checks,
        runs=runs, worst_sigma=worst_sigma, exhaustive=sample is None and all_permutations,
        seed=seed if sample is not None else None, traces=traces, reports=reports,
    )
