"""Curvature, discriminants and the performance guarantees derived from them.

Discriminants use ``math.inf`` for "no rival gains anything"; every bound
treats ``1/inf`` as exactly zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from .core import (
    TOL,
    Matroid,
    PartitionInstance,
    Valuation,
    eligible_extensions,
    tied,
)
from .errors import InputError, MatroidAxiomError, ValidationError

if TYPE_CHECKING:
    from .greedy import GreedyTrace

HALF_BOUND = 0.5


def curvature(Z: Valuation, tol: float = TOL) -> float:
    """Total curvature, using that ``N - {j}`` minimises the late gain of ``j``."""
    n = Z.n
    N = frozenset(range(n))
    worst = None
    for j in range(n):
        first = Z.gain(frozenset(), j)
        if first < 0:
            raise ValidationError(f"negative singleton increment {first!r} for element {j}")
        if first <= 0:
            continue
        last = Z.gain(N - {j}, j)
        if last < 0 and not tied(last, 0.0, tol):
            raise ValidationError(f"negative increment {last!r} for element {j} on the full set")
        ratio = last / first
        worst = ratio if worst is None else min(worst, ratio)
    if worst is None:
        return 0.0
    return clamp_curvature(1.0 - worst)


def clamp_curvature(c: float) -> float:
    return min(1.0, max(0.0, c))


def partition_curvature(instance: PartitionInstance, tol: float = TOL) -> tuple[float, tuple[float, ...]]:
    """Global curvature (the maximum over users) and the per-user list."""
    per_user = tuple(curvature(Z, tol) for Z in instance.users)
    return max(per_user), per_user


def inverse(d: float) -> float:
    return 0.0 if math.isinf(d) else 1.0 / d


def discriminant(chosen: float, rival: float | None, tol: float = TOL) -> float:
    """Ratio of the chosen gain to the best rival gain, ``inf`` without a positive rival."""
    if rival is None or rival <= 0:
        return math.inf
    if tied(chosen, rival, tol):
        return 1.0
    return chosen / rival


def _check_step_gain(step, gain: float, tol: float):
    if not tied(gain, step.gain, tol):
        raise InputError(
            f"trace records gain {step.gain!r} at iteration {step.iteration}, oracle gives {gain!r}"
        )


def discriminant_general(trace: "GreedyTrace", Z: Valuation, M: Matroid, tol: float = TOL) -> list[float]:
    """Per-step discriminants of a matroid greedy run, recomputed from the oracles."""
    G: frozenset[int] = frozenset()
    out = []
    for step in trace.steps:
        eligible = eligible_extensions(M, G)
        if step.chosen not in eligible:
            raise InputError(f"element {step.chosen} at iteration {step.iteration} was not eligible")
        gain = Z.gain(G, step.chosen)
        _check_step_gain(step, gain, tol)
        rivals = [Z.gain(G, x) for x in eligible if x != step.chosen]
        rival = max(rivals) if rivals else None
        if rival is not None and rival > gain and not tied(rival, gain, tol):
            raise InputError(f"iteration {step.iteration} did not pick a largest gain")
        out.append(discriminant(gain, rival, tol))
        G = G | {step.chosen}
    return out


def _rival_user_discriminants(trace: "GreedyTrace", instance: PartitionInstance, order, tol: float):
    m = instance.m
    held = [frozenset() for _ in range(m)]
    seen = set()
    out = []
    for step, expected in zip(trace.steps, order):
        u, r = instance.pair(step.chosen)
        if r in seen or (expected is not None and r != expected):
            raise InputError(f"resource {r} at iteration {step.iteration} does not fit the trace")
        gains = [instance.user_gain(v, r, held[v]) for v in range(m)]
        _check_step_gain(step, gains[u], tol)
        rival = max((gains[v] for v in range(m) if v != u), default=None)
        if rival is not None and rival > gains[u] and not tied(rival, gains[u], tol):
            raise InputError(f"iteration {step.iteration} did not give the resource to a best user")
        out.append(discriminant(gains[u], rival, tol))
        held[u] = held[u] | {r}
        seen.add(r)
    if len(seen) != instance.n:
        raise InputError("trace does not allocate every resource")
    return out


def discriminant_partition(trace: "GreedyTrace", instance: PartitionInstance, tol: float = TOL) -> list[float]:
    """Chosen user's gain over the best rival user's gain for the same resource."""
    return _rival_user_discriminants(trace, instance, [None] * len(trace.steps), tol)


def discriminant_online(trace: "GreedyTrace", instance: PartitionInstance, tol: float = TOL) -> list[float]:
    if trace.arrival is None:
        raise InputError("online trace carries no arrival order")
    return _rival_user_discriminants(trace, instance, trace.arrival, tol)


def first_forced_iteration(trace: "GreedyTrace", M: Matroid) -> int:
    """First iteration whose eligible count equals the number of picks left, else K+1."""
    K = M.rank
    for step in trace.steps:
        if step.eligible_count == K - step.iteration + 1:
            return step.iteration
    return K + 1


def forced_tail(M: Matroid, S: Iterable[int]) -> frozenset[int] | None:
    """Eligible extensions of ``S`` when they are exactly as many as the picks left."""
    S = frozenset(S)
    eligible = eligible_extensions(M, S)
    if len(eligible) == M.rank - len(S):
        return eligible
    return None


def min_discriminant(discriminants: Sequence[float], first_forced: int) -> float:
    return min(discriminants[: first_forced - 1], default=math.inf)


def _bound(term: float) -> float:
    if term <= 0:
        return 1.0
    return min(1.0, 1.0 / term)


def curvature_bound(c: float) -> float:
    return 1.0 / (1.0 + c)


def matroid_greedy_bound(c: float, discriminants: Sequence[float], first_forced: int) -> float:
    """min(1, 1/(c + max 1/d_i)) over iterations before the forced tail."""
    worst = max((inverse(d) for d in discriminants[: first_forced - 1]), default=0.0)
    return _bound(c + worst)


def partition_greedy_bound(per_step: Iterable[tuple[float, float]]) -> float:
    """min(1, 1/max_i(c_i + 1/d_i)) for (user curvature, discriminant) pairs."""
    return _bound(max((c + inverse(d) for c, d in per_step), default=0.0))


def online_greedy_bound(per_step: Iterable[tuple[float, float]]) -> float:
    return partition_greedy_bound(per_step)


def exchange_ordering(M: Matroid, A: Sequence[int], B: Iterable[int]) -> tuple[int, ...]:
    """Order basis ``B`` against the ordered basis ``A``.

    Position i receives some b with ``A[:i-1] + b`` independent, and shared
    elements keep their position in ``A``. Positions are filled from the last
    one down, preferring ``A[i-1]`` itself, then the lowest index.
    """
    A = tuple(A)
    B = frozenset(B)
    K = M.rank
    for name, S in (("A", frozenset(A)), ("B", B)):
        if len(S) != K or not M.is_independent(S):
            raise InputError(f"{name} is not a basis")
    if len(A) != K:
        raise InputError("A has repeated elements")
    remaining = set(B)
    out = [0] * K
    for i in range(K, 0, -1):
        prefix = frozenset(A[: i - 1])
        a = A[i - 1]
        if a in remaining:
            b = a
        else:
            cands = sorted(b for b in remaining if b not in prefix and M.is_independent(prefix | {b}))
            if not cands:
                raise MatroidAxiomError(
                    f"no element of B can fill position {i}",
                    {"prefix": sorted(prefix), "unassigned": sorted(remaining)},
                )
            b = cands[0]
        out[i - 1] = b
        remaining.remove(b)
    return tuple(out)


def refined_discriminants(
    trace: "GreedyTrace", Z: Valuation, M: Matroid, omega: Iterable[int]
) -> tuple[tuple[int, ...], list[float]]:
    """Exchange ordering of ``omega`` and the per-step ratios rho_i / rho_{omega_i}."""
    ordered = exchange_ordering(M, trace.order, omega)
    G: frozenset[int] = frozenset()
    out = []
    for g, w in zip(trace.order, ordered):
        if w == g:
            out.append(1.0)
        else:
            out.append(discriminant(Z.gain(G, g), Z.gain(G, w)))
        G = G | {g}
    return ordered, out


def refined_bound(
    trace: "GreedyTrace",
    Z: Valuation,
    M: Matroid,
    omega: Iterable[int],
    c: float | None = None,
) -> float:
    """Bound from discriminants against the matched optimal elements.

    Only steps before the forced tail whose matched element lies outside the
    greedy set contribute.
    """
    if c is None:
        c = curvature(Z)
    ordered, primes = refined_discriminants(trace, Z, M, omega)
    i0 = first_forced_iteration(trace, M)
    final = trace.final_set
    worst = max(
        (inverse(d) for i, (w, d) in enumerate(zip(ordered, primes), start=1) if i < i0 and w not in final),
        default=0.0,
    )
    return _bound(c + worst)


@dataclass
class GuaranteeReport:
    algorithm: str
    curvature: float
    discriminants: list[float]
    first_forced_iteration: int
    min_discriminant: float
    discriminant_bound: float | None
    per_user_curvature: tuple[float, ...] | None = None
    chosen_user_curvature: list[float] | None = None
    user_discriminants: list[float] | None = None
    partition_bound: float | None = None
    online_bound: float | None = None
    refined_bound: float | None = None
    unique_basis: bool = False
    half_bound: float = HALF_BOUND
    curvature_bound: float = field(init=False)

    def __post_init__(self):
        self.curvature_bound = curvature_bound(self.curvature)

    @property
    def post_forced(self) -> list[bool]:
        return [i >= self.first_forced_iteration for i in range(1, len(self.discriminants) + 1)]

    def bounds(self) -> dict[str, float]:
        out = {"half": self.half_bound, "curvature": self.curvature_bound}
        for key, value in (
            ("discriminant", self.discriminant_bound),
            ("partition", self.partition_bound),
            ("online", self.online_bound),
            ("refined", self.refined_bound),
        ):
            if value is not None:
                out[key] = value
        return out


def _matroid_report(algorithm, trace, Z, M, c, tol) -> GuaranteeReport:
    ds = discriminant_general(trace, Z, M, tol)
    i0 = first_forced_iteration(trace, M)
    # a forced first step means the basis is unique and greedy is optimal
    bound = 1.0 if i0 == 1 else matroid_greedy_bound(c, ds, i0)
    return GuaranteeReport(
        algorithm=algorithm,
        curvature=c,
        discriminants=ds,
        first_forced_iteration=i0,
        min_discriminant=min_discriminant(ds, i0),
        discriminant_bound=bound,
        unique_basis=i0 == 1,
    )


def analyze_greedy(
    trace: "GreedyTrace",
    Z: Valuation,
    M: Matroid,
    omega: Iterable[int] | None = None,
    c: float | None = None,
    tol: float = TOL,
) -> GuaranteeReport:
    if c is None:
        c = curvature(Z, tol)
    report = _matroid_report(trace.algorithm, trace, Z, M, c, tol)
    if omega is not None:
        report.refined_bound = refined_bound(trace, Z, M, omega, c)
    return report


def analyze_partition(
    trace: "GreedyTrace",
    instance: PartitionInstance,
    curvatures: Sequence[float] | None = None,
    tol: float = TOL,
) -> GuaranteeReport:
    """Report for a greedy-m run: matroid-level and user-level bounds."""
    per_user = tuple(curvatures) if curvatures is not None else partition_curvature(instance, tol)[1]
    report = _matroid_report(trace.algorithm, trace, instance.valuation, instance.matroid, max(per_user), tol)
    dp = discriminant_partition(trace, instance, tol)
    cs = [per_user[instance.pair(s.chosen).user] for s in trace.steps]
    report.per_user_curvature = per_user
    report.chosen_user_curvature = cs
    report.user_discriminants = dp
    report.partition_bound = partition_greedy_bound(zip(cs, dp))
    return report


def analyze_online(
    trace: "GreedyTrace",
    instance: PartitionInstance,
    curvatures: Sequence[float] | None = None,
    tol: float = TOL,
) -> GuaranteeReport:
    """Report for a greedy-on run. Offline discriminants do not apply to it."""
    per_user = tuple(curvatures) if curvatures is not None else partition_curvature(instance, tol)[1]
    do = discriminant_online(trace, instance, tol)
    cs = [per_user[instance.pair(s.chosen).user] for s in trace.steps]
    return GuaranteeReport(
        algorithm=trace.algorithm,
        curvature=max(per_user),
        discriminants=[],
        first_forced_iteration=instance.n + 1,
        min_discriminant=math.inf,
        discriminant_bound=None,
        per_user_curvature=per_user,
        chosen_user_curvature=cs,
        user_discriminants=do,
        online_bound=online_greedy_bound(zip(cs, do)),
    )
