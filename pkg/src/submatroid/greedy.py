"""The offline matroid greedy, the partition variant and the online variant.

Every run returns a :class:`GreedyTrace` recording, per iteration, the chosen
element, its gain, the number of eligible candidates, the best rival gain and
the set of candidates tied with the maximum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .analysis import curvature
from .core import (
    TOL,
    GroundSet,
    Matroid,
    PartitionInstance,
    Valuation,
    eligible_extensions,
    tied,
)
from .errors import InputError, PreconditionError, RankInconsistencyError

TIE_KINDS = ("lowest-index", "highest-index", "prefer")


@dataclass(frozen=True)
class TiePolicy:
    """How the matroid greedy resolves exact (within tolerance) ties.

    ``prefer`` ranks candidates by their position in ``preference``; elements
    not listed come after all listed ones, lowest index first.
    """

    kind: str = "lowest-index"
    preference: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in TIE_KINDS:
            raise InputError(f"unknown tie policy {self.kind!r}; expected one of {', '.join(TIE_KINDS)}")
        object.__setattr__(self, "preference", tuple(int(e) for e in self.preference))

    def choose(self, candidates: Sequence[int]) -> int:
        if self.kind == "lowest-index":
            return min(candidates)
        if self.kind == "highest-index":
            return max(candidates)
        rank = {e: i for i, e in enumerate(self.preference)}
        return min(candidates, key=lambda e: (rank.get(e, len(rank)), e))

    @classmethod
    def parse(cls, text: str, ground: GroundSet | None = None) -> "TiePolicy":
        """Parse ``lowest-index``, ``highest-index`` or ``prefer:a,b,...``.

        Preference entries are element labels or integer indices.
        """
        text = text.strip()
        if not text.startswith("prefer"):
            return cls(text)
        _, _, items = text.partition(":")
        prefs = []
        for item in filter(None, (s.strip() for s in items.split(","))):
            if ground is not None and item in ground.labels:
                prefs.append(ground.index(item))
            elif item.lstrip("-").isdigit():
                prefs.append(int(item))
            else:
                raise InputError(f"tie preference {item!r} is neither a label nor an index")
        if ground is not None:
            ground.check(prefs)
        return cls("prefer", tuple(prefs))

    def describe(self) -> str:
        if self.kind != "prefer":
            return self.kind
        return "prefer:" + ",".join(str(e) for e in self.preference)


@dataclass(frozen=True)
class StepRecord:
    iteration: int
    chosen: int
    gain: float
    eligible_count: int
    runner_up_gain: float | None
    tie_set: tuple[int, ...]


@dataclass(frozen=True)
class GreedyTrace:
    algorithm: str
    steps: tuple[StepRecord, ...]
    final_set: frozenset[int]
    final_value: float
    arrival: tuple[int, ...] | None = None

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(s.chosen for s in self.steps)

    @property
    def gains(self) -> tuple[float, ...]:
        return tuple(s.gain for s in self.steps)

    def prefix(self, i: int) -> frozenset[int]:
        """The greedy set after ``i`` iterations."""
        return frozenset(self.order[:i])

    def __len__(self):
        return len(self.steps)


def run_greedy(
    Z: Valuation,
    M: Matroid,
    tie_policy: TiePolicy = TiePolicy(),
    tol: float = TOL,
) -> GreedyTrace:
    """Matroid greedy: K times add the eligible element of largest gain."""
    K = M.rank
    if K < 1:
        raise PreconditionError("matroid rank must be at least 1")
    G: frozenset[int] = frozenset()
    steps = []
    for i in range(1, K + 1):
        eligible = sorted(eligible_extensions(M, G))
        if not eligible:
            raise RankInconsistencyError(f"no eligible element at iteration {i} of {K}")
        gains = {x: Z.gain(G, x) for x in eligible}
        best = max(gains.values())
        ties = tuple(x for x in eligible if tied(gains[x], best, tol))
        choice = tie_policy.choose(ties)
        rivals = [gains[x] for x in eligible if x != choice]
        steps.append(StepRecord(
            iteration=i,
            chosen=choice,
            gain=gains[choice],
            eligible_count=len(eligible),
            runner_up_gain=max(rivals) if rivals else None,
            tie_set=ties,
        ))
        G = G | {choice}
    return GreedyTrace("greedy", tuple(steps), G, Z.value(G))


def user_curvatures(instance: PartitionInstance) -> tuple[float, ...]:
    return tuple(curvature(Z) for Z in instance.users)


def _inverse_discriminant(gain: float, rivals: Iterable[float]) -> float:
    # 1/d for a candidate pair; zero when no rival user gains anything
    rival = max(rivals, default=0.0)
    if rival <= 0:
        return 0.0
    return rival / gain if gain > 0 else float("inf")


def run_greedy_m(
    instance: PartitionInstance,
    tol: float = TOL,
    curvatures: Sequence[float] | None = None,
) -> GreedyTrace:
    """Partition greedy with the curvature/discriminant tie-break.

    Among pairs tied for the largest gain, pick the one minimising
    ``c_u + 1/d(u, r)``; remaining ties go to the highest pair index.
    """
    m, n = instance.m, instance.n
    curv = tuple(curvatures) if curvatures is not None else user_curvatures(instance)
    held = [frozenset() for _ in range(m)]
    free = list(range(n))
    G: frozenset[int] = frozenset()
    steps = []
    for i in range(1, n + 1):
        gains = {r: [instance.user_gain(u, r, held[u]) for u in range(m)] for r in free}
        best = max(max(g) for g in gains.values())
        ties = [(u, r) for r in free for u in range(m) if tied(gains[r][u], best, tol)]
        if len(ties) > 1:
            keys = {
                (u, r): curv[u] + _inverse_discriminant(gains[r][u], (gains[r][v] for v in range(m) if v != u))
                for u, r in ties
            }
            low = min(keys.values())
            finalists = [p for p in ties if tied(keys[p], low, tol)]
            u, r = max(finalists, key=lambda p: instance.pair_index(*p))
        else:
            u, r = ties[0]
        chosen = instance.pair_index(u, r)
        rivals = [gains[rr][v] for rr in free for v in range(m) if (v, rr) != (u, r)]
        steps.append(StepRecord(
            iteration=i,
            chosen=chosen,
            gain=gains[r][u],
            eligible_count=m * len(free),
            runner_up_gain=max(rivals) if rivals else None,
            tie_set=tuple(sorted(instance.pair_index(*p) for p in ties)),
        ))
        held[u] = held[u] | {r}
        free.remove(r)
        G = G | {chosen}
    return GreedyTrace("greedy-m", tuple(steps), G, instance.valuation.value(G))


def check_arrival(arrival: Iterable[int], n: int) -> tuple[int, ...]:
    sigma = tuple(arrival)
    if any(not isinstance(r, int) or isinstance(r, bool) for r in sigma) or sorted(sigma) != list(range(n)):
        raise InputError(f"arrival order must be a permutation of 0..{n - 1}, got {list(sigma)}")
    return sigma


def run_greedy_on(
    instance: PartitionInstance,
    arrival: Iterable[int] | None = None,
    tol: float = TOL,
    curvatures: Sequence[float] | None = None,
) -> GreedyTrace:
    """Online greedy: each arriving resource goes irrevocably to its best user.

    Ties go to the user of least curvature, then to the lowest user index.
    """
    m, n = instance.m, instance.n
    sigma = tuple(range(n)) if arrival is None else check_arrival(arrival, n)
    curv = tuple(curvatures) if curvatures is not None else user_curvatures(instance)
    held = [frozenset() for _ in range(m)]
    G: frozenset[int] = frozenset()
    steps = []
    for t, r in enumerate(sigma, start=1):
        gains = [instance.user_gain(u, r, held[u]) for u in range(m)]
        best = max(gains)
        ties = [u for u in range(m) if tied(gains[u], best, tol)]
        low = min(curv[u] for u in ties)
        u = min(v for v in ties if tied(curv[v], low, tol))
        chosen = instance.pair_index(u, r)
        rivals = [gains[v] for v in range(m) if v != u]
        steps.append(StepRecord(
            iteration=t,
            chosen=chosen,
            gain=gains[u],
            eligible_count=m,
            runner_up_gain=max(rivals) if rivals else None,
            tie_set=tuple(instance.pair_index(v, r) for v in ties),
        ))
        held[u] = held[u] | {r}
        G = G | {chosen}
    return GreedyTrace("greedy-on", tuple(steps), G, instance.valuation.value(G), arrival=sigma)
