"""Ground sets, matroid independence oracles and set-function valuations.

Subsets of the ground set are ``frozenset`` objects of dense integer indices
``0..n-1``.  Labels are carried for display and serialization only; the index
order is the canonical total order used by every tie-break.
"""
from __future__ import annotations

import math
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DomainError,
    EmptyInstanceError,
    InputError,
    MatroidAxiomError,
    PreconditionError,
)

TOL = 1e-9
ABS_TOL = 1e-12
EXHAUSTIVE_LIMIT = 12
TABULAR_LIMIT = 20


def tied(a: float, b: float, tol: float = TOL) -> bool:
    """Equality test used for every tie and comparison of oracle values."""
    return math.isclose(a, b, rel_tol=tol, abs_tol=ABS_TOL)


def to_mask(S: Iterable[int]) -> int:
    mask = 0
    for e in S:
        mask |= 1 << e
    return mask


def from_mask(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


@dataclass(frozen=True)
class GroundSet:
    """Finite ordered ground set; element ``i`` is labelled ``labels[i]``."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(lab) for lab in self.labels)
        if len(set(labels)) != len(labels):
            raise InputError("ground set labels must be unique")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, n: int, prefix: str = "e") -> "GroundSet":
        return cls(tuple(f"{prefix}{i + 1}" for i in range(n)))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def size(self) -> int:
        return len(self.labels)

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def index(self, label: str) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise DomainError(f"unknown element label {label!r}") from None

    def check(self, S: Iterable[int]) -> frozenset[int]:
        """Return ``S`` as a frozenset, raising DomainError on foreign elements."""
        out = frozenset(S)
        n = len(self.labels)
        for e in out:
            if not isinstance(e, (int, np.integer)) or isinstance(e, bool) or not 0 <= e < n:
                raise DomainError(f"element {e!r} is not in the ground set of size {n}")
        return out

    def describe(self, S: Iterable[int]) -> list[str]:
        return [self.labels[e] for e in sorted(S)]


class PairElement(NamedTuple):
    user: int
    resource: int


def pair_ground(m: int, resources: GroundSet) -> GroundSet:
    """Ground set of user-resource pairs, indexed ``resource * m + user``."""
    return GroundSet(
        tuple(f"u{u + 1}:{resources.labels[r]}" for r in range(len(resources)) for u in range(m))
    )


# ---------------------------------------------------------------------------
# Matroids


class Matroid(ABC):
    ground: GroundSet

    @abstractmethod
    def is_independent(self, S: frozenset[int]) -> bool: ...

    @property
    @abstractmethod
    def rank(self) -> int: ...

    @property
    def n(self) -> int:
        return len(self.ground)


@dataclass(frozen=True)
class UniformMatroid(Matroid):
    ground: GroundSet
    K: int

    def __post_init__(self):
        if not 1 <= self.K <= len(self.ground):
            raise InputError(f"uniform matroid needs 1 <= K <= n, got K={self.K}, n={len(self.ground)}")

    def is_independent(self, S):
        return len(S) <= self.K

    @property
    def rank(self):
        return self.K


@dataclass(frozen=True)
class PartitionMatroid(Matroid):
    """At most ``capacities[b]`` elements from each block ``blocks[b]``."""

    ground: GroundSet
    blocks: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(e) for e in b)) for b in self.blocks)
        caps = tuple(int(k) for k in self.capacities)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "capacities", caps)
        if len(blocks) != len(caps):
            raise InputError("partition matroid needs one capacity per block")
        seen = sorted(e for b in blocks for e in b)
        if seen != list(range(len(self.ground))):
            raise InputError("partition matroid blocks must be disjoint and cover the ground set")
        for b, k in zip(blocks, caps):
            if not 1 <= k <= len(b):
                raise InputError(f"block capacity {k} outside 1..{len(b)}")

    @cached_property
    def block_of(self) -> tuple[int, ...]:
        owner = [0] * len(self.ground)
        for i, b in enumerate(self.blocks):
            for e in b:
                owner[e] = i
        return tuple(owner)

    def is_independent(self, S):
        counts = [0] * len(self.blocks)
        for e in S:
            b = self.block_of[e]
            counts[b] += 1
            if counts[b] > self.capacities[b]:
                return False
        return True

    @property
    def rank(self):
        return sum(self.capacities)


@dataclass(frozen=True)
class PairPartitionMatroid(Matroid):
    """User-resource pairs with each resource allocated at most once."""

    users: int
    resources: GroundSet

    def __post_init__(self):
        if self.users < 1 or len(self.resources) < 1:
            raise EmptyInstanceError("pair-partition matroid needs at least one user and one resource")

    @cached_property
    def ground(self) -> GroundSet:
        return pair_ground(self.users, self.resources)

    def is_independent(self, S):
        used = set()
        for p in S:
            r = p // self.users
            if r in used:
                return False
            used.add(r)
        return True

    @property
    def rank(self):
        return len(self.resources)

    def as_partition(self) -> PartitionMatroid:
        m = self.users
        blocks = tuple(tuple(r * m + u for u in range(m)) for r in range(len(self.resources)))
        return PartitionMatroid(self.ground, blocks, (1,) * len(blocks))


@dataclass(frozen=True)
class ExplicitMatroid(Matroid):
    """Matroid given by its full family of independent sets.

    The three axioms are checked at construction unless ``check=False``,
    which exists so that broken families can be handed to validate_oracles.
    """

    ground: GroundSet
    family: frozenset[frozenset[int]]
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        family = frozenset(self.ground.check(I) for I in self.family)
        object.__setattr__(self, "family", family)
        if self.check:
            bad = family_violations(family)
            if bad:
                raise MatroidAxiomError(f"not a matroid: {bad[0].axiom} fails", bad[0].witness)

    def is_independent(self, S):
        return frozenset(S) in self.family

    @property
    def rank(self):
        return max((len(I) for I in self.family), default=0)


# ---------------------------------------------------------------------------
# Valuations


class Valuation(ABC):
    ground: GroundSet

    @abstractmethod
    def value(self, S: frozenset[int]) -> float: ...

    def gain(self, S: frozenset[int], q: int) -> float:
        """Marginal gain without argument checking (hot path)."""
        return self.value(S | {q}) - self.value(S)

    def __call__(self, S: Iterable[int]) -> float:
        return self.value(frozenset(S))

    @property
    def n(self) -> int:
        return len(self.ground)


@dataclass(frozen=True)
class TabularValuation(Valuation):
    """All ``2**n`` values stored explicitly, indexed by bitmask."""

    ground: GroundSet
    values: tuple[float, ...]

    def __post_init__(self):
        n = len(self.ground)
        if n > TABULAR_LIMIT:
            raise InputError(f"tabular valuations are capped at n={TABULAR_LIMIT}, got n={n}")
        values = tuple(float(v) for v in self.values)
        if len(values) != 1 << n:
            raise InputError(f"tabular valuation on n={n} needs {1 << n} values, got {len(values)}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, ground: GroundSet, f) -> "TabularValuation":
        return cls(ground, tuple(f(from_mask(mask)) for mask in range(1 << len(ground))))

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def value(self, S):
        return self.values[to_mask(S)]


@dataclass(frozen=True)
class ModularValuation(Valuation):
    ground: GroundSet
    weights: tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != len(self.ground):
            raise InputError("modular valuation needs one weight per element")
        object.__setattr__(self, "weights", weights)

    def value(self, S):
        return math.fsum(self.weights[e] for e in S)

    def gain(self, S, q):
        return self.weights[q]


@dataclass(frozen=True)
class CoverageValuation(Valuation):
    """Weighted coverage: element ``e`` covers universe items ``covers[e]``."""

    ground: GroundSet
    covers: tuple[frozenset[int], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        covers = tuple(frozenset(int(x) for x in c) for c in self.covers)
        weights = tuple(float(w) for w in self.weights)
        if len(covers) != len(self.ground):
            raise InputError("coverage valuation needs one cover set per element")
        for c in covers:
            for x in c:
                if not 0 <= x < len(weights):
                    raise InputError(f"universe item {x} has no weight")
        object.__setattr__(self, "covers", covers)
        object.__setattr__(self, "weights", weights)

    def value(self, S):
        covered = set()
        for e in S:
            covered |= self.covers[e]
        return math.fsum(self.weights[x] for x in sorted(covered))


@dataclass(frozen=True)
class PartitionSumValuation(Valuation):
    """``Z(S) = sum_u Z_u(S_u)`` over user-resource pairs."""

    users: tuple[Valuation, ...]
    resources: GroundSet

    @cached_property
    def ground(self) -> GroundSet:
        return pair_ground(len(self.users), self.resources)

    def split(self, S: Iterable[int]) -> list[frozenset[int]]:
        m = len(self.users)
        parts: list[set[int]] = [set() for _ in range(m)]
        for p in S:
            parts[p % m].add(p // m)
        return [frozenset(part) for part in parts]

    def value(self, S):
        return sum(Z.value(part) for Z, part in zip(self.users, self.split(S)))

    def gain(self, S, q):
        m = len(self.users)
        u, r = q % m, q // m
        own = frozenset(p // m for p in S if p % m == u)
        return self.users[u].gain(own, r)


# ---------------------------------------------------------------------------
# Instances


@dataclass(frozen=True)
class Instance:
    """A valuation paired with a matroid over the same ground set."""

    valuation: Valuation
    matroid: Matroid

    def __post_init__(self):
        if self.valuation.ground != self.matroid.ground:
            raise InputError("valuation and matroid must share the ground set")

    @property
    def ground(self) -> GroundSet:
        return self.matroid.ground

    def __iter__(self):
        # allows ``Z, M = instance``
        return iter((self.valuation, self.matroid))


@dataclass(frozen=True)
class PartitionInstance:
    """Resources shared among users with individual valuations ``Z_u``.

    Usable wherever an Instance is: ``valuation`` and ``matroid`` expose the
    pair-sum function and the pair-partition matroid.
    """

    users: tuple[Valuation, ...]
    resources: GroundSet

    def __post_init__(self):
        users = tuple(self.users)
        object.__setattr__(self, "users", users)
        if not users or len(self.resources) == 0:
            raise EmptyInstanceError("partition instance needs m >= 1 users and n >= 1 resources")
        for u, Z in enumerate(users):
            if len(Z.ground) != len(self.resources):
                raise InputError(f"user {u + 1} valuation is over {len(Z.ground)} resources, expected {len(self.resources)}")

    @property
    def m(self) -> int:
        return len(self.users)

    @property
    def n(self) -> int:
        return len(self.resources)

    @cached_property
    def valuation(self) -> PartitionSumValuation:
        return PartitionSumValuation(self.users, self.resources)

    @cached_property
    def matroid(self) -> PairPartitionMatroid:
        return PairPartitionMatroid(self.m, self.resources)

    @property
    def ground(self) -> GroundSet:
        return self.matroid.ground

    def pair_index(self, user: int, resource: int) -> int:
        return resource * self.m + user

    def pair(self, index: int) -> PairElement:
        return PairElement(index % self.m, index // self.m)

    def user_sets(self, S: Iterable[int]) -> list[frozenset[int]]:
        return self.valuation.split(S)

    def user_gain(self, user: int, resource: int, held: frozenset[int]) -> float:
        """Gain to ``user`` holding resources ``held`` from receiving ``resource``."""
        return self.users[user].gain(held, resource)

    def allocation_set(self, assignment: Sequence[int]) -> frozenset[int]:
        """Pair set giving resource ``r`` to user ``assignment[r]``."""
        return frozenset(self.pair_index(u, r) for r, u in enumerate(assignment))


# ---------------------------------------------------------------------------
# Operations


def marginal_gain(Z: Valuation, S: Iterable[int], q: int) -> float:
    """``Z(S + q) - Z(S)`` with domain and precondition checks."""
    S = Z.ground.check(S)
    (q,) = Z.ground.check([q])
    if q in S:
        raise PreconditionError(f"element {q} is already in S")
    return Z.gain(S, q)


def eligible_extensions(M: Matroid, S: Iterable[int]) -> frozenset[int]:
    """Elements ``x`` outside ``S`` with ``S + x`` independent."""
    S = M.ground.check(S)
    if not M.is_independent(S):
        raise PreconditionError("S is not independent")
    return frozenset(x for x in range(M.n) if x not in S and M.is_independent(S | {x}))


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: dict
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list[Violation]
    exhaustive: bool

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms(self) -> list[str]:
        return [v.axiom for v in self.violations]


def _set_function_violations(v: np.ndarray, n: int, tol: float, prefix: str = "") -> list[Violation]:
    """Exhaustive normalization / monotonicity / submodularity check of a value table."""
    out = []
    scale = tol * max(1.0, float(np.abs(v).max()))
    masks = np.arange(1 << n)
    if abs(v[0]) > scale:
        out.append(Violation(prefix + "normalized", {"S": []}, f"Z(empty) = {v[0]!r}"))
    for x in range(n):
        bit = 1 << x
        base = masks[(masks & bit) == 0]
        bad = np.flatnonzero(v[base | bit] - v[base] < -scale)
        if bad.size:
            S = int(base[bad[0]])
            out.append(Violation(prefix + "monotone", {"S": sorted(from_mask(S)), "T": sorted(from_mask(S | bit))}))
            break
    for x, y in combinations(range(n), 2):
        bx, by = 1 << x, 1 << y
        base = masks[(masks & (bx | by)) == 0]
        late = v[base | bx | by] - v[base | by]
        early = v[base | bx] - v[base]
        bad = np.flatnonzero(late > early + scale)
        if bad.size:
            S = int(base[bad[0]])
            out.append(Violation(
                prefix + "submodular",
                {"S": sorted(from_mask(S)), "T": sorted(from_mask(S | by)), "x": x},
            ))
            break
    return out


def _sampled_set_function_violations(Z: Valuation, samples: int, seed: int, tol: float, prefix: str = "") -> list[Violation]:
    rng = random.Random(seed)
    n = Z.n
    out = []
    found = set()
    empty = Z.value(frozenset())
    if abs(empty) > tol * max(1.0, abs(empty)):
        out.append(Violation(prefix + "normalized", {"S": []}, f"Z(empty) = {empty!r}"))
    if n < 2:
        return out
    for _ in range(samples):
        S = frozenset(e for e in range(n) if rng.random() < 0.5)
        rest = [e for e in range(n) if e not in S]
        if len(rest) < 2:
            continue
        x, y = rng.sample(rest, 2)
        zS, zx, zy, zxy = Z.value(S), Z.value(S | {x}), Z.value(S | {y}), Z.value(S | {x, y})
        scale = tol * max(1.0, abs(zxy))
        if "monotone" not in found and zx - zS < -scale:
            found.add("monotone")
            out.append(Violation(prefix + "monotone", {"S": sorted(S), "T": sorted(S | {x})}))
        if "submodular" not in found and zxy - zy > zx - zS + scale:
            found.add("submodular")
            out.append(Violation(prefix + "submodular", {"S": sorted(S), "T": sorted(S | {y}), "x": x}))
    return out


def family_violations(family: frozenset[frozenset[int]]) -> list[Violation]:
    """Check the matroid axioms on an explicit family (one witness per axiom)."""
    out = []
    if frozenset() not in family:
        out.append(Violation("empty-independent", {"S": []}))
    ordered = sorted(family, key=lambda I: (len(I), sorted(I)))
    for I in ordered:
        missing = next((I - {x} for x in sorted(I) if I - {x} not in family), None)
        if missing is not None:
            out.append(Violation("hereditary", {"S": sorted(missing), "of": sorted(I)}))
            break
    by_size: dict[int, list[frozenset[int]]] = {}
    for I in ordered:
        by_size.setdefault(len(I), []).append(I)
    done = False
    for k in sorted(by_size):
        for S in by_size[k]:
            for T in by_size.get(k + 1, ()):
                if not any(S | {x} in family for x in T - S):
                    out.append(Violation("augmentation", {"S": sorted(S), "T": sorted(T)}))
                    done = True
                    break
            if done:
                break
        if done:
            break
    return out


def validate_oracles(
    Z: Valuation,
    M: Matroid | None = None,
    *,
    limit: int = EXHAUSTIVE_LIMIT,
    samples: int = 2000,
    seed: int = 0,
    tol: float = TOL,
) -> ValidationReport:
    """Check the valuation and matroid axioms; an empty report means pass.

    Ground sets up to ``limit`` elements are checked exhaustively, larger ones
    by seeded random sampling.  Uniform, partition and pair-partition
    matroids are matroids by construction and only explicit families (or
    foreign Matroid subclasses) are enumerated.
    """
    violations: list[Violation] = []
    exhaustive = True

    def check_function(F: Valuation, prefix: str):
        nonlocal exhaustive
        if isinstance(F, PartitionSumValuation):
            for u, Zu in enumerate(F.users):
                check_function(Zu, f"{prefix}user{u + 1}.")
            return
        if F.n <= limit:
            if isinstance(F, TabularValuation):
                v = F.array
            else:
                v = np.array([F.value(from_mask(mask)) for mask in range(1 << F.n)], dtype=float)
            violations.extend(_set_function_violations(v, F.n, tol, prefix))
        else:
            exhaustive = False
            violations.extend(_sampled_set_function_violations(F, samples, seed, tol, prefix))

    check_function(Z, "")

    if M is not None:
        if len(M.ground) != len(Z.ground):
            violations.append(Violation("ground-mismatch", {"valuation": len(Z.ground), "matroid": len(M.ground)}))
        if isinstance(M, ExplicitMatroid):
            violations.extend(family_violations(M.family))
        elif not isinstance(M, (UniformMatroid, PartitionMatroid, PairPartitionMatroid)):
            if M.n <= limit:
                family = frozenset(from_mask(mask) for mask in range(1 << M.n) if M.is_independent(from_mask(mask)))
                violations.extend(family_violations(family))
            else:
                exhaustive = False
    return ValidationReport(violations, exhaustive)
