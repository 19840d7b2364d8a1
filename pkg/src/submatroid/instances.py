"""Instance generators: random test instances and the two tight families.

Both tight families decompose along a chain (each stage's contribution depends
only on its own choice and the previous one), so their exact optima come from
a dynamic program instead of enumeration; see :class:`Chain`.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Sequence

import numpy as np

from .core import (
    ABS_TOL,
    TOL,
    ExplicitMatroid,
    GroundSet,
    Instance,
    Matroid,
    PartitionInstance,
    PartitionMatroid,
    TabularValuation,
    UniformMatroid,
    Valuation,
    tied,
    validate_oracles,
)
from .errors import InputError, ValidationError


def _geometric(ratio: float, terms: int) -> float:
    # 1 + ratio + ... + ratio**(terms-1)
    if terms <= 0:
        return 0.0
    if tied(ratio, 1.0):
        return float(terms)
    return (1.0 - ratio**terms) / (1.0 - ratio)


def tight_limit_ratio(c: float, d: float) -> float:
    return 1.0 / (1.0 / d + c)


# ---------------------------------------------------------------------------
# Chains


@dataclass(frozen=True)
class Chain:
    """A valuation whose bases are one choice per stage, scored stage by stage.

    ``term(i, prev, cur)`` is stage ``i``'s contribution (``prev`` is None at
    stage 0) and ``realize`` maps a choice sequence to the basis.
    """

    valuation: Valuation
    options: tuple[tuple[Hashable, ...], ...]
    term: Callable[[int, Hashable, Hashable], float]
    realize: Callable[[Sequence[Hashable]], frozenset[int]]


# ---------------------------------------------------------------------------
# Tight example for the partition bound


@dataclass(frozen=True)
class TightPartitionParams:
    c: float
    d: float
    epsilon: float = 1e-6
    n: int = 30

    def __post_init__(self):
        problems = []
        if not 0.0 <= self.c <= 1.0:
            problems.append("0 <= c <= 1")
        if self.d < 1.0:
            problems.append("d >= 1")
        if self.d * (1.0 - self.c) > 1.0 + ABS_TOL:
            problems.append("d <= 1/(1-c)")
        if not self.epsilon > 0:
            problems.append("epsilon > 0")
        if self.d - self.epsilon < 1.0:
            problems.append("d - epsilon >= 1")
        if not isinstance(self.n, int) or self.n < 3:
            problems.append("n >= 3")
        if problems:
            raise InputError(
                f"tight-partition parameters c={self.c}, d={self.d}, epsilon={self.epsilon}, n={self.n} "
                f"violate: {', '.join(problems)}"
            )

    @property
    def d_minus(self) -> float:
        return self.d - self.epsilon


def _partition_contribution(p: TightPartitionParams, user: int, i: int, pred_held: bool) -> float:
    """Value of resource ``r_i`` (1-based) to ``user``, given whether ``r_{i-1}`` is held too."""
    c, d, dm = p.c, p.d, p.d_minus
    leading = (i % 2 == 1) if user == 0 else (i % 2 == 0)
    if leading:
        return d**i * (1 - c) ** (i - 1)
    if i == 1:
        return 1.0
    return dm ** (i - 1) * (1 - c) ** (i - 1 if pred_held else i - 2)


@dataclass(frozen=True)
class TightPartitionUser(Valuation):
    """One of the two users of the partition tight example, over ``n`` resources."""

    params: TightPartitionParams
    user: int

    def __post_init__(self):
        if self.user not in (0, 1):
            raise InputError("tight-partition users are 0 and 1")

    @cached_property
    def ground(self) -> GroundSet:
        return GroundSet.of_size(self.params.n, "r")

    def value(self, S):
        S = frozenset(S)
        return math.fsum(_partition_contribution(self.params, self.user, r + 1, r - 1 in S) for r in sorted(S))


def gen_tight_partition(p: TightPartitionParams) -> PartitionInstance:
    return PartitionInstance(
        (TightPartitionUser(p, 0), TightPartitionUser(p, 1)),
        GroundSet.of_size(p.n, "r"),
    )


def tight_partition_greedy_value(p: TightPartitionParams) -> float:
    """Value of the greedy allocation r1->u1, r2->u2, r3->u1, ..."""
    return p.d * _geometric(p.d * (1 - p.c), p.n)


def tight_partition_alternate_value(p: TightPartitionParams) -> float:
    """Value of the opposite alternation r1->u2, r2->u1, r3->u2, ..."""
    return 1.0 + p.d_minus * _geometric(p.d_minus * (1 - p.c), p.n - 1)


def tight_partition_greedy_assignment(p: TightPartitionParams) -> tuple[int, ...]:
    return tuple(r % 2 for r in range(p.n))


def tight_partition_alternate_assignment(p: TightPartitionParams) -> tuple[int, ...]:
    return tuple((r + 1) % 2 for r in range(p.n))


def _first_table(p: TightPartitionParams) -> dict[tuple[int, int, bool], float]:
    # increments for r1..r4 exactly as listed in the introductory table
    c, d, dm = p.c, p.d, p.d_minus
    t = {}
    for held in (False, True):
        t[0, 1, held] = d
        t[0, 2, held] = dm * (1 - c) if held else dm
        t[0, 3, held] = d**3 * (1 - c) ** 2
        t[0, 4, held] = dm**3 * (1 - c) ** (3 if held else 2)
        t[1, 1, held] = 1.0
        t[1, 2, held] = d**2 * (1 - c)
        t[1, 3, held] = dm**2 * (1 - c) ** (2 if held else 1)
        t[1, 4, held] = d**4 * (1 - c) ** 3
    return t


def _general_pattern(p: TightPartitionParams, user: int, i: int, held: bool) -> float | None:
    # the per-parity pattern; None where it refers to a nonexistent r_0
    leading = (i % 2 == 1) if user == 0 else (i % 2 == 0)
    if not leading and i == 1:
        return None
    return _partition_contribution(p, user, i, held)


def tight_partition_table_divergences(p: TightPartitionParams, tol: float = TOL) -> list[tuple[int, int]]:
    """(user, resource) entries, 1-based, where the first table and the general pattern disagree."""
    out = []
    for (user, i, held), value in sorted(_first_table(p).items()):
        general = _general_pattern(p, user, i, held)
        if (general is None or not tied(general, value, tol)) and (user + 1, i) not in out:
            out.append((user + 1, i))
    return out


def _tight_partition_chain(instance: PartitionInstance) -> Chain | None:
    users = instance.users
    if len(users) != 2 or not all(isinstance(Z, TightPartitionUser) for Z in users):
        return None
    p = users[0].params
    if users[1].params != p or (users[0].user, users[1].user) != (0, 1):
        return None

    def term(i, prev, cur):
        return _partition_contribution(p, cur, i + 1, prev == cur)

    return Chain(
        valuation=instance.valuation,
        options=((0, 1),) * p.n,
        term=term,
        realize=lambda choice: instance.allocation_set(choice),
    )


# ---------------------------------------------------------------------------
# Tight example for the matroid bound


@dataclass(frozen=True)
class TightGeneralParams:
    c: float
    d: float
    K: int

    def __post_init__(self):
        problems = []
        if not 0.0 <= self.c <= 1.0:
            problems.append("0 <= c <= 1")
        if self.d < 1.0:
            problems.append("d >= 1")
        if not isinstance(self.K, int) or self.K < 1:
            problems.append("K >= 1")
        if problems:
            raise InputError(
                f"tight-general parameters c={self.c}, d={self.d}, K={self.K} violate: {', '.join(problems)}"
            )

    @property
    def q(self) -> float:
        return self.d * (1 - self.c)


def tight_general_ground(K: int) -> GroundSet:
    return GroundSet(tuple(f"nu{i}" for i in range(1, K + 1)) + tuple(f"eps{i}" for i in range(1, K + 1)))


def nu(i: int) -> int:
    """Index of nu_i (1-based i)."""
    return i - 1


def eps(i: int, K: int) -> int:
    return K + i - 1


@dataclass(frozen=True)
class TightGeneralValuation(Valuation):
    """Elements nu_1..nu_K then eps_1..eps_K.

    eps_i is worth d q^(i-1); nu_1 is worth 1; nu_i (i >= 2) is worth q^(i-1)
    next to eps_(i-1) and d q^(i-2) otherwise, where q = d(1-c).
    """

    params: TightGeneralParams

    @cached_property
    def ground(self) -> GroundSet:
        return tight_general_ground(self.params.K)

    def value(self, S):
        S = frozenset(S)
        K, d, q = self.params.K, self.params.d, self.params.q
        terms = []
        for e in sorted(S):
            if e >= K:
                terms.append(d * q ** (e - K))
            else:
                i = e + 1
                if i == 1 or eps(i - 1, K) in S:
                    terms.append(q ** (i - 1))
                else:
                    terms.append(d * q ** (i - 2))
        return math.fsum(terms)


def tight_general_matroid(K: int) -> PartitionMatroid:
    return PartitionMatroid(
        tight_general_ground(K),
        tuple((nu(i), eps(i, K)) for i in range(1, K + 1)),
        (1,) * K,
    )


def gen_tight_general(p: TightGeneralParams) -> Instance:
    return Instance(TightGeneralValuation(p), tight_general_matroid(p.K))


def tight_general_increment(p: TightGeneralParams, S: frozenset[int], x: int) -> float:
    """Marginal gain of ``x`` on ``S`` from the increment rules, independent of ``value``."""
    K, d, q = p.K, p.d, p.q
    if x >= K:
        i = x - K + 1
        own = d * q ** (i - 1)
        # eps_i turns an adjacent nu_(i+1) from d q^(i-1) into q^i
        if i < K and nu(i + 1) in S:
            own += q**i - d * q ** (i - 1)
        return own
    i = x + 1
    if i == 1:
        return 1.0
    return q ** (i - 1) if eps(i - 1, K) in S else d * q ** (i - 2)


def tight_general_greedy_value(p: TightGeneralParams) -> float:
    """Value of {eps_1, ..., eps_K}."""
    return p.d * _geometric(p.q, p.K)


def tight_general_nu_value(p: TightGeneralParams) -> float:
    """Value of {nu_1, ..., nu_K}."""
    return 1.0 + p.d * _geometric(p.q, p.K - 1)


def epsilon_preference(K: int) -> tuple[int, ...]:
    return tuple(eps(i, K) for i in range(1, K + 1))


def _tight_general_chain(instance: Instance) -> Chain | None:
    Z = instance.valuation
    if not isinstance(Z, TightGeneralValuation):
        return None
    p = Z.params
    if instance.matroid != tight_general_matroid(p.K):
        return None

    K, d, q = p.K, p.d, p.q

    def term(i, prev, cur):
        # stage i is block i+1
        if cur == "eps":
            return d * q**i
        if i == 0:
            return 1.0
        return q**i if prev == "eps" else d * q ** (i - 1)

    def realize(choice):
        return frozenset(eps(i, p.K) if ch == "eps" else nu(i) for i, ch in enumerate(choice, start=1))

    return Chain(Z, (("nu", "eps"),) * p.K, term, realize)


def chain_for(instance) -> Chain | None:
    """Chain decomposition of a tight-family instance, None for anything else."""
    if isinstance(instance, PartitionInstance):
        return _tight_partition_chain(instance)
    if isinstance(instance, Instance):
        return _tight_general_chain(instance)
    return None


# ---------------------------------------------------------------------------
# Random instances


@dataclass(frozen=True)
class TabularShape:
    n: int
    K: int | None = None
    matroid: str = "uniform"

    def __post_init__(self):
        if not 1 <= self.n <= 12:
            raise InputError("tabular instances need 1 <= n <= 12")
        if self.matroid not in MATROID_KINDS:
            raise InputError(f"matroid kind must be one of {', '.join(MATROID_KINDS)}")
        if self.K is not None and not 1 <= self.K <= self.n:
            raise InputError("K must lie in 1..n")


@dataclass(frozen=True)
class PartitionShape:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InputError("partition instances need m >= 1 and n >= 1")
        if self.n > 12:
            raise InputError("partition instances need n <= 12 resources")


MATROID_KINDS = ("uniform", "partition", "explicit")


def _subset_bits(n: int) -> np.ndarray:
    masks = np.arange(1 << n)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)


def random_submodular_table(rng: random.Random, ground: GroundSet) -> TabularValuation:
    """Integer-valued monotone submodular table.

    A weighted coverage term, a modular term and a truncated modular term
    min(B, sum a), each with a random nonnegative scale.
    """
    n = len(ground)
    bits = _subset_bits(n)
    universe = rng.randint(1, 2 * n)
    density = rng.choice((0.2, 0.35, 0.5))
    covers = np.array([[rng.random() < density for _ in range(universe)] for _ in range(n)], dtype=np.int64)
    weights = np.array([rng.randint(1, 9) for _ in range(universe)], dtype=np.int64)
    coverage = ((bits @ covers) > 0).astype(np.int64) @ weights

    modular = np.array([rng.randint(0, 6) for _ in range(n)], dtype=np.int64)
    a = np.array([rng.randint(0, 6) for _ in range(n)], dtype=np.int64)
    cap = rng.randint(1, max(1, int(a.sum())))
    truncated = np.minimum(bits @ a, cap)

    scales = [rng.randint(0, 3) for _ in range(3)]
    if not any(scales):
        scales[0] = 1
    table = scales[0] * coverage + scales[1] * (bits @ modular) + scales[2] * truncated
    return TabularValuation(ground, tuple(float(v) for v in table))


def _gf2_rank(vectors: Sequence[int]) -> int:
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def random_explicit_matroid(rng: random.Random, ground: GroundSet) -> ExplicitMatroid:
    """Linear matroid of random GF(2) vectors, stored as its full independent family."""
    n = len(ground)
    dim = rng.randint(1, min(n, 4))
    while True:
        vectors = [rng.randrange(1 << dim) for _ in range(n)]
        if any(vectors):
            break
    family = []
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if _gf2_rank([vectors[i] for i in members]) == len(members):
            family.append(frozenset(members))
    return ExplicitMatroid(ground, frozenset(family))


def random_partition_matroid(rng: random.Random, ground: GroundSet) -> PartitionMatroid:
    n = len(ground)
    count = rng.randint(1, n)
    order = list(range(n))
    rng.shuffle(order)
    blocks: list[list[int]] = [[e] for e in order[:count]]
    for e in order[count:]:
        blocks[rng.randrange(count)].append(e)
    blocks = [sorted(b) for b in blocks]
    blocks.sort()
    return PartitionMatroid(ground, tuple(tuple(b) for b in blocks), tuple(rng.randint(1, len(b)) for b in blocks))


def random_matroid(rng: random.Random, ground: GroundSet, kind: str, K: int | None = None) -> Matroid:
    if kind == "uniform":
        return UniformMatroid(ground, K if K is not None else rng.randint(1, len(ground)))
    if kind == "partition":
        return random_partition_matroid(rng, ground)
    if kind == "explicit":
        return random_explicit_matroid(rng, ground)
    raise InputError(f"unknown matroid kind {kind!r}")


def gen_random(seed: int, shape: TabularShape | PartitionShape):
    """Deterministic random instance for ``seed``; validated before it is returned."""
    rng = random.Random(seed)
    if isinstance(shape, TabularShape):
        ground = GroundSet.of_size(shape.n)
        Z = random_submodular_table(rng, ground)
        instance = Instance(Z, random_matroid(rng, ground, shape.matroid, shape.K))
        report = validate_oracles(Z, instance.matroid)
    elif isinstance(shape, PartitionShape):
        resources = GroundSet.of_size(shape.n, "r")
        users = []
        for _ in range(shape.m):
            table = random_submodular_table(rng, resources)
            scale = rng.choice((1, 1, 2, 5, 20))
            users.append(TabularValuation(resources, tuple(v * scale for v in table.values)))
        instance = PartitionInstance(tuple(users), resources)
        report = validate_oracles(instance.valuation)
    else:
        raise InputError(f"unknown shape {shape!r}")
    if not report.ok:
        raise ValidationError(f"generated instance failed validation: {report.axioms()}")
    return instance
