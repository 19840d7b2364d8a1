"""JSON instance files and report encoding.

Floats are written with Python's shortest round-trip repr, so every double
parses back to the identical value. Infinities are written as ``"inf"``.
"""
from __future__ import annotations

import json
import math
from typing import Any

from .core import (
    CoverageValuation,
    ExplicitMatroid,
    GroundSet,
    Instance,
    Matroid,
    ModularValuation,
    PairPartitionMatroid,
    PartitionInstance,
    PartitionMatroid,
    TabularValuation,
    UniformMatroid,
    Valuation,
    pair_ground,
)
from .errors import InputError, InstanceFormatError
from .instances import (
    TightGeneralParams,
    TightGeneralValuation,
    TightPartitionParams,
    TightPartitionUser,
)

FORMAT_VERSION = 1


def jsonable(x: Any) -> Any:
    """Recursively turn non-finite floats into strings and tuples/sets into lists."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (frozenset, set)):
        return [jsonable(v) for v in sorted(x)]
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# Field access with path context


def _get(d: Any, key: str, path: str, kind=None):
    if not isinstance(d, dict):
        raise InstanceFormatError("expected an object", path)
    if key not in d:
        raise InstanceFormatError(f"missing field {key!r}", path)
    value = d[key]
    if kind is not None and not _is(value, kind):
        raise InstanceFormatError(f"expected {kind.__name__ if isinstance(kind, type) else kind}", f"{path}.{key}")
    return value


def _is(value, kind) -> bool:
    if kind is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, kind)


def _number(d, key, path) -> float:
    return float(_get(d, key, path, float))


def _int_list(value, path) -> list[int]:
    if not isinstance(value, list) or not all(_is(v, int) for v in value):
        raise InstanceFormatError("expected a list of integers", path)
    return list(value)


def _wrap(fn, path, *args):
    # re-raise constructor validation errors with the field path attached
    try:
        return fn(*args)
    except InstanceFormatError:
        raise
    except InputError as exc:
        raise InstanceFormatError(str(exc), path) from None


# ---------------------------------------------------------------------------
# Valuations


def valuation_to_dict(Z: Valuation) -> dict:
    if isinstance(Z, TabularValuation):
        return {"kind": "tabular", "table": {str(mask): v for mask, v in enumerate(Z.values)}}
    if isinstance(Z, ModularValuation):
        return {"kind": "modular", "weights": list(Z.weights)}
    if isinstance(Z, CoverageValuation):
        return {"kind": "coverage", "covers": [sorted(c) for c in Z.covers], "weights": list(Z.weights)}
    if isinstance(Z, TightGeneralValuation):
        p = Z.params
        return {"kind": "tight-general", "c": p.c, "d": p.d, "K": p.K}
    if isinstance(Z, TightPartitionUser):
        p = Z.params
        return {"kind": "tight-partition-user", "c": p.c, "d": p.d, "epsilon": p.epsilon, "n": p.n, "user": Z.user}
    raise InputError(f"cannot serialise valuation of type {type(Z).__name__}")


def valuation_from_dict(d: Any, ground: GroundSet, path: str) -> Valuation:
    kind = _get(d, "kind", path, str)
    n = len(ground)
    if kind == "tabular":
        table = _get(d, "table", path, dict)
        values = []
        for mask in range(1 << n):
            key = str(mask)
            if key not in table:
                raise InstanceFormatError(f"missing value for mask {mask}", f"{path}.table")
            if not _is(table[key], float):
                raise InstanceFormatError("expected a number", f"{path}.table.{key}")
            values.append(float(table[key]))
        extra = set(table) - {str(mask) for mask in range(1 << n)}
        if extra:
            raise InstanceFormatError(f"unexpected keys {sorted(extra)[:5]}", f"{path}.table")
        if values[0] != 0:
            raise InstanceFormatError("the empty set must have value 0", f"{path}.table.0")
        return _wrap(TabularValuation, path, ground, tuple(values))
    if kind == "modular":
        weights = _get(d, "weights", path, list)
        if not all(_is(w, float) for w in weights):
            raise InstanceFormatError("expected a list of numbers", f"{path}.weights")
        return _wrap(ModularValuation, path, ground, tuple(weights))
    if kind == "coverage":
        covers = _get(d, "covers", path, list)
        weights = _get(d, "weights", path, list)
        covers = [_int_list(c, f"{path}.covers[{i}]") for i, c in enumerate(covers)]
        if not all(_is(w, float) for w in weights):
            raise InstanceFormatError("expected a list of numbers", f"{path}.weights")
        return _wrap(CoverageValuation, path, ground, tuple(frozenset(c) for c in covers), tuple(weights))
    if kind == "tight-general":
        p = _wrap(TightGeneralParams, path, _number(d, "c", path), _number(d, "d", path), _get(d, "K", path, int))
        Z = TightGeneralValuation(p)
        if Z.ground != ground:
            raise InstanceFormatError("tight-general ground set must be nu1..nuK, eps1..epsK", path)
        return Z
    if kind == "tight-partition-user":
        p = _wrap(
            TightPartitionParams, path,
            _number(d, "c", path), _number(d, "d", path), _number(d, "epsilon", path), _get(d, "n", path, int),
        )
        Z = _wrap(TightPartitionUser, path, p, _get(d, "user", path, int))
        if len(Z.ground) != n:
            raise InstanceFormatError(f"user is defined over {p.n} resources, instance has {n}", path)
        return Z
    raise InstanceFormatError(f"unknown valuation kind {kind!r}", f"{path}.kind")


# ---------------------------------------------------------------------------
# Matroids


def matroid_to_dict(M: Matroid) -> dict:
    if isinstance(M, UniformMatroid):
        return {"kind": "uniform", "K": M.K}
    if isinstance(M, PartitionMatroid):
        return {"kind": "partition", "blocks": [list(b) for b in M.blocks], "capacities": list(M.capacities)}
    if isinstance(M, PairPartitionMatroid):
        return {"kind": "pair-partition", "users": M.users}
    if isinstance(M, ExplicitMatroid):
        family = sorted((sorted(I) for I in M.family), key=lambda I: (len(I), I))
        return {"kind": "explicit", "family": family}
    raise InputError(f"cannot serialise matroid of type {type(M).__name__}")


def matroid_from_dict(d: Any, ground: GroundSet, path: str, check: bool = True) -> Matroid:
    kind = _get(d, "kind", path, str)
    if kind == "uniform":
        return _wrap(UniformMatroid, path, ground, _get(d, "K", path, int))
    if kind == "partition":
        blocks = _get(d, "blocks", path, list)
        blocks = [_int_list(b, f"{path}.blocks[{i}]") for i, b in enumerate(blocks)]
        caps = _int_list(_get(d, "capacities", path, list), f"{path}.capacities")
        return _wrap(PartitionMatroid, path, ground, tuple(map(tuple, blocks)), tuple(caps))
    if kind == "explicit":
        family = _get(d, "family", path, list)
        sets = [frozenset(_int_list(I, f"{path}.family[{i}]")) for i, I in enumerate(family)]
        for i, I in enumerate(sets):
            bad = [e for e in I if not 0 <= e < len(ground)]
            if bad:
                raise InstanceFormatError(f"element {bad[0]} outside the ground set", f"{path}.family[{i}]")
        return ExplicitMatroid(ground, frozenset(sets), check=check)
    raise InstanceFormatError(f"unknown matroid kind {kind!r}", f"{path}.kind")


# ---------------------------------------------------------------------------
# Instances


def instance_to_dict(instance) -> dict:
    if isinstance(instance, PartitionInstance):
        return {
            "format_version": FORMAT_VERSION,
            "ground": {"size": len(instance.ground), "labels": list(instance.ground.labels)},
            "resources": {"size": instance.n, "labels": list(instance.resources.labels)},
            "matroid": {"kind": "pair-partition", "users": instance.m},
            "valuation": {"kind": "partition-sum"},
            "users": [valuation_to_dict(Z) for Z in instance.users],
        }
    return {
        "format_version": FORMAT_VERSION,
        "ground": {"size": len(instance.ground), "labels": list(instance.ground.labels)},
        "matroid": matroid_to_dict(instance.matroid),
        "valuation": valuation_to_dict(instance.valuation),
    }


def _ground(d: Any, path: str) -> GroundSet:
    size = _get(d, "size", path, int)
    labels = d.get("labels") if isinstance(d, dict) else None
    if labels is None:
        return GroundSet.of_size(size)
    if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
        raise InstanceFormatError("expected a list of strings", f"{path}.labels")
    if len(labels) != size:
        raise InstanceFormatError(f"{len(labels)} labels for size {size}", f"{path}.labels")
    return _wrap(GroundSet, path, tuple(labels))


def instance_from_dict(d: Any, check: bool = True):
    """Build an Instance or PartitionInstance; ``check=False`` keeps broken families."""
    if not isinstance(d, dict):
        raise InstanceFormatError("instance must be a JSON object")
    version = _get(d, "format_version", "$", int)
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported format_version {version}", "$.format_version")
    ground = _ground(_get(d, "ground", "$", dict), "$.ground")
    matroid = _get(d, "matroid", "$", dict)
    if _get(matroid, "kind", "$.matroid", str) == "pair-partition":
        m = _get(matroid, "users", "$.matroid", int)
        resources = _ground(_get(d, "resources", "$", dict), "$.resources")
        users_raw = _get(d, "users", "$", list)
        if len(users_raw) != m:
            raise InstanceFormatError(f"{len(users_raw)} user valuations for {m} users", "$.users")
        if m < 1 or ground != _wrap(pair_ground, "$.ground", m, resources):
            raise InstanceFormatError("ground set must list the user-resource pairs", "$.ground")
        kind = _get(_get(d, "valuation", "$", dict), "kind", "$.valuation", str)
        if kind != "partition-sum":
            raise InstanceFormatError("pair-partition instances use the partition-sum valuation", "$.valuation.kind")
        users = tuple(valuation_from_dict(u, resources, f"$.users[{i}]") for i, u in enumerate(users_raw))
        return _wrap(PartitionInstance, "$", users, resources)
    M = matroid_from_dict(matroid, ground, "$.matroid", check)
    Z = valuation_from_dict(_get(d, "valuation", "$", dict), ground, "$.valuation")
    return _wrap(Instance, "$", Z, M)


def parse_instance(text: str, check: bool = True):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    return instance_from_dict(data, check)


def emit_instance(instance) -> str:
    return dumps(instance_to_dict(instance))

