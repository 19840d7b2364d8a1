"""Command-line front end: ``submatroid {solve,verify,generate,validate}``.

Exit codes: 0 success, 1 verification failure or validation violations,
2 usage or parse error, 3 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from .analysis import GuaranteeReport, analyze_greedy, analyze_online, analyze_partition, partition_curvature
from .core import TOL, PartitionInstance, validate_oracles
from .errors import ResourceCapError, SubmatroidError
from .greedy import GreedyTrace, TiePolicy, run_greedy, run_greedy_m, run_greedy_on
from .instances import (
    PartitionShape,
    TabularShape,
    TightGeneralParams,
    TightPartitionParams,
    TightPartitionUser,
    gen_random,
    gen_tight_general,
    gen_tight_partition,
    tight_partition_table_divergences,
)
from .oracle import ALGORITHMS, verify_guarantee
from .serialization import dumps, emit_instance, parse_instance

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(SubmatroidError):
    pass


# ---------------------------------------------------------------------------
# Helpers


def load(path: str, check: bool = True):
    """Parse an instance file; returns the instance and the sha256 of its bytes."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise UsageError(f"{path} is not UTF-8 text") from None
    return parse_instance(text, check), hashlib.sha256(data).hexdigest()


def write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def parse_arrival(text: str | None, instance: PartitionInstance):
    if text is None:
        return None
    out = []
    for item in (s.strip() for s in text.split(",") if s.strip()):
        if item in instance.resources.labels:
            out.append(instance.resources.index(item))
        elif item.isdigit():
            out.append(int(item))
        else:
            raise UsageError(f"arrival entry {item!r} is neither a resource label nor an index")
    return out


def check_algorithm(instance, algorithm: str):
    if algorithm != "greedy" and not isinstance(instance, PartitionInstance):
        raise UsageError(f"{algorithm} needs a pair-partition instance")


def trace_dict(trace: GreedyTrace, instance, report: GuaranteeReport) -> dict:
    labels = instance.ground.labels
    if trace.algorithm == "greedy-on":
        discs, flags = report.user_discriminants, [False] * len(trace.steps)
    else:
        discs, flags = report.discriminants, report.post_forced
    steps = []
    for k, (step, d, post) in enumerate(zip(trace.steps, discs, flags)):
        row = {
            "iteration": step.iteration,
            "chosen": step.chosen,
            "label": labels[step.chosen],
            "gain": step.gain,
            "eligible_count": step.eligible_count,
            "runner_up_gain": step.runner_up_gain,
            "tie_set": list(step.tie_set),
            "discriminant": d,
            "post_forced": post,
        }
        if trace.algorithm == "greedy-m":
            row["user_discriminant"] = report.user_discriminants[k]
        steps.append(row)
    out = {
        "algorithm": trace.algorithm,
        "steps": steps,
        "final_set": sorted(trace.final_set),
        "final_labels": [labels[e] for e in sorted(trace.final_set)],
        "final_value": trace.final_value,
    }
    if trace.arrival is not None:
        out["arrival"] = list(trace.arrival)
    return out


def analysis_dict(report: GuaranteeReport) -> dict:
    out = {
        "curvature": report.curvature,
        "per_user_curvature": report.per_user_curvature,
        "first_forced_iteration": report.first_forced_iteration if report.algorithm != "greedy-on" else None,
        "min_discriminant": report.min_discriminant if report.algorithm != "greedy-on" else None,
        "unique_basis": report.unique_basis,
        "bounds": report.bounds(),
    }
    if report.chosen_user_curvature is not None:
        out["chosen_user_curvature"] = report.chosen_user_curvature
    return out


def config_dict(args, sha: str, tie: TiePolicy) -> dict:
    return {
        "algorithm": args.algorithm,
        "tie_policy": tie.describe(),
        "tolerance": args.tolerance,
        "seed": args.seed,
        "arrival": args.arrival,
        "instance_sha256": sha,
    }


def run(instance, algorithm: str, tie: TiePolicy, tol: float, arrival=None):
    """Run ``algorithm`` and analyse it without any exact optimum."""
    if algorithm == "greedy":
        Z, M = instance.valuation, instance.matroid
        trace = run_greedy(Z, M, tie, tol)
        return trace, analyze_greedy(trace, Z, M, tol=tol)
    _, per_user = partition_curvature(instance, tol)
    if algorithm == "greedy-m":
        trace = run_greedy_m(instance, tol, per_user)
        return trace, analyze_partition(trace, instance, per_user, tol)
    trace = run_greedy_on(instance, arrival, tol, per_user)
    return trace, analyze_online(trace, instance, per_user, tol)


# ---------------------------------------------------------------------------
# Commands


def cmd_solve(args) -> int:
    instance, sha = load(args.instance)
    check_algorithm(instance, args.algorithm)
    tie = TiePolicy.parse(args.tie_policy, instance.ground)
    arrival = parse_arrival(args.arrival, instance) if args.algorithm == "greedy-on" else None
    trace, report = run(instance, args.algorithm, tie, args.tolerance, arrival)
    write(dumps({
        "command": "solve",
        "config": config_dict(args, sha, tie),
        "trace": trace_dict(trace, instance, report),
        "analysis": analysis_dict(report),
    }), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    instance, sha = load(args.instance)
    check_algorithm(instance, args.algorithm)
    tie = TiePolicy.parse(args.tie_policy, instance.ground)
    arrival = parse_arrival(args.arrival, instance) if args.algorithm == "greedy-on" else None
    if args.sample is not None and args.seed is None:
        raise UsageError("--sample needs --seed")
    everything = args.all_permutations or (args.sample is None and arrival is None)
    record = verify_guarantee(
        instance, args.algorithm, tie, args.tolerance,
        sample=args.sample, seed=args.seed, arrival=arrival, all_permutations=everything,
    )
    labels = instance.ground.labels
    opt = record.optimum
    out = {
        "command": "verify",
        "config": dict(config_dict(args, sha, tie), sample=args.sample, all_permutations=everything),
        "optimum": {
            "value": opt.optimum_value,
            "set": sorted(opt.optimum_set),
            "labels": [labels[e] for e in sorted(opt.optimum_set)],
            "method": opt.method,
            "enumerated_count": opt.enumerated_count,
        },
        "greedy_value": record.greedy_value,
        "measured_ratio": record.measured_ratio,
        "runs": record.runs,
        "exhaustive": record.exhaustive,
        "checks": [
            {"bound": c.name, "ratio": c.ratio, "value": c.bound, "slack": c.slack, "passed": c.passed}
            for c in record.checks
        ],
        "passed": record.passed,
    }
    if args.algorithm == "greedy-on":
        out["worst_sigma"] = record.worst_sigma
        out["seed"] = record.seed
    if record.traces:
        out["trace"] = trace_dict(record.traces[0], instance, record.reports[0])
        out["analysis"] = analysis_dict(record.reports[0])
    write(dumps(out), args.out)
    return EXIT_OK if record.passed else EXIT_FAIL


def cmd_generate(args) -> int:
    if args.family == "tight-partition":
        instance = gen_tight_partition(TightPartitionParams(args.c, args.d, args.epsilon, args.n))
    elif args.family == "tight-general":
        instance = gen_tight_general(TightGeneralParams(args.c, args.d, args.K))
    else:
        if args.shape == "partition":
            shape = PartitionShape(args.m, args.n)
        else:
            shape = TabularShape(args.n, args.K, args.matroid)
        instance = gen_random(args.seed, shape)
    write(emit_instance(instance), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    instance, sha = load(args.instance, check=False)
    if isinstance(instance, PartitionInstance):
        report = validate_oracles(instance.valuation, seed=args.seed or 0, tol=args.tolerance)
    else:
        report = validate_oracles(instance.valuation, instance.matroid, seed=args.seed or 0, tol=args.tolerance)
    out = {
        "command": "validate",
        "config": {"tolerance": args.tolerance, "seed": args.seed, "instance_sha256": sha},
        "ok": report.ok,
        "exhaustive": report.exhaustive,
        "violations": [{"axiom": v.axiom, "witness": v.witness, "detail": v.detail} for v in report.violations],
    }
    if isinstance(instance, PartitionInstance) and isinstance(instance.users[0], TightPartitionUser):
        out["table_divergences"] = [
            {"user": u, "resource": r} for u, r in tight_partition_table_divergences(instance.users[0].params)
        ]
    write(dumps(out), args.out)
    return EXIT_OK if report.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="submatroid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tolerance", type=float, default=TOL, help="relative tie/pass tolerance (default 1e-9)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output file (default stdout)")

    for name, fn in (("solve", cmd_solve), ("verify", cmd_verify)):
        p = sub.add_parser(name)
        p.add_argument("instance")
        p.add_argument("--algorithm", choices=ALGORITHMS, default="greedy")
        p.add_argument("--tie-policy", default="lowest-index",
                       help="lowest-index, highest-index or prefer:LABEL,LABEL,...")
        p.add_argument("--arrival", default=None, help="comma-separated resource order for greedy-on")
        common(p)
        if name == "verify":
            group = p.add_mutually_exclusive_group()
            group.add_argument("--all-permutations", action="store_true")
            group.add_argument("--sample", type=int, default=None, help="number of seeded random arrival orders")
        p.set_defaults(func=fn)

    p = sub.add_parser("generate")
    p.add_argument("family", choices=("tight-partition", "tight-general", "random"))
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--d", type=float, default=1.5)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--shape", choices=("tabular", "partition"), default="tabular")
    p.add_argument("--matroid", choices=("uniform", "partition", "explicit"), default="uniform")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate")
    p.add_argument("instance")
    common(p)
    p.set_defaults(func=cmd_validate)
    return parser


def _generate_defaults(args):
    if args.command != "generate":
        return
    if args.family == "tight-partition" and args.n is None:
        args.n = 30
    elif args.family == "tight-general" and args.K is None:
        args.K = 40
    elif args.family == "random":
        if args.seed is None:
            raise UsageError("generate random needs --seed")
        if args.n is None:
            args.n = 6


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _generate_defaults(args)
        return args.func(args)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except SubmatroidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
