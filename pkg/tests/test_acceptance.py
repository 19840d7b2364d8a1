"""Acceptance gate. Each test prints one PASS/FAIL line and asserts the same outcome."""
import math

import pytest

from submatroid.analysis import (
    analyze_greedy,
    curvature,
    curvature_bound,
    discriminant_general,
    exchange_ordering,
    first_forced_iteration,
    matroid_greedy_bound,
)
from submatroid.cli import main
from submatroid.core import from_mask
from submatroid.greedy import TiePolicy, run_greedy
from submatroid.instances import (
    MATROID_KINDS,
    PartitionShape,
    TabularShape,
    TightGeneralParams,
    TightPartitionParams,
    epsilon_preference,
    gen_random,
    gen_tight_general,
    gen_tight_partition,
    tight_general_increment,
    tight_limit_ratio,
)
from submatroid.oracle import brute_force_curvature, exact_optimum, iter_bases, verify_guarantee
from submatroid.serialization import emit_instance

GATE = 1e-9


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
        assert ok, detail

    return emit


def _tabular_shape(i, max_n):
    n = 2 + i % (max_n - 1)
    kind = MATROID_KINDS[i % len(MATROID_KINDS)]
    K = 1 + (i // len(MATROID_KINDS)) % n if kind == "uniform" else None
    return TabularShape(n, K, kind)


def test_greedy_discriminant_bound_holds_on_random_instances(report):
    worst, failures = math.inf, []
    for seed in range(1000):
        inst = gen_random(seed, _tabular_shape(seed, 10))
        rec = verify_guarantee(inst, "greedy")
        check = rec.check("discriminant")
        slack = check.ratio - check.bound
        worst = min(worst, slack)
        if slack < -GATE:
            failures.append(seed)
    report("greedy discriminant bound, 1000 tabular instances", not failures,
           f"min slack {worst:.3e}, violating seeds {failures[:10]}")


def test_greedy_m_partition_bound_holds_on_random_instances(report):
    worst, failures = math.inf, []
    for seed in range(500):
        shape = PartitionShape(1 + seed % 3, 1 + (seed // 3) % 6)
        rec = verify_guarantee(gen_random(seed, shape), "greedy-m")
        check = rec.check("partition")
        worst = min(worst, check.ratio - check.bound)
        if check.ratio - check.bound < -GATE:
            failures.append(seed)
    report("greedy-m partition bound, 500 instances", not failures,
           f"min slack {worst:.3e}, violating seeds {failures[:10]}")


def test_greedy_on_bound_holds_for_every_arrival_order(report):
    worst, failures, runs = math.inf, [], 0
    for seed in range(100):
        shape = PartitionShape(1 + seed % 3, 1 + (seed // 3) % 6)
        rec = verify_guarantee(gen_random(seed, shape), "greedy-on")
        assert rec.exhaustive
        runs += rec.runs
        check = rec.check("online")
        worst = min(worst, check.slack)
        if check.slack < -GATE:
            failures.append(seed)
    report("greedy-on bound over all arrival orders, 100 instances", not failures,
           f"{runs} runs, min slack {worst:.3e}, violating seeds {failures[:10]}")


def test_tight_partition_family_approaches_limit(report):
    c, d = 0.5, 1.5
    inst = gen_tight_partition(TightPartitionParams(c, d, 1e-6, 30))
    rec = verify_guarantee(inst, "greedy-m")
    limit = tight_limit_ratio(c, d)
    bound = rec.reports[0].partition_bound
    expected = min(1.0, 1 / (c + 1 / d))
    ok_ratio = abs(rec.measured_ratio - limit) <= 1e-3
    ok_bound = abs(bound - expected) <= 1e-9
    report("tight partition family", ok_ratio and ok_bound,
           f"ratio {rec.measured_ratio:.7f} vs {limit:.7f}, bound {bound!r} vs {expected!r}")


def test_tight_general_family_approaches_limit(report):
    c, d, K = 0.5, 1.5, 40
    inst = gen_tight_general(TightGeneralParams(c, d, K))
    Z, M = inst
    trace = run_greedy(Z, M, TiePolicy("prefer", epsilon_preference(K)))
    opt = exact_optimum(inst)
    ratio = trace.final_value / opt.optimum_value
    rep = analyze_greedy(trace, Z, M, omega=opt.optimum_set, c=c)
    i0 = first_forced_iteration(trace, M)
    raw = discriminant_general(trace, Z, M)
    limit = 1 / (1 / d + c)
    non_unit = [(i, d_i) for i, d_i in enumerate(raw, start=1) if i < i0 and d_i != 1.0]
    clauses = {
        "ratio": abs(ratio - limit) <= 1e-3,
        "refined bound": abs(rep.refined_bound - limit) <= 1e-9,
        "raw discriminants are 1 before i0": not non_unit,
        "i0 = K+1": i0 == K + 1,
    }
    failed = [k for k, v in clauses.items() if not v]
    report("tight general family", not failed,
           f"ratio {ratio:.7f}, refined {rep.refined_bound!r}, i0 {i0}, "
           f"non-unit raw d_i {non_unit}, failed clauses {failed}")


def test_curvature_shortcut_matches_enumeration(report):
    worst = 0.0
    for seed in range(200):
        inst = gen_random(seed, _tabular_shape(seed, 8))
        worst = max(worst, abs(curvature(inst.valuation) - brute_force_curvature(inst.valuation)))
    c = 0.5
    users = gen_tight_partition(TightPartitionParams(c, 1.5, 1e-6, 10)).users
    tight = max(max(abs(curvature(Z) - c), abs(brute_force_curvature(Z) - c)) for Z in users)
    report("curvature shortcut equals enumeration", worst <= 1e-12 and tight <= 1e-12,
           f"random max diff {worst:.3e}, tight users max diff {tight:.3e}")


def test_exchange_ordering_on_random_explicit_matroids(report):
    pairs, bad = 0, []
    for seed in range(50):
        M = gen_random(seed, TabularShape(2 + seed % 7, None, "explicit")).matroid
        bases = list(iter_bases(M))
        for A in bases:
            for order in (tuple(sorted(A)), tuple(sorted(A, reverse=True))):
                for B in bases:
                    pairs += 1
                    out = exchange_ordering(M, order, B)
                    ok = sorted(out) == sorted(B) and all(
                        M.is_independent(frozenset(order[:i]) | {b}) and (order[i] not in B or b == order[i])
                        for i, b in enumerate(out)
                    )
                    if not ok:
                        bad.append((seed, order, sorted(B)))
    report("exchange ordering clauses, 50 explicit matroids", not bad,
           f"{pairs} ordered pairs, {len(bad)} violations {bad[:3]}")


def test_unit_discriminants_recover_curvature_bound(report):
    cs = [k / 20 for k in range(21)] + [1 / 3, math.pi / 4]
    mismatched = [c for c in cs for K in (1, 3, 10) if matroid_greedy_bound(c, [1.0] * K, K + 1) != 1 / (1 + c)]
    half = matroid_greedy_bound(1.0, [1.0] * 5, 6)
    ok = not mismatched and half == 0.5 and curvature_bound(1.0) == 0.5
    report("unit discriminants give 1/(1+c), and 1/2 at c=1", ok,
           f"mismatches at c={mismatched}, c=1 bound {half!r}")


def test_tight_general_increments_match_closed_form(report):
    worst, checked = 0.0, 0
    for K in range(1, 6):
        for c, d in ((0.5, 1.5), (0.2, 1.1), (1.0, 4.0)):
            p = TightGeneralParams(c, d, K)
            Z = gen_tight_general(p).valuation
            n = 2 * K
            for mask in range(1 << n):
                S = from_mask(mask)
                for x in range(n):
                    if x not in S:
                        checked += 1
                        worst = max(worst, abs(Z.gain(S, x) - tight_general_increment(p, S, x)))
    report("tight general increments, K <= 5", worst <= 1e-12, f"{checked} increments, max diff {worst:.3e}")


def test_cli_reports_are_byte_identical(report, tmp_path):
    tab = tmp_path / "tab.json"
    tab.write_text(emit_instance(gen_random(11, TabularShape(7, None, "explicit"))))
    part = tmp_path / "part.json"
    part.write_text(emit_instance(gen_random(12, PartitionShape(3, 5))))
    tg = tmp_path / "tg.json"
    main(["generate", "tight-general", "--K", "6", "--out", str(tg)])
    cases = [
        ["solve", str(tab)],
        ["verify", str(tab), "--tie-policy", "highest-index"],
        ["solve", str(part), "--algorithm", "greedy-m"],
        ["verify", str(part), "--algorithm", "greedy-on"],
        ["verify", str(part), "--algorithm", "greedy-on", "--sample", "20", "--seed", "5"],
        ["verify", str(tg), "--tie-policy", "prefer:eps1,eps2,eps3,eps4,eps5,eps6"],
    ]
    differing = []
    for k, argv in enumerate(cases):
        outs = []
        for rep in range(3):
            out = tmp_path / f"r{k}_{rep}.json"
            assert main(argv + ["--out", str(out)]) == 0
            outs.append(out.read_bytes())
        if len(set(outs)) != 1:
            differing.append(" ".join(argv[:1] + argv[2:]))
    report("CLI solve/verify determinism", not differing, f"{len(cases)} configs x 3 runs, differing {differing}")
