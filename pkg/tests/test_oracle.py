import itertools
import math

import pytest

from submatroid.core import GroundSet, ModularValuation, PartitionInstance, UniformMatroid
from submatroid.errors import InputError, ResourceCapError
from submatroid.greedy import run_greedy, run_greedy_on
from submatroid.instances import (
    PartitionShape,
    TabularShape,
    TightGeneralParams,
    TightPartitionParams,
    chain_for,
    gen_random,
    gen_tight_general,
    gen_tight_partition,
    nu,
    tight_partition_alternate_assignment,
)
from submatroid.oracle import (
    brute_force_assignment,
    brute_force_curvature,
    brute_force_optimum,
    chain_optimum,
    exact_optimum,
    exhaustive_competitive_ratio,
    iter_bases,
    verify_guarantee,
)


def test_modular_uniform_optimum_is_top_weights(modular_instance):
    cert = brute_force_optimum(modular_instance.valuation, modular_instance.matroid)
    assert cert.optimum_set == frozenset({2, 4})
    assert cert.optimum_value == 9.0
    assert cert.enumerated_count == math.comb(5, 2)


def test_ties_keep_lexicographically_first_basis():
    g = GroundSet.of_size(4)
    cert = brute_force_optimum(ModularValuation(g, (1, 1, 1, 1)), UniformMatroid(g, 2))
    assert cert.optimum_set == frozenset({0, 1})


def test_bases_are_enumerated_in_lexicographic_order():
    M = UniformMatroid(GroundSet.of_size(4), 2)
    assert [sorted(B) for B in iter_bases(M)] == [list(c) for c in itertools.combinations(range(4), 2)]


def test_cap_is_enforced(modular_instance, monkeypatch):
    with pytest.raises(ResourceCapError) as err:
        brute_force_optimum(modular_instance.valuation, modular_instance.matroid, cap=3)
    assert err.value.count == 4 and err.value.cap == 3
    monkeypatch.setenv("SUBMATROID_CAP", "2")
    with pytest.raises(ResourceCapError):
        brute_force_optimum(modular_instance.valuation, modular_instance.matroid)


def test_greedy_never_beats_optimum():
    for seed in range(20):
        inst = gen_random(seed, TabularShape(7, None, "partition"))
        trace = run_greedy(inst.valuation, inst.matroid)
        opt = brute_force_optimum(inst.valuation, inst.matroid)
        assert trace.final_value <= opt.optimum_value + 1e-9


@pytest.mark.parametrize("seed", range(8))
def test_pair_matroid_and_assignment_enumeration_agree(seed):
    inst = gen_random(seed, PartitionShape(2 + seed % 2, 4))
    a = brute_force_optimum(inst.valuation, inst.matroid)
    b = brute_force_assignment(inst)
    assert a.optimum_value == pytest.approx(b.optimum_value, rel=1e-12)
    assert a.enumerated_count == b.enumerated_count == inst.m**inst.n


def test_brute_force_curvature_examples(coverage, modular_instance):
    assert brute_force_curvature(modular_instance.valuation) == 0.0
    assert brute_force_curvature(coverage) == pytest.approx(0.5)
    p = TightPartitionParams(0.5, 1.5, 1e-6, 8)
    for Z in gen_tight_partition(p).users:
        assert brute_force_curvature(Z) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ResourceCapError):
        brute_force_curvature(ModularValuation(GroundSet.of_size(13), (1,) * 13))


@pytest.mark.parametrize("K", [1, 2, 3, 4, 5])
def test_chain_optimum_matches_enumeration_tight_general(K):
    inst = gen_tight_general(TightGeneralParams(0.5, 1.5, K))
    dp = chain_optimum(chain_for(inst))
    bf = brute_force_optimum(inst.valuation, inst.matroid)
    assert dp.optimum_value == pytest.approx(bf.optimum_value, rel=1e-12)
    assert dp.method == "chain"


def test_nu_basis_is_optimal_once_the_chain_is_long_enough():
    # for K <= 2 mixing in an eps element beats the all-nu basis
    assert exact_optimum(gen_tight_general(TightGeneralParams(0.5, 1.5, 2))).optimum_set != {nu(1), nu(2)}
    K = 6
    cert = exact_optimum(gen_tight_general(TightGeneralParams(0.5, 1.5, K)))
    assert cert.optimum_set == frozenset(nu(i) for i in range(1, K + 1))


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_chain_optimum_matches_enumeration_tight_partition(n):
    p = TightPartitionParams(0.5, 1.5, 1e-6, n)
    inst = gen_tight_partition(p)
    dp = exact_optimum(inst)
    bf = brute_force_assignment(inst)
    assert dp.optimum_value == pytest.approx(bf.optimum_value, rel=1e-12)
    assert dp.optimum_set == inst.allocation_set(tight_partition_alternate_assignment(p))


def test_exact_optimum_falls_back_to_enumeration(modular_instance):
    assert chain_for(modular_instance) is None
    assert exact_optimum(modular_instance).method == "enumeration"


def test_single_resource_competitive_ratio_is_one():
    resources = GroundSet.of_size(1, "r")
    inst = PartitionInstance((ModularValuation(resources, (2.0,)), ModularValuation(resources, (1.0,))), resources)
    res = exhaustive_competitive_ratio(inst)
    assert res.worst_ratio == 1.0 and res.permutations == 1 and res.exhaustive


def test_modular_users_are_order_independent():
    resources = GroundSet.of_size(4, "r")
    inst = PartitionInstance(
        (ModularValuation(resources, (1, 5, 2, 0)), ModularValuation(resources, (3, 1, 2, 4))), resources
    )
    assert exhaustive_competitive_ratio(inst).worst_ratio == 1.0


def test_worst_ratio_is_below_every_single_order():
    inst = gen_random(5, PartitionShape(2, 4))
    res = exhaustive_competitive_ratio(inst)
    opt = brute_force_optimum(inst.valuation, inst.matroid).optimum_value
    assert res.permutations == 24
    for sigma in itertools.permutations(range(4)):
        assert res.worst_ratio <= run_greedy_on(inst, sigma).final_value / opt
    assert res.worst_ratio == run_greedy_on(inst, res.worst_sigma).final_value / opt


def test_sampled_mode_records_seed_and_is_an_upper_bound():
    inst = gen_random(9, PartitionShape(3, 5))
    full = exhaustive_competitive_ratio(inst)
    sampled = exhaustive_competitive_ratio(inst, sample=10, seed=4)
    assert not sampled.exhaustive and sampled.seed == 4 and sampled.permutations == 10
    assert sampled.worst_ratio >= full.worst_ratio
    assert exhaustive_competitive_ratio(inst, sample=10, seed=4) == sampled
    with pytest.raises(InputError):
        exhaustive_competitive_ratio(inst, sample=10)


def test_exhaustive_mode_refuses_large_n():
    resources = GroundSet.of_size(9, "r")
    inst = PartitionInstance((ModularValuation(resources, (1,) * 9),), resources)
    with pytest.raises(ResourceCapError):
        exhaustive_competitive_ratio(inst)


def test_verify_modular_is_exact(modular_instance):
    rec = verify_guarantee(modular_instance, "greedy")
    assert rec.measured_ratio == 1.0
    d = rec.check("discriminant")
    assert d.bound == 1.0 and d.slack == 0.0 and d.passed
    assert rec.passed


def test_verify_tight_partition_is_nearly_tight():
    inst = gen_tight_partition(TightPartitionParams(0.5, 1.5, 1e-6, 30))
    rec = verify_guarantee(inst, "greedy-m")
    check = rec.check("partition")
    assert check.passed
    assert 0 <= check.slack <= 1e-3
    assert rec.optimum.method == "chain"


def test_verify_online_aggregates_every_order():
    inst = gen_random(3, PartitionShape(2, 4))
    rec = verify_guarantee(inst, "greedy-on")
    assert rec.runs == 24 and rec.exhaustive
    assert rec.passed
    assert rec.measured_ratio == exhaustive_competitive_ratio(inst).worst_ratio


def test_verify_rejects_partition_algorithms_on_plain_instances(modular_instance):
    with pytest.raises(InputError):
        verify_guarantee(modular_instance, "greedy-m")
