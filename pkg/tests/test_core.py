import pytest

from submatroid.core import (
    CoverageValuation,
    ExplicitMatroid,
    GroundSet,
    Instance,
    ModularValuation,
    PairPartitionMatroid,
    PartitionInstance,
    PartitionMatroid,
    TabularValuation,
    UniformMatroid,
    eligible_extensions,
    from_mask,
    marginal_gain,
    tied,
    to_mask,
    validate_oracles,
)
from submatroid.errors import (
    DomainError,
    EmptyInstanceError,
    InputError,
    MatroidAxiomError,
    PreconditionError,
)

from conftest import table


def test_mask_roundtrip():
    for S in [frozenset(), frozenset({0}), frozenset({1, 4, 7})]:
        assert from_mask(to_mask(S)) == S


def test_tied_uses_relative_and_absolute_tolerance():
    assert tied(1.0, 1.0 + 1e-10)
    assert not tied(1.0, 1.0 + 1e-8)
    assert tied(0.0, 1e-13)
    assert not tied(0.0, 1e-11)


def test_ground_set_labels_and_domain():
    g = GroundSet.of_size(3)
    assert g.labels == ("e1", "e2", "e3")
    assert g.index("e2") == 1
    with pytest.raises(DomainError):
        g.check([3])
    with pytest.raises(DomainError):
        g.index("e9")
    with pytest.raises(InputError):
        GroundSet(("a", "a"))


def test_empty_set_independent_everywhere():
    g = GroundSet.of_size(4)
    for M in (
        UniformMatroid(g, 2),
        PartitionMatroid(g, ((0, 1), (2, 3)), (1, 1)),
        ExplicitMatroid(g, frozenset({frozenset(), frozenset({0})})),
    ):
        assert M.is_independent(frozenset())


def test_uniform_rank_and_independence():
    M = UniformMatroid(GroundSet.of_size(5), 3)
    assert M.rank == 3
    assert M.is_independent(frozenset({0, 1, 2}))
    assert not M.is_independent(frozenset({0, 1, 2, 3}))
    with pytest.raises(InputError):
        UniformMatroid(GroundSet.of_size(2), 3)


def test_partition_matroid_caps():
    M = PartitionMatroid(GroundSet.of_size(5), ((0, 1, 2), (3, 4)), (2, 1))
    assert M.rank == 3
    assert M.is_independent(frozenset({0, 1, 3}))
    assert not M.is_independent(frozenset({3, 4}))
    with pytest.raises(InputError):
        PartitionMatroid(GroundSet.of_size(3), ((0, 1),), (1,))
    with pytest.raises(InputError):
        PartitionMatroid(GroundSet.of_size(2), ((0, 1),), (3,))


def test_pair_partition_indexing():
    resources = GroundSet.of_size(3, "r")
    M = PairPartitionMatroid(2, resources)
    assert M.ground.labels[:3] == ("u1:r1", "u2:r1", "u1:r2")
    assert M.rank == 3
    # both users on r1 is not allowed
    assert not M.is_independent(frozenset({0, 1}))
    assert M.is_independent(frozenset({0, 3, 4}))
    P = M.as_partition()
    assert all(P.is_independent(frozenset(S)) == M.is_independent(frozenset(S))
               for S in (from_mask(mask) for mask in range(1 << 6)))


def test_explicit_matroid_rejects_non_hereditary_family():
    g = GroundSet.of_size(2)
    with pytest.raises(MatroidAxiomError) as err:
        ExplicitMatroid(g, frozenset({frozenset(), frozenset({0, 1})}))
    assert err.value.witness is not None


def test_explicit_matroid_without_check_reports_violations():
    g = GroundSet.of_size(3)
    # {0} and {1, 2} break augmentation: neither 1 nor 2 extends {0}
    family = frozenset(map(frozenset, [(), (0,), (1,), (2,), (1, 2)]))
    M = ExplicitMatroid(g, family, check=False)
    report = validate_oracles(ModularValuation(g, (1.0, 1.0, 1.0)), M)
    assert report.axioms() == ["augmentation"]
    assert report.violations[0].witness == {"S": [0], "T": [1, 2]}


def test_modular_marginal_gain_is_weight():
    g = GroundSet.of_size(3)
    Z = ModularValuation(g, (1.5, 2.0, 0.0))
    assert marginal_gain(Z, {0}, 1) == 2.0
    with pytest.raises(PreconditionError):
        marginal_gain(Z, {0}, 0)
    with pytest.raises(DomainError):
        marginal_gain(Z, {0}, 5)


def test_coverage_values(coverage):
    assert coverage(set()) == 0
    assert coverage({0}) == 2
    assert coverage({0, 1}) == 3


def test_tabular_needs_full_table():
    with pytest.raises(InputError):
        TabularValuation(GroundSet.of_size(2), (0.0, 1.0, 1.0))


def test_eligible_extensions():
    M = PartitionMatroid(GroundSet.of_size(4), ((0, 1), (2, 3)), (1, 1))
    assert eligible_extensions(M, {0}) == frozenset({2, 3})
    with pytest.raises(PreconditionError):
        eligible_extensions(M, {0, 1})


def test_validate_detects_each_set_function_axiom():
    g = GroundSet.of_size(2)
    shifted = TabularValuation(g, (1.0, 2.0, 2.0, 3.0))
    assert "normalized" in validate_oracles(shifted).axioms()
    decreasing = TabularValuation(g, (0.0, 2.0, 1.0, 1.0))
    report = validate_oracles(decreasing)
    assert "monotone" in report.axioms()
    supermodular = TabularValuation(g, (0.0, 1.0, 1.0, 3.0))
    report = validate_oracles(supermodular)
    assert report.axioms() == ["submodular"]
    assert report.violations[0].witness == {"S": [], "T": [1], "x": 0}


def test_validate_passes_coverage(coverage):
    report = validate_oracles(coverage, UniformMatroid(coverage.ground, 1))
    assert report.ok and report.exhaustive


def test_validate_samples_large_ground_sets():
    g = GroundSet.of_size(16)
    report = validate_oracles(ModularValuation(g, tuple(range(16))))
    assert report.ok and not report.exhaustive


def test_partition_instance_checks_users():
    resources = GroundSet.of_size(2, "r")
    with pytest.raises(EmptyInstanceError):
        PartitionInstance((), resources)
    with pytest.raises(InputError):
        PartitionInstance((ModularValuation(GroundSet.of_size(3), (1, 1, 1)),), resources)


def test_partition_sum_matches_user_values():
    resources = GroundSet.of_size(3, "r")
    a = table(resources, lambda S: float(min(2, len(S))))
    b = ModularValuation(resources, (1.0, 2.0, 3.0))
    inst = PartitionInstance((a, b), resources)
    S = inst.allocation_set((0, 1, 0))
    assert inst.user_sets(S) == [frozenset({0, 2}), frozenset({1})]
    assert inst.valuation(S) == a({0, 2}) + b({1})
    assert inst.valuation.gain(frozenset({0}), inst.pair_index(0, 2)) == a.gain(frozenset({0}), 2)


def test_instance_requires_matching_ground():
    with pytest.raises(InputError):
        Instance(ModularValuation(GroundSet.of_size(2), (1, 1)), UniformMatroid(GroundSet.of_size(3), 1))
