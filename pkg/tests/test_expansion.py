import math

import numpy as np
import pytest

import oracles
from beliefweb import harness
from beliefweb.expansion import (
    AllZeroWeight,
    alternative_model,
    check_conditional_consistency,
    check_consistency,
    component_marginal_deviation,
    product_extension,
)
from beliefweb.model import JointDistribution
from beliefweb.system import system_from_arrays
from beliefweb.web import NotAWeb, Structure, hypertree_unpacking, intersection_overlaps, unpack


def oracle_px(system, unpacking):
    names = system.space.names
    cards = system.space.shape
    tables = [oracles.system_dicts(system)[system.structure.components.index(s.component)] for s in unpacking.steps]
    steps = [(s.component, s.ordered(s.overlap)) for s in unpacking.steps]
    return oracles.product_extension(names, cards, tables, steps)


def oracle_alt(system, unpacking):
    names = system.space.names
    cards = system.space.shape
    dicts = oracles.system_dicts(system)
    tables = [dicts[system.structure.components.index(s.component)] for s in unpacking.steps]
    ostars = [[s.ordered(o) for o in s.intersection_overlaps] for s in unpacking.steps]
    w = oracles.alt_weights(names, cards, tables, ostars)
    total = sum(w.values())
    return {x: v / total for x, v in w.items()}, 1.0 / total


class TestProductExtension:
    def test_fig1_single_state(self, fig1):
        px = product_extension(fig1).joint
        # .4 x .2 x .16 / (.5 x .2)
        assert px.values[1, 1, 1, 1] == pytest.approx(0.128, abs=1e-12)

    def test_fig1_matches_oracle(self, fig1):
        u = unpack(fig1.structure)
        ref = oracle_px(fig1, u)
        got = oracles.joint_dict(product_extension(fig1, u).joint)
        for x in ref:
            assert got[x] == pytest.approx(ref[x], abs=1e-14)

    def test_single_component(self):
        arr = np.array([[0.1, 0.2], [0.3, 0.4]])
        sys = system_from_arrays(Structure.parse("AB"), [arr])
        np.testing.assert_allclose(product_extension(sys).joint.values, arr)

    def test_disjoint_components_multiply(self):
        a, b = np.array([0.3, 0.7]), np.array([0.6, 0.4])
        sys = system_from_arrays(Structure.parse("A,B"), [a, b])
        np.testing.assert_allclose(product_extension(sys).joint.values, np.outer(a, b))

    def test_k_is_one(self, fig1):
        assert product_extension(fig1).k == 1.0

    def test_random_webs_match_oracle(self):
        rng = np.random.default_rng(11)
        for i in range(25):
            s = harness.random_web(rng, int(rng.integers(1, 5)), max_vars=7)
            system = harness.random_system(s, seed=i)
            u = unpack(s)
            ref = oracle_px(system, u)
            got = oracles.joint_dict(product_extension(system, u).joint)
            assert max(abs(got[x] - ref[x]) for x in ref) < 1e-14

    def test_zero_overlap_marginal(self):
        # B=1 never happens in BC; the uniform convention keeps P^x normalized
        ab = np.array([[0.25, 0.25], [0.25, 0.25]])
        bc = np.array([[0.5, 0.5], [0.0, 0.0]])
        sys = system_from_arrays(Structure.parse("AB,BC"), [ab, bc])
        px = product_extension(sys).joint
        assert px.values.sum() == pytest.approx(1.0)


class TestAlternativeModel:
    def test_fig1_k_and_state(self, fig1):
        alt = alternative_model(fig1)
        assert alt.k == pytest.approx(0.992126, abs=1e-6)
        assert 1.0 / alt.k == pytest.approx(1.0079365079365, abs=1e-12)
        w0 = (0.3 * 0.4 * 0.24) / (0.5 * 0.4 * 0.7)
        assert w0 == pytest.approx(0.205714, abs=1e-6)
        assert alt.joint.values[0, 0, 0, 0] == pytest.approx(alt.k * w0, abs=1e-14)

    def test_fig1_matches_oracle(self, fig1):
        u = intersection_overlaps(fig1.structure, unpack(fig1.structure))
        ref, k = oracle_alt(fig1, u)
        alt = alternative_model(fig1, u)
        assert alt.k == pytest.approx(k, abs=1e-14)
        got = oracles.joint_dict(alt.joint)
        assert max(abs(got[x] - ref[x]) for x in ref) < 1e-14

    def test_indep_fixture_equals_product_extension(self, fig1_indep):
        alt = alternative_model(fig1_indep)
        px = product_extension(fig1_indep)
        assert alt.k == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(alt.joint.values, px.joint.values, atol=1e-12)

    def test_single_component(self):
        arr = np.array([[0.1, 0.2], [0.3, 0.4]])
        sys = system_from_arrays(Structure.parse("AB"), [arr])
        alt = alternative_model(sys)
        assert alt.k == 1.0
        np.testing.assert_allclose(alt.joint.values, arr)

    def test_hypertrees_match_standard(self):
        rng = np.random.default_rng(12)
        for i in range(30):
            s = harness.random_web(rng, int(rng.integers(1, 6)), tree=True, max_vars=8)
            system = harness.random_consistent_system(s, seed=i)
            u = hypertree_unpacking(s)
            alt = alternative_model(system, u)
            px = product_extension(system, u)
            assert abs(alt.k - 1.0) < 1e-9
            assert np.max(np.abs(alt.joint.values - px.joint.values)) < 1e-9

    def test_all_zero_weight(self):
        # AB puts all mass on B=0, BC all mass on B=1
        ab = np.array([[0.5, 0.0], [0.5, 0.0]])
        bc = np.array([[0.0, 0.0], [0.5, 0.5]])
        sys = system_from_arrays(Structure.parse("AB,BC"), [ab, bc])
        with pytest.raises(AllZeroWeight):
            alternative_model(sys)

    def test_non_web_requires_flag(self):
        s = Structure.parse("AB,BC,CA")
        system = harness.random_consistent_system(s, seed=3)
        with pytest.raises(NotAWeb):
            alternative_model(system)
        alt = alternative_model(system, allow_non_web=True)
        assert alt.unpacking_used is None
        # each single-variable intersection is divided out once
        names = system.space.names
        dicts = oracles.system_dicts(system)
        w = oracles.alt_weights(names, system.space.shape, dicts, [[("B",)], [("C",)], [("A",)]])
        total = sum(w.values())
        assert alt.k == pytest.approx(1.0 / total, rel=1e-12)


class TestConsistency:
    def test_exact_marginals_consistent(self):
        s = Structure.parse("AB,AC,BCD")
        system = harness.random_consistent_system(s, seed=1)
        v = check_consistency(system)
        assert v.status == "consistent"
        assert v.residual < 1e-9
        assert component_marginal_deviation(v.witness, system) < 1e-9

    def test_contradictory_marginals(self):
        a = np.array([0.9, 0.1])
        ab = np.array([[0.25, 0.25], [0.25, 0.25]])
        v = check_consistency(system_from_arrays(Structure.parse("A,AB"), [a, ab]))
        assert v.status == "inconsistent"
        assert v.witness is None
        assert v.residual > 0.1

    def test_fig1_consistent_with_px_as_witness(self, fig1):
        assert check_consistency(fig1).status == "consistent"
        px = product_extension(fig1).joint
        assert oracles.component_marginals_ok(
            oracles.joint_dict(px), fig1.space.names, oracles.system_dicts(fig1), 1e-12
        )

    def test_undetermined_when_out_of_iterations(self, fig1_indep):
        v = check_consistency(fig1_indep, tol=1e-15, max_iter=3)
        assert v.status == "undetermined"


class TestConditionalConsistency:
    def test_px_is_conditionally_consistent(self, fig1):
        rep = check_conditional_consistency(product_extension(fig1).joint, fig1)
        assert rep.max_deviation < 1e-9

    def test_alt_is_not(self, fig1):
        rep = check_conditional_consistency(alternative_model(fig1).joint, fig1)
        assert rep.max_deviation > 1e-3

    def test_single_component(self):
        arr = np.array([[0.1, 0.2], [0.3, 0.4]])
        sys = system_from_arrays(Structure.parse("AB"), [arr])
        rep = check_conditional_consistency(JointDistribution(sys.space, arr), sys)
        assert rep.max_deviation == 0.0

    def test_random_webs_with_mismatched_overlaps(self):
        rng = np.random.default_rng(13)
        for i in range(40):
            s = harness.random_web(rng, int(rng.integers(1, 7)))
            system = harness.random_system(s, seed=i)
            px = product_extension(system).joint
            assert math.isclose(px.values.sum(), 1.0, abs_tol=1e-9)
            assert check_conditional_consistency(px, system).max_deviation < 1e-8


def test_px_outside_K_for_indep_fixture(fig1_indep):
    assert check_consistency(fig1_indep).status == "consistent"
    px = product_extension(fig1_indep).joint
    assert component_marginal_deviation(px, fig1_indep) > 1e-3
