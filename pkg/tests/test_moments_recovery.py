import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finetti import (
    ConvergenceError,
    Event,
    FiniteMixture,
    GridMixingRecovery,
    PronyAtomicRecovery,
    RankDeficiencyError,
    ValidationError,
    check_complete_monotonicity,
    joint_event_prob,
    moments_from_model,
    recover_atoms_prony,
    recover_mixing_grid,
)
from finetti.finite import pattern_events
from finetti.recovery import project_to_simplex

import oracles
from fleet import FLEET, SKEWED_TABLE, TWO_ATOM, URN11, ev

ONE = Event.of([1], 2)


class TestMomentsFromModel:
    def test_urn_uniform(self):
        assert moments_from_model(URN11, [ONE], 4).one_dimensional() == [1, F(1, 2), F(1, 3), F(1, 4), F(1, 5)]

    def test_two_atom(self):
        m = moments_from_model(TWO_ATOM, [ONE], 4).one_dimensional()
        expected = [F(1, 2) * (F(1, 5) ** k + F(4, 5) ** k) for k in range(5)]
        assert m == expected
        assert m[1:4] == [F(1, 2), F(17, 50), F(13, 50)]

    def test_single_component(self):
        d = (F(1, 3), F(1, 6), F(1, 2))
        model = FiniteMixture.iid(d)
        c = ev(1, 2)
        m = moments_from_model(model, [c], 5).one_dimensional()
        assert m == [F(2, 3) ** k for k in range(6)]

    @pytest.mark.parametrize("name", sorted(FLEET))
    def test_entries_are_pattern_probabilities(self, name):
        model = FLEET[name]
        partition = (ev(0), ev(2))
        table = moments_from_model(model, partition, 4)
        for k, v in table.entries.items():
            assert v == joint_event_prob(model, pattern_events(partition, k))
            assert v == oracles.joint_event_prob_enum(model, pattern_events(partition, k))
        assert table[(0, 0)] == 1

    @pytest.mark.parametrize("name", sorted(FLEET))
    def test_monotone_in_each_coordinate(self, name):
        table = moments_from_model(FLEET[name], (ev(0), ev(1, 2)), 5)
        for k, v in table.entries.items():
            assert 0 <= v <= 1
            for i in range(2):
                up = list(k)
                up[i] += 1
                if tuple(up) in table.entries:
                    assert table.entries[tuple(up)] <= v

    def test_rejects_non_exchangeable(self):
        with pytest.raises(ValidationError):
            moments_from_model(SKEWED_TABLE, [ONE], 2)


class TestCompleteMonotonicity:
    def test_examples(self):
        assert check_complete_monotonicity([1, F(1, 2), F(1, 3), F(1, 4)]) == (True, None)
        assert check_complete_monotonicity([1, F(1, 5), F(3, 10)]) == (False, (1, 1))
        assert check_complete_monotonicity([1, F(1, 2), F(1, 4), F(1, 8)]) == (True, None)

    def test_string_input(self):
        assert check_complete_monotonicity(["1", "1/2", "0.25"]) == (True, None)

    @pytest.mark.parametrize("name", sorted(FLEET))
    @pytest.mark.parametrize("cls", [(0,), (1, 2), (2,)])
    def test_fleet_accepted_and_perturbation_rejected(self, name, cls):
        m = moments_from_model(FLEET[name], [ev(*cls)], 6).one_dimensional()
        assert check_complete_monotonicity(m)[0]
        bad = list(m)
        bad[2] += F(1, 10)
        assert not check_complete_monotonicity(bad)[0]

    def test_m0_required(self):
        with pytest.raises(ValidationError):
            check_complete_monotonicity([F(1, 2), F(1, 4)])


def test_simplex_projection():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.normal(size=7)
        w = project_to_simplex(v)
        assert abs(w.sum() - 1) < 1e-12 and (w >= 0).all()
        # optimality: no feasible vertex direction improves the distance
        for j in range(7):
            e = np.zeros(7)
            e[j] = 1
            assert np.sum((w - v) ** 2) <= np.sum((e - v) ** 2) + 1e-12


class TestGridRecovery:
    def test_point_mass(self):
        m = [F(1, 2) ** k for k in range(9)]
        g = recover_mixing_grid(m, grid_size=101)
        assert g.residual < 1e-8
        near = np.abs(g.grid - 0.5) <= 0.01 + 1e-12
        assert g.weights[near].sum() >= 0.99

    def test_uniform(self):
        m = [F(1, k + 1) for k in range(9)]
        g = recover_mixing_grid(m, grid_size=101)
        assert g.residual < 1e-6
        assert np.max(np.abs(g.moments(8) - [1 / (k + 1) for k in range(9)])) < 1e-6

    def test_two_point_grid(self):
        g = recover_mixing_grid([1, F(3, 10), F(3, 10), F(3, 10)], grid_size=2)
        np.testing.assert_allclose(g.weights, [0.7, 0.3], atol=1e-15)
        assert g.residual == 0

    @pytest.mark.parametrize("m", [[1, F(1, 2), F(1, 3), F(1, 4)], [1, F(1, 2), F(17, 50), F(13, 50), F(257, 1250)]])
    def test_monotone_descent_from_uniform_start(self, m):
        with pytest.raises(ConvergenceError) as info:
            recover_mixing_grid(m, grid_size=41, init="uniform", tol=0.0, max_iters=300)
        assert info.value.diagnostics["iterations"] == 300
        g = recover_mixing_grid(m, grid_size=41, init="uniform", tol=1e-10, max_iters=100000)
        assert np.all(np.diff(g.objective_history) <= 0)
        assert abs(g.weights.sum() - 1) <= 1e-12 and (g.weights >= 0).all()

    def test_rejects_non_cm(self):
        with pytest.raises(ValidationError):
            recover_mixing_grid([1, F(1, 5), F(3, 10)])
        with pytest.raises(ValidationError):
            recover_mixing_grid([1, F(1, 2)], grid_size=1)

    def test_estimator(self):
        est = GridMixingRecovery(grid_size=51).fit([F(1, k + 1) for k in range(7)])
        assert est.residual_ < 1e-6
        np.testing.assert_allclose(est.predict([1, 2]), [0.5, 1 / 3], atol=1e-6)
        assert est.get_params() == {"grid_size": 51, "tol": 1e-12, "max_iter": 100000, "init": "nnls"}


class TestProny:
    def test_two_atoms(self):
        a = recover_atoms_prony([1, F(1, 2), F(17, 50), F(13, 50)], 2)
        np.testing.assert_allclose(a.atoms, [0.2, 0.8], atol=1e-9)
        np.testing.assert_allclose(a.weights, [0.5, 0.5], atol=1e-9)

    def test_point_mass(self):
        a = recover_atoms_prony([1, F(1, 3)], 1)
        np.testing.assert_allclose(a.atoms, [1 / 3], atol=1e-12)
        np.testing.assert_allclose(a.weights, [1.0], atol=1e-12)

    def test_rank_deficient(self):
        with pytest.raises(RankDeficiencyError):
            recover_atoms_prony([1, F(1, 2), F(1, 4), F(1, 8)], 2)

    def test_too_few_moments(self):
        with pytest.raises(ValidationError):
            recover_atoms_prony([1, F(1, 2)], 2)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 20), min_size=1, max_size=3, unique=True),
           st.lists(st.integers(1, 9), min_size=3, max_size=3))
    def test_round_trip_from_mixtures(self, values, raw_weights):
        # components whose mass on class {1} takes the given values /20
        raw = raw_weights[:len(values)]
        weights = [F(w, sum(raw)) for w in raw]
        model = FiniteMixture.from_components(
            [(w, (1 - F(v, 20), F(v, 20))) for w, v in zip(weights, values)])
        r = len(values)
        m = moments_from_model(model, [ONE], 2 * r - 1).one_dimensional()
        a = recover_atoms_prony(m, r)
        order = np.argsort(values)
        np.testing.assert_allclose(a.atoms, np.array(values)[order] / 20, atol=1e-9)
        np.testing.assert_allclose(a.weights, np.array([float(w) for w in weights])[order], atol=1e-9)

    def test_estimator(self):
        est = PronyAtomicRecovery(n_atoms=2).fit([1, F(1, 2), F(17, 50), F(13, 50)])
        np.testing.assert_allclose(est.predict([4]), [0.2056], atol=1e-9)
