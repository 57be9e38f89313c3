from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from finetti import (
    Event,
    FiniteMixture,
    ValidationError,
    concentration_profile,
    convergence_sweep,
    empirical_product_moment_exact,
    ensemble_poly_expectation,
    joint_event_prob,
    moment_discrepancy,
    pushforward_ensemble,
)
from finetti.ensemble import sweep_to_csv
from finetti.finite import pattern_events
from finetti.moments import multi_indices

from fleet import FAIR_COIN, FLEET, SKEWED_TABLE, TWO_ATOM, URN11, ev

ONE = Event.of([1], 2)


def as_map(ens):
    return {point: mass for point, mass in ens.support}


class TestPushforward:
    def test_fair_coin(self):
        ens = pushforward_ensemble(FAIR_COIN, 2, [ONE])
        assert as_map(ens) == {(0,): F(1, 4), (F(1, 2),): F(1, 2), (1,): F(1, 4)}

    def test_urn(self):
        ens = pushforward_ensemble(URN11, 3, [ONE])
        assert as_map(ens) == {(F(t, 3),): F(1, 4) for t in range(4)}

    def test_point_mass(self):
        ens = pushforward_ensemble(FiniteMixture.iid((0, 1)), 5, [ONE])
        assert as_map(ens) == {(1,): 1}

    @pytest.mark.parametrize("name", sorted(FLEET))
    def test_support_points_on_lattice(self, name):
        ens = pushforward_ensemble(FLEET[name], 6, (ev(0), ev(2)))
        assert sum(m for _, m in ens.support) == 1
        for point, _ in ens.support:
            assert sum(point) <= 1
            assert all((x * 6).denominator == 1 for x in point)


class TestPolyExpectation:
    def test_examples(self):
        ens = pushforward_ensemble(FAIR_COIN, 2, [ONE])
        assert ensemble_poly_expectation(ens, (0,)) == 1
        assert ensemble_poly_expectation(ens, (2,)) == F(3, 8)
        assert ensemble_poly_expectation(ens, (1,)) == joint_event_prob(FAIR_COIN, [ONE])

    @pytest.mark.parametrize("name", sorted(FLEET))
    def test_equals_empirical_product_moment(self, name):
        model = FLEET[name]
        partition = (ev(0), ev(1, 2))
        for n in (1, 4, 9):
            ens = pushforward_ensemble(model, n, partition)
            for k in multi_indices(2, 4):
                if sum(k) == 0:
                    continue
                assert ensemble_poly_expectation(ens, k) == \
                    empirical_product_moment_exact(model, n, pattern_events(partition, k))

    def test_index_length_mismatch(self):
        with pytest.raises(ValidationError):
            ensemble_poly_expectation(pushforward_ensemble(FAIR_COIN, 2, [ONE]), (1, 1))


class TestDiscrepancy:
    def test_degree_one_is_zero(self):
        for model in FLEET.values():
            for n in (1, 3, 10):
                assert moment_discrepancy(pushforward_ensemble(model, n, (ev(0), ev(1))), model, 1) == 0

    def test_two_atom(self):
        d = moment_discrepancy(pushforward_ensemble(TWO_ATOM, 10, [ONE]), TWO_ATOM, 2)
        assert d == F(2, 125)

    def test_point_mass(self):
        model = FiniteMixture.iid((0, 1))
        for n in (1, 5, 20):
            assert moment_discrepancy(pushforward_ensemble(model, n, [ONE]), model, 5) == 0

    def test_rejects_table(self):
        with pytest.raises(ValidationError):
            moment_discrepancy(pushforward_ensemble(SKEWED_TABLE, 2, [ONE]), SKEWED_TABLE, 2)

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(sorted(FLEET)), st.integers(1, 50), st.integers(1, 4))
    def test_bounded_by_df_rate(self, name, n, D):
        model = FLEET[name]
        d = moment_discrepancy(pushforward_ensemble(model, n, (ev(1, 2),)), model, D)
        assert d <= F(D * (D - 1) // 2, n)


class TestSweep:
    def test_two_atom(self):
        rows = convergence_sweep(TWO_ATOM, [ONE], [40, 10, 20], 2)
        assert [r.n for r in rows] == [10, 20, 40]
        assert [r.discrepancy for r in rows] == [F(2, 125), F(1, 125), F(1, 250)]
        assert [r.bound for r in rows] == [F(1, 10), F(1, 20), F(1, 40)]
        assert {r.ratio for r in rows} == {F(4, 25)}

    def test_degree_one(self):
        assert all(r.discrepancy == 0 for r in convergence_sweep(URN11, [ONE], [3, 7], 1))

    def test_urn(self):
        (row,) = convergence_sweep(URN11, [ONE], [10], 2)
        second = sum(F(t, 10) ** 2 for t in range(11)) / 11
        assert row.discrepancy == abs(second - F(1, 3))
        assert row.discrepancy <= F(1, 10)

    def test_csv(self):
        text = sweep_to_csv(convergence_sweep(TWO_ATOM, [ONE], [10], 2))
        assert text.splitlines() == ["n,discrepancy,bound,ratio,discrepancy_f,bound_f",
                                     "10,2/125,1/10,4/25,0.016,0.1"]


class TestConcentration:
    def test_point_mass(self):
        ens = pushforward_ensemble(FiniteMixture.iid((0, 1)), 5, [ONE])
        assert concentration_profile(ens, F(1, 2)) == 1

    def test_fair_coin(self):
        ens = pushforward_ensemble(FAIR_COIN, 2, [ONE])
        assert concentration_profile(ens, F(1, 4)) == 2
        assert concentration_profile(ens, F(1, 10**9)) == 3

    def test_nonincreasing_in_epsilon(self):
        ens = pushforward_ensemble(URN11, 12, [ONE])
        values = [concentration_profile(ens, F(j, 20)) for j in range(1, 20)]
        assert values == sorted(values, reverse=True)

    def test_epsilon_range(self):
        with pytest.raises(ValidationError):
            concentration_profile(pushforward_ensemble(FAIR_COIN, 2, [ONE]), 0)
