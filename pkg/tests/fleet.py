"""Shared exchangeable models and event pools for the test suite."""

import itertools
import random
from fractions import Fraction as F

from finetti import Event, FiniteMixture, JointTable, PolyaUrn

S = 3

FLEET = {
    "mix_two": FiniteMixture.from_components(
        [(F(1, 2), (F(2, 5), F(1, 2), F(1, 10))), (F(1, 2), (F(1, 10), F(1, 5), F(7, 10)))]),
    "mix_three": FiniteMixture.from_components(
        [(F(1, 3), (1, 0, 0)), (F(1, 6), (0, F(1, 2), F(1, 2))), (F(1, 2), (F(1, 4), F(1, 4), F(1, 2)))]),
    "mix_degenerate": FiniteMixture.from_components([(F(1, 2), (1, 0, 0)), (F(1, 2), (0, 0, 1))]),
    "iid": FiniteMixture.iid((F(1, 5), F(3, 10), F(1, 2))),
    "urn_uniform": PolyaUrn((1, 1, 1)),
    "urn_skewed": PolyaUrn((2, 1, 3)),
}

TWO_ATOM = FiniteMixture.from_components(
    [(F(1, 2), (F(4, 5), F(1, 5))), (F(1, 2), (F(1, 5), F(4, 5)))])
FAIR_COIN = FiniteMixture.iid((F(1, 2), F(1, 2)))
URN11 = PolyaUrn((1, 1))
SKEWED_TABLE = JointTable(2, 2, {(1, 0): F(2, 5), (0, 1): F(1, 10), (0, 0): F(1, 4), (1, 1): F(1, 4)})


def ev(*members, s=S):
    return Event.of(members, s)


NONEMPTY_EVENTS = [Event.of(c, S) for r in range(1, S + 1)
                   for c in itertools.combinations(range(S), r)]


def event_pool(k, size=10, seed=1234):
    """A fixed pool of ``size`` event tuples of length ``k``."""
    rng = random.Random(seed + k)
    return [tuple(rng.choice(NONEMPTY_EVENTS) for _ in range(k)) for _ in range(size)]


PARTITIONS = [
    (ev(0),),
    (ev(1, 2),),
    (ev(0), ev(1)),
    (ev(0), ev(2)),
    (ev(0), ev(1), ev(2)),
]


def multiplicity_vectors(n, max_total):
    return [k for k in itertools.product(range(max_total + 1), repeat=n)
            if 1 <= sum(k) <= max_total]
