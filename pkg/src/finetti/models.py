"""Exchangeable sequence models with exact finite-dimensional laws.

Three families are provided:

* :class:`FiniteMixture` -- a finitely supported mixture of iid laws,
* :class:`PolyaUrn` -- the Pólya urn with unit reinforcement,
* :class:`JointTable` -- an explicit joint law up to a fixed horizon, used
  mainly to build laws that are *not* exchangeable.

Module-level functions (``joint_prob``, ``count_distribution``, ...) mirror
the model methods so callers can stay model-agnostic.
"""

from __future__ import annotations

import itertools
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence, Union

import numpy as np

from finetti.exceptions import ExactCapError, ValidationError
from finetti.measures import (
    MAX_EVENTS,
    Alphabet,
    Dist,
    Event,
    as_fraction,
    check_partition,
    disjointify_event_tuple,
)

MAX_CHECK_K = 6
DEFAULT_MAX_EXACT_N = 64


def max_exact_n() -> int:
    """Cap on the sample size for exact count laws (``FINETTI_MAX_EXACT_N``)."""
    raw = os.environ.get("FINETTI_MAX_EXACT_N")
    if raw is None:
        return DEFAULT_MAX_EXACT_N
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValidationError(f"FINETTI_MAX_EXACT_N must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValidationError("FINETTI_MAX_EXACT_N must be positive")
    return cap


def rising(a: int, m: int) -> int:
    """Rising factorial ``a (a+1) ... (a+m-1)``."""
    out = 1
    for i in range(m):
        out *= a + i
    return out


def falling(n: int, m: int) -> int:
    """Falling factorial ``n (n-1) ... (n-m+1)``; zero once ``m > n``."""
    out = 1
    for i in range(m):
        out *= n - i
    return out


def compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def multinomial(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


def _cells(partition: Sequence[Event]) -> list[Event]:
    """The partition completed with its residual atom (possibly empty)."""
    alphabet = check_partition(partition)
    covered = set().union(*(set(c.members) for c in partition))
    residual = Event(tuple(x for x in alphabet.states if x not in covered), alphabet)
    return list(partition) + [residual]


def _check_exact_n(N: int) -> None:
    if not isinstance(N, int) or N < 0:
        raise ValidationError(f"sample size must be a nonnegative integer, got {N!r}")
    cap = max_exact_n()
    if N > cap:
        raise ExactCapError(
            f"N={N} exceeds the exact-mode cap {cap}; use mc_joint_estimate "
            "or raise FINETTI_MAX_EXACT_N")


def _stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for experiment ``index`` under ``seed``."""
    if seed < 0 or seed >= 2**64:
        raise ValidationError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def _float_cdf(probs: Sequence[Fraction]) -> np.ndarray:
    cdf = np.cumsum([float(p) for p in probs])
    cdf[-1] = 1.0
    return cdf


class _Model:
    alphabet: Alphabet
    exchangeable_by_construction = True

    def _check_states(self, states: Sequence[int]) -> tuple[int, ...]:
        states = tuple(states)
        if len(states) > MAX_EVENTS:
            raise ValidationError(f"at most {MAX_EVENTS} states per query, got {len(states)}")
        for x in states:
            if not isinstance(x, (int, np.integer)) or not 0 <= x < self.alphabet.size:
                raise ValidationError(f"state {x!r} outside alphabet of size {self.alphabet.size}")
        return tuple(int(x) for x in states)

    def _check_events(self, events: Sequence[Event]) -> tuple[Event, ...]:
        events = tuple(events)
        if len(events) > MAX_EVENTS:
            raise ValidationError(f"at most {MAX_EVENTS} events per query, got {len(events)}")
        for e in events:
            if e.alphabet != self.alphabet:
                raise ValidationError("event alphabet does not match the model")
        return events

    def joint_event_prob(self, events: Sequence[Event]) -> Fraction:
        # Disjointify, then use that the law of a tuple of atoms only depends
        # on which atoms repeat.
        events = self._check_events(events)
        if not events:
            return Fraction(1)
        return sum((self._disjointified_prob(t) for t in disjointify_event_tuple(events)),
                   Fraction(0))

    def _disjointified_prob(self, atoms: tuple[Event, ...]) -> Fraction:
        raise NotImplementedError

    def count_distribution(self, N: int, partition: Sequence[Event]) -> dict[tuple[int, ...], Fraction]:
        raise NotImplementedError

    def sample(self, N: int, seed: int = 0, stream: int = 0) -> np.ndarray:
        raise ValidationError(f"{type(self).__name__} has no sampler")


@dataclass(frozen=True)
class FiniteMixture(_Model):
    """Mixture of iid laws: draw ``dists[j]`` with probability ``weights[j]``."""

    weights: tuple[Fraction, ...]
    dists: tuple[Dist, ...]

    def __post_init__(self):
        weights = tuple(as_fraction(w) for w in self.weights)
        dists = tuple(d if isinstance(d, Dist) else Dist(tuple(d)) for d in self.dists)
        if not dists or len(weights) != len(dists):
            raise ValidationError("a mixture needs one weight per component and at least one component")
        if any(w < 0 for w in weights) or sum(weights) != 1:
            raise ValidationError("mixture weights must be nonnegative and sum to 1")
        if len({d.alphabet for d in dists}) != 1:
            raise ValidationError("mixture components use different alphabets")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "dists", dists)

    @classmethod
    def from_components(cls, components) -> FiniteMixture:
        """Build from ``[(weight, probs), ...]``."""
        weights, dists = zip(*components)
        return cls(tuple(weights), tuple(Dist(tuple(p)) for p in dists))

    @classmethod
    def iid(cls, probs) -> FiniteMixture:
        return cls((Fraction(1),), (Dist(tuple(probs)),))

    @property
    def alphabet(self) -> Alphabet:
        return self.dists[0].alphabet

    def joint_prob(self, states: Sequence[int]) -> Fraction:
        states = self._check_states(states)
        total = Fraction(0)
        for w, d in zip(self.weights, self.dists):
            term = w
            for x in states:
                term *= d.probs[x]
            total += term
        return total

    def joint_event_prob(self, events: Sequence[Event]) -> Fraction:
        events = self._check_events(events)
        total = Fraction(0)
        for w, d in zip(self.weights, self.dists):
            term = w
            for e in events:
                term *= d.prob(e)
            total += term
        return total

    def count_distribution(self, N, partition):
        _check_exact_n(N)
        cells = _cells(partition)
        out: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for w, d in zip(self.weights, self.dists):
            if w == 0:
                continue
            p = [d.prob(c) for c in cells]
            live = [i for i, pi in enumerate(p) if pi > 0]
            for sub in compositions(N, len(live)):
                t = [0] * len(cells)
                for i, c in zip(live, sub):
                    t[i] = c
                mass = w * multinomial(t)
                for i in live:
                    mass *= p[i] ** t[i]
                out[tuple(t[:-1])] += mass
        return dict(sorted(out.items()))

    def sample(self, N, seed=0, stream=0):
        gen = _stream(seed, stream)
        j = int(np.searchsorted(_float_cdf(self.weights), gen.random(), side="right"))
        cdf = _float_cdf(self.dists[j].probs)
        return np.searchsorted(cdf, gen.random(N), side="right").astype(np.int64)


@dataclass(frozen=True)
class PolyaUrn(_Model):
    """Pólya urn: draw a ball, return it with one more of its colour."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(self.counts)
        Alphabet(len(counts))
        if any(not isinstance(c, int) or isinstance(c, bool) or c < 1 for c in counts):
            raise ValidationError("urn counts must be positive integers")
        object.__setattr__(self, "counts", counts)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(len(self.counts))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def joint_prob(self, states):
        states = self._check_states(states)
        num = 1
        for c, a in enumerate(self.counts):
            num *= rising(a, states.count(c))
        return Fraction(num, rising(self.total, len(states)))

    def _disjointified_prob(self, atoms):
        # Merging colours of a Pólya urn gives a Pólya urn on the merged colours.
        num = 1
        for atom in set(atoms):
            num *= rising(sum(self.counts[x] for x in atom), atoms.count(atom))
        return Fraction(num, rising(self.total, len(atoms)))

    def count_distribution(self, N, partition):
        _check_exact_n(N)
        cells = _cells(partition)
        a = [sum(self.counts[x] for x in c) for c in cells]
        live = [i for i, ai in enumerate(a) if ai > 0]
        denom = rising(self.total, N)
        out = {}
        for sub in compositions(N, len(live)):
            t = [0] * len(cells)
            for i, c in zip(live, sub):
                t[i] = c
            num = multinomial(t)
            for i in live:
                num *= rising(a[i], t[i])
            out[tuple(t[:-1])] = Fraction(num, denom)
        return dict(sorted(out.items()))

    def sample(self, N, seed=0, stream=0):
        gen = _stream(seed, stream)
        counts = list(self.counts)
        total = self.total
        out = np.empty(N, dtype=np.int64)
        for i, u in enumerate(gen.random(N)):
            target = u * total
            acc = 0
            for c, n_c in enumerate(counts):
                acc += n_c
                if target < acc:
                    break
            out[i] = c
            counts[c] += 1
            total += 1
        return out


@dataclass(frozen=True)
class JointTable(_Model):
    """Explicit joint law of ``(X_1, .., X_horizon)``.

    Shorter prefixes are answered by exact marginalization.
    """

    alphabet_size: int
    horizon: int
    probs: dict = field(compare=True)
    exchangeable_by_construction = False

    def __post_init__(self):
        Alphabet(self.alphabet_size)
        if not 1 <= self.horizon <= MAX_EVENTS:
            raise ValidationError(f"horizon must be in [1, {MAX_EVENTS}]")
        table = {}
        for key, value in self.probs.items():
            key = tuple(int(x) for x in key)
            if len(key) != self.horizon or any(not 0 <= x < self.alphabet_size for x in key):
                raise ValidationError(f"bad state sequence {key!r} for horizon {self.horizon}")
            value = as_fraction(value)
            if value < 0:
                raise ValidationError("joint probabilities must be nonnegative")
            if value:
                table[key] = table.get(key, Fraction(0)) + value
        if sum(table.values()) != 1:
            raise ValidationError("joint probabilities must sum to 1")
        object.__setattr__(self, "probs", table)

    __hash__ = None

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.alphabet_size)

    @cached_property
    def _marginals(self) -> list[dict[tuple[int, ...], Fraction]]:
        levels = [dict(self.probs)]
        for k in range(self.horizon - 1, -1, -1):
            nxt: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
            for key, value in levels[-1].items():
                nxt[key[:k]] += value
            levels.append(dict(nxt))
        return levels[::-1]

    def _check_horizon(self, k: int) -> None:
        if k > self.horizon:
            raise ValidationError(f"query length {k} exceeds the table horizon {self.horizon}")

    def joint_prob(self, states):
        states = self._check_states(states)
        self._check_horizon(len(states))
        return self._marginals[len(states)].get(states, Fraction(0))

    def joint_event_prob(self, events):
        events = self._check_events(events)
        self._check_horizon(len(events))
        sets = [set(e.members) for e in events]
        table = self._marginals[len(events)]
        return sum((v for key, v in table.items() if all(x in s for x, s in zip(key, sets))),
                   Fraction(0))

    def count_distribution(self, N, partition):
        _check_exact_n(N)
        self._check_horizon(N)
        cells = _cells(partition)
        lookup = {}
        for i, c in enumerate(cells):
            for x in c:
                lookup[x] = i
        out: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for key, value in self._marginals[N].items():
            t = [0] * len(cells)
            for x in key:
                t[lookup[x]] += 1
            out[tuple(t[:-1])] += value
        return dict(sorted(out.items()))

    def sample(self, N, seed=0, stream=0):
        self._check_horizon(N)
        gen = _stream(seed, stream)
        keys = sorted(self.probs)
        j = int(np.searchsorted(_float_cdf([self.probs[k] for k in keys]), gen.random(), side="right"))
        return np.asarray(keys[j][:N], dtype=np.int64)


ExchangeableModel = Union[FiniteMixture, PolyaUrn, JointTable]


def joint_prob(model: ExchangeableModel, states: Sequence[int]) -> Fraction:
    """Exact probability that ``X_1 .. X_k`` equal ``states``."""
    return model.joint_prob(states)


def joint_event_prob(model: ExchangeableModel, events: Sequence[Event]) -> Fraction:
    """Exact probability of ``{X_1 in B_1, .., X_k in B_k}``."""
    return model.joint_event_prob(events)


def count_distribution(model: ExchangeableModel, N: int,
                       partition: Sequence[Event]) -> dict[tuple[int, ...], Fraction]:
    """Exact law of the occupancy counts of ``partition`` among ``X_1 .. X_N``.

    Keys are count tuples ``(t_1, .., t_n)`` (the residual cell is implicit);
    only count vectors with positive mass are listed.
    """
    partition = tuple(partition)
    _check_exact_n(N)
    try:
        law = _cached_count_distribution(model, N, partition)
    except TypeError:  # unhashable model (JointTable)
        return model.count_distribution(N, partition)
    return dict(law)


@lru_cache(maxsize=512)
def _cached_count_distribution(model, N, partition):
    return model.count_distribution(N, partition)


def sample(model: ExchangeableModel, N: int, seed: int = 0) -> np.ndarray:
    """Draw ``X_1 .. X_N``; a pure function of ``(model, N, seed)``."""
    if not isinstance(N, int) or N < 0:
        raise ValidationError("N must be a nonnegative integer")
    return model.sample(N, seed)


def exchangeability_check_exact(model: ExchangeableModel, k: int) -> Fraction:
    """Largest change in ``P(X_1..X_k = x)`` under a permutation of ``x``.

    Zero exactly when the ``k``-dimensional marginal is exchangeable. Tuples
    sharing a sorted form form one orbit, so the maximum over permutations is
    the spread (max minus min) within each orbit.
    """
    if not 1 <= k <= MAX_CHECK_K:
        raise ValidationError(f"k must be in [1, {MAX_CHECK_K}]")
    orbits: dict[tuple[int, ...], list[Fraction]] = defaultdict(list)
    for x in itertools.product(model.alphabet.states, repeat=k):
        orbits[tuple(sorted(x))].append(model.joint_prob(x))
    return max(max(v) - min(v) for v in orbits.values())


def require_exchangeable(model: ExchangeableModel) -> None:
    """Reject tables whose joint law is not permutation invariant."""
    if model.exchangeable_by_construction:
        return
    k = min(model.horizon, MAX_CHECK_K)
    deviation = exchangeability_check_exact(model, k)
    if deviation != 0:
        raise ValidationError(
            f"model is not exchangeable: permutation deviation {deviation} at k={k}")
