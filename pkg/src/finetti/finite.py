"""Empirical measures and the finite de Finetti approximation.

For an exchangeable sequence the expected product of empirical measures
``E[mu_n(B_1) ... mu_n(B_k)]`` differs from ``P(X_1 in B_1, .., X_k in B_k)``
by at most ``C(k, 2) / n``. This module computes both sides exactly, the
conditional law of a pattern given occupancy counts, the two expansions of
the joint law over count vectors, and a reproducible Monte-Carlo estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from finetti.exceptions import ValidationError
from finetti.measures import Event, check_partition, common_alphabet, format_fraction
from finetti.models import (
    ExchangeableModel,
    count_distribution,
    falling,
    require_exchangeable,
)

MAX_MOMENT_K = 8
MAX_BAYES_N = 16


@dataclass(frozen=True)
class EmpiricalMeasure:
    """State counts of a sample of size ``n``."""

    counts: tuple[int, ...]
    n: int

    def __post_init__(self):
        if self.n < 1 or sum(self.counts) != self.n or min(self.counts) < 0:
            raise ValidationError("counts must be nonnegative and sum to n >= 1")

    @classmethod
    def from_sample(cls, sample: Sequence[int], alphabet_size: int) -> EmpiricalMeasure:
        sample = np.asarray(sample, dtype=np.int64)
        if sample.size == 0:
            raise ValidationError("empirical measure of an empty sample")
        if sample.min() < 0 or sample.max() >= alphabet_size:
            raise ValidationError("sample contains states outside the alphabet")
        counts = np.bincount(sample, minlength=alphabet_size)
        return cls(tuple(int(c) for c in counts), int(sample.size))

    def __call__(self, event: Event) -> Fraction:
        return Fraction(sum(self.counts[x] for x in event), self.n)


def empirical_eval(sample: Sequence[int], event: Event) -> Fraction:
    """Fraction of ``sample`` falling in ``event``."""
    if len(sample) == 0:
        raise ValidationError("empirical measure of an empty sample")
    return Fraction(sum(1 for x in sample if x in event), len(sample))


def set_partitions(k: int):
    """Set partitions of ``range(k)`` as lists of blocks, via restricted growth strings."""
    if k == 0:
        yield []
        return
    labels = [0] * k
    while True:
        blocks: list[list[int]] = [[] for _ in range(max(labels) + 1)]
        for i, b in enumerate(labels):
            blocks[b].append(i)
        yield blocks
        # next restricted growth string: a[i] <= 1 + max(a[:i])
        i = k - 1
        while i > 0:
            if labels[i] <= max(labels[:i]):
                labels[i] += 1
                labels[i + 1:] = [0] * (k - i - 1)
                break
            i -= 1
        else:
            return


def empirical_product_moment_exact(model: ExchangeableModel, n: int,
                                   events: Sequence[Event]) -> Fraction:
    """Exact ``E[mu_n(B_1) ... mu_n(B_k)]``.

    Expanding the product gives ``n**-k`` times a sum over index tuples in
    ``[n]**k``. Tuples are grouped by which positions coincide (a set
    partition of ``[k]``); a partition with ``b`` blocks is realised by
    ``n (n-1) .. (n-b+1)`` tuples, each contributing the joint probability of
    the block-wise intersected events.
    """
    events = tuple(events)
    if not 1 <= len(events) <= MAX_MOMENT_K:
        raise ValidationError(f"number of events must be in [1, {MAX_MOMENT_K}]")
    if not isinstance(n, int) or n < 1:
        raise ValidationError("n must be a positive integer")
    common_alphabet(events)
    k = len(events)
    total = Fraction(0)
    for blocks in set_partitions(k):
        ways = falling(n, len(blocks))
        if ways == 0:
            continue
        merged = []
        for block in blocks:
            e = events[block[0]]
            for i in block[1:]:
                e = e & events[i]
            merged.append(e)
        if any(e.is_empty for e in merged):
            continue
        total += ways * model.joint_event_prob(merged)
    return total / n**k


@dataclass(frozen=True)
class DfGapReport:
    exact_joint: Fraction
    empirical_moment: Fraction
    gap: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return abs(self.gap) <= self.bound

    def to_dict(self) -> dict:
        values = {"joint": self.exact_joint, "empirical_moment": self.empirical_moment,
                  "gap": self.gap, "bound": self.bound}
        out = {key: format_fraction(v) for key, v in values.items()}
        out["holds"] = self.holds
        out["floats"] = {key: float(v) for key, v in values.items()}
        return out


def df_bound(k: int, n: int) -> Fraction:
    """``C(k, 2) / n``; zero for a single event."""
    return Fraction(math.comb(k, 2), n)


def df_gap(model: ExchangeableModel, n: int, events: Sequence[Event]) -> DfGapReport:
    """Compare the empirical product moment with the joint law it approximates."""
    require_exchangeable(model)
    events = tuple(events)
    joint = model.joint_event_prob(events)
    moment = empirical_product_moment_exact(model, n, events)
    return DfGapReport(joint, moment, moment - joint, df_bound(len(events), n))


def conditional_law_given_counts(N: int, counts: Sequence[int],
                                 multiplicities: Sequence[int]) -> Fraction:
    """``P(X_1..X_k follow the pattern | counts)`` for an exchangeable sequence.

    The pattern places ``k_i`` of the first ``k`` variables in class ``i``;
    given ``t_i`` members of class ``i`` among ``N`` draws, all arrangements
    are equally likely, so the answer is
    ``prod t_i! / (t_i - k_i)!`` over ``N (N-1) .. (N-k+1)``.
    """
    counts = tuple(counts)
    multiplicities = tuple(multiplicities)
    if len(counts) != len(multiplicities):
        raise ValidationError("counts and multiplicities differ in length")
    if any(t < 0 for t in counts) or any(m < 0 for m in multiplicities):
        raise ValidationError("counts and multiplicities must be nonnegative")
    if sum(counts) > N:
        raise ValidationError(f"counts sum to {sum(counts)} > N={N}")
    k = sum(multiplicities)
    if k > N:
        raise ValidationError(f"pattern length {k} exceeds N={N}")
    num = 1
    for t, m in zip(counts, multiplicities):
        num *= falling(t, m)
    return Fraction(num, falling(N, k))


def pattern_events(partition: Sequence[Event], multiplicities: Sequence[int]) -> list[Event]:
    """``C_1`` repeated ``k_1`` times, then ``C_2`` repeated ``k_2`` times, ..."""
    if len(partition) != len(multiplicities):
        raise ValidationError("partition and multiplicities differ in length")
    return [c for c, m in zip(partition, multiplicities) for _ in range(m)]


def _power_product(counts, multiplicities, N) -> Fraction:
    out = Fraction(1)
    for t, m in zip(counts, multiplicities):
        out *= Fraction(t, N) ** m
    return out


@dataclass(frozen=True)
class BayesExpansion:
    """Both count-vector expansions of a repeated-event pattern.

    ``lhs`` conditions on the counts; ``rhs`` averages powers of the
    empirical frequencies. ``joint`` and ``moment`` are the independently
    computed quantities each must reproduce.
    """

    lhs: Fraction
    rhs: Fraction
    joint: Fraction
    moment: Fraction

    @property
    def lhs_ok(self) -> bool:
        return self.lhs == self.joint

    @property
    def rhs_ok(self) -> bool:
        return self.rhs == self.moment

    @property
    def equal(self) -> bool:
        return self.lhs_ok and self.rhs_ok

    def to_dict(self) -> dict:
        values = {"lhs": self.lhs, "rhs": self.rhs, "joint": self.joint, "moment": self.moment}
        out = {key: format_fraction(v) for key, v in values.items()}
        out.update(lhs_ok=self.lhs_ok, rhs_ok=self.rhs_ok, equal=self.equal)
        out["floats"] = {key: float(v) for key, v in values.items()}
        return out


def bayes_expansion_check(model: ExchangeableModel, N: int, partition: Sequence[Event],
                          multiplicities: Sequence[int]) -> BayesExpansion:
    if N > MAX_BAYES_N:
        raise ValidationError(f"N must be at most {MAX_BAYES_N} for the exact check")
    check_partition(partition)
    require_exchangeable(model)
    law = count_distribution(model, N, partition)
    lhs = sum((conditional_law_given_counts(N, t, multiplicities) * p for t, p in law.items()),
              Fraction(0))
    rhs = sum((_power_product(t, multiplicities, N) * p for t, p in law.items()), Fraction(0))
    pattern = pattern_events(partition, multiplicities)
    joint = model.joint_event_prob(pattern)
    moment = empirical_product_moment_exact(model, N, pattern) if pattern else Fraction(1)
    return BayesExpansion(lhs, rhs, joint, moment)


def tail_mass(model: ExchangeableModel, N: int, partition: Sequence[Event], m: int) -> Fraction:
    """Probability that some class of ``partition`` holds at most ``m`` of ``N`` draws."""
    law = count_distribution(model, N, partition)
    return sum((p for t, p in law.items() if min(t) <= m), Fraction(0))


@dataclass(frozen=True)
class TailReport:
    """Contributions of count vectors with a class count ``<= m``."""

    lhs_tail: Fraction
    rhs_tail: Fraction
    mass: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.rhs_tail <= self.bound


def tail_contributions(model: ExchangeableModel, N: int, partition: Sequence[Event],
                       multiplicities: Sequence[int], m: int) -> TailReport:
    """Tail parts of both expansions, with the ``2 n m / N`` bound on the rhs part.

    Every class must appear in the pattern (``k_i >= 1``), otherwise the
    small-count terms are not damped and the bound does not apply.
    """
    if any(k < 1 for k in multiplicities):
        raise ValidationError("every class needs multiplicity >= 1")
    law = count_distribution(model, N, partition)
    lhs = rhs = mass = Fraction(0)
    for t, p in law.items():
        if min(t) <= m:
            mass += p
            lhs += conditional_law_given_counts(N, t, multiplicities) * p
            rhs += _power_product(t, multiplicities, N) * p
    return TailReport(lhs, rhs, mass, Fraction(2 * len(partition) * m, N))


def _product_of_frequencies(model, n, masks, seed, start, stop) -> np.ndarray:
    out = np.empty(stop - start)
    for j in range(start, stop):
        x = model.sample(n, seed, j)
        value = 1.0
        for mask in masks:
            value *= np.count_nonzero(mask[x]) / n
        out[j - start] = value
    return out


def mc_joint_estimate(model: ExchangeableModel, n: int, m_reps: int,
                      events: Sequence[Event], seed: int = 0,
                      workers: int = 1) -> tuple[float, float]:
    """Monte-Carlo mean of ``prod_i mu_n(B_i)`` over ``m_reps`` simulated experiments.

    Experiment ``j`` draws from its own counter-based stream ``(seed, j)``
    and values are summed with ``math.fsum`` after being gathered in index
    order, so the result does not depend on ``workers``.

    Returns ``(estimate, standard_error)``.
    """
    if m_reps < 2:
        raise ValidationError("m_reps must be at least 2")
    if n < 1:
        raise ValidationError("n must be positive")
    events = tuple(events)
    common_alphabet(events)
    masks = []
    for e in events:
        mask = np.zeros(model.alphabet.size, dtype=bool)
        mask[list(e.members)] = True
        masks.append(mask)
    if workers <= 1:
        values = _product_of_frequencies(model, n, masks, seed, 0, m_reps)
    else:
        bounds = np.linspace(0, m_reps, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_product_of_frequencies, *zip(*[
                (model, n, masks, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]))
            values = np.concatenate(list(parts))
    mean = math.fsum(values) / m_reps
    var = math.fsum((values - mean) ** 2) / (m_reps - 1)
    return mean, math.sqrt(var / m_reps)


class EmpiricalMeasureTransformer(TransformerMixin, BaseEstimator):
    """Map sampled sequences to their empirical measure on a partition.

    ``X`` has one sequence per row; ``transform`` returns the fraction of
    each row falling in each class, as floats. With ``powers`` set, each
    column ``i`` is raised to ``powers[i]`` and the row product is returned
    instead, i.e. one Monte-Carlo term of a mixed empirical moment.
    """

    def __init__(self, partition=((1,),), alphabet_size=2, powers=None):
        self.partition = partition
        self.alphabet_size = alphabet_size
        self.powers = powers

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.int64)
        check_partition([Event.of(c, self.alphabet_size) for c in self.partition])
        if X.min() < 0 or X.max() >= self.alphabet_size:
            raise ValidationError("X contains states outside the alphabet")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.int64)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"expected sequences of length {self.n_features_in_}")
        freqs = np.column_stack([np.isin(X, list(c)).mean(axis=1) for c in self.partition])
        if self.powers is None:
            return freqs
        return np.prod(freqs ** np.asarray(self.powers), axis=1, keepdims=True)
