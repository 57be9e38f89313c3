"""Laws of the empirical measure and their convergence to the mixing measure.

The empirical measure of ``X_1 .. X_n`` restricted to a partition is a
random point ``t / n`` of the simplex. Its law is finitely supported and is
computed exactly from the count distribution.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from finetti.exceptions import ValidationError
from finetti.finite import df_bound
from finetti.measures import Event, as_fraction, format_fraction
from finetti.models import ExchangeableModel, count_distribution, require_exchangeable
from finetti.moments import moments_from_model, multi_indices

MAX_POLY_DEGREE = 8
MAX_DISCREPANCY_DEGREE = 6


@dataclass(frozen=True)
class PushforwardEnsemble:
    """Law of ``(mu_n(C_1), .., mu_n(C_m))``: support points and their masses."""

    n: int
    partition: tuple[Event, ...]
    support: tuple[tuple[tuple[Fraction, ...], Fraction], ...]

    def __post_init__(self):
        if sum(mass for _, mass in self.support) != 1:
            raise ValidationError("ensemble masses must sum to 1")

    def __len__(self):
        return len(self.support)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "partition": [list(c.members) for c in self.partition],
            "support": [{"point": [format_fraction(x) for x in point],
                         "mass": format_fraction(mass),
                         "point_f": [float(x) for x in point],
                         "mass_f": float(mass)}
                        for point, mass in self.support],
        }


def pushforward_ensemble(model: ExchangeableModel, n: int,
                         partition: Sequence[Event]) -> PushforwardEnsemble:
    if not isinstance(n, int) or n < 1:
        raise ValidationError("n must be a positive integer")
    partition = tuple(partition)
    law = count_distribution(model, n, partition)
    support = tuple((tuple(Fraction(t, n) for t in counts), mass)
                    for counts, mass in law.items())
    return PushforwardEnsemble(n, partition, support)


def ensemble_poly_expectation(ensemble: PushforwardEnsemble, index: Sequence[int]) -> Fraction:
    """``E[prod_i mu_n(C_i)**k_i]`` under the ensemble."""
    index = tuple(index)
    if len(index) != len(ensemble.partition):
        raise ValidationError("index length does not match the partition")
    if any(k < 0 for k in index) or sum(index) > MAX_POLY_DEGREE:
        raise ValidationError(f"index must be nonnegative with total degree <= {MAX_POLY_DEGREE}")
    total = Fraction(0)
    for point, mass in ensemble.support:
        term = mass
        for x, k in zip(point, index):
            term *= x**k
        total += term
    return total


def moment_discrepancy(ensemble: PushforwardEnsemble, model: ExchangeableModel,
                       max_degree: int) -> Fraction:
    """Largest gap between ensemble and mixing-measure moments of degree ``<= max_degree``."""
    if not 0 <= max_degree <= MAX_DISCREPANCY_DEGREE:
        raise ValidationError(f"max_degree must be in [0, {MAX_DISCREPANCY_DEGREE}]")
    require_exchangeable(model)
    table = moments_from_model(model, ensemble.partition, max_degree)
    return max(abs(ensemble_poly_expectation(ensemble, k) - table.entries[k])
               for k in multi_indices(len(ensemble.partition), max_degree))


@dataclass(frozen=True)
class SweepRow:
    n: int
    discrepancy: Fraction
    bound: Fraction

    @property
    def ratio(self) -> Fraction:
        return self.discrepancy * self.n


def convergence_sweep(model: ExchangeableModel, partition: Sequence[Event],
                      n_list: Sequence[int], max_degree: int) -> list[SweepRow]:
    """Moment discrepancy of the ensemble for each ``n``, sorted by ``n``."""
    rows = []
    for n in sorted(set(n_list)):
        disc = moment_discrepancy(pushforward_ensemble(model, n, partition), model, max_degree)
        rows.append(SweepRow(n, disc, df_bound(max_degree, n)))
    return rows


def sweep_rows_dicts(rows: Sequence[SweepRow]) -> list[dict]:
    return [{"n": row.n,
             "discrepancy": format_fraction(row.discrepancy),
             "bound": format_fraction(row.bound),
             "ratio": format_fraction(row.ratio),
             "discrepancy_f": float(row.discrepancy),
             "bound_f": float(row.bound)} for row in rows]


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    fields = ["n", "discrepancy", "bound", "ratio", "discrepancy_f", "bound_f"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(sweep_rows_dicts(rows))
    return buf.getvalue()


def concentration_profile(ensemble: PushforwardEnsemble, epsilon) -> int:
    """Fewest support points carrying at least ``1 - epsilon`` of the mass.

    Points are taken greedily by decreasing mass, ties by lexicographic order.
    """
    epsilon = as_fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon must lie strictly between 0 and 1")
    ranked = sorted(ensemble.support, key=lambda item: (-item[1], item[0]))
    acc = Fraction(0)
    for count, (_, mass) in enumerate(ranked, start=1):
        acc += mass
        if acc >= 1 - epsilon:
            return count
    return len(ranked)


def max_ratio(rows: Sequence[SweepRow]) -> Fraction:
    return max((row.ratio for row in rows), default=Fraction(0))

