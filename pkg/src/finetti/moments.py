"""Mixed moments of the mixing measure and the Hausdorff moment condition."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from finetti.exceptions import ValidationError
from finetti.finite import pattern_events
from finetti.measures import Event, as_fraction, check_partition
from finetti.models import ExchangeableModel, compositions, require_exchangeable

MAX_ORDER = 8


def multi_indices(n: int, max_order: int) -> list[tuple[int, ...]]:
    """Multi-indices of length ``n`` with total degree at most ``max_order``, by degree."""
    out = []
    for degree in range(max_order + 1):
        out.extend(sorted(compositions(degree, n)))
    return out


@dataclass(frozen=True)
class MomentTable:
    """``entries[k] = integral of prod_i mu(C_i)**k_i`` against the mixing measure."""

    partition: tuple[Event, ...]
    entries: dict[tuple[int, ...], Fraction]
    max_order: int

    __hash__ = None

    def __getitem__(self, index) -> Fraction:
        if isinstance(index, int):
            index = (index,)
        return self.entries[tuple(index)]

    def one_dimensional(self) -> list[Fraction]:
        """``m_0 .. m_D`` for a single-class partition."""
        if len(self.partition) != 1:
            raise ValidationError("table has more than one class")
        return [self.entries[(d,)] for d in range(self.max_order + 1)]


def moments_from_model(model: ExchangeableModel, partition: Sequence[Event],
                       max_order: int) -> MomentTable:
    """Exact mixed moments, read off as joint laws of repeated-event patterns."""
    if not 0 <= max_order <= MAX_ORDER:
        raise ValidationError(f"max_order must be in [0, {MAX_ORDER}]")
    partition = tuple(partition)
    check_partition(partition)
    require_exchangeable(model)
    entries = {index: model.joint_event_prob(pattern_events(partition, index))
               for index in multi_indices(len(partition), max_order)}
    return MomentTable(partition, entries, max_order)


def check_complete_monotonicity(moments: Sequence, tol: float = 0.0):
    """Check ``(-1)**j * Delta**j m_k >= 0`` for all ``j + k <= D``.

    ``Delta`` is the forward difference. Rational input is checked exactly;
    ``tol`` only matters for float input. Returns ``(ok, (j, k))`` with the
    first violation in order of increasing ``j`` then ``k``, or ``(True, None)``.
    """
    if len(moments) == 0:
        raise ValidationError("empty moment sequence")
    if all(not isinstance(m, float) for m in moments):
        row = [as_fraction(m) for m in moments]
    else:
        row = [float(m) for m in moments]
    if row[0] != 1:
        raise ValidationError("m_0 must equal 1")
    sign = 1
    for j in range(len(row)):
        for k, value in enumerate(row):
            if sign * value < -tol:
                return False, (j, k)
        row = [b - a for a, b in zip(row, row[1:])]
        sign = -sign
    return True, None
