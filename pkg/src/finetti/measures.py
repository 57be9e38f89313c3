"""Alphabets, events and probability vectors over a finite state space.

Every probability handled here is an exact :class:`fractions.Fraction`.
Floats only enter in the Monte-Carlo and recovery modules.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from finetti.exceptions import ValidationError

MAX_ALPHABET = 16
MAX_EVENTS = 12


def as_fraction(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Accepts ints, Fractions, ``"num/den"`` strings and decimal strings
    (``"0.25"`` becomes ``1/4``). Floats are converted through their shortest
    repr so that ``0.1`` means one tenth rather than its binary expansion.
    """
    if isinstance(value, bool):
        raise ValidationError(f"not a number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse rational {value!r}") from exc
    raise ValidationError(f"cannot interpret {value!r} as a rational")


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Alphabet:
    """States ``0 .. size-1``."""

    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or isinstance(self.size, bool):
            raise ValidationError("alphabet size must be an integer")
        if not 1 <= self.size <= MAX_ALPHABET:
            raise ValidationError(
                f"alphabet size must be in [1, {MAX_ALPHABET}], got {self.size}")

    @property
    def states(self) -> range:
        return range(self.size)

    def full(self) -> Event:
        return Event(tuple(self.states), self)

    def empty(self) -> Event:
        return Event((), self)


@dataclass(frozen=True)
class Event:
    """A subset of the alphabet, stored sorted and deduplicated."""

    members: tuple[int, ...]
    alphabet: Alphabet

    def __post_init__(self):
        canon = tuple(sorted(set(self.members)))
        for x in canon:
            if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x < self.alphabet.size:
                raise ValidationError(
                    f"state {x!r} outside alphabet of size {self.alphabet.size}")
        object.__setattr__(self, "members", canon)

    @classmethod
    def of(cls, members: Iterable[int], alphabet: Alphabet | int) -> Event:
        if isinstance(alphabet, int):
            alphabet = Alphabet(alphabet)
        return cls(tuple(members), alphabet)

    def __contains__(self, state: int) -> bool:
        return state in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def _check(self, other: Event) -> None:
        if other.alphabet != self.alphabet:
            raise ValidationError("events live on different alphabets")

    def __and__(self, other: Event) -> Event:
        self._check(other)
        return Event(tuple(set(self.members) & set(other.members)), self.alphabet)

    def __or__(self, other: Event) -> Event:
        self._check(other)
        return Event(self.members + other.members, self.alphabet)

    def complement(self) -> Event:
        return Event(tuple(x for x in self.alphabet.states if x not in self.members),
                     self.alphabet)

    def isdisjoint(self, other: Event) -> bool:
        self._check(other)
        return set(self.members).isdisjoint(other.members)

    @property
    def is_empty(self) -> bool:
        return not self.members

    def to_json(self) -> str:
        return json.dumps(list(self.members), separators=(",", ":"))

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"


@dataclass(frozen=True)
class Dist:
    """An exact probability vector over an alphabet."""

    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(as_fraction(p) for p in self.probs)
        Alphabet(len(probs))
        if any(p < 0 for p in probs):
            raise ValidationError("probabilities must be nonnegative")
        if sum(probs) != 1:
            raise ValidationError(f"probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "probs", probs)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(len(self.probs))

    def __getitem__(self, state: int) -> Fraction:
        return self.probs[state]

    def prob(self, event: Event) -> Fraction:
        return dist_prob(self, event)


def dist_prob(d: Dist, event: Event) -> Fraction:
    """Mass that ``d`` assigns to ``event``."""
    if event.alphabet != d.alphabet:
        raise ValidationError("event and distribution use different alphabets")
    return sum((d.probs[x] for x in event.members), Fraction(0))


def common_alphabet(events: Sequence[Event]) -> Alphabet:
    if not events:
        raise ValidationError("at least one event is required")
    alphabet = events[0].alphabet
    if any(e.alphabet != alphabet for e in events):
        raise ValidationError("events live on different alphabets")
    return alphabet


def _check_event_count(events: Sequence[Event]) -> Alphabet:
    alphabet = common_alphabet(events)
    if len(events) > MAX_EVENTS:
        raise ValidationError(f"at most {MAX_EVENTS} events are supported, got {len(events)}")
    return alphabet


def atom_labels(k: int) -> list[tuple[int, ...]]:
    """Membership patterns in the order used by :func:`atoms_of`."""
    return list(itertools.product((1, 0), repeat=k))


def atoms_of(events: Sequence[Event]) -> list[Event]:
    """The ``2**k`` atoms generated by ``k`` events.

    Atom ``j`` is the intersection of ``B_i`` (where ``a_i = 1``) and of the
    complement of ``B_i`` (where ``a_i = 0``), for ``a = atom_labels(k)[j]``.
    Empty atoms are kept so the list can be indexed by every pattern.
    """
    alphabet = _check_event_count(events)
    sets = [set(e.members) for e in events]
    atoms = []
    for label in atom_labels(len(events)):
        members = [x for x in alphabet.states
                   if all((x in s) == bool(a) for s, a in zip(sets, label))]
        atoms.append(Event(tuple(members), alphabet))
    return atoms


def disjointify_event_tuple(events: Sequence[Event]) -> list[tuple[Event, ...]]:
    """Split ``(B_1, .., B_k)`` into disjointified tuples of atoms.

    Entry ``i`` of each returned tuple is a nonempty atom contained in
    ``B_i``; the joint event ``{X_1 in B_1, .., X_k in B_k}`` is the disjoint
    union of the joint events of the returned tuples.
    """
    atoms = atoms_of(events)
    labels = atom_labels(len(events))
    choices = [[atom for atom, a in zip(atoms, labels) if a[i] and not atom.is_empty]
               for i in range(len(events))]
    return list(itertools.product(*choices))


def is_disjointified(events: Sequence[Event]) -> bool:
    """True when any two entries are either disjoint or equal."""
    return all(a == b or a.isdisjoint(b) for a, b in itertools.combinations(events, 2))


def check_partition(partition: Sequence[Event]) -> Alphabet:
    """Validate a list of pairwise disjoint events and return their alphabet."""
    alphabet = common_alphabet(partition)
    for a, b in itertools.combinations(partition, 2):
        if not a.isdisjoint(b):
            raise ValidationError(f"partition classes {a!r} and {b!r} overlap")
    return alphabet
