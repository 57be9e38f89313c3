"""JSON and CSV formats for models, events and moment sequences."""

from __future__ import annotations

import csv
import io
import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from finetti.exceptions import ValidationError
from finetti.measures import Alphabet, Event, as_fraction, format_fraction
from finetti.models import ExchangeableModel, FiniteMixture, JointTable, PolyaUrn

_EVENT_RE = re.compile(r"^\[\s*(\d+(\s*,\s*\d+)*)?\s*\]$")


def _sequence_key(states: Sequence[int], alphabet_size: int) -> str:
    if alphabet_size <= 10:
        return "".join(str(x) for x in states)
    return ",".join(str(x) for x in states)


def _parse_sequence_key(key: str, alphabet_size: int) -> tuple[int, ...]:
    if "," in key or alphabet_size > 10:
        return tuple(int(x) for x in key.split(","))
    if not key.isdigit():
        raise ValidationError(f"bad state-sequence key {key!r}")
    return tuple(int(c) for c in key)


def model_to_dict(model: ExchangeableModel) -> dict:
    if isinstance(model, FiniteMixture):
        return {"type": "mixture",
                "alphabet_size": model.alphabet.size,
                "components": [{"weight": format_fraction(w),
                                "probs": [format_fraction(p) for p in d.probs]}
                               for w, d in zip(model.weights, model.dists)]}
    if isinstance(model, PolyaUrn):
        return {"type": "polya", "counts": list(model.counts)}
    if isinstance(model, JointTable):
        return {"type": "joint_table",
                "alphabet_size": model.alphabet_size,
                "horizon": model.horizon,
                "probs": {_sequence_key(k, model.alphabet_size): format_fraction(v)
                          for k, v in sorted(model.probs.items())}}
    raise ValidationError(f"unknown model type {type(model).__name__}")


def model_from_dict(data: dict) -> ExchangeableModel:
    try:
        kind = data["type"]
        if kind == "mixture":
            components = [(c["weight"], c["probs"]) for c in data["components"]]
            model = FiniteMixture.from_components(components)
            if "alphabet_size" in data and data["alphabet_size"] != model.alphabet.size:
                raise ValidationError("alphabet_size does not match component length")
            return model
        if kind == "polya":
            return PolyaUrn(tuple(data["counts"]))
        if kind == "joint_table":
            s = data["alphabet_size"]
            probs = {_parse_sequence_key(k, s): v for k, v in data["probs"].items()}
            return JointTable(s, data["horizon"], probs)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed model description: {exc}") from exc
    raise ValidationError(f"unknown model type {data.get('type')!r}")


def load_model(path) -> ExchangeableModel:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(data)


def dump_model(model: ExchangeableModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def parse_events(text: str, alphabet: Alphabet | int) -> list[Event]:
    """Parse ``"[0,1];[1]"`` into events."""
    if isinstance(alphabet, int):
        alphabet = Alphabet(alphabet)
    events = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not _EVENT_RE.match(chunk):
            raise ValidationError(f"bad event syntax {chunk!r}; expected e.g. [0,1]")
        events.append(Event(tuple(json.loads(chunk)), alphabet))
    return events


def format_events(events: Sequence[Event]) -> str:
    return ";".join("[" + ",".join(map(str, e.members)) + "]" for e in events)


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from exc


def parse_rational_list(text: str) -> list[Fraction]:
    return [as_fraction(x) for x in text.split(",") if x.strip()]


def read_moments_csv(source) -> list[Fraction]:
    """Read an ``order,value`` CSV into ``m_0 .. m_D`` (orders must be 0..D)."""
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"order", "value"}:
        raise ValidationError("moments CSV needs the header 'order,value'")
    table = {}
    for row in rows:
        table[int(row["order"])] = as_fraction(row["value"])
    if sorted(table) != list(range(len(table))):
        raise ValidationError("moment orders must be 0, 1, .., D without gaps")
    return [table[k] for k in range(len(table))]


def write_moments_csv(moments: Sequence[Fraction]) -> str:
    lines = ["order,value"]
    lines += [f"{k},{format_fraction(as_fraction(m))}" for k, m in enumerate(moments)]
    return "\n".join(lines) + "\n"
