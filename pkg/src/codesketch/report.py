"""Bound reports: measured quantities next to the bounds they should obey."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

__all__ = ["SLACK", "BoundEntry", "BoundReport", "dumps"]

SLACK = 1e-12


def _clean(x):
    """JSON-safe copy: non-finite floats become None, tuples become lists."""
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):  # numpy scalar
        return _clean(x.item())
    return x


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, shortest float repr)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass(frozen=True)
class BoundEntry:
    """One check ``measured <= bound``.

    ``applicable = False`` marks a check whose precondition failed (for
    instance a zero smallest singular value); such entries carry
    ``satisfied = None`` and never count as failures.
    """

    name: str
    measured: float
    bound: float
    satisfied: bool | None
    context: dict = field(default_factory=dict)
    applicable: bool = True
    note: str = ""

    @classmethod
    def check(cls, name, measured, bound, context=None, slack=SLACK, note=""):
        measured, bound = float(measured), float(bound)
        ok = bool(measured <= bound + slack)
        return cls(name, measured, bound, ok, dict(context or {}), True, note)

    @classmethod
    def inapplicable(cls, name, context=None, note=""):
        return cls(name, math.nan, math.nan, None, dict(context or {}), False, note)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": self.measured,
            "bound": self.bound,
            "satisfied": self.satisfied,
            "applicable": self.applicable,
            "context": self.context,
            "note": self.note,
        }


@dataclass
class BoundReport:
    """Append-only list of :class:`BoundEntry`."""

    entries: list[BoundEntry] = field(default_factory=list)

    def add(self, entry: BoundEntry) -> BoundEntry:
        self.entries.append(entry)
        return entry

    def extend(self, entries) -> None:
        for e in entries:
            self.add(e)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def get(self, name: str) -> BoundEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def named(self, prefix: str) -> list[BoundEntry]:
        return [e for e in self.entries if e.name.startswith(prefix)]

    @property
    def all_satisfied(self) -> bool:
        return all(e.satisfied is not False for e in self.entries)

    def frequency(self, name: str) -> float:
        """Fraction of applicable entries called ``name`` that are satisfied."""
        hits = [e.satisfied for e in self.entries if e.name == name and e.applicable]
        return sum(hits) / len(hits) if hits else math.nan

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]

    def to_json(self) -> str:
        return dumps({"entries": self.to_list()})

    def to_csv(self) -> str:
        ctx_keys = sorted({k for e in self.entries for k in e.context})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "measured", "bound", "satisfied", "applicable", *ctx_keys])
        for e in self.entries:
            w.writerow([
                e.name, repr(e.measured), repr(e.bound),
                "" if e.satisfied is None else int(e.satisfied), int(e.applicable),
                *(e.context.get(k, "") for k in ctx_keys),
            ])
        return buf.getvalue()
