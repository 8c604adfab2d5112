"""Second-resolution timestamps, closed intervals, and interval-relation predicates.

The seven binary predicates implement their constraint expressions literally,
so they are not mutually exclusive (`equal` also satisfies `starts` and
`finishes`).  `classify` layers a precedence order on top to assign exactly
one relation class per ordered pair, which is what correlation scoring needs.
All functions here are pure and operate on immutable values.
"""
from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError

TIME_FORMAT = "%Y-%m-%dT%H:%M:%S"
_EPOCH = _dt.datetime(1970, 1, 1, tzinfo=_dt.timezone.utc)


@dataclass(frozen=True, order=True)
class Timestamp:
    """UTC wall-clock instant with whole-second resolution."""

    seconds: int

    @classmethod
    def parse(cls, text: str) -> "Timestamp":
        """Parse `YYYY-MM-DDThh:mm:ss` (assumed UTC). Raises ValueError on bad input."""
        moment = _dt.datetime.strptime(text, TIME_FORMAT).replace(tzinfo=_dt.timezone.utc)
        return cls(int((moment - _EPOCH).total_seconds()))

    def isoformat(self) -> str:
        return (_EPOCH + _dt.timedelta(seconds=self.seconds)).strftime(TIME_FORMAT)

    def __sub__(self, other: "Timestamp") -> int:
        return self.seconds - other.seconds

    def __str__(self) -> str:
        return self.isoformat()


@dataclass(frozen=True)
class Interval:
    """Closed time interval; instantaneous intervals (start == end) are legal."""

    t_start: Timestamp
    t_end: Timestamp

    def __post_init__(self) -> None:
        if self.t_start > self.t_end:
            raise ValidationError(
                f"interval start {self.t_start} is after its end {self.t_end}"
            )

    @classmethod
    def instant(cls, at: Timestamp) -> "Interval":
        return cls(at, at)

    @classmethod
    def parse(cls, start_text: str, end_text: str) -> "Interval":
        return cls(Timestamp.parse(start_text), Timestamp.parse(end_text))

    def __str__(self) -> str:
        return f"[{self.t_start}, {self.t_end}]"


class AllenClass(Enum):
    """Mutually exclusive relation class assigned by `classify`."""

    BEFORE = "before"
    EQUAL = "equal"
    MEETS = "meets"
    OVERLAPS = "overlaps"
    DURING = "during"
    STARTS = "starts"
    FINISHES = "finishes"
    AFTER = "after"
    INCOMPARABLE = "incomparable"


def before(x: Interval, y: Interval) -> int:
    return int(x.t_end < y.t_start)


def equal(x: Interval, y: Interval) -> int:
    return int(x.t_start == y.t_start and x.t_end == y.t_end)


def meets(x: Interval, y: Interval) -> int:
    return int(x.t_end == y.t_start)


def overlaps(x: Interval, y: Interval) -> int:
    return int(x.t_start < y.t_start and x.t_end > y.t_start)


def during(x: Interval, y: Interval) -> int:
    return int(x.t_start > y.t_start and x.t_end < y.t_end)


def starts(x: Interval, y: Interval) -> int:
    return int(x.t_start == y.t_start)


def finishes(x: Interval, y: Interval) -> int:
    return int(x.t_end == y.t_end)


def classify(x: Interval, y: Interval) -> AllenClass:
    """Assign exactly one relation class to the ordered pair (x, y).

    Precedence resolves the overlap between the literal predicates:
    Equal > Starts > Finishes > Meets > Overlaps > During > Before;
    the inverse of Before is After; anything else is Incomparable.
    """
    if equal(x, y):
        return AllenClass.EQUAL
    if starts(x, y):
        return AllenClass.STARTS
    if finishes(x, y):
        return AllenClass.FINISHES
    if meets(x, y):
        return AllenClass.MEETS
    if overlaps(x, y):
        return AllenClass.OVERLAPS
    if during(x, y):
        return AllenClass.DURING
    if before(x, y):
        return AllenClass.BEFORE
    if before(y, x):
        return AllenClass.AFTER
    return AllenClass.INCOMPARABLE


def before_decay(e: Interval, x: Interval) -> float:
    """Closeness score in (0, 1] for an interval e strictly preceding x.

    1 / (1 + gap) where gap is the whole-second distance between e's end and
    x's start; the +1 keeps the score at most 1 for arbitrarily small gaps.
    """
    if not before(e, x):
        raise ValidationError(
            f"before_decay requires the first interval {e} to end strictly "
            f"before the second {x} starts"
        )
    gap = x.t_start - e.t_end
    return 1.0 / (1 + gap)
