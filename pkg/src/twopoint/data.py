"""Re-identification records."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import DataError
from .geometry import SurveyWindows, Zone, classify_many


@dataclass(frozen=True)
class ReidRecord:
    x: float  # upstream arrival, decimal hours
    t: float  # journey time, hours


@dataclass(frozen=True, eq=False)
class Dataset:
    """Re-identified vehicles; every record must lie in the observable zone."""

    x: np.ndarray
    t: np.ndarray
    windows: SurveyWindows

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=float).reshape(-1)
        t = np.ascontiguousarray(self.t, dtype=float).reshape(-1)
        if x.shape != t.shape:
            raise DataError(f"x and t lengths differ ({x.size} vs {t.size})")
        zones = classify_many(self.windows, x, t)
        bad = np.flatnonzero(zones != Zone.ZONE2)
        if bad.size:
            shown = ", ".join(str(i) for i in bad[:20])
            more = f" (+{bad.size - 20} more)" if bad.size > 20 else ""
            raise DataError(f"{bad.size} record(s) outside the observable zone at indices {shown}{more}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_records(cls, records: Iterable[ReidRecord], windows: SurveyWindows) -> "Dataset":
        recs = list(records)
        return cls(np.array([r.x for r in recs]), np.array([r.t for r in recs]), windows)

    @classmethod
    def empty(cls, windows: SurveyWindows) -> "Dataset":
        return cls(np.empty(0), np.empty(0), windows)

    @property
    def n(self) -> int:
        return int(self.t.size)

    def __len__(self):
        return self.n

    def __iter__(self) -> Iterator[ReidRecord]:
        for x, t in zip(self.x, self.t):
            yield ReidRecord(float(x), float(t))

    def take(self, idx) -> "Dataset":
        return Dataset(self.x[idx], self.t[idx], self.windows)

    def naive_mean(self) -> Optional[float]:
        """Plain average journey time, ignoring truncation."""
        return float(self.t.mean()) if self.n else None
