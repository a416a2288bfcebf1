"""Household microdata ingestion and result serialization."""

from __future__ import annotations

import csv
import json
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError
from .estimate import ShortfallSample

# poverty lines of the 2014 EMC survey, CFA francs per person
POVERTY_LINE_ANNUAL = 153_530.0
POVERTY_LINE_DAILY = 421.0

FIELDS = ("id", "consumption", "region", "area", "weight")
UNITS = ("daily", "annual")


@dataclass(frozen=True)
class SchemaConfig:
    """Column names in the input file and the declared consumption unit."""

    id: str = "household_id"
    consumption: str = "consumption"
    region: str = "region"
    area: str = "area"
    weight: Optional[str] = "weight"
    unit: str = "daily"

    def __post_init__(self):
        if self.unit not in UNITS:
            raise DomainError(f"unit must be one of {UNITS}, got {self.unit!r}")

    @classmethod
    def from_json(cls, path) -> "SchemaConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))

    @property
    def default_poverty_line(self) -> float:
        return POVERTY_LINE_DAILY if self.unit == "daily" else POVERTY_LINE_ANNUAL


@dataclass(frozen=True)
class HouseholdRecord:
    household_id: str
    consumption: float
    region: str
    area: str
    weight: float = 1.0


@dataclass
class Reject:
    line: int
    reason: str
    row: dict


@dataclass
class LoadResult:
    records: list = field(default_factory=list)
    rejects: list = field(default_factory=list)


def load_csv(path, schema: SchemaConfig = SchemaConfig()) -> LoadResult:
    """Parse a household CSV; malformed rows are collected, not dropped silently."""
    out = LoadResult()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        required = [schema.id, schema.consumption, schema.region, schema.area]
        missing = [c for c in required if c not in header]
        if missing:
            raise DomainError(f"missing required columns: {missing}")
        has_weight = schema.weight is not None and schema.weight in header
        for row in reader:
            line = reader.line_num
            raw_c = (row.get(schema.consumption) or "").strip()
            if raw_c == "":
                out.rejects.append(Reject(line, "missing consumption", row))
                continue
            try:
                cons = float(raw_c)
            except ValueError:
                out.rejects.append(Reject(line, f"unparseable consumption {raw_c!r}", row))
                continue
            if not math.isfinite(cons) or cons < 0:
                out.rejects.append(Reject(line, f"negative or non-finite consumption {raw_c!r}", row))
                continue
            weight = 1.0
            if has_weight:
                raw_w = (row.get(schema.weight) or "").strip()
                if raw_w:
                    try:
                        weight = float(raw_w)
                    except ValueError:
                        out.rejects.append(Reject(line, f"unparseable weight {raw_w!r}", row))
                        continue
                    if not (math.isfinite(weight) and weight > 0):
                        out.rejects.append(Reject(line, f"nonpositive weight {raw_w!r}", row))
                        continue
            out.records.append(
                HouseholdRecord(
                    household_id=row[schema.id],
                    consumption=cons,
                    region=row[schema.region],
                    area=row[schema.area],
                    weight=weight,
                )
            )
    return out


ALL = "all"


def group_records(records: Iterable[HouseholdRecord], group_by: Optional[str] = None) -> dict:
    """Partition records by ``"region"`` or ``"area"``; ``None`` gives one group."""
    if group_by not in (None, "region", "area"):
        raise DomainError(f"cannot group by {group_by!r}")
    groups: dict = OrderedDict()
    for rec in records:
        key = ALL if group_by is None else getattr(rec, group_by)
        groups.setdefault(key, []).append(rec)
    return OrderedDict(sorted(groups.items()))


def shortfalls(records, x_star: float, group_by: Optional[str] = None) -> dict:
    """Short-fall sample per group; non-poor households are excluded.

    Groups without poor households map to an empty sample, which callers
    flag instead of failing.
    """
    if not x_star > 0:
        raise DomainError(f"x_star must be positive, got {x_star}")
    out = OrderedDict()
    for key, recs in group_records(records, group_by).items():
        cons = np.array([r.consumption for r in recs], dtype=float)
        w = np.array([r.weight for r in recs], dtype=float)
        poor = cons < x_star
        out[key] = ShortfallSample.from_shortfalls(
            x_star - cons[poor], x_star, label=str(key), weights=w[poor]
        )
    return out


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(doc) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip float repr, NaN as null."""
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def fmt(v) -> str:
    """17 significant digits, the CSV number format."""
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def write_csv(path_or_fh, header, rows):
    """Write rows of numbers (formatted with :func:`fmt`) or strings."""
    own = isinstance(path_or_fh, (str, Path))
    fh = open(path_or_fh, "w", newline="", encoding="utf-8") if own else path_or_fh
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    finally:
        if own:
            fh.close()
