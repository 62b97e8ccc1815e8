"""Transaction parsing and ownership-spell reconstruction.

A parcel's sale history d1 < d2 < ... < dn yields closed spells [d1,d2) ...
[d(n-1),dn) and one right-censored spell [dn, observation_end). Each closed
spell carries the deed kind, price and seller-type of the sale that closed
it, which is what the genuine-relocation filter inspects.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from datetime import date, datetime

import numpy as np

NEIGHBORHOODS = ("A", "B", "C", "D", "E", "F", "G", "H")
DEED_KINDS = ("warranty", "quitclaim", "trustee", "other")
EARLIEST_SALE = date(1984, 1, 1)
DEFAULT_OBSERVATION_END = date(2025, 1, 31)
DEFAULT_COVID_CUTOFF = date(2020, 3, 11)

COLUMNS = ("parcel_id", "neighborhood", "sale_date", "price", "deed_kind",
           "seller_is_builder", "appraisal", "sqft")


@dataclass(frozen=True)
class TransactionRecord:
    parcel_id: str
    neighborhood: str
    sale_date: date
    price: float
    deed_kind: str
    seller_is_builder: bool
    appraisal: float | None = None
    sqft: float | None = None


@dataclass(frozen=True)
class OwnershipSpell:
    parcel_id: str
    neighborhood: str
    entry_date: date
    exit_date: date | None
    duration_days: int
    censored: bool
    genuine: bool = True
    exit_price: float | None = None
    exit_deed_kind: str | None = None
    exit_seller_is_builder: bool | None = None
    duplicate_sale: bool = False


@dataclass(frozen=True)
class PeriodSegmentation:
    cutoff_date: date = DEFAULT_COVID_CUTOFF
    observation_end: date = DEFAULT_OBSERVATION_END

    def __post_init__(self):
        if self.cutoff_date >= self.observation_end:
            raise ValueError("cutoff_date must precede observation_end")


@dataclass(frozen=True)
class GenuineFilterPolicy:
    """A closed spell is not a genuine relocation if the closing transfer was
    free, a legal-paper deed, or a short builder flip."""

    builder_max_days: int = 548
    nongenuine_deeds: tuple[str, ...] = ("quitclaim", "trustee")
    zero_price_nongenuine: bool = True


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass
class IngestResult:
    records: list[TransactionRecord]
    errors: list[RowError] = field(default_factory=list)


def _parse_bool(raw: str) -> bool:
    val = raw.strip().lower()
    if val in ("true", "1", "yes", "y"):
        return True
    if val in ("false", "0", "no", "n", ""):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_optional_float(raw: str, name: str) -> float | None:
    raw = raw.strip()
    if raw == "":
        return None
    val = float(raw)
    if val <= 0 and name == "sqft":
        raise ValueError("sqft must be positive")
    if val < 0:
        raise ValueError(f"{name} must be non-negative")
    return val


def parse_transactions(path, observation_end: date = DEFAULT_OBSERVATION_END,
                       adapter: dict | None = None) -> IngestResult:
    """Read the transaction table, collecting per-row diagnostics.

    ``adapter`` optionally holds ``{"columns": {native: canonical},
    "deed_kind_values": {native: canonical}}`` so a foreign export can be
    consumed without code changes. An unreadable file raises.
    """
    colmap = (adapter or {}).get("columns", {})
    deedmap = {k.lower(): v for k, v in (adapter or {}).get("deed_kind_values", {}).items()}
    records: list[TransactionRecord] = []
    errors: list[RowError] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file, expected a header row")
        fields = [colmap.get(name, name) for name in reader.fieldnames]
        missing = [c for c in COLUMNS if c not in fields]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for line_no, raw in enumerate(reader, start=2):
            row = {colmap.get(k, k): v for k, v in raw.items() if k is not None}
            try:
                sale_date = datetime.strptime(row["sale_date"].strip(), "%Y-%m-%d").date()
                if not EARLIEST_SALE <= sale_date <= observation_end:
                    raise ValueError(f"sale_date {sale_date} outside "
                                     f"[{EARLIEST_SALE}, {observation_end}]")
                nbhd = row["neighborhood"].strip()
                if nbhd not in NEIGHBORHOODS:
                    raise ValueError(f"unknown neighborhood {nbhd!r}")
                deed = row["deed_kind"].strip().lower()
                deed = deedmap.get(deed, deed)
                if deed not in DEED_KINDS:
                    raise ValueError(f"unknown deed_kind {deed!r}")
                price = float(row["price"])
                if price < 0:
                    raise ValueError("price must be non-negative")
                records.append(TransactionRecord(
                    parcel_id=row["parcel_id"].strip(),
                    neighborhood=nbhd,
                    sale_date=sale_date,
                    price=price,
                    deed_kind=deed,
                    seller_is_builder=_parse_bool(row["seller_is_builder"]),
                    appraisal=_parse_optional_float(row.get("appraisal", ""), "appraisal"),
                    sqft=_parse_optional_float(row.get("sqft", ""), "sqft"),
                ))
            except (KeyError, ValueError, TypeError) as exc:
                errors.append(RowError(line_no, str(exc)))
    return IngestResult(records=records, errors=errors)


def build_spells(records: list[TransactionRecord],
                 observation_end: date = DEFAULT_OBSERVATION_END) -> list[OwnershipSpell]:
    """Reconstruct per-parcel ownership spells, censoring the open one.

    Two sales of a parcel on the same day collapse into a single flagged
    1-day spell instead of being dropped.
    """
    by_parcel: dict[str, list[TransactionRecord]] = {}
    for rec in records:
        by_parcel.setdefault(rec.parcel_id, []).append(rec)
    spells: list[OwnershipSpell] = []
    for parcel_id, txns in by_parcel.items():
        txns.sort(key=lambda r: r.sale_date)
        for opener, closer in zip(txns, txns[1:]):
            days = (closer.sale_date - opener.sale_date).days
            duplicate = days == 0
            spells.append(OwnershipSpell(
                parcel_id=parcel_id,
                neighborhood=opener.neighborhood,
                entry_date=opener.sale_date,
                exit_date=closer.sale_date,
                duration_days=max(days, 1),
                censored=False,
                exit_price=closer.price,
                exit_deed_kind=closer.deed_kind,
                exit_seller_is_builder=closer.seller_is_builder,
                duplicate_sale=duplicate,
            ))
        last = txns[-1]
        spells.append(OwnershipSpell(
            parcel_id=parcel_id,
            neighborhood=last.neighborhood,
            entry_date=last.sale_date,
            exit_date=None,
            duration_days=max((observation_end - last.sale_date).days, 1),
            censored=True,
        ))
    return spells


def filter_genuine(spells: list[OwnershipSpell],
                   policy: GenuineFilterPolicy = GenuineFilterPolicy()) -> list[OwnershipSpell]:
    """Set genuine flags. Censored spells are always retained; idempotent."""
    out = []
    for sp in spells:
        if sp.censored:
            out.append(replace(sp, genuine=True))
            continue
        nongenuine = (
            (policy.zero_price_nongenuine and (sp.exit_price or 0.0) == 0.0)
            or sp.exit_deed_kind in policy.nongenuine_deeds
            or (bool(sp.exit_seller_is_builder)
                and sp.duration_days <= policy.builder_max_days)
        )
        out.append(replace(sp, genuine=not nongenuine))
    return out


@dataclass(frozen=True)
class PeriodSplit:
    pre: list[OwnershipSpell]
    post: list[OwnershipSpell]


def segment_periods(spells: list[OwnershipSpell],
                    seg: PeriodSegmentation) -> PeriodSplit:
    """Two period views of one spell set.

    Pre: spells entered before the cutoff, re-censored there if still open.
    Post: spells open at the cutoff (kept at full length, censored at
    observation end) plus spells entered on/after it. A spell straddling the
    cutoff appears in both views.
    """
    if spells:
        entries = [sp.entry_date for sp in spells]
        if not (min(entries) < seg.cutoff_date < seg.observation_end):
            raise ValueError(f"cutoff {seg.cutoff_date} outside the data range")
    pre: list[OwnershipSpell] = []
    post: list[OwnershipSpell] = []
    for sp in spells:
        if sp.entry_date < seg.cutoff_date:
            if not sp.censored and sp.exit_date <= seg.cutoff_date:
                pre.append(sp)
            else:
                days = (seg.cutoff_date - sp.entry_date).days
                pre.append(replace(sp, exit_date=None, censored=True,
                                   duration_days=max(days, 1),
                                   exit_price=None, exit_deed_kind=None,
                                   exit_seller_is_builder=None))
                post.append(sp)
        else:
            post.append(sp)
    return PeriodSplit(pre=pre, post=post)


# ---------------------------------------------------------------------------
# array views and serialization


def spell_arrays(spells, genuine_only: bool = True):
    """(duration_days, event_observed) arrays for the survival estimators."""
    chosen = [sp for sp in spells if sp.genuine or not genuine_only]
    dur = np.array([sp.duration_days for sp in chosen], dtype=float)
    evt = np.array([not sp.censored for sp in chosen], dtype=bool)
    return dur, evt


def spells_by_neighborhood(spells) -> dict[str, list[OwnershipSpell]]:
    groups: dict[str, list[OwnershipSpell]] = {}
    for sp in spells:
        groups.setdefault(sp.neighborhood, []).append(sp)
    return groups


def write_spell_table(spells, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parcel_id", "neighborhood", "entry_date", "exit_date",
                         "duration_days", "censored", "genuine", "exit_price",
                         "exit_deed_kind", "exit_seller_is_builder",
                         "duplicate_sale"])
        for sp in spells:
            writer.writerow([
                sp.parcel_id, sp.neighborhood, sp.entry_date.isoformat(),
                sp.exit_date.isoformat() if sp.exit_date else "",
                sp.duration_days, str(sp.censored).lower(),
                str(sp.genuine).lower(),
                "" if sp.exit_price is None else sp.exit_price,
                sp.exit_deed_kind or "",
                "" if sp.exit_seller_is_builder is None
                else str(sp.exit_seller_is_builder).lower(),
                str(sp.duplicate_sale).lower(),
            ])


def ingest_summary(result: IngestResult, spells) -> dict:
    closed = [sp for sp in spells if not sp.censored]
    return {
        "records": len(result.records),
        "rejected_rows": len(result.errors),
        "reject_lines": [{"line": e.line, "message": e.message}
                         for e in result.errors[:200]],
        "parcels": len({sp.parcel_id for sp in spells}),
        "spells": len(spells),
        "closed_spells": len(closed),
        "censored_spells": len(spells) - len(closed),
        "genuine_closed_spells": sum(1 for sp in closed if sp.genuine),
        "duplicate_sale_spells": sum(1 for sp in spells if sp.duplicate_sale),
    }


def write_ingest_summary(result: IngestResult, spells, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ingest_summary(result, spells), fh, indent=2, sort_keys=True)
        fh.write("\n")
