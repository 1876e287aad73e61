"""Cell-level diffing between snapshots and routine/exceptional triage.

Value equality is exact bit equality of the canonical encoding; formula
equality is trimmed-text equality. Tolerances belong to alert rules, not
to change detection.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum

from .model import Cell, CellAddress, CellValue, ValueKind, WorkbookSnapshot
from .regions import SheetRegion


class ChangeKind(str, Enum):
    CELL_ADDED = "CellAdded"
    CELL_REMOVED = "CellRemoved"
    VALUE_CHANGED = "ValueChanged"
    FORMULA_CHANGED = "FormulaChanged"
    VALUE_AND_FORMULA_CHANGED = "ValueAndFormulaChanged"
    SHEET_ADDED = "SheetAdded"
    SHEET_REMOVED = "SheetRemoved"


SHEET_KINDS = {ChangeKind.SHEET_ADDED, ChangeKind.SHEET_REMOVED}
FORMULA_KINDS = {ChangeKind.FORMULA_CHANGED, ChangeKind.VALUE_AND_FORMULA_CHANGED}


class Policy(str, Enum):
    NORMAL = "Normal"
    EXCEPTIONAL = "Exceptional"


@dataclass(frozen=True)
class ChangeRecord:
    """One change at one address, or one sheet-level structural change.

    address is None exactly for SheetAdded/SheetRemoved; old/new follow the
    kind (absent on the Added/Removed side).
    """

    sheet: str
    kind: ChangeKind
    address: CellAddress | None = None
    old: Cell | None = None
    new: Cell | None = None
    policy: Policy | None = None

    def sort_key(self) -> tuple:
        if self.address is None:
            return (self.sheet, 0, 0, 0)
        return (self.sheet, 1, self.address.row, self.address.col)

    def involves_formula(self) -> bool:
        if self.kind in FORMULA_KINDS:
            return True
        for cell in (self.old, self.new):
            if cell is not None and cell.formula is not None:
                return True
        return False


ChangeSet = list[ChangeRecord]


@dataclass(frozen=True)
class WatchConfig:
    """Declared input regions whose value-only changes count as routine."""

    input_regions: tuple[SheetRegion, ...] = ()


@dataclass
class DiffSummary:
    counts_by_kind: dict[str, int] = field(default_factory=dict)
    counts_by_sheet: dict[str, int] = field(default_factory=dict)
    total: int = 0
    exceptional_count: int = 0


def _cell_change(address: CellAddress, old: Cell | None, new: Cell | None) -> ChangeRecord | None:
    if old is None and new is None:
        return None
    if old is None:
        return ChangeRecord(address.sheet, ChangeKind.CELL_ADDED, address, new=new)
    if new is None:
        return ChangeRecord(address.sheet, ChangeKind.CELL_REMOVED, address, old=old)
    value_differs = old.value != new.value
    formula_differs = old.formula != new.formula
    if value_differs and formula_differs:
        kind = ChangeKind.VALUE_AND_FORMULA_CHANGED
    elif value_differs:
        kind = ChangeKind.VALUE_CHANGED
    elif formula_differs:
        kind = ChangeKind.FORMULA_CHANGED
    else:
        return None
    return ChangeRecord(address.sheet, kind, address, old=old, new=new)


def diff(old: WorkbookSnapshot, new: WorkbookSnapshot) -> ChangeSet:
    """One record per differing address, plus one per added/removed sheet.

    Records come back sorted by (sheet, row, col) with sheet-level records
    leading their sheet's cell records.
    """
    records: ChangeSet = []
    for sheet in set(old.sheets) | set(new.sheets):
        old_cells = old.sheets.get(sheet)
        new_cells = new.sheets.get(sheet)
        if old_cells is None:
            records.append(ChangeRecord(sheet, ChangeKind.SHEET_ADDED))
        elif new_cells is None:
            records.append(ChangeRecord(sheet, ChangeKind.SHEET_REMOVED))
        for row, col in set(old_cells or ()) | set(new_cells or ()):
            record = _cell_change(
                CellAddress(sheet=sheet, row=row, col=col),
                (old_cells or {}).get((row, col)),
                (new_cells or {}).get((row, col)),
            )
            if record is not None:
                records.append(record)
    records.sort(key=ChangeRecord.sort_key)
    return records


def classify(changeset: ChangeSet, config: WatchConfig) -> ChangeSet:
    """Assign a policy to every record; idempotent.

    Normal means: a pure value change, inside a declared input region, with
    no formula on either side. Everything else is Exceptional — formula
    edits can never be silently filtered.
    """
    out: ChangeSet = []
    for record in changeset:
        normal = (
            record.kind is ChangeKind.VALUE_CHANGED
            and record.address is not None
            and not record.involves_formula()
            and any(r.contains(record.address) for r in config.input_regions)
        )
        out.append(replace(record, policy=Policy.NORMAL if normal else Policy.EXCEPTIONAL))
    return out


def summarize(changeset: ChangeSet) -> DiffSummary:
    by_kind = Counter(r.kind.value for r in changeset)
    by_sheet = Counter(r.sheet for r in changeset)
    exceptional = sum(1 for r in changeset if r.policy is Policy.EXCEPTIONAL)
    return DiffSummary(
        counts_by_kind=dict(by_kind),
        counts_by_sheet=dict(by_sheet),
        total=len(changeset),
        exceptional_count=exceptional,
    )


# --- wire form ------------------------------------------------------------

def value_to_json(value: CellValue):
    if value.kind is ValueKind.EMPTY:
        return {"t": "z"}
    if value.kind is ValueKind.NUMBER:
        return {"t": "n", "v": value.data, "b": value.number_bits()}
    if value.kind is ValueKind.TEXT:
        return {"t": "s", "v": value.data}
    if value.kind is ValueKind.BOOLEAN:
        return {"t": "b", "v": value.data}
    return {"t": "e", "v": value.data}


def cell_to_json(cell: Cell | None):
    if cell is None:
        return None
    out = {"value": value_to_json(cell.value)}
    if cell.formula is not None:
        out["formula"] = cell.formula
    return out


def record_to_json(record: ChangeRecord) -> dict:
    return {
        "kind": record.kind.value,
        "sheet": record.sheet,
        "address": None if record.address is None else record.address.a1,
        "old": cell_to_json(record.old),
        "new": cell_to_json(record.new),
        "policy": None if record.policy is None else record.policy.value,
    }


def changeset_to_jsonl(changeset: ChangeSet) -> str:
    return "".join(
        json.dumps(record_to_json(r), ensure_ascii=False) + "\n" for r in changeset
    )


def summary_to_json(summary: DiffSummary) -> dict:
    return {
        "counts_by_kind": summary.counts_by_kind,
        "counts_by_sheet": summary.counts_by_sheet,
        "total": summary.total,
        "exceptional_count": summary.exceptional_count,
    }
