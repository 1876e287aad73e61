"""Declarative value/formula alert rules and history-pattern labelling.

Rules are evaluated synchronously at commit time against the parent and
new snapshots. Each firing carries the tail of the cell's history window
and a pattern label summarizing its recent shape, so a "50 up from 40"
alert arrives with the context that distinguishes a step from a trend.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

from .diffs import FORMULA_KINDS, diff
from .errors import DuplicateRuleId, RuleInvalid, WindowTooShort
from .model import CellAddress, CellValue, ValueKind, WorkbookSnapshot
from .regions import SheetRegion, parse_region
from .store import VersionStore, CommitRecord, utc_now

DEFAULT_WINDOW = 4


class PatternLabel(str, Enum):
    STABLE = "Stable"
    STEP = "Step"
    TREND = "Trend"
    OSCILLATION = "Oscillation"
    REVERSAL = "Reversal"
    IRREGULAR = "Irregular"
    NON_NUMERIC = "NonNumeric"


def _as_number(value) -> float | None:
    if isinstance(value, CellValue):
        return float(value.data) if value.kind is ValueKind.NUMBER else None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    return float(value)


def classify_pattern(window_values: list) -> PatternLabel:
    """Label a short value window by its shape, first match wins.

    Precedence: NonNumeric (any non-number), Stable (all equal), Step
    (flat then one final move), Trend (all deltas one sign), Oscillation
    (deltas alternate sign), Reversal (last move undoes the direction of
    the previous one), else Irregular.
    """
    if len(window_values) < 2:
        raise WindowTooShort("pattern window needs at least 2 values")
    numbers = [_as_number(v) for v in window_values]
    if any(n is None for n in numbers):
        return PatternLabel.NON_NUMERIC

    deltas = [b - a for a, b in zip(numbers, numbers[1:])]
    if all(d == 0 for d in deltas):
        return PatternLabel.STABLE
    if all(d == 0 for d in deltas[:-1]) and deltas[-1] != 0:
        return PatternLabel.STEP
    if all(d != 0 for d in deltas):
        signs = [1 if d > 0 else -1 for d in deltas]
        if all(s == signs[0] for s in signs):
            return PatternLabel.TREND
        if all(a != b for a, b in zip(signs, signs[1:])):
            return PatternLabel.OSCILLATION
    nonzero = [d for d in deltas if d != 0]
    if len(nonzero) >= 2 and (nonzero[-1] > 0) != (nonzero[-2] > 0):
        return PatternLabel.REVERSAL
    return PatternLabel.IRREGULAR


class RuleKind(str, Enum):
    THRESHOLD_UP = "threshold_up"
    THRESHOLD_DOWN = "threshold_down"
    DELTA_ABS = "delta_abs"
    RANGE_BREACH = "range_breach"
    FORMULA_CHANGED = "formula_changed"


@dataclass(frozen=True)
class AlertRule:
    """One trigger on one cell or rectangular region."""

    rule_id: str
    target: SheetRegion
    kind: RuleKind
    threshold: float | None = None  # threshold_up / threshold_down
    delta: float | None = None      # delta_abs
    lo: float | None = None         # range_breach
    hi: float | None = None
    window: int = DEFAULT_WINDOW

    def __post_init__(self) -> None:
        if not self.rule_id:
            raise RuleInvalid("rule_id must be non-empty")
        if self.window < 2:
            raise RuleInvalid("window must be >= 2")
        if self.kind in (RuleKind.THRESHOLD_UP, RuleKind.THRESHOLD_DOWN):
            if self.threshold is None:
                raise RuleInvalid(f"{self.kind.value} needs a threshold")
        elif self.kind is RuleKind.DELTA_ABS:
            if self.delta is None or self.delta <= 0:
                raise RuleInvalid("delta_abs needs delta > 0")
        elif self.kind is RuleKind.RANGE_BREACH:
            if self.lo is None or self.hi is None or self.lo > self.hi:
                raise RuleInvalid("range_breach needs lo <= hi")

    def to_json(self) -> dict:
        out = {
            "rule_id": self.rule_id,
            "target": str(self.target),
            "kind": self.kind.value,
            "window": self.window,
        }
        for key in ("threshold", "delta", "lo", "hi"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "AlertRule":
        try:
            return cls(
                rule_id=obj["rule_id"],
                target=parse_region(obj["target"]),
                kind=RuleKind(obj["kind"]),
                threshold=obj.get("threshold"),
                delta=obj.get("delta"),
                lo=obj.get("lo"),
                hi=obj.get("hi"),
                window=obj.get("window", DEFAULT_WINDOW),
            )
        except (KeyError, ValueError) as exc:
            raise RuleInvalid(f"bad rule document: {exc}") from exc


@dataclass(frozen=True)
class AlertFiring:
    rule_id: str
    address: CellAddress
    commit_id: str
    old_value: float | None
    new_value: float | None
    window_values: tuple[float, ...]
    pattern: PatternLabel

    def to_json(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "sheet": self.address.sheet,
            "address": self.address.a1,
            "commit_id": self.commit_id,
            "old_value": self.old_value,
            "new_value": self.new_value,
            "window_values": list(self.window_values),
            "pattern": self.pattern.value,
        }


HistoryAccess = Callable[[CellAddress, int], list[CellValue]]


def _target_addresses(
    rule: AlertRule, parent: WorkbookSnapshot | None, new: WorkbookSnapshot
) -> list[CellAddress]:
    """Union of populated addresses inside the rule's target region."""
    seen: set[CellAddress] = set()
    snapshots: Iterable[WorkbookSnapshot] = (
        (new,) if parent is None else (parent, new)
    )
    for snapshot in snapshots:
        for sheet, cells in snapshot.sheets.items():
            if not rule.target.matches_sheet(sheet):
                continue
            for row, col in cells:
                if rule.target.rect.contains(row, col):
                    seen.add(CellAddress(sheet=sheet, row=row, col=col))
    return sorted(seen)


def _value_fires(rule: AlertRule, old: float | None, new: float | None) -> bool:
    if old is None or new is None:
        return False
    if rule.kind is RuleKind.THRESHOLD_UP:
        return old < rule.threshold <= new
    if rule.kind is RuleKind.THRESHOLD_DOWN:
        return old > rule.threshold >= new
    if rule.kind is RuleKind.DELTA_ABS:
        return abs(new - old) > rule.delta
    if rule.kind is RuleKind.RANGE_BREACH:
        return (rule.lo <= old <= rule.hi) and not (rule.lo <= new <= rule.hi)
    return False


def _window_for(
    address: CellAddress,
    rule: AlertRule,
    history: HistoryAccess | None,
    old_cell_value: CellValue | None,
    new_cell_value: CellValue | None,
) -> list[CellValue]:
    if history is not None:
        return list(history(address, rule.window))
    window = [v for v in (old_cell_value, new_cell_value) if v is not None]
    return window


def evaluate(
    rules: list[AlertRule],
    parent: WorkbookSnapshot | None,
    new: WorkbookSnapshot,
    history: HistoryAccess | None = None,
    commit_id: str = "",
) -> list[AlertFiring]:
    """Evaluate every rule against a parent→new transition.

    `history(address, window)` must return the cell's last `window` values
    ending at the new snapshot; without it the window degrades to the
    (old, new) pair. Output order is deterministic: rule_id, then address.
    """
    changeset = diff(parent, new) if parent is not None else []
    formula_changed_at = {
        r.address for r in changeset if r.kind in FORMULA_KINDS and r.address is not None
    }

    firings: list[AlertFiring] = []
    for rule in sorted(rules, key=lambda r: r.rule_id):
        for address in _target_addresses(rule, parent, new):
            old_cell = parent.cell(address) if parent is not None else None
            new_cell = new.cell(address)
            old_cv = old_cell.value if old_cell is not None else None
            new_cv = new_cell.value if new_cell is not None else None
            if rule.kind is RuleKind.FORMULA_CHANGED:
                fires = address in formula_changed_at
            else:
                fires = _value_fires(rule, _as_number(old_cv), _as_number(new_cv))
            if not fires:
                continue
            window = _window_for(address, rule, history, old_cv, new_cv)
            pattern = (
                classify_pattern(window)
                if len(window) >= 2
                else PatternLabel.IRREGULAR
            )
            numeric_tail = tuple(
                n for n in (_as_number(v) for v in window) if n is not None
            )
            firings.append(
                AlertFiring(
                    rule_id=rule.rule_id,
                    address=address,
                    commit_id=commit_id,
                    old_value=_as_number(old_cv),
                    new_value=_as_number(new_cv),
                    window_values=numeric_tail,
                    pattern=pattern,
                )
            )
    return firings


# --- persistence ----------------------------------------------------------

RULES_FILE = "rules.jsonl"
ALERTS_FILE = "alerts.jsonl"


def add_rule(store: VersionStore, workbook_id: str, rule: AlertRule, actor: str = "unknown") -> str:
    """Persist a rule; later commits to the workbook will evaluate it."""
    existing = {obj["rule_id"] for obj in store.read_jsonl(workbook_id, RULES_FILE)}
    if rule.rule_id in existing:
        raise DuplicateRuleId(f"rule {rule.rule_id!r} already exists")
    store.append_jsonl(workbook_id, RULES_FILE, rule.to_json())
    store.audit_log(workbook_id).append(actor, "rule_add", rule.rule_id, utc_now())
    return rule.rule_id


def list_rules(store: VersionStore, workbook_id: str) -> list[AlertRule]:
    return [AlertRule.from_json(obj) for obj in store.read_jsonl(workbook_id, RULES_FILE)]


def list_firings(store: VersionStore, workbook_id: str) -> list[dict]:
    return store.read_jsonl(workbook_id, ALERTS_FILE)


def evaluate_commit(
    store: VersionStore, workbook_id: str, record: CommitRecord
) -> list[AlertFiring]:
    """Run all persisted rules for a freshly appended head commit.

    Firings are appended to the workbook's alerts log and returned.
    """
    rules = list_rules(store, workbook_id)
    if not rules:
        return []
    new = store.get_snapshot(record.snapshot)
    parent = (
        store.get_snapshot(store.resolve_commit(workbook_id, record.parent).snapshot)
        if record.parent
        else None
    )

    def history(address: CellAddress, window: int) -> list[CellValue]:
        series = store.cell_history(workbook_id, address, window)
        return [p.value for p in series.points]

    firings = evaluate(rules, parent, new, history=history, commit_id=record.commit_id)
    for firing in firings:
        store.append_jsonl(workbook_id, ALERTS_FILE, firing.to_json())
    return firings
