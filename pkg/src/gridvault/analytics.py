"""Statistics over cell history series and retirement-readiness scoring.

All statistics are sample (n-1 denominator) flavours; the trend slope is
an ordinary least-squares fit against commit index 0..n-1, since version
cadence is irregular and carries no reliable wall-clock meaning.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .diffs import diff
from .errors import LengthMismatch, NonNumericSeries, SeriesTooShort
from .model import CellValue, ValueKind
from .store import VersionStore

DEFAULT_RETIREMENT_WINDOW = 10


def _numbers(values) -> list[float]:
    out = []
    for v in values:
        if isinstance(v, CellValue):
            if v.kind is not ValueKind.NUMBER:
                raise NonNumericSeries(f"non-numeric value in series: {v}")
            out.append(float(v.data))
        elif isinstance(v, bool) or not isinstance(v, (int, float)):
            raise NonNumericSeries(f"non-numeric value in series: {v!r}")
        else:
            out.append(float(v))
    return out


@dataclass(frozen=True)
class SeriesStats:
    n: int
    mean: float
    variance: float
    slope: float


def series_stats(values) -> SeriesStats:
    """Mean, sample variance and OLS slope of a numeric series."""
    xs = _numbers(values)
    n = len(xs)
    if n < 2:
        raise SeriesTooShort("series_stats needs at least 2 values")
    mean = sum(xs) / n
    variance = sum((x - mean) ** 2 for x in xs) / (n - 1)
    # OLS against indices 0..n-1: slope = cov(i, x) / var(i).
    idx_mean = (n - 1) / 2
    sxx = sum((i - idx_mean) ** 2 for i in range(n))
    sxy = sum((i - idx_mean) * (x - mean) for i, x in enumerate(xs))
    return SeriesStats(n=n, mean=mean, variance=variance, slope=sxy / sxx)


def covariance(a, b) -> float:
    """Sample covariance of two equal-length series aligned by index."""
    xs, ys = _numbers(a), _numbers(b)
    if len(xs) != len(ys):
        raise LengthMismatch(f"series lengths differ: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise SeriesTooShort("covariance needs at least 2 values")
    mx = sum(xs) / n
    my = sum(ys) / n
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / (n - 1)


class RetirementVerdict(str, Enum):
    READY = "Ready"
    NOT_READY = "NotReady"
    INSUFFICIENT_HISTORY = "InsufficientHistory"


@dataclass(frozen=True)
class RetirementReport:
    workbook_id: str
    window: int
    commits_considered: int
    formula_change_commits: int
    volatility: float
    verdict: RetirementVerdict

    def to_json(self) -> dict:
        return {
            "workbook_id": self.workbook_id,
            "window": self.window,
            "commits_considered": self.commits_considered,
            "formula_change_commits": self.formula_change_commits,
            "volatility": self.volatility,
            "verdict": self.verdict.value,
        }


def _transition_has_formula_or_structural(store: VersionStore, parent_hash, child_hash) -> bool:
    changeset = diff(store.get_snapshot(parent_hash), store.get_snapshot(child_hash))
    return any(r.address is None or r.involves_formula() for r in changeset)


def _count_transitions(store: VersionStore, workbook_id: str, window: int) -> tuple[int, int]:
    """(total transitions, formula/structural transitions in the last `window`)."""
    records = store.log(workbook_id)
    total = max(len(records) - 1, 0)
    flagged = 0
    recent = records[-(min(window, total) + 1):] if total else []
    for parent, child in zip(recent, recent[1:]):
        if _transition_has_formula_or_structural(store, parent.snapshot, child.snapshot):
            flagged += 1
    return total, flagged


def formula_volatility(store: VersionStore, workbook_id: str, window: int = DEFAULT_RETIREMENT_WINDOW) -> float:
    """Fraction of recent commit transitions touching formulas or structure.

    A transition counts when its diff contains a formula change, a cell
    added/removed that carries a formula, or a sheet-level change. With no
    transitions at all the volatility is defined as 0.0.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    total, flagged = _count_transitions(store, workbook_id, window)
    if total == 0:
        return 0.0
    return flagged / min(window, total)


def retirement_report(
    store: VersionStore, workbook_id: str, window: int = DEFAULT_RETIREMENT_WINDOW
) -> RetirementReport:
    """Score migration readiness from recent formula-history volatility."""
    if window < 1:
        raise ValueError("window must be >= 1")
    total, flagged = _count_transitions(store, workbook_id, window)
    volatility = flagged / min(window, total) if total else 0.0
    if total < window:
        verdict = RetirementVerdict.INSUFFICIENT_HISTORY
    elif volatility == 0.0:
        verdict = RetirementVerdict.READY
    else:
        verdict = RetirementVerdict.NOT_READY
    return RetirementReport(
        workbook_id=workbook_id,
        window=window,
        commits_considered=total,
        formula_change_commits=flagged,
        volatility=volatility,
        verdict=verdict,
    )
