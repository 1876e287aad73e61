"""gridvault: spreadsheet version control and change intelligence.

Captures successive versions of operational spreadsheets, detects and
classifies cell-level changes, fires value alerts with history context,
serves per-cell time series and analytics, scores retirement readiness
and verifies changes against approved manifests.
"""

from .model import (
    Cell,
    CellAddress,
    CellValue,
    SnapshotHash,
    ValueKind,
    WorkbookSnapshot,
    canonicalize,
    format_a1,
    parse_a1,
    snapshot_hash,
)
from .ingest import IngestReport, ingest_auto, ingest_csv, ingest_json, ingest_ooxml
from .diffs import (
    ChangeKind,
    ChangeRecord,
    DiffSummary,
    Policy,
    WatchConfig,
    classify,
    diff,
    summarize,
)
from .alerts import AlertFiring, AlertRule, PatternLabel, RuleKind, classify_pattern, evaluate
from .analytics import (
    RetirementReport,
    RetirementVerdict,
    SeriesStats,
    covariance,
    formula_volatility,
    retirement_report,
    series_stats,
)
from .audit import AuditLog, ChangeManifest, ComplianceReport, verify_manifest
from .regions import Rect, SheetRegion, parse_region
from .store import CommitRecord, HistoryPoint, HistorySeries, VersionStore
from .discover import InventoryReport, discover

__version__ = "0.1.0"

__all__ = [
    "AlertFiring",
    "AlertRule",
    "AuditLog",
    "Cell",
    "CellAddress",
    "CellValue",
    "ChangeKind",
    "ChangeManifest",
    "ChangeRecord",
    "CommitRecord",
    "ComplianceReport",
    "DiffSummary",
    "HistoryPoint",
    "HistorySeries",
    "IngestReport",
    "InventoryReport",
    "PatternLabel",
    "Policy",
    "Rect",
    "RetirementReport",
    "RetirementVerdict",
    "RuleKind",
    "SeriesStats",
    "SheetRegion",
    "SnapshotHash",
    "ValueKind",
    "VersionStore",
    "WatchConfig",
    "WorkbookSnapshot",
    "canonicalize",
    "classify",
    "classify_pattern",
    "covariance",
    "diff",
    "discover",
    "evaluate",
    "format_a1",
    "formula_volatility",
    "ingest_auto",
    "ingest_csv",
    "ingest_json",
    "ingest_ooxml",
    "parse_a1",
    "parse_region",
    "retirement_report",
    "series_stats",
    "snapshot_hash",
    "summarize",
    "verify_manifest",
]
