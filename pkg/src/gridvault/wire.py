"""Shared wire serialization used by both the CLI and the HTTP service.

Keeping one payload builder per resource guarantees that a CLI machine
output and the corresponding API response are byte-identical for the same
inputs.
"""

from __future__ import annotations

import csv
import io
import json

from .alerts import AlertFiring
from .analytics import RetirementReport
from .audit import AuditEntry, ComplianceReport
from .diffs import (
    ChangeSet,
    DiffSummary,
    WatchConfig,
    classify,
    diff,
    record_to_json,
    summary_to_json,
    value_to_json,
)
from .model import CellValue, ValueKind
from .regions import SheetRegion, parse_region
from .store import CommitRecord, HistorySeries, VersionStore

WATCH_FILE = "watch.json"


def dump_json(payload) -> str:
    """The one JSON rendering everything user-visible goes through."""
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False)


def commits_payload(records: list[CommitRecord]) -> list[dict]:
    return [r.to_json() for r in records]


def history_payload(series: HistorySeries) -> dict:
    return {
        "sheet": series.address.sheet,
        "address": series.address.a1,
        "points": [
            {
                "commit_id": p.commit_id,
                "timestamp": p.timestamp,
                "value": value_to_json(p.value),
                "formula": p.formula,
                "changed": p.changed,
            }
            for p in series.points
        ],
    }


def changeset_payload(changeset: ChangeSet) -> list[dict]:
    return [record_to_json(r) for r in changeset]


def firings_payload(firings: list[AlertFiring]) -> list[dict]:
    return [f.to_json() for f in firings]


def commit_response_payload(
    record: CommitRecord, summary: DiffSummary, firings: list[AlertFiring]
) -> dict:
    return {
        "commit_id": record.commit_id,
        "snapshot_hash": record.snapshot.hex,
        "diff_summary": summary_to_json(summary),
        "firings": firings_payload(firings),
    }


def retirement_payload(report: RetirementReport) -> dict:
    return report.to_json()


def compliance_payload(report: ComplianceReport) -> dict:
    return report.to_json()


def audit_payload(entries: list[AuditEntry]) -> list[dict]:
    return [e.to_json() for e in entries]


def export_payload(region: SheetRegion, commit_id: str, table: list[list[CellValue]]) -> dict:
    return {
        "region": str(region),
        "at": commit_id,
        "rows": [[value_to_json(v) for v in row] for row in table],
    }


def _csv_field(value: CellValue) -> str:
    if value.kind is ValueKind.EMPTY:
        return ""
    if value.kind is ValueKind.NUMBER:
        x = value.data
        if x == int(x) and abs(x) < 1e15:
            return str(int(x))
        return repr(x)
    if value.kind is ValueKind.BOOLEAN:
        return "TRUE" if value.data else "FALSE"
    return str(value.data)


def export_csv(table: list[list[CellValue]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    for row in table:
        writer.writerow(_csv_field(v) for v in row)
    return buf.getvalue()


# --- manifest persistence and range verification --------------------------

MANIFESTS_FILE = "manifests.jsonl"


def add_manifest(store: VersionStore, workbook_id: str, manifest, actor: str = "unknown") -> str:
    from .audit import manifest_to_json
    from .store import utc_now

    store.append_jsonl(workbook_id, MANIFESTS_FILE, manifest_to_json(manifest))
    store.audit_log(workbook_id).append(actor, "manifest_add", manifest.manifest_id, utc_now())
    return manifest.manifest_id


def get_manifest(store: VersionStore, workbook_id: str, manifest_id: str):
    from .audit import manifest_from_json
    from .errors import NotFound

    for obj in store.read_jsonl(workbook_id, MANIFESTS_FILE):
        if obj.get("manifest_id") == manifest_id:
            return manifest_from_json(obj)
    raise NotFound(f"manifest {manifest_id!r} not registered for {workbook_id!r}")


def union_changeset(store: VersionStore, workbook_id: str, from_id: str, to_id: str) -> ChangeSet:
    """Union of per-transition diffs over a commit range, deduped by address.

    A change-then-revert inside the range still shows up, which a plain
    endpoint-to-endpoint diff would hide.
    """
    from .errors import NotFound

    records = store.log(workbook_id)
    ids = [r.commit_id for r in records]
    try:
        i, j = ids.index(from_id), ids.index(to_id)
    except ValueError as exc:
        raise NotFound(f"commit not in lineage: {exc}") from exc
    if j < i:
        raise NotFound(f"commit {to_id!r} precedes {from_id!r}")
    seen = set()
    union: ChangeSet = []
    for a, b in zip(records[i:j], records[i + 1 : j + 1]):
        changeset = diff(store.get_snapshot(a.snapshot), store.get_snapshot(b.snapshot))
        for record in changeset:
            key = (record.sheet, record.address, record.kind if record.address is None else None)
            if key not in seen:
                seen.add(key)
                union.append(record)
    union.sort(key=lambda r: r.sort_key())
    return union


def verify_manifest_range(
    store: VersionStore,
    workbook_id: str,
    manifest_id: str,
    from_id: str,
    to_id: str,
    actor: str = "unknown",
) -> ComplianceReport:
    """Verify a stored manifest against the union diff of a commit range."""
    from .audit import verify_manifest
    from .store import utc_now

    manifest = get_manifest(store, workbook_id, manifest_id)
    changeset = union_changeset(store, workbook_id, from_id, to_id)
    report = verify_manifest(changeset, manifest, commit_from=from_id, commit_to=to_id)
    store.audit_log(workbook_id).append(actor, "manifest_verify", manifest_id, utc_now())
    return report


# --- per-workbook watch config -------------------------------------------

def load_watch_config(store: VersionStore, workbook_id: str) -> WatchConfig:
    """Declared input regions for a workbook; empty config when unset."""
    path = store.workbook_dir(workbook_id) / WATCH_FILE
    if not path.exists():
        return WatchConfig()
    obj = json.loads(path.read_text("utf-8"))
    regions = tuple(parse_region(text) for text in obj.get("input_regions", []))
    return WatchConfig(input_regions=regions)


def save_watch_config(store: VersionStore, workbook_id: str, config: WatchConfig) -> None:
    wdir = store.workbook_dir(workbook_id)
    wdir.mkdir(parents=True, exist_ok=True)
    payload = {"input_regions": [str(r) for r in config.input_regions]}
    (wdir / WATCH_FILE).write_text(dump_json(payload) + "\n", "utf-8")


def classified_diff(store: VersionStore, workbook_id: str, old, new) -> ChangeSet:
    """Diff two snapshots and apply the workbook's watch policy."""
    return classify(diff(old, new), load_watch_config(store, workbook_id))
