"""Append-only, content-addressed version store for workbook lineages.

On-disk layout under the store root:

    objects/<first2hex>/<remaining62hex>   content-addressed blobs
    workbooks/<id>/commits.jsonl           one commit record per line
    workbooks/<id>/lock                    advisory write lock
    workbooks/<id>/audit.jsonl             hash-chained audit trail

Objects come in two flavours: per-sheet blobs (canonical sheet bytes,
keyed by their own SHA-256) and per-snapshot manifests listing sheet blob
hashes, keyed by the snapshot hash they reconstruct to. A commit touching
one sheet of a many-sheet workbook therefore stores one new sheet blob
plus one manifest.
"""

from __future__ import annotations

import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .audit import AuditLog
from .errors import ConcurrentWriter, MalformedRegion, NotFound, StoreCorrupt
from .ingest import sheet_from_json
from .model import (
    CellAddress,
    CellValue,
    SheetCells,
    SnapshotHash,
    WorkbookSnapshot,
    canonicalize,
    canonicalize_sheet,
    sha256_hex,
    snapshot_hash,
)
from .regions import SheetRegion

DEFAULT_LOCK_TIMEOUT = 5.0


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class CommitRecord:
    commit_id: str
    workbook_id: str
    parent: str | None
    snapshot: SnapshotHash
    author: str
    timestamp: str
    message: str
    source: str

    def to_json(self) -> dict:
        return {
            "commit_id": self.commit_id,
            "workbook_id": self.workbook_id,
            "parent": self.parent,
            "snapshot": self.snapshot.hex,
            "author": self.author,
            "timestamp": self.timestamp,
            "message": self.message,
            "source": self.source,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CommitRecord":
        return cls(
            commit_id=obj["commit_id"],
            workbook_id=obj["workbook_id"],
            parent=obj["parent"],
            snapshot=SnapshotHash(obj["snapshot"]),
            author=obj["author"],
            timestamp=obj["timestamp"],
            message=obj["message"],
            source=obj["source"],
        )


def _commit_digest(
    workbook_id: str, parent: str | None, snapshot_hex: str,
    author: str, timestamp: str, message: str, source: str,
) -> str:
    line = json.dumps(
        {
            "workbook_id": workbook_id,
            "parent": parent,
            "snapshot": snapshot_hex,
            "author": author,
            "timestamp": timestamp,
            "message": message,
            "source": source,
        },
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return sha256_hex(line.encode("utf-8"))


@dataclass(frozen=True)
class HistoryPoint:
    commit_id: str
    timestamp: str
    value: CellValue
    formula: str | None
    changed: bool


@dataclass(frozen=True)
class HistorySeries:
    address: CellAddress
    points: tuple[HistoryPoint, ...]


class VersionStore:
    """Filesystem-backed store; one instance may serve many workbooks."""

    def __init__(self, root: str | Path, lock_timeout: float = DEFAULT_LOCK_TIMEOUT):
        self.root = Path(root)
        self.lock_timeout = lock_timeout

    # --- layout -----------------------------------------------------------

    def init(self) -> None:
        (self.root / "objects").mkdir(parents=True, exist_ok=True)
        (self.root / "workbooks").mkdir(parents=True, exist_ok=True)

    def workbook_dir(self, workbook_id: str) -> Path:
        if not workbook_id or "/" in workbook_id or workbook_id in (".", ".."):
            raise NotFound(f"bad workbook id: {workbook_id!r}")
        return self.root / "workbooks" / workbook_id

    def workbook_ids(self) -> list[str]:
        base = self.root / "workbooks"
        if not base.is_dir():
            return []
        return sorted(p.name for p in base.iterdir() if (p / "commits.jsonl").exists())

    def audit_log(self, workbook_id: str) -> AuditLog:
        return AuditLog(self.workbook_dir(workbook_id) / "audit.jsonl")

    def _object_path(self, key_hex: str) -> Path:
        return self.root / "objects" / key_hex[:2] / key_hex[2:]

    # --- locking ----------------------------------------------------------

    @contextmanager
    def lock(self, workbook_id: str):
        """Advisory single-writer lock; blocks up to lock_timeout seconds."""
        wdir = self.workbook_dir(workbook_id)
        wdir.mkdir(parents=True, exist_ok=True)
        lock_path = wdir / "lock"
        deadline = time.monotonic() + self.lock_timeout
        while True:
            try:
                fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                break
            except FileExistsError:
                if time.monotonic() >= deadline:
                    raise ConcurrentWriter(
                        f"could not acquire write lock for {workbook_id!r} "
                        f"within {self.lock_timeout}s"
                    )
                time.sleep(0.02)
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield
        finally:
            try:
                lock_path.unlink()
            except FileNotFoundError:
                pass

    # --- objects ----------------------------------------------------------

    def _put_object(self, key_hex: str, data: bytes, content_addressed: bool) -> bool:
        """Store bytes under key; returns True when a new file was written.

        Existing objects are verified instead of rewritten (append-only
        discipline): a content-addressed blob must re-hash to its key, a
        manifest must match byte-for-byte.
        """
        path = self._object_path(key_hex)
        if path.exists():
            existing = path.read_bytes()
            if content_addressed:
                if sha256_hex(existing) != key_hex:
                    raise StoreCorrupt(f"object {key_hex} fails its hash check")
            elif existing != data:
                raise StoreCorrupt(f"manifest object {key_hex} differs from expected content")
            return False
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(data)
        tmp.rename(path)
        return True

    def _get_object(self, key_hex: str) -> bytes:
        path = self._object_path(key_hex)
        if not path.exists():
            raise NotFound(f"object {key_hex} not in store")
        return path.read_bytes()

    def _read_manifest(self, snap_hash: str) -> list[tuple[str, str]]:
        """(sheet name, blob hash) pairs for a stored snapshot."""
        raw = self._get_object(snap_hash)
        try:
            obj = json.loads(raw)
            entries = [(s["name"], s["blob"]) for s in obj["sheets"]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise StoreCorrupt(f"unreadable snapshot manifest {snap_hash}: {exc}") from exc
        return entries

    def _read_sheet_blob(self, blob_hash: str) -> tuple[str, SheetCells]:
        raw = self._get_object(blob_hash)
        if sha256_hex(raw) != blob_hash:
            raise StoreCorrupt(f"sheet blob {blob_hash} fails its hash check")
        try:
            return sheet_from_json(json.loads(raw))
        except Exception as exc:
            raise StoreCorrupt(f"unreadable sheet blob {blob_hash}: {exc}") from exc

    # --- commits ----------------------------------------------------------

    def commit(
        self,
        workbook_id: str,
        snapshot: WorkbookSnapshot,
        author: str,
        message: str = "",
        source: str = "",
    ) -> CommitRecord:
        """Store the snapshot content-addressed and append a commit record."""
        if not workbook_id:
            raise NotFound("workbook_id must be non-empty")
        snap_hash = snapshot_hash(snapshot)
        with self.lock(workbook_id):
            entries = []
            for name in sorted(snapshot.sheets):
                blob = canonicalize_sheet(name, snapshot.sheets[name])
                blob_hash = sha256_hex(blob)
                self._put_object(blob_hash, blob, content_addressed=True)
                entries.append({"name": name, "blob": blob_hash})
            manifest = json.dumps(
                {"sheets": entries}, separators=(",", ":"), ensure_ascii=False
            ).encode("utf-8")
            self._put_object(snap_hash.hex, manifest, content_addressed=False)

            records = self._read_log(workbook_id, missing_ok=True)
            parent = records[-1].commit_id if records else None
            timestamp = utc_now()
            commit_id = _commit_digest(
                workbook_id, parent, snap_hash.hex, author, timestamp, message, source
            )
            record = CommitRecord(
                commit_id, workbook_id, parent, snap_hash, author, timestamp, message, source
            )
            log_path = self.workbook_dir(workbook_id) / "commits.jsonl"
            with log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
            self.audit_log(workbook_id).append(author, "commit", commit_id, timestamp)
        return record

    def _read_log(self, workbook_id: str, missing_ok: bool = False) -> list[CommitRecord]:
        path = self.workbook_dir(workbook_id) / "commits.jsonl"
        if not path.exists():
            if missing_ok:
                return []
            raise NotFound(f"unknown workbook: {workbook_id!r}")
        records = []
        for line in path.read_text("utf-8").splitlines():
            try:
                records.append(CommitRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise StoreCorrupt(f"unreadable commit line: {exc}") from exc
        return records

    def log(self, workbook_id: str) -> list[CommitRecord]:
        """Commits in lineage order, oldest first."""
        return self._read_log(workbook_id)

    def head(self, workbook_id: str) -> CommitRecord:
        records = self._read_log(workbook_id)
        if not records:
            raise NotFound(f"workbook {workbook_id!r} has no commits")
        return records[-1]

    def resolve_commit(self, workbook_id: str, ref: str) -> CommitRecord:
        """Find a commit by id, or by the symbolic ref "latest"."""
        records = self._read_log(workbook_id)
        if not records:
            raise NotFound(f"workbook {workbook_id!r} has no commits")
        if ref == "latest":
            return records[-1]
        for record in records:
            if record.commit_id == ref:
                return record
        raise NotFound(f"commit {ref!r} not in lineage of {workbook_id!r}")

    # --- reads ------------------------------------------------------------

    def get_snapshot(self, snap_hash: SnapshotHash | str) -> WorkbookSnapshot:
        """Load a snapshot by content hash; verified by re-hashing on read."""
        hex_key = snap_hash.hex if isinstance(snap_hash, SnapshotHash) else snap_hash
        sheets: dict[str, SheetCells] = {}
        for name, blob_hash in self._read_manifest(hex_key):
            parsed_name, cells = self._read_sheet_blob(blob_hash)
            if parsed_name != name:
                raise StoreCorrupt(
                    f"sheet blob {blob_hash} names {parsed_name!r}, manifest says {name!r}"
                )
            sheets[name] = cells
        snapshot = WorkbookSnapshot(sheets=sheets)
        if snapshot_hash(snapshot).hex != hex_key:
            raise StoreCorrupt(f"snapshot {hex_key} fails its re-hash check")
        return snapshot

    def snapshot_at(self, workbook_id: str, ref: str) -> WorkbookSnapshot:
        return self.get_snapshot(self.resolve_commit(workbook_id, ref).snapshot)

    def _sheet_at(self, snap_hash: SnapshotHash, sheet_name: str) -> SheetCells:
        """One sheet of a stored snapshot without loading the rest."""
        for name, blob_hash in self._read_manifest(snap_hash.hex):
            if name == sheet_name:
                return self._read_sheet_blob(blob_hash)[1]
        return {}

    def cell_history(
        self, workbook_id: str, address: CellAddress, window: int
    ) -> HistorySeries:
        """Per-cell series over the last `window` commits, carry-forward.

        Absent cells appear as Empty with no formula; changed=true marks
        points whose value or formula differs from the previous point (the
        first point is changed iff the cell exists there).
        """
        if window < 1:
            raise ValueError("window must be >= 1")
        records = self._read_log(workbook_id)
        points: list[HistoryPoint] = []
        prev: tuple[CellValue, str | None] | None = None
        for record in records[-window:]:
            cells = self._sheet_at(record.snapshot, address.sheet)
            cell = cells.get((address.row, address.col))
            value = cell.value if cell is not None else CellValue.empty()
            formula = cell.formula if cell is not None else None
            if prev is None:
                changed = cell is not None
            else:
                changed = (value, formula) != prev
            points.append(HistoryPoint(record.commit_id, record.timestamp, value, formula, changed))
            prev = (value, formula)
        return HistorySeries(address=address, points=tuple(points))

    def restore(self, workbook_id: str, commit_id: str, actor: str = "unknown") -> bytes:
        """Canonical bytes of the snapshot at a commit; audited, read-only."""
        record = self.resolve_commit(workbook_id, commit_id)
        data = canonicalize(self.get_snapshot(record.snapshot))
        self.audit_log(workbook_id).append(actor, "restore", record.commit_id, utc_now())
        return data

    def export_region(
        self, workbook_id: str, ref: str, region: SheetRegion
    ) -> list[list[CellValue]]:
        """Dense rectangular table of values (no formulas) at a commit."""
        if region.sheet == "*":
            raise MalformedRegion("export needs an exact sheet name")
        record = self.resolve_commit(workbook_id, ref)
        cells = self._sheet_at(record.snapshot, region.sheet)
        rect = region.rect
        table = []
        for row in range(rect.row1, rect.row2 + 1):
            out_row = []
            for col in range(rect.col1, rect.col2 + 1):
                cell = cells.get((row, col))
                out_row.append(cell.value if cell is not None else CellValue.empty())
            table.append(out_row)
        return table

    # --- shared jsonl helpers (rules, manifests) --------------------------

    def read_jsonl(self, workbook_id: str, filename: str) -> list[dict]:
        path = self.workbook_dir(workbook_id) / filename
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text("utf-8").splitlines()]

    def append_jsonl(self, workbook_id: str, filename: str, obj: dict) -> None:
        wdir = self.workbook_dir(workbook_id)
        wdir.mkdir(parents=True, exist_ok=True)
        with (wdir / filename).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
