"""Filesystem discovery of operational spreadsheet files.

Walks a directory tree, picks up spreadsheet-looking files by extension
(with a ZIP signature check for .xlsx) and reports an inventory with the
size bands that matter operationally: under 1MB, 1-10MB, 10-150MB, over
150MB.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import PathNotFound

MB = 1024 * 1024
SIZE_BUCKETS = ("<1MB", "1-10MB", "10-150MB", ">150MB")
_ZIP_MAGIC = b"PK\x03\x04"

DEFAULT_EXTENSIONS = (".xlsx", ".xls", ".csv")


@dataclass
class FileEntry:
    path: str
    bytes: int
    modified: str
    format_guess: str  # xlsx | xls | csv

    def to_json(self) -> dict:
        return {
            "path": self.path,
            "bytes": self.bytes,
            "modified": self.modified,
            "format_guess": self.format_guess,
        }


@dataclass
class InventoryReport:
    scanned_paths: int = 0
    spreadsheet_files: list[FileEntry] = field(default_factory=list)
    total_bytes: int = 0
    histogram: dict[str, int] = field(default_factory=lambda: dict.fromkeys(SIZE_BUCKETS, 0))
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "scanned_paths": self.scanned_paths,
            "spreadsheet_files": [f.to_json() for f in self.spreadsheet_files],
            "file_count": len(self.spreadsheet_files),
            "total_bytes": self.total_bytes,
            "histogram": self.histogram,
            "warnings": self.warnings,
        }


def _bucket(size: int) -> str:
    if size < MB:
        return "<1MB"
    if size < 10 * MB:
        return "1-10MB"
    if size <= 150 * MB:
        return "10-150MB"
    return ">150MB"


def _looks_like_zip(path: Path) -> bool:
    try:
        with path.open("rb") as fh:
            return fh.read(4) == _ZIP_MAGIC
    except OSError:
        return False


def discover(root: str | Path, extensions: tuple[str, ...] = DEFAULT_EXTENSIONS) -> InventoryReport:
    """Read-only recursive scan; permission failures become warnings."""
    root = Path(root)
    if not root.is_dir():
        raise PathNotFound(f"not a readable directory: {root}")
    report = InventoryReport()
    for dirpath, _dirnames, filenames in os.walk(root, onerror=lambda e: report.warnings.append(str(e))):
        for name in sorted(filenames):
            path = Path(dirpath) / name
            report.scanned_paths += 1
            ext = path.suffix.lower()
            if ext not in extensions:
                continue
            if ext == ".xlsx" and not _looks_like_zip(path):
                report.warnings.append(f"{path}: .xlsx without ZIP signature skipped")
                continue
            try:
                stat = path.stat()
            except OSError as exc:
                report.warnings.append(f"{path}: {exc}")
                continue
            modified = datetime.fromtimestamp(stat.st_mtime, timezone.utc).strftime(
                "%Y-%m-%dT%H:%M:%SZ"
            )
            report.spreadsheet_files.append(
                FileEntry(str(path), stat.st_size, modified, ext.lstrip("."))
            )
            report.total_bytes += stat.st_size
            report.histogram[_bucket(stat.st_size)] += 1
    report.spreadsheet_files.sort(key=lambda f: f.path)
    return report
