"""Change-manifest verification and the hash-chained audit trail.

The audit log is append-only JSON lines; each entry embeds the SHA-256 of
the previous line so tampering anywhere breaks the chain from that point
on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .diffs import ChangeRecord, ChangeSet, record_to_json
from .errors import ManifestInvalid, StoreCorrupt
from .model import CellAddress, sha256_hex
from .regions import SheetRegion

GENESIS = "0" * 64


# --- audit trail ----------------------------------------------------------

@dataclass(frozen=True)
class AuditEntry:
    entry_id: str
    prev: str
    actor: str
    action: str
    target: str
    timestamp: str

    def to_json(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "prev": self.prev,
            "actor": self.actor,
            "action": self.action,
            "target": self.target,
            "timestamp": self.timestamp,
        }


def _entry_digest(prev: str, actor: str, action: str, target: str, timestamp: str) -> str:
    body = json.dumps(
        {"actor": actor, "action": action, "target": target, "timestamp": timestamp},
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return sha256_hex((prev + body).encode("utf-8"))


class AuditLog:
    """Append-only, hash-chained audit log backed by one JSONL file."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def _read_lines(self) -> list[str]:
        if not self.path.exists():
            return []
        return self.path.read_text("utf-8").splitlines()

    def entries(self) -> list[AuditEntry]:
        out = []
        for line in self._read_lines():
            try:
                obj = json.loads(line)
                out.append(AuditEntry(**obj))
            except (json.JSONDecodeError, TypeError) as exc:
                raise StoreCorrupt(f"unreadable audit line: {exc}") from exc
        return out

    def append(self, actor: str, action: str, target: str, timestamp: str) -> str:
        """Append one entry; returns its entry_id."""
        if not (actor and action and target and timestamp):
            raise ValueError("audit event fields must be non-empty")
        lines = self._read_lines()
        prev = json.loads(lines[-1])["entry_id"] if lines else GENESIS
        entry_id = _entry_digest(prev, actor, action, target, timestamp)
        entry = AuditEntry(entry_id, prev, actor, action, target, timestamp)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry.to_json(), ensure_ascii=False) + "\n")
        return entry_id

    def query(
        self,
        actor: str | None = None,
        action: str | None = None,
        target: str | None = None,
    ) -> list[AuditEntry]:
        """Entries matching every given filter, in insertion order."""
        out = []
        for entry in self.entries():
            if actor is not None and entry.actor != actor:
                continue
            if action is not None and entry.action != action:
                continue
            if target is not None and entry.target != target:
                continue
            out.append(entry)
        return out

    def verify_chain(self) -> bool:
        """True iff every entry's hash links correctly to its predecessor."""
        prev = GENESIS
        for entry in self.entries():
            expected = _entry_digest(prev, entry.actor, entry.action, entry.target, entry.timestamp)
            if entry.prev != prev or entry.entry_id != expected:
                return False
            prev = entry.entry_id
        return True


# --- change manifests -----------------------------------------------------

@dataclass(frozen=True)
class ChangeManifest:
    """An approved declaration of which cells must and may change."""

    manifest_id: str
    approver: str
    created: str
    applies_to: str
    required: tuple[CellAddress, ...]
    allowed: tuple[SheetRegion, ...]

    def __post_init__(self) -> None:
        if not self.manifest_id:
            raise ManifestInvalid("manifest_id must be non-empty")
        for address in self.required:
            if not any(region.contains(address) for region in self.allowed):
                raise ManifestInvalid(
                    f"required cell {address} lies outside every allowed region"
                )


@dataclass
class ComplianceReport:
    manifest_id: str
    commit_from: str | None
    commit_to: str | None
    compliant: bool
    violations: list[ChangeRecord] = field(default_factory=list)
    unfulfilled: list[CellAddress] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "manifest_id": self.manifest_id,
            "commit_from": self.commit_from,
            "commit_to": self.commit_to,
            "compliant": self.compliant,
            "violations": [record_to_json(r) for r in self.violations],
            "unfulfilled": [str(a) for a in self.unfulfilled],
            "violation_count": len(self.violations),
            "unfulfilled_count": len(self.unfulfilled),
        }


def verify_manifest(
    changeset: ChangeSet,
    manifest: ChangeManifest,
    commit_from: str | None = None,
    commit_to: str | None = None,
) -> ComplianceReport:
    """Check an actual changeset against its approved manifest.

    A record is a violation when its address is outside every allowed
    region; sheet-level structural records are always violations (no
    rectangle can approve them). A required address is unfulfilled when it
    does not appear in the changeset at all.
    """
    violations = []
    changed_addresses = set()
    for record in changeset:
        if record.address is None:
            violations.append(record)
            continue
        changed_addresses.add(record.address)
        if not any(region.contains(record.address) for region in manifest.allowed):
            violations.append(record)
    unfulfilled = [a for a in manifest.required if a not in changed_addresses]
    return ComplianceReport(
        manifest_id=manifest.manifest_id,
        commit_from=commit_from,
        commit_to=commit_to,
        compliant=not violations and not unfulfilled,
        violations=violations,
        unfulfilled=unfulfilled,
    )


# --- manifest wire form ---------------------------------------------------

def manifest_from_json(obj: dict) -> ChangeManifest:
    from .regions import parse_region

    try:
        required = tuple(
            CellAddress.from_a1(*_split_cell(ref)) for ref in obj.get("required", [])
        )
        allowed = tuple(parse_region(text) for text in obj.get("allowed", []))
        return ChangeManifest(
            manifest_id=obj["manifest_id"],
            approver=obj.get("approver", ""),
            created=obj.get("created", ""),
            applies_to=obj.get("applies_to", ""),
            required=required,
            allowed=allowed,
        )
    except (KeyError, TypeError) as exc:
        raise ManifestInvalid(f"bad manifest document: {exc}") from exc


def manifest_to_json(manifest: ChangeManifest) -> dict:
    return {
        "manifest_id": manifest.manifest_id,
        "approver": manifest.approver,
        "created": manifest.created,
        "applies_to": manifest.applies_to,
        "required": [str(a) for a in manifest.required],
        "allowed": [str(r) for r in manifest.allowed],
    }


def _split_cell(ref: str) -> tuple[str, str]:
    sheet, sep, a1 = ref.rpartition("!")
    if not sep or not sheet:
        raise ManifestInvalid(f"cell reference needs a sheet prefix: {ref!r}")
    return sheet, a1
