"""Workbook data model, canonical serialization and content hashing.

Everything here is immutable after construction and safe to share across
threads. Canonical bytes are the single source of truth for equality and
hashing: two snapshots with the same logical content always serialize to
identical bytes, regardless of how they were built.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import struct
from dataclasses import dataclass, field
from enum import Enum

from .errors import MalformedAddress

ERROR_LITERALS = (
    "#DIV/0!",
    "#N/A",
    "#NAME?",
    "#NULL!",
    "#NUM!",
    "#REF!",
    "#VALUE!",
)

_A1_RE = re.compile(r"^([A-Za-z]+)([0-9]+)$")


def parse_a1(text: str) -> tuple[int, int]:
    """Parse an A1-style reference into (col, row), both 1-based.

    Columns are bijective base-26 ("A"=1 ... "Z"=26, "AA"=27). Lowercase
    input is accepted. Raises MalformedAddress on anything else.
    """
    m = _A1_RE.match(text or "")
    if not m:
        raise MalformedAddress(f"not an A1 reference: {text!r}")
    letters, digits = m.group(1).upper(), m.group(2)
    col = 0
    for ch in letters:
        col = col * 26 + (ord(ch) - ord("A") + 1)
    row = int(digits)
    if row < 1:
        raise MalformedAddress(f"row must be >= 1: {text!r}")
    return col, row


def format_a1(col: int, row: int) -> str:
    """Inverse of parse_a1: (col, row) -> canonical uppercase A1 text."""
    if col < 1 or row < 1:
        raise MalformedAddress(f"col/row must be >= 1: ({col}, {row})")
    letters = ""
    n = col
    while n > 0:
        n, rem = divmod(n - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return f"{letters}{row}"


@dataclass(frozen=True, order=True)
class CellAddress:
    """A single cell position. Ordering is (sheet, row, col)."""

    sheet: str
    row: int
    col: int

    def __post_init__(self) -> None:
        if not self.sheet:
            raise MalformedAddress("sheet name must be non-empty")
        if self.row < 1 or self.col < 1:
            raise MalformedAddress(f"row/col must be >= 1: ({self.row}, {self.col})")

    @classmethod
    def from_a1(cls, sheet: str, ref: str) -> "CellAddress":
        col, row = parse_a1(ref)
        return cls(sheet=sheet, row=row, col=col)

    @property
    def a1(self) -> str:
        return format_a1(self.col, self.row)

    def __str__(self) -> str:
        return f"{self.sheet}!{self.a1}"


class ValueKind(str, Enum):
    EMPTY = "empty"
    NUMBER = "number"
    TEXT = "text"
    BOOLEAN = "boolean"
    ERROR = "error"


@dataclass(frozen=True)
class CellValue:
    """Tagged union of the five spreadsheet value variants.

    Numbers are IEEE-754 doubles; NaN is rejected and negative zero is
    normalized to +0.0 so canonical bytes never depend on float quirks.
    """

    kind: ValueKind
    data: float | str | bool | None = None

    @staticmethod
    def empty() -> "CellValue":
        return _EMPTY

    @staticmethod
    def number(value: float) -> "CellValue":
        value = float(value)
        if math.isnan(value):
            raise ValueError("NaN is not a representable cell value")
        if value == 0.0:
            value = 0.0  # collapse -0.0
        return CellValue(ValueKind.NUMBER, value)

    @staticmethod
    def text(value: str) -> "CellValue":
        return CellValue(ValueKind.TEXT, str(value))

    @staticmethod
    def boolean(value: bool) -> "CellValue":
        return CellValue(ValueKind.BOOLEAN, bool(value))

    @staticmethod
    def error(literal: str) -> "CellValue":
        if literal not in ERROR_LITERALS:
            raise ValueError(f"unknown error literal: {literal!r}")
        return CellValue(ValueKind.ERROR, literal)

    @property
    def is_number(self) -> bool:
        return self.kind is ValueKind.NUMBER

    def number_bits(self) -> str:
        """Big-endian IEEE-754 bit pattern as 16 lowercase hex digits."""
        if self.kind is not ValueKind.NUMBER:
            raise ValueError("not a number")
        return struct.pack(">d", self.data).hex()


_EMPTY = CellValue(ValueKind.EMPTY, None)


def number_from_bits(hex16: str) -> CellValue:
    """Build a Number from its 16-hex-digit bit pattern (inverse of number_bits)."""
    if len(hex16) != 16 or hex16 != hex16.lower():
        raise ValueError(f"expected 16 lowercase hex digits: {hex16!r}")
    (value,) = struct.unpack(">d", bytes.fromhex(hex16))
    return CellValue.number(value)


@dataclass(frozen=True)
class Cell:
    """Value plus optional verbatim formula text.

    Formula text keeps its leading "=" and is trimmed of surrounding
    whitespace; internals are never parsed or normalized.
    """

    value: CellValue
    formula: str | None = None

    def __post_init__(self) -> None:
        if self.formula is not None:
            object.__setattr__(self, "formula", self.formula.strip())
        if self.value.kind is ValueKind.EMPTY and self.formula is None:
            raise ValueError("empty cell without formula is not representable")


# Sparse sheet: (row, col) -> Cell
SheetCells = dict[tuple[int, int], Cell]


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


@dataclass(frozen=True)
class WorkbookSnapshot:
    """Immutable sparse grid of typed cells across named sheets."""

    sheets: dict[str, SheetCells] = field(default_factory=dict)

    def cell(self, address: CellAddress) -> Cell | None:
        sheet = self.sheets.get(address.sheet)
        if sheet is None:
            return None
        return sheet.get((address.row, address.col))

    def cell_count(self) -> int:
        return sum(len(cells) for cells in self.sheets.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WorkbookSnapshot):
            return NotImplemented
        return canonicalize(self) == canonicalize(other)

    def __hash__(self) -> int:
        return hash(canonicalize(self))


def _canonical_value(value: CellValue) -> str:
    if value.kind is ValueKind.EMPTY:
        return '{"t":"z"}'
    if value.kind is ValueKind.NUMBER:
        return '{"t":"n","b":"%s"}' % value.number_bits()
    if value.kind is ValueKind.TEXT:
        return '{"t":"s","v":%s}' % _json_str(value.data)
    if value.kind is ValueKind.BOOLEAN:
        return '{"t":"b","v":%s}' % ("true" if value.data else "false")
    return '{"t":"e","v":%s}' % _json_str(value.data)


def canonicalize_sheet(name: str, cells: SheetCells) -> bytes:
    """Canonical bytes of a single sheet: cells sorted by (row, col)."""
    parts = []
    for (row, col), cell in sorted(cells.items()):
        piece = '{"r":%d,"c":%d,"v":%s' % (row, col, _canonical_value(cell.value))
        if cell.formula is not None:
            piece += ',"f":%s' % _json_str(cell.formula)
        parts.append(piece + "}")
    return ('{"name":%s,"cells":[%s]}' % (_json_str(name), ",".join(parts))).encode("utf-8")


def canonicalize(snapshot: WorkbookSnapshot) -> bytes:
    """Deterministic UTF-8 bytes: sheets sorted by name, cells by (row, col)."""
    body = b",".join(
        canonicalize_sheet(name, snapshot.sheets[name])
        for name in sorted(snapshot.sheets)
    )
    return b'{"sheets":[' + body + b"]}"


@dataclass(frozen=True)
class SnapshotHash:
    """SHA-256 of canonical snapshot bytes, 64 lowercase hex chars."""

    hex: str

    def __post_init__(self) -> None:
        if len(self.hex) != 64 or any(c not in "0123456789abcdef" for c in self.hex):
            raise ValueError(f"not a 64-char lowercase hex digest: {self.hex!r}")

    def __str__(self) -> str:
        return self.hex


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def snapshot_hash(snapshot: WorkbookSnapshot) -> SnapshotHash:
    return SnapshotHash(sha256_hex(canonicalize(snapshot)))
