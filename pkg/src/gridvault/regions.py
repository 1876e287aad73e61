"""Rectangular sheet regions and their text form ("Sheet!A1:B2")."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MalformedAddress, MalformedRegion
from .model import CellAddress, format_a1, parse_a1


@dataclass(frozen=True)
class Rect:
    """Inclusive rectangle; top-left must not exceed bottom-right."""

    row1: int
    col1: int
    row2: int
    col2: int

    def __post_init__(self) -> None:
        if self.row1 < 1 or self.col1 < 1:
            raise MalformedRegion(f"rectangle starts before (1,1): {self}")
        if self.row2 < self.row1 or self.col2 < self.col1:
            raise MalformedRegion(f"top-left exceeds bottom-right: {self}")

    def contains(self, row: int, col: int) -> bool:
        return self.row1 <= row <= self.row2 and self.col1 <= col <= self.col2


@dataclass(frozen=True)
class SheetRegion:
    """A rectangle on a named sheet; sheet may be the wildcard "*"."""

    sheet: str
    rect: Rect

    def matches_sheet(self, sheet: str) -> bool:
        return self.sheet == "*" or self.sheet == sheet

    def contains(self, address: CellAddress) -> bool:
        return self.matches_sheet(address.sheet) and self.rect.contains(
            address.row, address.col
        )

    def __str__(self) -> str:
        a = format_a1(self.rect.col1, self.rect.row1)
        b = format_a1(self.rect.col2, self.rect.row2)
        return f"{self.sheet}!{a}:{b}"


def parse_region(text: str) -> SheetRegion:
    """Parse "Sheet!A1:B2" (or single-cell "Sheet!A1") into a SheetRegion."""
    if "!" not in text:
        raise MalformedRegion(f"region needs a sheet prefix: {text!r}")
    sheet, _, ref = text.rpartition("!")
    if not sheet:
        raise MalformedRegion(f"empty sheet name: {text!r}")
    first, _, second = ref.partition(":")
    try:
        col1, row1 = parse_a1(first)
        col2, row2 = parse_a1(second) if second else (col1, row1)
    except MalformedAddress as exc:
        raise MalformedRegion(str(exc)) from exc
    try:
        rect = Rect(row1=row1, col1=col1, row2=row2, col2=col2)
    except MalformedRegion:
        raise
    return SheetRegion(sheet=sheet, rect=rect)
