"""Parsers turning external spreadsheet bytes into WorkbookSnapshot.

Three input paths: the canonical JSON grammar (whitespace/key order
relaxed), RFC-4180 CSV per sheet, and a minimal SpreadsheetML (.xlsx)
subset that extracts cached values and formula text only.
"""

from __future__ import annotations

import io
import json
import re
import zipfile
from dataclasses import dataclass, field
from xml.etree import ElementTree

from .errors import ConstraintError, FormatError, UnsupportedFeature
from .model import (
    Cell,
    CellValue,
    ERROR_LITERALS,
    SheetCells,
    WorkbookSnapshot,
    number_from_bits,
    parse_a1,
)


@dataclass
class IngestReport:
    snapshot: WorkbookSnapshot
    source_format: str  # json | csv | ooxml
    cell_count: int
    warnings: list[str] = field(default_factory=list)


# --- canonical JSON -------------------------------------------------------

def _parse_value(obj, has_formula: bool) -> CellValue:
    if not isinstance(obj, dict) or "t" not in obj:
        raise FormatError(f"bad value object: {obj!r}")
    t = obj["t"]
    if t == "z":
        if not has_formula:
            raise ConstraintError("empty value without formula")
        return CellValue.empty()
    if t == "n":
        bits = obj.get("b")
        if not isinstance(bits, str):
            raise FormatError("number value needs hex bits in 'b'")
        try:
            return number_from_bits(bits)
        except ValueError as exc:
            raise ConstraintError(str(exc)) from exc
    if t == "s":
        if not isinstance(obj.get("v"), str):
            raise FormatError("string value needs 'v'")
        return CellValue.text(obj["v"])
    if t == "b":
        if not isinstance(obj.get("v"), bool):
            raise FormatError("boolean value needs true/false 'v'")
        return CellValue.boolean(obj["v"])
    if t == "e":
        literal = obj.get("v")
        if literal not in ERROR_LITERALS:
            raise ConstraintError(f"unknown error literal: {literal!r}")
        return CellValue.error(literal)
    raise FormatError(f"unknown value tag: {t!r}")


def sheet_from_json(sheet_obj) -> tuple[str, SheetCells]:
    """Parse one sheet object of the canonical grammar."""
    if not isinstance(sheet_obj, dict) or not isinstance(sheet_obj.get("name"), str):
        raise FormatError("sheet must be an object with a string 'name'")
    name = sheet_obj["name"]
    if not name:
        raise ConstraintError("sheet name must be non-empty")
    cells_arr = sheet_obj.get("cells")
    if not isinstance(cells_arr, list):
        raise FormatError("sheet needs a 'cells' array")
    cells: SheetCells = {}
    for cell_obj in cells_arr:
        if not isinstance(cell_obj, dict):
            raise FormatError("cell must be an object")
        row, col = cell_obj.get("r"), cell_obj.get("c")
        if not isinstance(row, int) or not isinstance(col, int) or row < 1 or col < 1:
            raise FormatError(f"cell needs integer r/c >= 1: {cell_obj!r}")
        if (row, col) in cells:
            raise ConstraintError(f"duplicate cell ({row},{col}) in sheet {name!r}")
        formula = cell_obj.get("f")
        if formula is not None and not isinstance(formula, str):
            raise FormatError("formula 'f' must be a string")
        value = _parse_value(cell_obj.get("v"), has_formula=formula is not None)
        cells[(row, col)] = Cell(value=value, formula=formula)
    return name, cells


def ingest_json(data: bytes) -> IngestReport:
    """Parse canonical-grammar JSON (whitespace and key order relaxed)."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not valid UTF-8 JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("sheets"), list):
        raise FormatError("top level must be an object with a 'sheets' array")

    sheets: dict[str, SheetCells] = {}
    for sheet_obj in doc["sheets"]:
        name, cells = sheet_from_json(sheet_obj)
        if name in sheets:
            raise ConstraintError(f"duplicate sheet name: {name!r}")
        sheets[name] = cells

    snapshot = WorkbookSnapshot(sheets=sheets)
    return IngestReport(snapshot, "json", snapshot.cell_count())


# --- CSV ------------------------------------------------------------------

# Canonical number: optional minus, no leading zeros (single 0 ok),
# optional fraction, optional exponent. "007" stays text.
_NUMBER_RE = re.compile(r"^-?(0|[1-9][0-9]*)(\.[0-9]+)?([eE][+-]?[0-9]+)?$")


def _csv_rows(text: str) -> list[list[str]]:
    """Minimal RFC-4180 reader that rejects unbalanced quotes."""
    rows: list[list[str]] = []
    row: list[str] = []
    buf: list[str] = []
    i, n = 0, len(text)
    in_quotes = False
    field_quoted = False

    def end_field() -> None:
        nonlocal field_quoted
        row.append("".join(buf))
        buf.clear()
        field_quoted = False

    def end_row() -> None:
        end_field()
        rows.append(list(row))
        row.clear()

    while i < n:
        ch = text[i]
        if in_quotes:
            if ch == '"':
                if i + 1 < n and text[i + 1] == '"':
                    buf.append('"')
                    i += 2
                    continue
                in_quotes = False
                i += 1
            else:
                buf.append(ch)
                i += 1
        else:
            if ch == '"':
                if buf or field_quoted:
                    raise FormatError(f"stray quote at offset {i}")
                in_quotes = True
                field_quoted = True
                i += 1
            elif ch == ",":
                end_field()
                i += 1
            elif ch in "\r\n":
                if ch == "\r" and i + 1 < n and text[i + 1] == "\n":
                    i += 1
                end_row()
                i += 1
            else:
                buf.append(ch)
                i += 1
    if in_quotes:
        raise FormatError("unterminated quoted field")
    if buf or row or field_quoted:
        end_row()
    return rows


def _csv_cell(field_text: str) -> CellValue:
    if _NUMBER_RE.match(field_text):
        return CellValue.number(float(field_text))
    if field_text == "TRUE":
        return CellValue.boolean(True)
    if field_text == "FALSE":
        return CellValue.boolean(False)
    if field_text in ERROR_LITERALS:
        return CellValue.error(field_text)
    return CellValue.text(field_text)


def ingest_csv(sheet_name: str, data: bytes) -> SheetCells:
    """Parse one CSV sheet; empty fields produce no cell (sparse model)."""
    if not sheet_name:
        raise ConstraintError("sheet_name must be non-empty")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"CSV is not UTF-8: {exc}") from exc
    cells: SheetCells = {}
    for r, fields in enumerate(_csv_rows(text), start=1):
        for c, field_text in enumerate(fields, start=1):
            if field_text == "":
                continue
            cells[(r, c)] = Cell(value=_csv_cell(field_text))
    return cells


# --- OOXML (.xlsx) --------------------------------------------------------

_NS = {
    "m": "http://schemas.openxmlformats.org/spreadsheetml/2006/main",
    "r": "http://schemas.openxmlformats.org/officeDocument/2006/relationships",
    "rel": "http://schemas.openxmlformats.org/package/2006/relationships",
}

_OLE_MAGIC = b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1"


def _shared_strings(zf: zipfile.ZipFile) -> list[str]:
    try:
        data = zf.read("xl/sharedStrings.xml")
    except KeyError:
        return []
    root = ElementTree.fromstring(data)
    strings = []
    for si in root.findall("m:si", _NS):
        # Concatenate all text runs (plain <t> or rich-text <r><t>).
        strings.append("".join(t.text or "" for t in si.iter(f"{{{_NS['m']}}}t")))
    return strings


def _sheet_targets(zf: zipfile.ZipFile) -> list[tuple[str, str]]:
    """Ordered (sheet name, zip path) pairs from the workbook part."""
    try:
        workbook = ElementTree.fromstring(zf.read("xl/workbook.xml"))
        rels = ElementTree.fromstring(zf.read("xl/_rels/workbook.xml.rels"))
    except KeyError as exc:
        raise FormatError(f"missing workbook part: {exc}") from exc
    rel_targets = {
        rel.get("Id"): rel.get("Target")
        for rel in rels.findall("rel:Relationship", _NS)
    }
    out = []
    for sheet in workbook.findall("m:sheets/m:sheet", _NS):
        rid = sheet.get(f"{{{_NS['r']}}}id")
        target = rel_targets.get(rid)
        if target is None:
            raise FormatError(f"sheet {sheet.get('name')!r} has no relationship target")
        if not target.startswith("/"):
            target = "xl/" + target
        else:
            target = target.lstrip("/")
        out.append((sheet.get("name") or "", target))
    return out


def _ooxml_cell(c_el, shared: list[str], warnings: list[str]) -> Cell | None:
    ctype = c_el.get("t", "n")
    v_el = c_el.find("m:v", _NS)
    f_el = c_el.find("m:f", _NS)
    formula = None
    if f_el is not None:
        formula_body = (f_el.text or "").strip()
        formula = "=" + formula_body if not formula_body.startswith("=") else formula_body

    raw = v_el.text if v_el is not None and v_el.text is not None else None
    if ctype == "s":
        if raw is None:
            value = CellValue.empty() if formula else None
        else:
            idx = int(raw)
            if idx >= len(shared):
                raise FormatError(f"shared string index out of range: {idx}")
            value = CellValue.text(shared[idx])
    elif ctype in ("str", "inlineStr"):
        if ctype == "inlineStr":
            is_el = c_el.find("m:is", _NS)
            text = "".join(t.text or "" for t in is_el.iter(f"{{{_NS['m']}}}t")) if is_el is not None else ""
            value = CellValue.text(text)
        else:
            value = CellValue.text(raw or "")
    elif ctype == "b":
        value = CellValue.boolean(raw == "1") if raw is not None else None
    elif ctype == "e":
        if raw in ERROR_LITERALS:
            value = CellValue.error(raw)
        else:
            warnings.append(f"unknown error literal {raw!r} kept as text")
            value = CellValue.text(raw or "")
    else:  # "n" or absent
        if raw is None:
            value = CellValue.empty() if formula else None
        else:
            try:
                value = CellValue.number(float(raw))
            except ValueError:
                warnings.append(f"unparseable number {raw!r} kept as text")
                value = CellValue.text(raw)

    if value is None and formula is None:
        return None
    return Cell(value=value if value is not None else CellValue.empty(), formula=formula)


def ingest_ooxml(data: bytes) -> IngestReport:
    """Extract cached values and formula text from a minimal .xlsx package.

    Styles, date formats, merged ranges and defined names are ignored with
    warnings; encrypted (OLE-wrapped) packages raise UnsupportedFeature.
    """
    if data[:8] == _OLE_MAGIC:
        raise UnsupportedFeature("encrypted or legacy binary package")
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise FormatError(f"not a ZIP package: {exc}") from exc

    warnings: list[str] = []
    with zf:
        names = set(zf.namelist())
        if "xl/workbook.xml" not in names:
            raise FormatError("missing xl/workbook.xml part")
        shared = _shared_strings(zf)
        sheets: dict[str, SheetCells] = {}
        for sheet_name, target in _sheet_targets(zf):
            try:
                root = ElementTree.fromstring(zf.read(target))
            except KeyError as exc:
                raise FormatError(f"missing sheet part {target!r}") from exc
            if root.find("m:mergeCells", _NS) is not None:
                warnings.append(f"sheet {sheet_name!r}: merged ranges ignored")
            cells: SheetCells = {}
            for c_el in root.findall("m:sheetData/m:row/m:c", _NS):
                ref = c_el.get("r")
                if ref is None:
                    warnings.append(f"sheet {sheet_name!r}: cell without reference skipped")
                    continue
                col, row = parse_a1(ref)
                cell = _ooxml_cell(c_el, shared, warnings)
                if cell is not None:
                    cells[(row, col)] = cell
            sheets[sheet_name] = cells

    snapshot = WorkbookSnapshot(sheets=sheets)
    return IngestReport(snapshot, "ooxml", snapshot.cell_count(), warnings)


_ZIP_MAGIC = b"PK\x03\x04"


def ingest_auto(data: bytes) -> IngestReport:
    """Dispatch on leading bytes: ZIP signature means OOXML, else JSON."""
    if data[:4] == _ZIP_MAGIC or data[:8] == _OLE_MAGIC:
        return ingest_ooxml(data)
    return ingest_json(data)
